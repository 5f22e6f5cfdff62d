"""Declarative chart specs and their deterministic renderers.

A ChartSpec is produced rule-based from a ResultSet (no generated code is
ever executed): categorical first column means a bar chart, a date-text
first column means a line chart, dates plus two numeric columns mean a
dual-axis chart, and anything unplottable falls back to a placeholder.
SVG output is byte-identical across runs; PNG (via matplotlib) is an
optional alternative without that guarantee.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from decimal import Decimal
from pathlib import Path
from typing import Union

from ..schema import ColumnKind, ResultSet

PLACEHOLDER_MESSAGE = "Data Unavailable"
MAX_BAR_CATEGORIES = 10

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_PALETTE = ("#4e79a7", "#e15759")


@dataclass(frozen=True)
class ChartSpec:
    kind: str  # bar | line | dual_axis | placeholder
    title: str
    x_label: str = ""
    y_label: str = ""
    categories_or_dates: tuple[str, ...] = ()
    series: tuple[tuple[str, tuple[Decimal, ...]], ...] = ()
    filename: str = ""
    message: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("bar", "line", "dual_axis", "placeholder"):
            raise ValueError(f"unknown chart kind {self.kind!r}")
        for name, values in self.series:
            if len(values) != len(self.categories_or_dates):
                raise ValueError(f"series {name!r} length differs from the category axis")
            if any(v is None for v in values):
                raise ValueError(f"series {name!r} contains nulls; replace them upstream")
        if self.kind == "bar" and len(self.categories_or_dates) > MAX_BAR_CATEGORIES:
            raise ValueError("bar charts are capped at 10 categories")
        if self.kind == "dual_axis" and len(self.series) != 2:
            raise ValueError("dual-axis charts need exactly two series")

    def with_filename(self, filename: str) -> "ChartSpec":
        return replace(self, filename=filename)


def format_number(value: Decimal) -> str:
    """Plain decimal text: integers without a point, no trailing zeros."""
    text = format(value, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text or "0"


def _placeholder(title: str, filename: str, message: str = PLACEHOLDER_MESSAGE) -> ChartSpec:
    return ChartSpec(kind="placeholder", title=title, filename=filename, message=message)


def spec_from_result(question: str, result: ResultSet, filename: str = "") -> ChartSpec:
    """Map a 2-3 column result onto a chart; placeholder is the total fallback."""
    title = question.strip()
    columns = result.columns
    if not 2 <= len(columns) <= 3 or not result.rows:
        return _placeholder(title, filename)

    numeric_idx = [i for i in range(1, len(columns)) if columns[i].kind == ColumnKind.NUMBER]
    if not numeric_idx:
        return _placeholder(title, filename)

    axis = [row[0] for row in result.rows]
    categories = tuple("(null)" if v is None else str(v) for v in axis)
    is_dates = all(v is None or _DATE_RE.match(str(v)) for v in axis) and any(
        v is not None for v in axis
    )

    series = tuple(
        (
            columns[i].name,
            tuple(Decimal(0) if row[i] is None else Decimal(row[i]) for row in result.rows),
        )
        for i in numeric_idx
    )

    if is_dates and len(series) == 2:
        kind = "dual_axis"
    elif is_dates:
        kind = "line"
    else:
        kind = "bar"
        order = sorted(
            range(len(categories)), key=lambda i: (-series[0][1][i], i)
        )[:MAX_BAR_CATEGORIES]
        categories = tuple(categories[i] for i in order)
        series = tuple((name, tuple(values[i] for i in order)) for name, values in series)

    return ChartSpec(
        kind=kind,
        title=title,
        x_label=columns[0].name,
        y_label=series[0][0],
        categories_or_dates=categories,
        series=series,
        filename=filename,
    )


def render_chart(spec: ChartSpec, path: Union[str, Path]) -> Path:
    """Write the chart to *path*; the extension picks SVG or PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix.lower() == ".png":
        _render_png(spec, path)
    else:
        path.write_text(render_svg(spec), encoding="utf-8")
    return path


# -- SVG ---------------------------------------------------------------------

_W, _H = 760, 460
_LEFT, _RIGHT, _TOP, _BOTTOM = 80, 80, 56, 110


def _esc(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
    )


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _nice_ticks(low: float, high: float, count: int = 5) -> list[Decimal]:
    """Round ticks from at-or-below *low* to at-or-above *high*."""
    if high <= low:
        high = low + 1
    raw_step = (high - low) / max(1, count - 1)
    magnitude = Decimal(10) ** Decimal(len(str(int(abs(raw_step)))) - 1 if raw_step >= 1 else -1)
    step = magnitude * 10
    for mult in (1, 2, 5, 10):
        candidate = magnitude * mult
        if candidate >= Decimal(str(raw_step)):
            step = candidate
            break
    start = (Decimal(str(low)) / step).to_integral_value(rounding="ROUND_FLOOR") * step
    ticks = [start]
    while float(ticks[-1]) < high - 1e-9 and len(ticks) < 50:
        ticks.append(ticks[-1] + step)
    return ticks


def _tick_bounds(values: list[float]) -> tuple[list[Decimal], float, float]:
    low = min(0.0, min(values))
    high = max(0.0, max(values))
    ticks = _nice_ticks(low, high)
    return ticks, float(ticks[0]), float(ticks[-1])


def render_svg(spec: ChartSpec) -> str:
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.0f}" y="28" text-anchor="middle" font-size="15" '
        f'font-family="sans-serif">{_esc(_shorten(spec.title, 88))}</text>',
    ]
    if spec.kind == "placeholder":
        lines.append(
            f'<text x="{_W / 2:.0f}" y="{_H / 2:.0f}" text-anchor="middle" font-size="18" '
            f'fill="#666" font-family="sans-serif">{_esc(spec.message or PLACEHOLDER_MESSAGE)}</text>'
        )
        lines.append("</svg>")
        return "\n".join(lines) + "\n"

    plot_w = _W - _LEFT - _RIGHT
    plot_h = _H - _TOP - _BOTTOM

    if spec.kind == "dual_axis":
        for s, side in enumerate(("left", "right")):
            series_vals = [float(v) for v in spec.series[s][1]]
            ticks, lo, hi = _tick_bounds(series_vals)
            lines.extend(_axis_and_grid(ticks, lo, hi, side=side))
            lines.append(_polyline(series_vals, lo, hi, plot_w, plot_h, _PALETTE[s]))
    else:
        values = [float(v) for _, vs in spec.series for v in vs]
        ticks, lo, hi = _tick_bounds(values)
        for tick in ticks:
            y = _TOP + plot_h - (float(tick) - lo) / (hi - lo or 1) * plot_h
            lines.append(
                f'<line x1="{_LEFT}" y1="{_fmt(y)}" x2="{_W - _RIGHT}" y2="{_fmt(y)}" '
                f'stroke="#ddd" stroke-width="1"/>'
            )
            lines.append(
                f'<text x="{_LEFT - 8}" y="{_fmt(y + 4)}" text-anchor="end" font-size="10" '
                f'font-family="sans-serif">{_esc(format_number(tick))}</text>'
            )
        if spec.kind == "bar":
            lines.extend(_bars(spec, lo, hi, plot_w, plot_h))
        else:
            for s, (name, vs) in enumerate(spec.series):
                lines.append(
                    _polyline([float(v) for v in vs], lo, hi, plot_w, plot_h, _PALETTE[s % 2])
                )
    lines.extend(_x_labels(spec, plot_w))
    lines.extend(_frame_and_titles(spec))
    if len(spec.series) > 1:
        lines.extend(_legend(spec))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _shorten(text: str, limit: int) -> str:
    return text if len(text) <= limit else text[: limit - 1] + "…"


def _x_positions(n: int, plot_w: float) -> list[float]:
    slot = plot_w / max(1, n)
    return [_LEFT + slot * (i + 0.5) for i in range(n)]


def _bars(spec: ChartSpec, lo: float, hi: float, plot_w: float, plot_h: float) -> list[str]:
    out = []
    n = len(spec.categories_or_dates)
    slot = plot_w / max(1, n)
    n_series = len(spec.series)
    bar_w = slot * 0.7 / n_series
    baseline_y = _TOP + plot_h - (0 - lo) / (hi - lo or 1) * plot_h
    for s, (name, vs) in enumerate(spec.series):
        for i, v in enumerate(vs):
            x = _LEFT + slot * i + slot * 0.15 + s * bar_w
            y_val = _TOP + plot_h - (float(v) - lo) / (hi - lo or 1) * plot_h
            top = min(y_val, baseline_y)
            height = abs(baseline_y - y_val)
            out.append(
                f'<rect x="{_fmt(x)}" y="{_fmt(top)}" width="{_fmt(bar_w)}" '
                f'height="{_fmt(height)}" fill="{_PALETTE[s % 2]}"/>'
            )
    return out


def _polyline(values: list[float], lo: float, hi: float, plot_w: float, plot_h: float, color: str) -> str:
    xs = _x_positions(len(values), plot_w)
    points = []
    for x, v in zip(xs, values):
        y = _TOP + plot_h - (v - lo) / (hi - lo or 1) * plot_h
        points.append(f"{_fmt(x)},{_fmt(y)}")
    return (
        f'<polyline points="{" ".join(points)}" fill="none" stroke="{color}" stroke-width="2"/>'
    )


def _axis_and_grid(ticks: list[Decimal], lo: float, hi: float, side: str) -> list[str]:
    plot_h = _H - _TOP - _BOTTOM
    out = []
    x = _LEFT - 8 if side == "left" else _W - _RIGHT + 8
    anchor = "end" if side == "left" else "start"
    color = _PALETTE[0] if side == "left" else _PALETTE[1]
    for tick in ticks:
        y = _TOP + plot_h - (float(tick) - lo) / (hi - lo or 1) * plot_h
        if side == "left":
            out.append(
                f'<line x1="{_LEFT}" y1="{_fmt(y)}" x2="{_W - _RIGHT}" y2="{_fmt(y)}" '
                f'stroke="#eee" stroke-width="1"/>'
            )
        out.append(
            f'<text x="{x}" y="{_fmt(y + 4)}" text-anchor="{anchor}" font-size="10" '
            f'fill="{color}" font-family="sans-serif">{_esc(format_number(tick))}</text>'
        )
    return out


def _x_labels(spec: ChartSpec, plot_w: float) -> list[str]:
    out = []
    y = _H - _BOTTOM + 16
    for x, label in zip(_x_positions(len(spec.categories_or_dates), plot_w), spec.categories_or_dates):
        out.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" text-anchor="end" font-size="10" '
            f'font-family="sans-serif" transform="rotate(-40 {_fmt(x)} {_fmt(y)})">'
            f"{_esc(_shorten(label, 24))}</text>"
        )
    return out


def _frame_and_titles(spec: ChartSpec) -> list[str]:
    out = [
        f'<rect x="{_LEFT}" y="{_TOP}" width="{_W - _LEFT - _RIGHT}" '
        f'height="{_H - _TOP - _BOTTOM}" fill="none" stroke="#999" stroke-width="1"/>',
        f'<text x="{_W / 2:.0f}" y="{_H - 14}" text-anchor="middle" font-size="12" '
        f'font-family="sans-serif">{_esc(spec.x_label)}</text>',
    ]
    if spec.kind != "dual_axis":
        out.append(
            f'<text x="20" y="{_H / 2:.0f}" text-anchor="middle" font-size="12" '
            f'font-family="sans-serif" transform="rotate(-90 20 {_H / 2:.0f})">'
            f"{_esc(spec.y_label)}</text>"
        )
    return out


def _legend(spec: ChartSpec) -> list[str]:
    out = []
    x = _W - _RIGHT - 170
    y = _TOP + 14
    for s, (name, _) in enumerate(spec.series):
        out.append(
            f'<rect x="{x}" y="{y + s * 16 - 9}" width="10" height="10" fill="{_PALETTE[s % 2]}"/>'
        )
        out.append(
            f'<text x="{x + 14}" y="{y + s * 16}" font-size="10" '
            f'font-family="sans-serif">{_esc(_shorten(name, 26))}</text>'
        )
    return out


# -- PNG (optional path) -------------------------------------------------------


def _render_png(spec: ChartSpec, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if spec.kind == "placeholder":
        fig = plt.figure(figsize=(8, 6))
        plt.text(0.5, 0.5, spec.message or PLACEHOLDER_MESSAGE, ha="center", va="center", fontsize=12)
        plt.title(spec.title)
        plt.axis("off")
    elif spec.kind == "dual_axis":
        fig, ax1 = plt.subplots(figsize=(10, 6))
        xs = list(spec.categories_or_dates)
        ax1.plot(xs, [float(v) for v in spec.series[0][1]], color=_PALETTE[0])
        ax1.set_ylabel(spec.series[0][0], color=_PALETTE[0])
        ax2 = ax1.twinx()
        ax2.plot(xs, [float(v) for v in spec.series[1][1]], color=_PALETTE[1])
        ax2.set_ylabel(spec.series[1][0], color=_PALETTE[1])
        ax1.set_xlabel(spec.x_label)
        plt.title(spec.title)
        ax1.grid(True)
        plt.setp(ax1.get_xticklabels(), rotation=45, ha="right")
    else:
        fig = plt.figure(figsize=(10, 6))
        xs = list(spec.categories_or_dates)
        for s, (name, vs) in enumerate(spec.series):
            ys = [float(v) for v in vs]
            if spec.kind == "bar":
                offset = (s - (len(spec.series) - 1) / 2) * 0.4
                plt.bar([i + offset for i in range(len(xs))], ys, width=0.4, label=name,
                        color=_PALETTE[s % 2])
            else:
                plt.plot(xs, ys, label=name, color=_PALETTE[s % 2])
        if spec.kind == "bar":
            plt.xticks(range(len(xs)), xs)
        plt.title(spec.title)
        plt.xlabel(spec.x_label)
        plt.ylabel(spec.y_label)
        plt.grid(True, axis="y")
        plt.xticks(rotation=45)
        if len(spec.series) > 1:
            plt.legend()
    plt.tight_layout()
    fig.savefig(path)
    plt.close(fig)
