"""Deterministic synthetic jobs corpus.

The default profile produces 5,031 records spanning one month, with
per-state creation-to-start delays whose sample means are forced onto
the profile's calibration targets (a multiplicative scaling pass plus a
one-microsecond residual fix), and error-level log entries concentrated
on a single hot workflow. Generation is a pure function of
(seed, profile).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from decimal import Decimal
from typing import Mapping

from .schema import JOB_STATES, JobRecord, parse_timestamp


class InvalidProfile(ValueError):
    """A GenerationProfile that cannot produce a corpus."""


_DEFAULT_STATE_WEIGHTS = {
    "COMPLETED": 0.58,
    "RUNNING": 0.10,
    "UNSCHEDULED": 0.10,
    "IN_ERROR": 0.09,
    "CANCELLED": 0.07,
    "PAUSED": 0.06,
}

_DEFAULT_STARTED_FRACTION = {
    "COMPLETED": 1.0,
    "RUNNING": 1.0,
    "IN_ERROR": 0.9,
    "CANCELLED": 0.7,
    "PAUSED": 0.6,
    "UNSCHEDULED": 0.25,
}

# Calibration targets for the mean creation-to-start delay, in seconds.
_DEFAULT_DELAY_MEANS = {
    "COMPLETED": Decimal("8693.34"),
    "UNSCHEDULED": Decimal("5991.09"),
    "CANCELLED": Decimal("3398.24"),
    "RUNNING": Decimal("3486.02"),
    "IN_ERROR": Decimal("41.50"),
    "PAUSED": Decimal("33.13"),
}

_DEFAULT_WORKFLOWS = (
    "wf-compound-screening",  # hot: carries the error mass
    "wf-assay-execution",
    "wf-sample-prep",
    "wf-plate-handling",
    "wf-data-export",
    "wf-qc-review",
    "wf-reagent-restock",
    "wf-centrifuge-cycle",
    "wf-incubation-watch",
)

_TASK_WORDS = {
    "wf-compound-screening": "compound-screen",
    "wf-assay-execution": "assay-run",
    "wf-sample-prep": "sample-prep",
    "wf-plate-handling": "plate-move",
    "wf-data-export": "data-export",
    "wf-qc-review": "qc-review",
    "wf-reagent-restock": "reagent-restock",
    "wf-centrifuge-cycle": "centrifuge-cycle",
    "wf-incubation-watch": "incubation-watch",
}

_ERROR_MESSAGES = (
    "Liquid handler arm collision detected",
    "Incubator temperature out of range",
    "Barcode scan mismatch on plate transfer",
    "Plate seal integrity check failed",
    "Robot gripper timeout while loading carousel",
    "Assay read variance above threshold",
)

_INFO_MESSAGES = (
    "Job queued for execution",
    "Protocol loaded from library",
    "Operator acknowledged start",
    "Consumables verified",
)

_EVENT_TYPES = ("ACTION_STARTED", "ACTION_COMPLETED", "INSTRUMENT_RUN", "PLATE_TRANSFER")


@dataclass(frozen=True)
class GenerationProfile:
    """Knobs for the synthetic corpus; the defaults are the bundled dataset."""

    record_count: int = 5031
    month_start: str = "2025-01-01T00:00:00+00:00"
    span_days: int = 31
    state_weights: Mapping[str, float] = field(default_factory=lambda: dict(_DEFAULT_STATE_WEIGHTS))
    started_fraction: Mapping[str, float] = field(
        default_factory=lambda: dict(_DEFAULT_STARTED_FRACTION)
    )
    delay_mean_seconds: Mapping[str, Decimal] = field(
        default_factory=lambda: dict(_DEFAULT_DELAY_MEANS)
    )
    workflows: tuple[str, ...] = _DEFAULT_WORKFLOWS
    hot_workflow_share: float = 0.35
    labs: tuple[str, ...] = ("lab-alpha", "lab-beta", "lab-gamma")
    hot_error_entries: int = 43377
    cold_error_entries_min: int = 10
    cold_error_entries_max: int = 250
    duration_log_mu: float = 7.5
    duration_log_sigma: float = 1.6

    def validate(self) -> None:
        if self.record_count <= 0:
            raise InvalidProfile("record_count must be positive")
        if self.span_days <= 0:
            raise InvalidProfile("span_days must be positive")
        if not self.workflows or not self.labs:
            raise InvalidProfile("workflows and labs must be non-empty")
        if not 0 < self.hot_workflow_share < 1:
            raise InvalidProfile("hot_workflow_share must be in (0, 1)")
        if self.hot_error_entries < 0 or self.cold_error_entries_min < 0:
            raise InvalidProfile("error entry counts must be non-negative")
        if self.cold_error_entries_max < self.cold_error_entries_min:
            raise InvalidProfile("cold error entry range is inverted")
        for name, table in (
            ("state_weights", self.state_weights),
            ("started_fraction", self.started_fraction),
            ("delay_mean_seconds", self.delay_mean_seconds),
        ):
            for state, value in table.items():
                if state not in JOB_STATES:
                    raise InvalidProfile(f"{name} has unknown state {state!r}")
                if Decimal(str(value)) < 0:
                    raise InvalidProfile(f"{name}[{state}] must be non-negative")
        if sum(float(w) for w in self.state_weights.values()) <= 0:
            raise InvalidProfile("state_weights must sum to a positive value")

    def with_record_count(self, count: int) -> "GenerationProfile":
        """Resize the corpus, scaling the hot error mass proportionally."""
        if count <= 0:
            raise InvalidProfile("record_count must be positive")
        factor = count / self.record_count
        return replace(
            self,
            record_count=count,
            hot_error_entries=max(1, round(self.hot_error_entries * factor)),
        )

    def to_dict(self) -> dict:
        return {
            "record_count": self.record_count,
            "month_start": self.month_start,
            "span_days": self.span_days,
            "state_weights": dict(self.state_weights),
            "started_fraction": dict(self.started_fraction),
            "delay_mean_seconds": {k: str(v) for k, v in self.delay_mean_seconds.items()},
            "workflows": list(self.workflows),
            "hot_workflow_share": self.hot_workflow_share,
            "labs": list(self.labs),
            "hot_error_entries": self.hot_error_entries,
            "cold_error_entries_min": self.cold_error_entries_min,
            "cold_error_entries_max": self.cold_error_entries_max,
            "duration_log_mu": self.duration_log_mu,
            "duration_log_sigma": self.duration_log_sigma,
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> "GenerationProfile":
        base = cls()
        kwargs: dict = {}
        for key in base.to_dict():
            if key not in payload:
                continue
            value = payload[key]
            if key == "delay_mean_seconds":
                value = {k: Decimal(str(v)) for k, v in value.items()}
            elif key in ("workflows", "labs"):
                value = tuple(value)
            kwargs[key] = value
        profile = replace(base, **kwargs)
        profile.validate()
        return profile


def default_profile() -> GenerationProfile:
    return GenerationProfile()


def generate_synthetic(seed: int, profile: GenerationProfile | None = None) -> list[JobRecord]:
    """Build the corpus for (seed, profile); identical inputs give identical output."""
    profile = profile or default_profile()
    profile.validate()
    rng = random.Random(seed)
    n = profile.record_count

    start = parse_timestamp(profile.month_start).astimezone(timezone.utc)
    span_us = profile.span_days * 86_400 * 1_000_000
    created_us = sorted(rng.randrange(span_us) for _ in range(n))

    states = _apportion_states(profile, n, rng)
    workflows = _assign_workflows(profile, n, rng)
    labs = [profile.labs[rng.randrange(len(profile.labs))] for _ in range(n)]

    delays_us = _calibrated_delays(profile, states, rng)

    records: list[JobRecord] = []
    jobs_by_workflow: dict[str, list[int]] = {wf: [] for wf in profile.workflows}
    for i in range(n):
        created = start + timedelta(microseconds=created_us[i])
        started = None
        completed = None
        execution_records = None
        delay = delays_us[i]
        if delay is not None:
            started = created + timedelta(microseconds=delay)
            if states[i] == "COMPLETED":
                duration_s = rng.lognormvariate(profile.duration_log_mu, profile.duration_log_sigma)
                completed = started + timedelta(microseconds=max(1, round(duration_s * 1e6)))
            if rng.random() < 0.8:
                execution_records = _make_execution_records(rng, started)
        workflow = workflows[i]
        jobs_by_workflow[workflow].append(i)
        records.append(
            JobRecord(
                id=f"job-{i + 1:05d}",
                name=f"{_TASK_WORDS.get(workflow, 'task')}-{i + 1:05d}",
                lab_id=labs[i],
                workflow_id=workflow,
                state=states[i],
                created_timestamp=created,
                started_timestamp=started,
                completed_timestamp=completed,
                root_action_id=f"action-{rng.randrange(10_000):04d}" if rng.random() < 0.5 else None,
                lab_reference=f"ref-{rng.randrange(100_000):05d}" if rng.random() < 0.3 else None,
                associated_ids=_maybe_id_list(rng, "assoc"),
                parameters=_maybe_parameters(rng),
                outputs={"result": "ok", "artifact_count": rng.randrange(1, 6)}
                if rng.random() < 0.4
                else None,
                barcodes=_maybe_id_list(rng, "bc"),
                batched_job_ids=None,
                children_job_ids=_maybe_id_list(rng, "job"),
                execution_records=execution_records,
                files=None,
                notes=None,
                configuration_versions={"protocol": f"v{rng.randrange(1, 9)}.{rng.randrange(0, 10)}"}
                if rng.random() < 0.3
                else None,
            )
        )

    logs = _build_logs(profile, records, jobs_by_workflow, rng)
    return [
        replace(record, logs=logs[i]) if logs[i] is not None else record
        for i, record in enumerate(records)
    ]


def _apportion_states(profile: GenerationProfile, n: int, rng: random.Random) -> list[str]:
    """Largest-remainder apportionment of n records over the state weights."""
    items = sorted(profile.state_weights.items())
    total = sum(w for _, w in items)
    shares = [(state, n * w / total) for state, w in items]
    counts = {state: int(share) for state, share in shares}
    remainder = n - sum(counts.values())
    for state, _ in sorted(shares, key=lambda p: (-(p[1] - int(p[1])), p[0]))[:remainder]:
        counts[state] += 1
    pool: list[str] = []
    for state, _ in items:
        pool.extend([state] * counts[state])
    rng.shuffle(pool)
    return pool


def _assign_workflows(profile: GenerationProfile, n: int, rng: random.Random) -> list[str]:
    hot = profile.workflows[0]
    cold = profile.workflows[1:]
    out = []
    for _ in range(n):
        if not cold or rng.random() < profile.hot_workflow_share:
            out.append(hot)
        else:
            out.append(cold[rng.randrange(len(cold))])
    return out


def _calibrated_delays(
    profile: GenerationProfile, states: list[str], rng: random.Random
) -> list[int | None]:
    """Per-record creation-to-start delay in microseconds (None = never started).

    Draws exponential delays per state, rescales them so the sample mean
    lands exactly on the profile target, then repairs the rounding
    residual on the largest sample.
    """
    delays: list[int | None] = [None] * len(states)
    by_state: dict[str, list[int]] = {}
    for i, state in enumerate(states):
        by_state.setdefault(state, []).append(i)

    for state in sorted(by_state):
        indices = by_state[state]
        fraction = float(profile.started_fraction.get(state, 1.0))
        n_started = round(len(indices) * fraction)
        if fraction > 0:
            n_started = max(n_started, 1)
        n_started = min(n_started, len(indices))
        if n_started == 0:
            continue
        chosen = sorted(rng.sample(indices, n_started))
        mean = profile.delay_mean_seconds.get(state, Decimal("60"))
        raw = [rng.expovariate(1.0) * float(mean) for _ in chosen]
        target_sum_us = int(mean * 1_000_000) * n_started
        raw_sum = sum(raw)
        if raw_sum <= 0:
            scaled = [target_sum_us // n_started] * n_started
        else:
            factor = target_sum_us / (raw_sum * 1e6)
            scaled = [round(r * 1e6 * factor) for r in raw]
        residual = target_sum_us - sum(scaled)
        top = max(range(n_started), key=lambda j: scaled[j])
        scaled[top] = max(0, scaled[top] + residual)
        for j, i in enumerate(chosen):
            delays[i] = scaled[j]
    return delays


def _make_execution_records(rng: random.Random, started: datetime) -> list[dict]:
    entries = []
    cursor = started
    for _ in range(rng.randrange(1, 4)):
        step_s = rng.uniform(5, 600)
        finished = cursor + timedelta(microseconds=round(step_s * 1e6))
        entries.append(
            {
                "event_type": _EVENT_TYPES[rng.randrange(len(_EVENT_TYPES))],
                "name": f"step-{rng.randrange(100):02d}",
                "started_timestamp": cursor.isoformat(),
                "finished_timestamp": finished.isoformat(),
            }
        )
        cursor = finished
    return entries


def _maybe_id_list(rng: random.Random, prefix: str) -> list | None:
    if rng.random() < 0.25:
        return [f"{prefix}-{rng.randrange(100_000):05d}" for _ in range(rng.randrange(1, 4))]
    return None


def _maybe_parameters(rng: random.Random) -> dict | None:
    if rng.random() < 0.5:
        return {
            "protocol": f"protocol-{rng.randrange(1, 40):02d}",
            "priority": rng.randrange(1, 6),
            "volume_ul": str(rng.randrange(10, 500)),
        }
    return None


def _build_logs(
    profile: GenerationProfile,
    records: list[JobRecord],
    jobs_by_workflow: dict[str, list[int]],
    rng: random.Random,
) -> list[list[dict] | None]:
    error_counts = [0] * len(records)

    hot = profile.workflows[0]
    hot_jobs = jobs_by_workflow.get(hot, [])
    if hot_jobs and profile.hot_error_entries > 0:
        base, extra = divmod(profile.hot_error_entries, len(hot_jobs))
        for rank, i in enumerate(hot_jobs):
            error_counts[i] = base + (1 if rank < extra else 0)

    for workflow in profile.workflows[1:]:
        jobs = jobs_by_workflow.get(workflow, [])
        if not jobs:
            continue
        quota = rng.randint(profile.cold_error_entries_min, profile.cold_error_entries_max)
        order = list(jobs)
        rng.shuffle(order)
        for k in range(quota):
            error_counts[order[k % len(order)]] += 1

    logs: list[list[dict] | None] = [None] * len(records)
    for i, record in enumerate(records):
        entries = []
        cursor = record.created_timestamp
        for _ in range(error_counts[i]):
            cursor = cursor + timedelta(microseconds=rng.randrange(1_000, 60_000_000))
            entries.append(
                {
                    "level": "error",
                    "message": _ERROR_MESSAGES[rng.randrange(len(_ERROR_MESSAGES))],
                    "created_timestamp": cursor.isoformat(),
                }
            )
        if rng.random() < 0.25:
            info_cursor = record.created_timestamp + timedelta(
                microseconds=rng.randrange(1_000, 10_000_000)
            )
            entries.append(
                {
                    "level": "info" if rng.random() < 0.8 else "warning",
                    "message": _INFO_MESSAGES[rng.randrange(len(_INFO_MESSAGES))],
                    "created_timestamp": info_cursor.isoformat(),
                }
            )
        if entries:
            logs[i] = entries
    return logs
