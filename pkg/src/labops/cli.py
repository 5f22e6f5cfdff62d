"""Command-line entry point.

Subcommands: run (the full pipeline), generate-data (synthetic corpus),
lint-sql (deterministic validation of SQL on stdin), replay-record (a
live run that also captures a replay file). Option precedence is CLI
flags over environment variables over the optional JSON config file.

Exit codes: 0 success, 1 fatal error, 2 run finished but every question
failed, 3 lint rejected the query.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import IO, Optional

from .dataset import DatasetError, dump_dataset
from .llm.backends import API_KEY_ENV_VAR, LiveBackend, RecordingBackend, ReplayBackend
from .llm.config import default_role_configs, with_endpoint
from .llm.gateway import Gateway
from .pipeline.runner import PipelineFatalError, run_pipeline
from .pipeline.state import SUCCEEDED, PipelineConfig
from .sql import ParseError, ValidationReport, lint, parse
from .schema import JOBS_SCHEMA
from .synth import GenerationProfile, InvalidProfile, default_profile, generate_synthetic

_ENV_PREFIX = "LABOPS_"


def _redact(text: str) -> str:
    key = os.environ.get(API_KEY_ENV_VAR)
    if key:
        text = text.replace(key, "***")
    return text


def _fail(message: str, code: int = 1) -> int:
    print(_redact(f"error: {message}"), file=sys.stderr)
    return code


class _Settings:
    """Layered lookup: CLI flag, then LABOPS_<NAME> env, then config file."""

    def __init__(self, args: argparse.Namespace, config_path: Optional[str]):
        self._args = vars(args)
        self._file: dict = {}
        if config_path:
            self._file = json.loads(Path(config_path).read_text(encoding="utf-8"))

    def get(self, name: str, default=None, cast=None):
        value = self._args.get(name)
        if value is None:
            value = os.environ.get(_ENV_PREFIX + name.upper())
        if value is None:
            value = self._file.get(name)
        if value is None:
            return default
        if cast is not None and not isinstance(value, cast if isinstance(cast, type) else object):
            value = cast(value)
        return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labops", description="Bottleneck analysis over a lab-operations jobs table"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--dataset", help="path to the jobs JSONL dataset")
        p.add_argument("--output-dir", dest="output_dir", help="directory for report and charts")
        p.add_argument("--num-questions", dest="num_questions", type=int)
        p.add_argument("--max-retries", dest="max_retries", type=int)
        p.add_argument("--endpoint", help="OpenAI-compatible base URL for live mode")
        p.add_argument("--chart-format", dest="chart_format", choices=("svg", "png"))
        p.add_argument("--no-code-check", action="store_true", help="skip the LLM code-check pass")
        p.add_argument("--config", help="JSON config file with defaults")

    run = sub.add_parser("run", help="run the full analysis pipeline")
    add_common(run)
    run.add_argument("--llm-mode", dest="llm_mode", choices=("live", "replay"))
    run.add_argument("--replay-file", dest="replay_file", help="recorded exchanges (replay mode)")

    record = sub.add_parser("replay-record", help="run live and record a replay file")
    add_common(record)
    record.add_argument("--replay-file", dest="replay_file", required=True,
                        help="destination for recorded exchanges")

    gen = sub.add_parser("generate-data", help="write a synthetic jobs dataset")
    gen.add_argument("--out", default="jobs.jsonl", help="output file (default jobs.jsonl)")
    gen.add_argument("--seed", type=int, default=1)
    gen.add_argument("--count", type=int, help="override the profile record count")
    gen.add_argument("--profile", help="JSON file overriding generation profile fields")
    gen.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")

    lint_cmd = sub.add_parser("lint-sql", help="validate SQL from stdin against the jobs schema")
    lint_cmd.add_argument("--quiet", action="store_true", help="suppress the JSON report")

    return parser


def main(argv: Optional[list[str]] = None, stdin: Optional[IO[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.subcommand == "run":
            return cmd_run(args)
        if args.subcommand == "replay-record":
            return cmd_run(args, record_to=args.replay_file)
        if args.subcommand == "generate-data":
            return cmd_generate_data(args)
        if args.subcommand == "lint-sql":
            return cmd_lint_sql(args, (stdin or sys.stdin).read())
    except Exception as exc:  # keep tracebacks out of operator-facing output
        return _fail(str(exc))
    raise AssertionError("unreachable")


def cmd_run(args: argparse.Namespace, record_to: Optional[str] = None) -> int:
    settings = _Settings(args, getattr(args, "config", None))
    dataset = settings.get("dataset")
    if not dataset:
        return _fail("--dataset is required (or LABOPS_DATASET)")
    output_dir = settings.get("output_dir", "out")
    endpoint = settings.get("endpoint")

    if record_to is not None:
        llm_mode = "live"
    else:
        llm_mode = settings.get("llm_mode", "live")
    if llm_mode == "replay":
        replay_file = settings.get("replay_file")
        if not replay_file:
            return _fail("replay mode needs --replay-file")
        try:
            backend = ReplayBackend(replay_file)
        except (OSError, json.JSONDecodeError) as exc:
            return _fail(f"cannot read replay file: {exc}")
    else:
        if not endpoint:
            return _fail("live mode needs --endpoint (or LABOPS_ENDPOINT)")
        if not os.environ.get(API_KEY_ENV_VAR):
            return _fail(f"live mode needs the {API_KEY_ENV_VAR} environment variable")
        backend = LiveBackend()
    if record_to is not None:
        backend = RecordingBackend(backend, record_to)

    role_configs = default_role_configs()
    if endpoint:
        role_configs = with_endpoint(role_configs, endpoint)

    config = PipelineConfig(
        dataset_path=Path(dataset),
        output_dir=Path(output_dir),
        num_questions=int(settings.get("num_questions", 5)),
        max_retries=int(settings.get("max_retries", 3)),
        chart_format=settings.get("chart_format", "svg"),
        llm_code_check=not getattr(args, "no_code_check", False),
        role_configs=role_configs,
    )

    try:
        result = run_pipeline(config, Gateway(backend, role_configs))
    except PipelineFatalError as exc:
        return _fail(str(exc))

    total = len(result.outcomes)
    for i, outcome in enumerate(result.outcomes, start=1):
        print(f"[{i}/{total}] {outcome.status} attempts={outcome.attempts}  {outcome.question.text}")
    print(f"report: {result.report_path}")
    for path in result.chart_paths:
        print(f"chart: {path}")
    if record_to is not None:
        print(f"replay file: {record_to}")

    succeeded = sum(1 for o in result.outcomes if o.status == SUCCEEDED)
    return 0 if succeeded else 2


def cmd_generate_data(args: argparse.Namespace) -> int:
    profile = default_profile()
    if args.profile:
        try:
            payload = json.loads(Path(args.profile).read_text(encoding="utf-8"))
            profile = GenerationProfile.from_dict(payload)
        except (OSError, json.JSONDecodeError, InvalidProfile) as exc:
            return _fail(f"bad profile: {exc}")
    if args.count is not None:
        try:
            profile = profile.with_record_count(args.count)
        except InvalidProfile as exc:
            return _fail(str(exc))
    records = generate_synthetic(args.seed, profile)
    try:
        dump_dataset(records, args.out, format=args.format)
    except (OSError, DatasetError) as exc:
        return _fail(f"cannot write dataset: {exc}")
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_lint_sql(args: argparse.Namespace, sql_from_stdin: str) -> int:
    sql = sql_from_stdin.strip()
    if not sql:
        report = ValidationReport(errors=("no SQL provided on stdin",))
    else:
        try:
            ast = parse(sql)
        except ParseError as exc:
            report = ValidationReport(errors=(f"syntax error: {exc}",))
        else:
            report = lint(ast, JOBS_SCHEMA)
    if not getattr(args, "quiet", False):
        print(report.to_json())
    return 0 if report.is_valid else 3


if __name__ == "__main__":
    sys.exit(main())
