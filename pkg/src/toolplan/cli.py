"""Command-line entry point.

Exit codes: 0 success, 1 task or verification failure, 2 usage, config or
I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from .benchmark import TASK_KEYS, VARIANTS, fixture_file, load_benchmark_task, load_sim_config, resolve_fixture_root
from .harness import REPORT_FORMATS, emit_report, load_records, render_report, run_benchmark, run_discriminative, run_trial, save_record
from .llm import CredentialMissing, LiveBackend, ReplayBackend, StubBackend, TranscriptError
from .pipeline import METHODS
from .planscript import ExecutionTrace, PlanScriptSyntaxError, interpret, parse_source
from .scene import TASK_IDS, SceneFormatError, load_task, scene_from_dict, validate_scene
from .sim import SimEnvironment, World

DEFAULT_ENDPOINT = "https://api.openai.com/v1/chat/completions"


class UsageError(Exception):
    """Bad flags, missing files or unusable configuration (exit code 2)."""


def _backend_source(args):
    """Return a backend, or a factory keyed by (task, method, seed)."""
    if args.backend == "live":
        try:
            return LiveBackend(args.endpoint, args.model, credential_env=args.credential_env)
        except CredentialMissing as exc:
            raise UsageError(str(exc)) from None
    if args.fixture is None:
        if args.backend == "stub":
            raise UsageError("--backend stub needs --fixture")
        args.fixture = "golden"
    if args.backend == "stub":
        try:
            responses = json.loads(Path(args.fixture).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read stub responses: {exc}") from None
        return lambda task, method, seed: StubBackend(responses)
    path = Path(args.fixture)
    if path.is_file():
        return lambda task, method, seed: ReplayBackend.from_file(path, strict=args.strict)
    try:
        root = resolve_fixture_root(args.fixture)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None

    def factory(task, method, seed):
        f = fixture_file(root, task, method)
        if not f.exists():
            raise UsageError(f"no fixture for {task} / {method} under {root}")
        return ReplayBackend.from_file(f, strict=args.strict)
    return factory


def _check_fixtures(source, tasks, methods) -> None:
    if callable(source) and not hasattr(source, "complete"):
        for t in tasks:
            for m in methods:
                source(t, m, 0)


def _task(key: str):
    if key not in TASK_KEYS:
        raise UsageError(f"unknown task {key!r}; choose from {', '.join(TASK_KEYS)}")
    return load_benchmark_task(key)


def _method(name: str) -> str:
    if name not in METHODS:
        raise UsageError(f"unknown method {name!r}; choose from {', '.join(METHODS)}")
    return name


def _split(values) -> list[str]:
    out = []
    for v in values or []:
        out.extend(x for x in v.split(",") if x)
    return out


def _run_dir(out: str) -> Path:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")
    base = Path(out) / "runs" / stamp
    d, k = base, 1
    while d.exists():
        k += 1
        d = base.with_name(f"{stamp}-{k}")
    return d


# ---------------------------------------------------------------------------
# commands

def cmd_run(args) -> int:
    task = _task(args.task)
    method = _method(args.method)
    source = _backend_source(args)
    _check_fixtures(source, [task.key], [method])
    record = run_trial(task, method, source, args.seed, config=load_sim_config())
    if args.out:
        d = save_record(record, _run_dir(args.out))
        print(f"artifacts: {d}")
    status = "success" if record.success else f"failure ({record.failure_class})"
    print(f"{task.key} / {method} / seed {args.seed}: {status}")
    if record.error:
        print(f"error: {record.error.get('message')}")
    return 0 if record.success else 1


def cmd_bench(args) -> int:
    tasks = [_task(k) for k in (_split(args.task) or list(TASK_IDS))]
    methods = [_method(m) for m in (_split(args.method) or list(METHODS))]
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    if args.parallelism < 1:
        raise UsageError("--parallelism must be at least 1")
    source = _backend_source(args)
    _check_fixtures(source, [t.key for t in tasks], methods)
    out_dir = _run_dir(args.out)
    seeds = range(args.seed, args.seed + args.n)
    table, records = run_benchmark(tasks, methods, args.n, source, seeds, parallelism=args.parallelism,
                                   config=load_sim_config(), out_dir=out_dir)
    paths = emit_report(records, ("csv", "md"), out_dir)
    print(render_report(records, "md"))
    print("report: " + ", ".join(str(p) for p in paths))
    return 0


def _load_scene_for(args, record: dict | None):
    if args.scene:
        try:
            data = json.loads(Path(args.scene).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read scene: {exc}") from None
        try:
            return load_task(args.scene).scene if "scene" in data else scene_from_dict(data)
        except (SceneFormatError, KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"invalid scene file: {exc}") from None
    key = args.task or (record or {}).get("task")
    if key is None:
        raise UsageError("replay needs --task or --scene (or a record.json next to the trace)")
    return _task(key).scene


def _first_divergence(old: ExecutionTrace, new: ExecutionTrace) -> str | None:
    for a, b in zip(old.entries, new.entries):
        sa = old.snapshots[a.snapshot]
        sb = new.snapshots[b.snapshot]
        if a.op != b.op or (a.error or {}).get("kind") != (b.error or {}).get("kind") or sa != sb:
            return f"statement {a.index} ({a.op}): stored and replayed states differ"
    if len(old.entries) != len(new.entries):
        n = min(len(old.entries), len(new.entries))
        return f"statement {n}: trace lengths differ ({len(old.entries)} stored, {len(new.entries)} replayed)"
    if old.final_snapshot != new.final_snapshot:
        return "final state differs"
    return None


def cmd_replay(args) -> int:
    path = Path(args.path)
    if path.is_dir():
        trace_path, script_path = path / "trace.json", path / "script.plan"
    elif path.suffix == ".plan":
        trace_path, script_path = path.with_name("trace.json"), path
    else:
        trace_path, script_path = path, path.with_name("script.plan")
    if args.script:
        script_path = Path(args.script)
    for p in (trace_path, script_path):
        if not p.is_file():
            raise UsageError(f"file not found: {p}")
    record_path = trace_path.with_name("record.json")
    try:
        record = json.loads(record_path.read_text(encoding="utf-8")) if record_path.exists() else None
        stored = ExecutionTrace.load(trace_path)
        program = parse_source(script_path.read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError, PlanScriptSyntaxError) as exc:
        raise UsageError(f"cannot load stored trial: {exc}") from None
    scene = _load_scene_for(args, record)
    seed = args.seed if args.seed is not None else int((record or {}).get("seed", 0))
    replayed = interpret(program, SimEnvironment(World(scene, load_sim_config(), seed)))
    diff = _first_divergence(stored, replayed)
    if diff is None:
        print(f"replay matches ({len(replayed.entries)} statements)")
        return 0
    print(f"replay diverges at {diff}")
    return 1


def cmd_validate(args) -> int:
    try:
        data = json.loads(Path(args.path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {args.path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.path}: invalid JSON ({exc})") from None
    try:
        scene = load_task(args.path).scene if isinstance(data, dict) and "scene" in data else scene_from_dict(data)
    except (SceneFormatError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{args.path}: {exc}") from None
    problems = validate_scene(scene)
    for p in problems:
        print(f"violation: {p}")
    print("valid" if not problems else f"{len(problems)} violation(s)")
    return 0 if not problems else 1


def cmd_report(args) -> int:
    root = Path(args.path)
    if not root.is_dir():
        raise UsageError(f"records directory not found: {root}")
    records = load_records(root)
    if not records:
        raise UsageError(f"no records under {root}")
    formats = _split(args.format) or list(REPORT_FORMATS)
    bad = [f for f in formats if f not in REPORT_FORMATS]
    if bad:
        raise UsageError(f"unsupported report format {bad[0]!r}; choose from {', '.join(REPORT_FORMATS)}")
    out = Path(args.out) if args.out else root
    paths = emit_report(records, formats, out)
    print(render_report(records, "md"))
    print("report: " + ", ".join(str(p) for p in paths))
    return 0


def cmd_discriminative(args) -> int:
    family = args.family
    if family not in VARIANTS:
        raise UsageError(f"unknown family {family!r}; choose from {', '.join(VARIANTS)}")
    variants = _split(args.variant) or list(VARIANTS[family])
    method = _method(args.method)
    source = _backend_source(args)
    _check_fixtures(source, [VARIANTS[family][v] for v in variants if v in VARIANTS[family]], [method])
    try:
        results = run_discriminative(family, variants, method, source, args.n, seed=args.seed,
                                     config=load_sim_config())
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for v, r in results.items():
        print(f"{v}: tool-use rate {float(r.rate):.2f} (oracle uses tool: {r.oracle_uses_tool})")
    return 0


# ---------------------------------------------------------------------------

def _backend_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=("live", "replay", "stub"), default="replay")
    p.add_argument("--fixture", help="replay: fixture set name, directory or transcript file (default golden); stub: JSON responses")
    p.add_argument("--strict", action="store_true", help="replay: also require matching prompt hashes")
    p.add_argument("--endpoint", default=DEFAULT_ENDPOINT, help="live: chat-completion URL")
    p.add_argument("--model", default="gpt-4", help="live: model id")
    p.add_argument("--credential-env", default="OPENAI_API_KEY", help="live: environment variable with the key")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toolplan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one trial")
    p.add_argument("--task", required=True)
    p.add_argument("--method", default="full")
    p.add_argument("--out", help="directory for trial artifacts")
    _backend_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="run tasks x methods and write a report")
    p.add_argument("--task", "--tasks", action="append", help="task key(s), comma separated; default all six")
    p.add_argument("--method", "--methods", action="append", help="method(s), comma separated; default all five")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--out", default=".")
    _backend_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("replay", help="re-execute a stored script and compare with its trace")
    p.add_argument("path", help="trial directory, trace.json or script.plan")
    p.add_argument("--script", help="script file (default: script.plan next to the trace)")
    p.add_argument("--task", help="benchmark task key (default: from record.json)")
    p.add_argument("--scene", help="task or scene JSON file to replay against")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("validate", help="validate a task or scene file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", help="regenerate report tables from a records directory")
    p.add_argument("path")
    p.add_argument("--format", action="append", help="csv and/or md (default both)")
    p.add_argument("--out", help="output directory (default: the records directory)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("discriminative", help="tool-use rate per scene variant")
    p.add_argument("--family", required=True, choices=sorted(VARIANTS))
    p.add_argument("--variant", action="append")
    p.add_argument("--method", default="full")
    p.add_argument("--n", type=int, default=1)
    _backend_flags(p)
    p.set_defaults(func=cmd_discriminative)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, TranscriptError, SceneFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
