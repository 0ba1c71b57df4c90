"""Trials, benchmarks, key-concept scoring, error classification and reports.

Success rates are kept as :class:`fractions.Fraction` until formatting so a
cell always equals successes / n exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np

from .benchmark import GoldAnnotation, KeyConceptGold, load_gold, slug
from .llm import Backend, Transcript
from .pipeline import METHODS, AblationConfig, AnalyzerOutput, PipelineError, parse_analyzer_response, run_pipeline
from .planscript import SIGNATURES, ExecutionTrace, PlanScriptSyntaxError, Program, interpret, parse_source
from .planscript import static_check
from .planscript.nodes import BinOp, Call, Comp, Neg, Vec, statement_expr
from .scene import TASK_IDS, TaskSpec
from .sim import CONSTRAINT_ERROR_KINDS, SimConfig, SimEnvironment, World, task_success

FAILURE_CLASSES = ("none", "tool_use", "logical", "numerical", "stage_failure")
MUTATING = frozenset(n for n, s in SIGNATURES.items() if s.mutating)

BackendSource = Backend | Callable[[str, str, int], Backend]


# ---------------------------------------------------------------------------
# records

@dataclass
class TrialRecord:
    task: str
    method: str
    seed: int
    transcript: Transcript | None
    source: str | None
    trace: ExecutionTrace | None
    success: bool
    failure_class: str
    wall_time: float = 0.0
    error: dict | None = None
    analyzer_description: str | None = None

    def __post_init__(self):
        if self.failure_class not in FAILURE_CLASSES:
            raise ValueError(f"unknown failure class {self.failure_class!r}")
        if (self.failure_class == "none") != self.success:
            raise ValueError("failure_class must be 'none' exactly when the trial succeeded")
        if self.failure_class == "stage_failure" and self.source is not None:
            raise ValueError("stage_failure is reserved for trials without a script")

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "method": self.method,
            "seed": self.seed,
            "success": self.success,
            "failure_class": self.failure_class,
            "wall_time": self.wall_time,
            "error": self.error,
            "analyzer_description": self.analyzer_description,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, d: dict, transcript: Transcript | None = None,
                  trace: ExecutionTrace | None = None) -> "TrialRecord":
        return cls(d["task"], d["method"], int(d["seed"]), transcript, d.get("source"), trace,
                   bool(d["success"]), d["failure_class"], float(d.get("wall_time", 0.0)), d.get("error"),
                   d.get("analyzer_description"))


def _backend_for(source: BackendSource, task_key: str, method: str, seed: int) -> Backend:
    return source if isinstance(source, Backend) else source(task_key, method, seed)


def run_trial(task: TaskSpec, method: str | AblationConfig, backend: BackendSource, seed: int = 0, *,
              gold: GoldAnnotation | None = None, config: SimConfig | None = None) -> TrialRecord:
    """pipeline -> static check -> interpret -> success predicate.

    Never raises for trial-level failures; they are captured in the record.
    """
    config_obj = method if isinstance(method, AblationConfig) else METHODS[method]
    method_name = config_obj.name
    start = time.perf_counter()
    transcript = Transcript()
    be = _backend_for(backend, task.key, method_name, seed)

    def done(**kw) -> TrialRecord:
        return TrialRecord(task.key, method_name, seed, transcript, wall_time=time.perf_counter() - start, **kw)

    try:
        result = run_pipeline(task, be, config_obj, transcript=transcript)
    except PipelineError as exc:
        return done(source=None, trace=None, success=False, failure_class="stage_failure",
                    error={"stage": exc.stage, "kind": exc.kind, "message": exc.message})
    analyzer_desc = result.analyzer.description_section if result.analyzer is not None else None
    program = parse_source(result.source)
    findings = static_check(program, task.scene.robot)
    if findings:  # the coder stage already rejects these; kept as a guard
        return done(source=None, trace=None, success=False, failure_class="stage_failure",
                    error={"stage": "coder", "kind": "static_check",
                           "message": "; ".join(f.message for f in findings)},
                    analyzer_description=analyzer_desc)
    world = World(task.scene, config, seed)
    trace = interpret(program, SimEnvironment(world))
    success = trace.error is None and task_success(task, trace.final_snapshot)
    record = done(source=result.source, trace=trace, success=success, failure_class="none" if success else "logical",
                  error=trace.error, analyzer_description=analyzer_desc)
    if not success:
        if gold is None:
            try:
                gold = load_gold(task.key)
            except KeyError:
                gold = None
        if gold is not None:
            record.failure_class = classify_error(record, gold)
    return record


def execute_script(task: TaskSpec, source: str, seed: int = 0, config: SimConfig | None = None) -> ExecutionTrace:
    """Run a plan script against a fresh world for ``task``."""
    return interpret(parse_source(source), SimEnvironment(World(task.scene, config, seed)))


def script_record(task: TaskSpec, source: str, seed: int = 0, *, method: str = "scripted",
                  gold: GoldAnnotation | None = None, config: SimConfig | None = None) -> TrialRecord:
    """A trial record for a hand-written script, bypassing the pipeline."""
    start = time.perf_counter()
    trace = execute_script(task, source, seed, config)
    success = trace.error is None and task_success(task, trace.final_snapshot)
    record = TrialRecord(task.key, method, seed, None, source, trace, success, "none" if success else "logical",
                         time.perf_counter() - start, trace.error)
    if not success and gold is not None:
        record.failure_class = classify_error(record, gold)
    return record


# ---------------------------------------------------------------------------
# trace analysis

def _moved(before: dict, after: dict, tol: float = 1e-9) -> set[str]:
    out = set()
    for name, pose in after["objects"].items():
        old = before["objects"].get(name)
        if old is None:
            continue
        if (max(abs(a - b) for a, b in zip(pose["position"], old["position"])) > tol
                or abs(pose["yaw"] - old["yaw"]) > tol):
            out.add(name)
    return out


def _held(snap: dict) -> set[str]:
    arm = snap.get("arm") or {}
    held = arm.get("held")
    if held is None:
        return set()
    out = {held}
    for g in snap.get("groups", []):
        if held in g:
            out.update(g)
    return out


def trace_events(trace: ExecutionTrace) -> list[str]:
    """One token ``skill:obj1,obj2`` per executed mutating call.

    The objects are those whose pose changed during the call plus any object
    that became held.
    """
    events = []
    prev = 0
    for e in trace.entries:
        if e.op in MUTATING and e.error is None:
            before, after = trace.snapshots[prev], trace.snapshots[e.snapshot]
            objs = _moved(before, after) | (_held(after) - _held(before))
            events.append(f"{e.op}:{','.join(sorted(objs))}")
        prev = e.snapshot
    return events


def manipulated_objects(trace: ExecutionTrace) -> set[str]:
    """Objects whose pose changed at some point, plus objects ever grasped."""
    out: set[str] = set()
    snaps = trace.snapshots
    for a, b in zip(snaps, snaps[1:]):
        out |= _moved(a, b)
    for s in snaps:
        out |= _held(s)
    return out


def uses_tool(trace: ExecutionTrace | None, target: str) -> bool:
    if trace is None:
        return False
    return bool(manipulated_objects(trace) - {target})


def ordering_violated(events: list[str], ordering: Iterable[str]) -> bool:
    """True when some milestone happens before an earlier milestone has happened.

    Milestones that never happen are not violations by themselves.
    """
    firsts = []
    for pat in ordering:
        rx = re.compile(pat)
        firsts.append(next((i for i, ev in enumerate(events) if rx.search(ev)), None))
    for k, fk in enumerate(firsts):
        if fk is None:
            continue
        for fj in firsts[:k]:
            if fj is None or fj > fk:
                return True
    return False


def _calls(expr, out: list[str]):
    if isinstance(expr, Call):
        for a in expr.args:
            _calls(a, out)
        out.append(expr.name)
    elif isinstance(expr, Vec):
        for i in expr.items:
            _calls(i, out)
    elif isinstance(expr, (Neg, Comp)):
        _calls(expr.expr, out)
    elif isinstance(expr, BinOp):
        _calls(expr.left, out)
        _calls(expr.right, out)


def plan_shape(program: Program) -> tuple[str, ...]:
    """Mutating skill names of ``program`` in call order."""
    names: list[str] = []
    for stmt in program.statements:
        _calls(statement_expr(stmt), names)
    return tuple(n for n in names if n in MUTATING)


def executed_targets(trace: ExecutionTrace) -> list[tuple[float, float, float] | None]:
    """Vector argument of each mutating call that was reached (errors included)."""
    out = []
    for e in trace.entries:
        if e.op not in MUTATING:
            continue
        vec = next((tuple(float(v) for v in a.values) for a in e.args if hasattr(a, "values")), None)
        out.append(vec)
    return out


def classify_error(record: TrialRecord, gold: GoldAnnotation) -> str:
    """Failure class of a failed trial that produced a script.

    Precedence is tool_use, then logical, then numerical; anything left over
    counts as logical.
    """
    if record.success:
        raise ValueError("classify_error called on a successful record")
    if record.source is None or record.trace is None:
        raise ValueError("classify_error needs a script and its trace")
    trace = record.trace
    if gold.oracle_uses_tool:
        used = manipulated_objects(trace) - {gold.target}
        if not used & gold.oracle_tool_set:
            return "tool_use"
    err = trace.error
    if err is not None and err.get("kind") in CONSTRAINT_ERROR_KINDS:
        return "logical"
    if ordering_violated(trace_events(trace), gold.ordering):
        return "logical"
    try:
        shape = plan_shape(parse_source(record.source))
    except PlanScriptSyntaxError:
        return "logical"
    if gold.plan_shape and shape == gold.plan_shape:
        for got, want in zip(executed_targets(trace), gold.parameters):
            if got is None or want is None:
                continue
            if float(np.linalg.norm(np.subtract(got, want))) > gold.parameter_tolerance:
                return "numerical"
    return "logical"


# ---------------------------------------------------------------------------
# benchmark

@dataclass
class ReportTable:
    """Rows are methods, columns are tasks, cells are exact success rates."""

    methods: list[str]
    tasks: list[str]
    cells: dict[tuple[str, str], Fraction] = field(default_factory=dict)

    def average(self, method: str) -> Fraction | None:
        vals = [self.cells[(method, t)] for t in self.tasks if (method, t) in self.cells]
        return sum(vals, Fraction(0)) / len(vals) if vals else None

    def rate(self, method: str, task: str) -> Fraction | None:
        return self.cells.get((method, task))


def success_table(records: Iterable[TrialRecord], methods: list[str] | None = None,
                  tasks: list[str] | None = None) -> ReportTable:
    records = list(records)
    methods = methods if methods is not None else _ordered({r.method for r in records}, list(METHODS))
    tasks = tasks if tasks is not None else _ordered({r.task for r in records}, list(TASK_IDS))
    counts: dict[tuple[str, str], list[int]] = {}
    for r in records:
        c = counts.setdefault((r.method, r.task), [0, 0])
        c[0] += int(r.success)
        c[1] += 1
    table = ReportTable(methods, tasks)
    for key, (s, n) in counts.items():
        if key[0] in methods and key[1] in tasks:
            table.cells[key] = Fraction(s, n)
    return table


def _ordered(items: set[str], preferred: list[str]) -> list[str]:
    return [p for p in preferred if p in items] + sorted(items - set(preferred))


def run_benchmark(tasks: Iterable[TaskSpec], methods: Iterable[str], n: int, backend: BackendSource,
                  seeds: Iterable[int] | None = None, *, parallelism: int = 1, config: SimConfig | None = None,
                  out_dir: str | Path | None = None) -> tuple[ReportTable, list[TrialRecord]]:
    """``n`` trials per (task, method); seeds default to ``0..n-1``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    tasks, methods = list(tasks), list(methods)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    seeds = list(seeds) if seeds is not None else list(range(n))
    if len(seeds) != n:
        raise ValueError("need exactly n seeds")
    jobs = [(t, m, s) for t in tasks for m in methods for s in seeds]

    def one(job):
        t, m, s = job
        return run_trial(t, m, backend, s, config=config)

    if parallelism > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            records = list(pool.map(one, jobs))
    else:
        records = [one(j) for j in jobs]
    table = success_table(records, methods, [t.key for t in tasks])
    if out_dir is not None:
        for r in records:
            save_record(r, out_dir)
    return table, records


def record_dir(root: str | Path, record: TrialRecord) -> Path:
    return Path(root) / slug(record.task) / record.method / str(record.seed)


def save_record(record: TrialRecord, root: str | Path) -> Path:
    d = record_dir(root, record)
    d.mkdir(parents=True, exist_ok=True)
    (d / "record.json").write_text(json.dumps(record.to_dict(), indent=2) + "\n", encoding="utf-8")
    if record.transcript is not None:
        from .llm import save_transcript
        save_transcript(record.transcript, d / "transcript.json")
    if record.source is not None:
        (d / "script.plan").write_text(record.source, encoding="utf-8")
    if record.trace is not None:
        record.trace.save(d / "trace.json")
    return d


def load_records(root: str | Path) -> list[TrialRecord]:
    """Read every ``record.json`` below ``root`` (with its trace when present)."""
    out = []
    for p in sorted(Path(root).rglob("record.json")):
        d = json.loads(p.read_text(encoding="utf-8"))
        trace_path = p.parent / "trace.json"
        trace = ExecutionTrace.load(trace_path) if trace_path.exists() else None
        out.append(TrialRecord.from_dict(d, trace=trace))
    return out


# ---------------------------------------------------------------------------
# key concepts

_STOP = frozenset({"the", "a", "an", "of", "s", "to", "from", "and"})


def _tokens(text: str) -> set[str]:
    return set(re.findall(r"[a-z0-9]+", text.lower())) - _STOP


_UNIT_ALIASES = {"m": "m", "meter": "m", "meters": "m", "metre": "m", "metres": "m",
                 "kg": "kg", "kilogram": "kg", "kilograms": "kg", "rad": "rad", "radians": "rad"}


def concept_correct(output: AnalyzerOutput, gold: KeyConceptGold) -> bool:
    """Name, value and related constraint of some extracted concept all match."""
    names = [_tokens(gold.name)] + [_tokens(a) for a in gold.aliases]
    keywords = [k.lower() for k in gold.constraint_keywords] or [gold.constraint.lower()]
    want_unit = _UNIT_ALIASES.get(gold.unit.lower(), gold.unit.lower())
    for c in output.concepts:
        got = _tokens(c.name)
        if not any(n and n <= got for n in names):
            continue
        if _UNIT_ALIASES.get(c.unit.lower(), c.unit.lower()) != want_unit:
            continue
        if abs(c.value - gold.value) > gold.tolerance:
            continue
        text = c.related_constraint.lower()
        if any(k in text for k in keywords):
            return True
    return False


def score_key_concepts(outputs: Mapping[str, list[AnalyzerOutput]],
                       gold: Mapping[str, GoldAnnotation | KeyConceptGold]) -> dict[str, Fraction | None]:
    """Per-task accuracy; ``None`` marks a task with no outputs (not applicable)."""
    result: dict[str, Fraction | None] = {}
    for task, outs in outputs.items():
        if task not in gold:
            raise KeyError(f"missing gold annotation for {task!r}")
        g = gold[task]
        kc = g.key_concept if isinstance(g, GoldAnnotation) else g
        outs = list(outs)
        result[task] = Fraction(sum(concept_correct(o, kc) for o in outs), len(outs)) if outs else None
    return result


def analyzer_outputs_from_records(records: Iterable[TrialRecord]) -> dict[tuple[str, str], list[AnalyzerOutput]]:
    out: dict[tuple[str, str], list[AnalyzerOutput]] = {}
    for r in records:
        if r.analyzer_description is None:
            continue
        text = "Analysis:\n\nDescription:\n" + r.analyzer_description
        try:
            parsed = parse_analyzer_response(text)
        except ValueError:
            continue
        out.setdefault((r.method, r.task), []).append(parsed)
    return out


# ---------------------------------------------------------------------------
# discriminative tool use

@dataclass(frozen=True)
class DiscriminativeResult:
    variant: str
    task: str
    rate: Fraction
    n: int
    oracle_uses_tool: bool

    @property
    def matches_oracle(self) -> bool:
        return self.rate == (1 if self.oracle_uses_tool else 0)


def run_discriminative(family: str, variants: Iterable[str], method: str, backend: BackendSource, n: int,
                       *, seed: int = 0, config: SimConfig | None = None) -> dict[str, DiscriminativeResult]:
    """Tool-use rate per scene variant: the share of trials that moved any non-target object."""
    from .benchmark import VARIANTS, load_benchmark_task

    if family not in VARIANTS:
        raise ValueError(f"unknown discriminative family {family!r}")
    variants = list(variants)
    for v in variants:
        if v not in VARIANTS[family]:
            raise ValueError(f"unknown variant {v!r} for {family}; choose from {', '.join(VARIANTS[family])}")
    if n <= 0:
        return {}
    out = {}
    for v in variants:
        key = VARIANTS[family][v]
        task = load_benchmark_task(key)
        gold = load_gold(key)
        used = 0
        for s in range(seed, seed + n):
            rec = run_trial(task, method, backend, s, gold=gold, config=config)
            used += uses_tool(rec.trace, gold.target)
        out[v] = DiscriminativeResult(v, key, Fraction(used, n), n, gold.oracle_uses_tool)
    return out


# ---------------------------------------------------------------------------
# reports

def format_rate(x: Fraction | None) -> str:
    """Two decimals, rounding halves up; ``n/a`` for missing values."""
    if x is None:
        return "n/a"
    q = math.floor(Fraction(x) * 100 + Fraction(1, 2))
    return f"{q // 100}.{q % 100:02d}"


def report_tables(records: list[TrialRecord]) -> dict[str, tuple[list[str], list[list[str]]]]:
    """All report tables as (header, rows) with formatted cells."""
    records = sorted(records, key=lambda r: (r.task, r.method, r.seed))
    table = success_table(records)
    tables = {}
    rows = []
    for m in table.methods:
        rows.append([m] + [format_rate(table.rate(m, t)) for t in table.tasks] + [format_rate(table.average(m))])
    tables["success"] = (["method"] + table.tasks + ["Average"], rows)

    concept_outputs = analyzer_outputs_from_records(records)
    if concept_outputs:
        golds = {}
        for _, task in concept_outputs:
            try:
                golds[task] = load_gold(task)
            except KeyError:
                pass
        rows = []
        cmethods = _ordered({m for m, _ in concept_outputs}, list(METHODS))
        for m in cmethods:
            per = {t: outs for (mm, t), outs in concept_outputs.items() if mm == m and t in golds}
            scores = score_key_concepts(per, golds)
            rows.append([m] + [format_rate(scores.get(t)) for t in table.tasks])
        tables["key_concepts"] = (["method"] + table.tasks, rows)

    classes = ("tool_use", "logical", "numerical", "stage_failure")
    rows = []
    for m in table.methods:
        mine = [r for r in records if r.method == m]
        rows.append([m, "all"] + [str(sum(r.failure_class == c for r in mine)) for c in classes])
        for t in table.tasks:
            sub = [r for r in mine if r.task == t]
            if sub:
                rows.append([m, t] + [str(sum(r.failure_class == c for r in sub)) for c in classes])
    tables["errors"] = (["method", "task"] + list(classes), rows)
    return tables


def _markdown(title: str, header: list[str], rows: list[list[str]]) -> str:
    lines = [f"## {title}", "", "| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


TITLES = {"success": "Success rate", "key_concepts": "Key-concept accuracy", "errors": "Failure classes (counts)"}
REPORT_FORMATS = ("csv", "md")


def render_report(records: list[TrialRecord], fmt: str) -> str:
    if fmt not in REPORT_FORMATS:
        raise ValueError(f"unsupported report format {fmt!r}; choose from {', '.join(REPORT_FORMATS)}")
    tables = report_tables(records)
    if fmt == "md":
        return "\n".join(_markdown(TITLES[k], h, rows) for k, (h, rows) in tables.items())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "row", "column", "value"])
    for k, (header, rows) in tables.items():
        n_keys = 2 if k == "errors" else 1
        for r in rows:
            row_key = "/".join(r[:n_keys])
            for col, val in zip(header[n_keys:], r[n_keys:]):
                w.writerow([k, row_key, col, val])
    return buf.getvalue()


def emit_report(records: list[TrialRecord], formats: str | Iterable[str], out_dir: str | Path) -> list[Path]:
    """Write ``report.<fmt>`` files under ``out_dir`` and return their paths."""
    if not records:
        raise ValueError("no records to report")
    formats = [formats] if isinstance(formats, str) else list(formats)
    texts = {f: render_report(records, f) for f in formats}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for f, text in texts.items():
        p = out / f"report.{f}"
        p.write_text(text, encoding="utf-8")
        paths.append(p)
    return paths
