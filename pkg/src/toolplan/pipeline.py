"""The four-stage prompting pipeline and its ablation wirings.

Stages run in order Analyzer -> Planner -> Calculator -> Coder.  Each stage
sends one request, parses a two-section reply and, on a format problem,
re-prompts once with a reminder before failing.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources

from .llm import Backend, ChatMessage, CompletionRequest, LLMError, Transcript
from .planscript import GRAMMAR, MOTION_SKILLS, SIGNATURES, SKILL_DOCS, PlanScriptSyntaxError
from .planscript import parse_source, static_check
from .scene import RobotSpec, TaskSpec, compose_query

STAGES = ("analyzer", "planner", "calculator", "coder")
SYSTEM_PROMPT = "You are a careful assistant that plans robot behaviour. Follow the requested output format."


class SectionError(ValueError):
    def __init__(self, label: str):
        super().__init__(f"missing section {label!r}")
        self.label = label


class PipelineError(Exception):
    """A stage failed to produce a usable response."""

    def __init__(self, stage: str, kind: str, message: str):
        super().__init__(f"{stage}: {kind}: {message}")
        self.stage = stage
        self.kind = kind
        self.message = message


class _FormatProblem(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind
        self.message = message


# ---------------------------------------------------------------------------
# data types

@dataclass(frozen=True)
class KeyConcept:
    name: str
    value: float
    unit: str
    related_constraint: str

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("key concept value must be finite")
        if not (self.name.strip() and self.unit.strip() and self.related_constraint.strip()):
            raise ValueError("key concept fields must be non-empty")


@dataclass(frozen=True)
class AnalyzerOutput:
    analysis: str
    concepts: tuple[KeyConcept, ...]
    description_section: str


@dataclass(frozen=True)
class PlanStep:
    index: int
    skill: str
    arguments: str = ""


@dataclass(frozen=True)
class PlanSkeleton:
    description: str
    steps: tuple[PlanStep, ...]
    raw: str = field(default="", compare=False)


@dataclass(frozen=True)
class Quantity:
    value: float | tuple[float, float, float]
    unit: str | None = None

    def render(self) -> str:
        if isinstance(self.value, tuple):
            body = "[" + ", ".join(_num(v) for v in self.value) + "]"
        else:
            body = _num(self.value)
        return body + (f" {self.unit}" if self.unit else "")


@dataclass(frozen=True)
class ParameterizedPlan:
    steps: tuple[tuple[PlanStep, dict], ...]
    description: str = ""

    def render(self) -> str:
        lines = []
        for step, params in self.steps:
            head = f"{step.index}. {step.skill}({step.arguments})"
            if params:
                head += " | " + "; ".join(f"{k} = {q.render()}" for k, q in params.items())
            lines.append(head)
        return "\n".join(lines)


@dataclass(frozen=True)
class AblationConfig:
    use_analyzer: bool = True
    use_calculator: bool = True
    use_planner: bool = True

    def __post_init__(self):
        if not self.use_planner and (self.use_analyzer or self.use_calculator):
            raise ValueError("analyzer and calculator require the planner")

    @property
    def name(self) -> str:
        for k, v in METHODS.items():
            if v == self:
                return k
        raise ValueError(self)  # unreachable for validated configs

    def stages(self) -> tuple[str, ...]:
        out = []
        if self.use_analyzer:
            out.append("analyzer")
        if self.use_planner:
            out.append("planner")
        if self.use_calculator:
            out.append("calculator")
        out.append("coder")
        return tuple(out)


METHODS = {
    "full": AblationConfig(True, True, True),
    "no-analyzer": AblationConfig(False, True, True),
    "no-calculator": AblationConfig(True, False, True),
    "planner-coder": AblationConfig(False, False, True),
    "coder-only": AblationConfig(False, False, False),
}


def method_config(name: str) -> AblationConfig:
    try:
        return METHODS[name]
    except KeyError:
        raise ValueError(f"unknown method {name!r}; choose from {', '.join(METHODS)}") from None


# ---------------------------------------------------------------------------
# parsing

def _num(v: float) -> str:
    return repr(float(v))


def _header(label: str) -> re.Pattern:
    return re.compile(
        r"^[ \t]*(?:#+[ \t]*)?(?:\*\*|__)?[ \t]*" + re.escape(label.rstrip(":")) +
        r"[ \t]*(?:\*\*|__)?[ \t]*:[ \t]*(?:\*\*|__)?[ \t]*",
        re.IGNORECASE | re.MULTILINE,
    )


def parse_two_section(text: str, first_label: str, second_label: str) -> tuple[str, str]:
    """Split ``text`` at two labelled headers and return both bodies stripped."""
    if first_label.rstrip(":").lower() == second_label.rstrip(":").lower():
        raise ValueError("section labels must differ")
    m1 = _header(first_label).search(text)
    if m1 is None:
        raise SectionError(first_label)
    m2 = _header(second_label).search(text, m1.end())
    if m2 is None:
        raise SectionError(second_label)
    return text[m1.end():m2.start()].strip(), text[m2.end():].strip()


_CONCEPT = re.compile(
    r"key\s+concept\s*:\s*(?P<name>[^;]+?)\s*;\s*value\s*:\s*(?P<value>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
    r"\s*(?P<unit>[A-Za-z%°]*)\s*;\s*constraint\s*:\s*(?P<constraint>.+?)\s*$",
    re.IGNORECASE,
)


def parse_concepts(description: str) -> tuple[KeyConcept, ...]:
    out = []
    for line in description.splitlines():
        body = line.strip().lstrip("-*• ").strip()
        if not re.match(r"key\s+concept\s*:", body, re.IGNORECASE):
            continue
        m = _CONCEPT.search(body)
        if m is None:
            raise _FormatProblem("unparseable", f"malformed key concept line: {line.strip()!r}")
        try:
            out.append(KeyConcept(m["name"].strip(), float(m["value"]), m["unit"] or "-", m["constraint"].strip()))
        except ValueError as exc:
            raise _FormatProblem("unparseable", str(exc)) from None
    return tuple(out)


_STEP = re.compile(r"^\s*(?:[-*]\s*)?(?:step\s*)?(\d+)\s*[.):]\s*(.*)$", re.IGNORECASE)
_SKILL_HEAD = re.compile(r"^`?([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?`?\s*(?:[:\-\u2013\u2014]\s*(.*))?$")


def parse_plan_lines(plan_text: str, allowed) -> tuple[PlanStep, ...]:
    steps = []
    for line in plan_text.splitlines():
        m = _STEP.match(line)
        if not m:
            continue
        idx, rest = int(m[1]), m[2].strip()
        h = _SKILL_HEAD.match(rest)
        if h is None:
            raise _FormatProblem("unparseable", f"cannot read plan step {line.strip()!r}")
        skill = h[1]
        if skill not in allowed:
            raise _FormatProblem("unknown_skill", f"step {idx} uses unknown skill {skill!r}")
        args = (h[2] if h[2] is not None else (h[3] or "")).strip()
        steps.append(PlanStep(idx, skill, args))
    if not steps:
        raise _FormatProblem("empty_plan", "the plan section contains no steps")
    if [s.index for s in steps] != list(range(1, len(steps) + 1)):
        raise _FormatProblem("unparseable", "plan step indices must run 1, 2, 3, ...")
    return tuple(steps)


_ANSWER = re.compile(r"^\s*(?:[-*]\s*)?step\s*(\d+)\s*[:.)]\s*(.*)$", re.IGNORECASE)
_ASSIGN = re.compile(r"^\s*([A-Za-z_]\w*)\s*=\s*(.+?)\s*$")
_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_VALUE = re.compile(
    r"^(?:\[\s*(" + _NUMBER + r")\s*,\s*(" + _NUMBER + r")\s*,\s*(" + _NUMBER + r")\s*\]|(" + _NUMBER + r"))"
    r"\s*(m|kg|rad)?$"
)


def parse_answer(answer: str, skeleton: PlanSkeleton) -> ParameterizedPlan:
    by_index = {s.index: s for s in skeleton.steps}
    params: dict[int, dict] = {s.index: {} for s in skeleton.steps}
    for line in answer.splitlines():
        m = _ANSWER.match(line)
        if not m:
            continue
        idx = int(m[1])
        if idx not in by_index:
            raise _FormatProblem("step_index_mismatch",
                                 f"answer refers to step {idx} but the plan has {len(skeleton.steps)} steps")
        sig = SIGNATURES[by_index[idx].skill]
        names = {p.name: p.kind for p in sig.params}
        for part in filter(None, (p.strip() for p in m[2].split(";"))):
            a = _ASSIGN.match(part)
            if a is None:
                raise _FormatProblem("non_numeric_parameter", f"step {idx}: cannot read {part!r}")
            name, raw = a[1], a[2]
            if name not in names:
                raise _FormatProblem("unknown_parameter", f"step {idx}: {by_index[idx].skill} has no parameter {name!r}")
            v = _VALUE.match(raw)
            if v is None:
                raise _FormatProblem("non_numeric_parameter", f"step {idx}: {name} = {raw!r} is not numeric")
            if v[4] is not None:
                value = float(v[4])
            else:
                value = (float(v[1]), float(v[2]), float(v[3]))
            if (names[name] == "vec") != isinstance(value, tuple):
                raise _FormatProblem("non_numeric_parameter", f"step {idx}: {name} has the wrong shape")
            params[idx][name] = Quantity(value, v[5])
    for s in skeleton.steps:
        if s.skill in MOTION_SKILLS and "target" not in params[s.index]:
            raise _FormatProblem("missing_target", f"step {s.index} ({s.skill}) has no target")
    return ParameterizedPlan(tuple((s, params[s.index]) for s in skeleton.steps))


_FENCE = re.compile(r"```[A-Za-z0-9_-]*[ \t]*\n(.*?)```", re.DOTALL)


def extract_code(text: str) -> str:
    """Return the first fenced block if any, else the text itself."""
    m = _FENCE.search(text)
    body = m.group(1) if m else text
    return body.strip() + "\n" if body.strip() else ""


# ---------------------------------------------------------------------------
# prompts

def load_prompt(name: str) -> str:
    return resources.files("toolplan").joinpath("prompts", f"{name}.txt").read_text(encoding="utf-8")


def fill(template: str, **values: str) -> str:
    out = template
    for k, v in values.items():
        out = out.replace("{{" + k + "}}", v)
    return out


def skills_text(robot: RobotSpec | None) -> str:
    names = robot.skills if robot is not None else tuple(SKILL_DOCS)
    return "\n".join(f"- {SKILL_DOCS[n]}" for n in names if n in SKILL_DOCS)


@dataclass
class StageContext:
    backend: Backend
    transcript: Transcript
    robot: RobotSpec | None = None
    model_id: str = "gpt-4"
    temperature: float = 0.0
    max_tokens: int = 2048
    prompts: dict = field(default_factory=dict)

    def template(self, name: str) -> str:
        if name not in self.prompts:
            self.prompts[name] = load_prompt(name)
        return self.prompts[name]


REMINDERS = {
    "analyzer": "Reply again with exactly two sections, 'Analysis:' and 'Description:'.",
    "planner": "Reply again with exactly two sections, 'Description:' and 'Plan:', one numbered skill per step.",
    "calculator": "Reply again with exactly two sections, 'Description:' and 'Answer:', one 'Step <index>:' line per step.",
    "coder": "Reply again with only the plan script.",
}


def as_context(backend_or_ctx, robot: RobotSpec | None = None) -> StageContext:
    """Accept either a ready :class:`StageContext` or a bare backend."""
    if isinstance(backend_or_ctx, StageContext):
        return backend_or_ctx
    return StageContext(backend_or_ctx, Transcript(), robot)


def _ask(ctx: StageContext, stage: str, prompt: str, parse):
    """Send ``prompt``; on a format problem re-prompt once, then give up."""
    messages = [ChatMessage("system", SYSTEM_PROMPT), ChatMessage("user", prompt)]
    problem = None
    for attempt in range(2):
        request = CompletionRequest(tuple(messages), ctx.model_id, ctx.temperature, ctx.max_tokens)
        try:
            text = ctx.backend.complete(request, stage=stage, transcript=ctx.transcript)
        except LLMError as exc:
            raise PipelineError(stage, "backend", f"{type(exc).__name__}: {exc}") from exc
        try:
            return parse(text)
        except SectionError as exc:
            problem = _FormatProblem("missing_section", str(exc))
        except _FormatProblem as exc:
            problem = exc
        messages += [ChatMessage("assistant", text or " "),
                     ChatMessage("user", f"Your reply could not be used: {problem.message}. {REMINDERS[stage]}")]
    raise PipelineError(stage, problem.kind, problem.message)


# ---------------------------------------------------------------------------
# stages

def parse_analyzer_response(text: str) -> AnalyzerOutput:
    """Parse an Analyzer reply; raises ``ValueError`` on a format problem."""
    try:
        analysis, desc = parse_two_section(text, "Analysis", "Description")
        return AnalyzerOutput(analysis, parse_concepts(desc), desc)
    except _FormatProblem as exc:
        raise ValueError(exc.message) from None


def run_analyzer(L: str, ctx, robot: RobotSpec | None = None) -> AnalyzerOutput:
    ctx = as_context(ctx, robot)
    prompt = fill(ctx.template("analyzer"), description=L, skills=skills_text(ctx.robot))

    def parse(text):
        analysis, desc = parse_two_section(text, "Analysis", "Description")
        return AnalyzerOutput(analysis, parse_concepts(desc), desc)

    return _ask(ctx, "analyzer", prompt, parse)


def augment_description(L: str, out: AnalyzerOutput) -> str:
    """Append the Analyzer's description section to ``L``."""
    if not out.description_section.strip():
        return L
    sep = "" if L.endswith("\n") else "\n"
    return L + sep + "\n" + out.description_section + "\n"


def run_planner(L_star: str, ctx, robot: RobotSpec | None = None) -> PlanSkeleton:
    ctx = as_context(ctx, robot)
    prompt = fill(ctx.template("planner"), description=L_star, skills=skills_text(ctx.robot))
    allowed = set(ctx.robot.skills) if ctx.robot is not None else set(SIGNATURES)

    def parse(text):
        desc, plan = parse_two_section(text, "Description", "Plan")
        return PlanSkeleton(desc, parse_plan_lines(plan, allowed), raw=text)

    return _ask(ctx, "planner", prompt, parse)


def run_calculator(L_star: str, skeleton: PlanSkeleton, ctx, robot: RobotSpec | None = None) -> ParameterizedPlan:
    ctx = as_context(ctx, robot)
    plan_text = "\n".join(f"{s.index}. {s.skill}({s.arguments})" for s in skeleton.steps)
    prompt = fill(ctx.template("calculator"), description=L_star, plan=plan_text, skills=skills_text(ctx.robot))

    def parse(text):
        desc, answer = parse_two_section(text, "Description", "Answer")
        plan = parse_answer(answer, skeleton)
        return ParameterizedPlan(plan.steps, desc)

    return _ask(ctx, "calculator", prompt, parse)


def run_coder(plan, ctx, robot: RobotSpec | None = None) -> str:
    """``plan`` is a :class:`ParameterizedPlan`, a raw Planner reply or the query itself."""
    ctx = as_context(ctx, robot)
    plan_text = plan.render() if isinstance(plan, ParameterizedPlan) else str(plan)
    prompt = fill(ctx.template("coder"), plan=plan_text, skills=skills_text(ctx.robot), grammar=GRAMMAR)

    def parse(text):
        source = extract_code(text)
        try:
            program = parse_source(source)
        except PlanScriptSyntaxError as exc:
            raise _FormatProblem("parse_failure", str(exc)) from None
        if not program.statements:
            raise _FormatProblem("parse_failure", "the script is empty")
        if ctx.robot is not None:
            findings = static_check(program, ctx.robot)
            if findings:
                raise _FormatProblem("static_check", "; ".join(f.message for f in findings))
        return source

    return _ask(ctx, "coder", prompt, parse)


@dataclass
class PipelineResult:
    source: str
    analyzer: AnalyzerOutput | None
    skeleton: PlanSkeleton | None
    plan: ParameterizedPlan | None
    transcript: Transcript
    query: str
    augmented: str


def run_pipeline(task: TaskSpec, backend: Backend, ablation: AblationConfig = METHODS["full"], *,
                 transcript: Transcript | None = None, **ctx_options) -> PipelineResult:
    """Run the enabled stages for ``task``.

    Raises :class:`PipelineError` labelled with the failing stage; the
    transcript passed in (if any) keeps every call made before the failure.
    """
    transcript = transcript if transcript is not None else Transcript()
    ctx = StageContext(backend, transcript, task.scene.robot, **ctx_options)
    L = compose_query(task)
    L_star = L
    analyzer = skeleton = plan = None
    if ablation.use_analyzer:
        analyzer = run_analyzer(L, ctx)
        L_star = augment_description(L, analyzer)
    if not ablation.use_planner:
        coder_input = L
    else:
        skeleton = run_planner(L_star, ctx)
        if ablation.use_calculator:
            plan = run_calculator(L_star, skeleton, ctx)
            coder_input = plan
        else:
            coder_input = skeleton.raw
    source = run_coder(coder_input, ctx)
    return PipelineResult(source, analyzer, skeleton, plan, transcript, L, L_star)

