"""Follow one task through the four prompting stages using recorded replies.

Run with ``python3 demos/01_pipeline_walkthrough.py``. No network access or
API key is needed because the golden replay fixtures stand in for the model.
"""

# %% The task: a quadruped has to cross a gap that is too wide to step over.
from toolplan.benchmark import fixture_file, load_benchmark_task, resolve_fixture_root
from toolplan.harness import execute_script, trace_events
from toolplan.llm import ReplayBackend
from toolplan.pipeline import run_pipeline
from toolplan.scene import compose_query

task = load_benchmark_task("sofa-traversing")
print(compose_query(task))

# %% Replay the recorded model replies for the full method.
backend = ReplayBackend.from_file(fixture_file(resolve_fixture_root("golden"), task.key, "full"))
result = run_pipeline(task, backend)
print("stages called:", result.transcript.stages())

# %% The analyzer pulls out the quantity that matters and the limit it breaks.
for c in result.analyzer.concepts:
    print(f"key concept: {c.name} = {c.value} {c.unit} ({c.related_constraint})")

# %% Its description is appended to the query before planning.
print(result.augmented[len(result.query):])

# %% The planner names skills; the calculator fills in numbers.
print(result.plan.render())

# %% The coder turns the parameterised plan into a plan script.
print(result.source)

# %% Executing the script in the simulator.
trace = execute_script(task, result.source)
print("events:", trace_events(trace))
print("robot support at the end:", trace.final_snapshot["robot"]["support"])
