"""Watch the simulator enforce robot limits, then get around them with a tool.

Run with ``python3 demos/02_simulator_constraints.py``.
"""

# %% Helpers: run a script on a fresh copy of a task and report the outcome.
from toolplan.benchmark import load_benchmark_task
from toolplan.harness import execute_script
from toolplan.sim import task_success


def attempt(key: str, source: str) -> None:
    task = load_benchmark_task(key)
    trace = execute_script(task, source)
    if trace.error is None:
        print(f"{key}: ok, task solved = {task_success(task, trace.final_snapshot)}")
    else:
        print(f"{key}: {trace.error['kind']} {trace.error['values']}")


# %% Walking straight across the wide gap fails; the small-gap variant is fine.
walk = "walk_to_position([2.5, 0.6, 0.4])\n"
attempt("sofa-traversing", walk)
attempt("sofa-traversing:small-gap", walk)

# %% Pushing the surfboard across the gap first makes the same walk succeed.
attempt("sofa-traversing", "push_to_position('surfboard', [1.65, 0.3, 0.42])\n" + walk)

# %% The sofa is too high to climb in one step.
attempt("sofa-climbing", "climb_to_position([2.0, 0.0, 0.6])\n")

# %% The arm cannot reach the milk directly.
attempt("milk-reaching", "move_to_position([0.7, 0.0, 0.1])\n")

# %% Pushes run as rotate, then y, then x. Each phase is recorded.
from toolplan.sim import World  # noqa: E402

world = World(load_benchmark_task("sofa-traversing").scene)
world.call("push_to_position", "surfboard", [1.65, 0.3, 0.42])
for phase in world.last_detail["phases"]:
    print(phase["phase"], "skipped" if phase["skipped"] else f"pose {phase['pose']}")
