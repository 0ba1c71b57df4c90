"""A short tour of the plan-script language.

Run with ``python3 demos/05_planscript_tour.py``.
"""

# %% Parsing gives a tree; printing gives a canonical form.
from toolplan.benchmark import load_benchmark_task
from toolplan.planscript import PlanScriptSyntaxError, parse_source, pretty_print, static_check

src = "p=get_position( 'milk' )\nmove_to_position(p+[0,0,.1m])  # approach from above\n"
prog = parse_source(src)
print(prog.statements[1])
print(pretty_print(prog))

# %% Syntax errors carry a line and a column.
for bad in ["a = 3cm", "a = [1, 2]", "get_position('milk"]:
    try:
        parse_source(bad)
    except PlanScriptSyntaxError as exc:
        print(f"{bad!r:24} line {exc.line} col {exc.col}: {exc.message}")

# %% Static checks catch skills the robot does not have.
arm = load_benchmark_task("milk-reaching").scene.robot
for f in static_check(parse_source("climb_to_position([0.5, 0, 0.2])\n"), arm):
    print(f.kind, "-", f.message)

# %% Units are checked at run time.
from toolplan.harness import execute_script  # noqa: E402

trace = execute_script(load_benchmark_task("milk-reaching"), "move_to_position([0.3, 0, 0.2kg])\n")
print(trace.error)
