"""Compare the five pipeline variants on every task and write a report.

Run with ``python3 demos/03_ablations_and_report.py [out_dir]``. The default
output directory is ``demo_report/``.
"""

# %% One replayed trial per task and method.
import sys

from toolplan.benchmark import TASK_IDS, fixture_file, load_benchmark_task, resolve_fixture_root
from toolplan.harness import emit_report, render_report, run_benchmark
from toolplan.llm import ReplayBackend
from toolplan.pipeline import METHODS

root = resolve_fixture_root("golden")


def golden(task: str, method: str, seed: int) -> ReplayBackend:
    return ReplayBackend.from_file(fixture_file(root, task, method))


tasks = [load_benchmark_task(k) for k in TASK_IDS]
table, records = run_benchmark(tasks, list(METHODS), 1, golden)

# %% Success rates are exact fractions until they are printed.
for m in table.methods:
    print(f"{m:15s} average {table.average(m)}")

# %% Failed trials are sorted into tool-use, logical and numerical errors.
for r in records:
    if not r.success:
        print(f"{r.task:17s} {r.method:15s} {r.failure_class}")

# %% The same tables as Markdown, plus CSV and Markdown files on disk.
print(render_report(records, "md"))
out = sys.argv[1] if len(sys.argv) > 1 else "demo_report"
print("wrote", [str(p) for p in emit_report(records, ["csv", "md"], out)])
