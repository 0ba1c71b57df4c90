"""Does the pipeline use a tool only when the scene calls for one?

Each family has a hard variant, where a tool is needed, and an easy variant,
where it is not. Run with ``python3 demos/04_discriminative_tool_use.py``.
"""

# %% Replay the full method on both variants of each family.
from toolplan.benchmark import VARIANTS, fixture_file, resolve_fixture_root
from toolplan.harness import run_discriminative
from toolplan.llm import ReplayBackend

root = resolve_fixture_root("golden")


def golden(task: str, method: str, seed: int) -> ReplayBackend:
    return ReplayBackend.from_file(fixture_file(root, task, method))


for family, variants in VARIANTS.items():
    results = run_discriminative(family, list(variants), "full", golden, n=1)
    for v, r in results.items():
        verdict = "matches" if r.matches_oracle else "differs from"
        print(f"{family:16s} {v:10s} tool-use rate {float(r.rate):.2f} ({verdict} the oracle)")
