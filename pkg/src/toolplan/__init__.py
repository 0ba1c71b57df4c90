"""Staged LLM planning for robots that use scene objects as tools.

Subpackages: :mod:`toolplan.planscript` (the script language) and
:mod:`toolplan.sim` (the kinematic simulator).  Modules: :mod:`toolplan.scene`,
:mod:`toolplan.llm`, :mod:`toolplan.pipeline`, :mod:`toolplan.harness`,
:mod:`toolplan.cli`.
"""

__version__ = "0.1.0"
