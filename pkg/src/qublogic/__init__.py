"""Workbench for qualitative-uncertainty logics.

Exact evaluators for bi-Goedel and twist-product algebras, Belnap-Dunn
models, decision procedures over finite value grids, two-layered model
checkers with measure-property correspondence tests, the simple-inequality
translation into the Goedel two-layered language, LP-based order
representability, and Hilbert derivation checking.
"""

from . import algebra, bd, calculi, decide, kripke, measures, qp, syntax

__all__ = ["algebra", "bd", "calculi", "decide", "kripke", "measures", "qp", "syntax"]
__version__ = "0.1.0"
