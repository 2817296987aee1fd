"""Ascent kernel with a compiled fast path.

The Cython extension is picked at import time when available; set
NFSEC_BACKEND=python to force the numpy reference implementation or
NFSEC_BACKEND=compiled to insist on the extension (ImportError if missing).
"""
import os

from .py_kernel import (KernelProblem, SolveResult, objective_and_grad,
                        pair_values, softmin)
from . import py_kernel as _py

_choice = os.environ.get("NFSEC_BACKEND", "auto")
_ext = None
if _choice in ("auto", "compiled"):
    try:
        from . import _kernel as _ext
    except ImportError:
        if _choice == "compiled":
            raise ImportError(
                "NFSEC_BACKEND=compiled but the extension is not built; "
                "reinstall the package or use NFSEC_BACKEND=python")
        _ext = None
elif _choice != "python":
    raise ValueError(f"unknown NFSEC_BACKEND value: {_choice!r}")

BACKEND = "compiled" if _ext is not None else "python"


def solve_ascent(prob: KernelProblem, y0, tau_schedule, grad_tol=1e-6,
                 max_inner=200, beta=0.5, c_armijo=1e-4) -> SolveResult:
    if _ext is None:
        return _py.solve_ascent(prob, y0, tau_schedule, grad_tol=grad_tol,
                                max_inner=max_inner, beta=beta,
                                c_armijo=c_armijo)
    y, xi, g, n_iter, conv = _ext.solve_ascent(
        prob.m, prob.pk, prob.pe, prob.cst, prob.l1, prob.alpha, prob.q1,
        prob.q2a, prob.q2b, prob.l2, prob.ret, prob.radius, y0,
        tau_schedule, grad_tol, max_inner, beta, c_armijo)
    return SolveResult(y=y, xi=xi, g=g, iterations=n_iter, converged=conv)


def solve_ascent_with(backend: str, prob: KernelProblem, y0, tau_schedule,
                      grad_tol=1e-6, max_inner=200, beta=0.5,
                      c_armijo=1e-4) -> SolveResult:
    """Run a specific backend regardless of the import-time pick (used by
    the parity tests and the benchmark)."""
    if backend == "python":
        return _py.solve_ascent(prob, y0, tau_schedule, grad_tol=grad_tol,
                                max_inner=max_inner, beta=beta,
                                c_armijo=c_armijo)
    if backend == "compiled":
        if _ext is None:
            raise RuntimeError("compiled kernel is not available")
        y, xi, g, n_iter, conv = _ext.solve_ascent(
            prob.m, prob.pk, prob.pe, prob.cst, prob.l1, prob.alpha, prob.q1,
            prob.q2a, prob.q2b, prob.l2, prob.ret, prob.radius, y0,
            tau_schedule, grad_tol, max_inner, beta, c_armijo)
        return SolveResult(y=y, xi=xi, g=g, iterations=n_iter, converged=conv)
    raise ValueError(f"unknown backend: {backend!r}")


__all__ = ["BACKEND", "KernelProblem", "SolveResult", "solve_ascent",
           "solve_ascent_with", "objective_and_grad", "pair_values",
           "softmin"]
