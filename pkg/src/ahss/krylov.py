"""Krylov baselines: conjugate gradients and restarted GMRES.

Both solvers work in the real or complex field, stop on the relative
residual ``||b - A x|| <= tol * ||b||`` (confirmed by one explicit residual
at acceptance so recurrence drift cannot produce a false accept), and report
iteration counts and the recorded residual history.

GMRES counts total inner Arnoldi steps across restart cycles, not cycles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sparse import spmv

__all__ = ["KrylovConfig", "SolveReport", "cg", "gmres"]


@dataclass(frozen=True)
class KrylovConfig:
    """Stopping parameters: relative tolerance, iteration cap, GMRES restart."""

    tol: float = 1e-6
    maxit: int = 1000
    restart: int | None = None

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.maxit < 1:
            raise ValueError("maxit must be >= 1")
        if self.restart is not None and self.restart < 1:
            raise ValueError("restart must be >= 1 when given")


@dataclass
class SolveReport:
    """Outcome of one linear solve."""

    iterations: int
    final_relres: float
    converged: bool
    matvec_count: int
    reason: str = ""
    residual_history: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "iterations": self.iterations,
            "final_relres": self.final_relres,
            "converged": self.converged,
            "matvec_count": self.matvec_count,
            "reason": self.reason,
        }


def _zero_rhs_report(n, dtype):
    return np.zeros(n, dtype=dtype), SolveReport(0, 0.0, True, 0)


def cg(A, b, x0=None, cfg=KrylovConfig()):
    """Conjugate gradient method for Hermitian positive definite systems.

    Positive definiteness is not verified; loss of it surfaces as a
    breakdown report with reason ``"indefinite"``.

    Parameters
    ----------
    A : csr_matrix, Hermitian positive definite
    b : ndarray
    x0 : ndarray or None
        Initial guess; zeros when omitted.
    cfg : KrylovConfig

    Returns
    -------
    x : ndarray
    report : SolveReport
    """
    b = np.asarray(b)
    bnorm = np.linalg.norm(b)
    dtype = np.promote_types(A.dtype, b.dtype)
    if bnorm == 0.0:
        return _zero_rhs_report(A.shape[0], dtype)
    x = np.zeros(A.shape[0], dtype=dtype) if x0 is None else np.array(x0, dtype=dtype)
    matvecs = 0
    r = b - spmv(A, x)
    matvecs += 1
    p = r.copy()
    rr = np.vdot(r, r).real
    history = [np.sqrt(rr) / bnorm]
    if history[0] <= cfg.tol:
        return x, SolveReport(0, history[0], True, matvecs, residual_history=history)
    for k in range(1, cfg.maxit + 1):
        Ap = spmv(A, p)
        matvecs += 1
        pAp = np.vdot(p, Ap).real
        if pAp <= 1e-14 * np.linalg.norm(p) * np.linalg.norm(Ap):
            return x, SolveReport(k - 1, history[-1], False, matvecs,
                                  reason="indefinite", residual_history=history)
        alpha = rr / pAp
        x = x + alpha * p
        r = r - alpha * Ap
        rr_new = np.vdot(r, r).real
        est = np.sqrt(rr_new) / bnorm
        history.append(est)
        if est <= cfg.tol:
            # accept only on an explicitly recomputed residual
            r_true = b - spmv(A, x)
            matvecs += 1
            relres = np.linalg.norm(r_true) / bnorm
            if relres <= cfg.tol:
                history[-1] = relres
                return x, SolveReport(k, relres, True, matvecs, residual_history=history)
            r = r_true
            rr_new = np.vdot(r, r).real
        if not np.isfinite(rr_new):
            return x, SolveReport(k, history[-1], False, matvecs,
                                  reason="numerical_failure", residual_history=history)
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x, SolveReport(cfg.maxit, history[-1], False, matvecs,
                          reason="maxit", residual_history=history)


def _givens(a, b):
    """Givens rotation zeroing b: returns (c, s, r) with c real nonnegative."""
    if b == 0.0:
        return 1.0, 0.0 * a, a
    if a == 0.0:
        return 0.0, 1.0 + 0.0 * b, b
    t = np.hypot(abs(a), abs(b))
    c = abs(a) / t
    s = (a / abs(a)) * np.conj(b) / t
    return c, s, (a / abs(a)) * t


def gmres(A, b, x0=None, cfg=KrylovConfig()):
    """Restarted GMRES with modified Gram-Schmidt Arnoldi and Givens updates.

    ``cfg.restart`` is the cycle length; ``None`` means full GMRES (the
    cycle runs until convergence, breakdown, or ``maxit``).  The report
    counts total Arnoldi steps across cycles, and the recorded residual
    history holds the per-step recurrence estimates.

    Returns
    -------
    x : ndarray
    report : SolveReport
    """
    b = np.asarray(b)
    n = A.shape[0]
    bnorm = np.linalg.norm(b)
    dtype = np.promote_types(A.dtype, b.dtype)
    if bnorm == 0.0:
        return _zero_rhs_report(n, dtype)
    x = np.zeros(n, dtype=dtype) if x0 is None else np.array(x0, dtype=dtype)
    total = 0
    matvecs = 0
    history = []
    while True:
        r = b - spmv(A, x)
        matvecs += 1
        rnorm = np.linalg.norm(r)
        relres = rnorm / bnorm
        if relres <= cfg.tol:
            return x, SolveReport(total, relres, True, matvecs, residual_history=history)
        if total >= cfg.maxit:
            return x, SolveReport(total, relres, False, matvecs,
                                  reason="maxit", residual_history=history)
        cycle = min(cfg.restart or n, n, cfg.maxit - total)
        V = np.zeros((cycle + 1, n), dtype=dtype)
        H = np.zeros((cycle + 1, cycle), dtype=dtype)
        cs = np.zeros(cycle)
        sn = np.zeros(cycle, dtype=dtype)
        g = np.zeros(cycle + 1, dtype=dtype)
        V[0] = r / rnorm
        g[0] = rnorm
        accept = False
        j = 0
        for j in range(cycle):
            w = spmv(A, V[j])
            matvecs += 1
            for i in range(j + 1):
                H[i, j] = np.vdot(V[i], w)
                w = w - H[i, j] * V[i]
            hnext = np.linalg.norm(w)
            H[j + 1, j] = hnext
            total += 1
            lucky = hnext == 0.0
            if not lucky:
                V[j + 1] = w / hnext
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -np.conj(sn[i]) * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            c, s, diag = _givens(H[j, j], H[j + 1, j])
            cs[j], sn[j] = c, s
            H[j, j] = diag
            H[j + 1, j] = 0.0
            g[j + 1] = -np.conj(s) * g[j]
            g[j] = c * g[j]
            est = abs(g[j + 1]) / bnorm
            history.append(est)
            if not np.isfinite(est):
                return x, SolveReport(total, relres, False, matvecs,
                                      reason="numerical_failure", residual_history=history)
            if est <= cfg.tol or lucky:
                accept = True
                break
        k = j + 1
        y = np.linalg.solve(H[:k, :k], g[:k])
        x = x + V[:k].T @ y
        if accept:
            r = b - spmv(A, x)
            matvecs += 1
            relres = np.linalg.norm(r) / bnorm
            if relres <= cfg.tol:
                return x, SolveReport(total, relres, True, matvecs, residual_history=history)
        if total >= cfg.maxit:
            return x, SolveReport(total, relres, False, matvecs,
                                  reason="maxit", residual_history=history)
