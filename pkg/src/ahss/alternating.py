"""Synchronous alternating solvers built on Hermitian/skew-Hermitian splits.

Two variants are provided.  ``hss_inexact`` is the outer residual-updating
loop with pluggable inner solvers for the two shifted operators; each outer
iteration performs two correction solves with zero initial guess and an
explicit residual recomputation after each half-step.  ``hss_stationary`` is
its specialization to diagonal preconditioners: one division per half-step,
no inner loop.  With a single Jacobi-preconditioned Richardson step as inner
solver the two produce bitwise identical iterates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .krylov import KrylovConfig, SolveReport, cg, gmres
from .sparse import canonical_csr, hermitian_split, spmv

__all__ = [
    "HssOperators",
    "DiagonalSplitting",
    "InnerSolver",
    "HssReport",
    "build_hss_operators",
    "hss_diagonal_splitting",
    "hss_inexact",
    "hss_stationary",
]


@dataclass(frozen=True)
class HssOperators:
    """Shifted operators ``alpha*I + H`` and ``alpha*I + S`` for ``alpha > 0``."""

    shifted_hermitian: sp.csr_matrix
    shifted_skew: sp.csr_matrix
    alpha: float


@dataclass(frozen=True)
class DiagonalSplitting:
    """Diagonals of the two splitting matrices; no entry may be zero."""

    m_diag: np.ndarray
    f_diag: np.ndarray

    def __post_init__(self):
        if self.m_diag.shape != self.f_diag.shape or self.m_diag.ndim != 1:
            raise ValueError("shape: splitting diagonals must be equal-length vectors")
        if np.any(self.m_diag == 0) or np.any(self.f_diag == 0):
            raise ValueError("singular_splitting: zero diagonal entry")

    @property
    def n(self):
        return self.m_diag.shape[0]

    def as_matrices(self):
        """The splitting pair as explicit sparse diagonal matrices."""
        return (sp.diags(self.m_diag, format="csr"),
                sp.diags(self.f_diag, format="csr"))


@dataclass(frozen=True)
class InnerSolver:
    """Inner solver choice for one half-step of ``hss_inexact``.

    ``kind`` is one of ``"cg"``, ``"gmres"`` or ``"richardson"`` (Jacobi
    preconditioned Richardson, used mainly to reproduce the stationary
    scheme with ``maxit=1``).
    """

    kind: str
    tol: float = 1e-10
    maxit: int = 10_000
    restart: int | None = None

    def __post_init__(self):
        if self.kind not in ("cg", "gmres", "richardson"):
            raise ValueError(f"unknown inner solver kind {self.kind!r}")

    def solve(self, B, rhs):
        cfg = KrylovConfig(tol=self.tol, maxit=self.maxit, restart=self.restart)
        if self.kind == "cg":
            return cg(B, rhs, None, cfg)
        if self.kind == "gmres":
            return gmres(B, rhs, None, cfg)
        return _richardson_jacobi(B, rhs, self.maxit)


def _richardson_jacobi(B, rhs, maxit):
    d = B.diagonal()
    y = np.zeros_like(rhs)
    for _ in range(maxit):
        y = y + (rhs - spmv(B, y)) / d
    return y, SolveReport(maxit, np.nan, True, maxit)


@dataclass
class HssReport:
    """Outcome of one alternating solve: outer count plus inner totals."""

    iterations: int
    inner_iterations: int
    final_relres: float
    converged: bool
    matvec_count: int
    reason: str = ""

    def to_dict(self):
        return {
            "iterations": self.iterations,
            "inner_iterations": self.inner_iterations,
            "final_relres": self.final_relres,
            "converged": self.converged,
            "matvec_count": self.matvec_count,
            "reason": self.reason,
        }


def build_hss_operators(A, alpha):
    """Form ``alpha*I + H`` and ``alpha*I + S`` from the Hermitian split of A."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    H, S = hermitian_split(A)
    eye = sp.identity(A.shape[0], dtype=A.dtype, format="csr")
    return HssOperators(canonical_csr(alpha * eye + H),
                        canonical_csr(alpha * eye + S), alpha)


def hss_diagonal_splitting(A, alpha):
    """Diagonal splitting pair ``diag(alpha*I + H)``, ``diag(alpha*I + S)``.

    For real matrices the skew part has zero diagonal, so the second
    diagonal is constant ``alpha``.  Raises when a resulting entry is zero.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"shape: square matrix required, got {A.shape}")
    d = A.diagonal()
    if np.iscomplexobj(d):
        m_diag = alpha + d.real.astype(np.complex128)
        f_diag = alpha + 1j * d.imag
    else:
        m_diag = alpha + d
        f_diag = np.full_like(d, alpha)
    return DiagonalSplitting(m_diag, f_diag)


def hss_inexact(A, b, alpha, inner_h, inner_s, eps=1e-6, kmax=10**6, x0=None,
                callback=None):
    """Alternating outer iteration with inner solves of the shifted systems.

    Each outer iteration solves ``(alpha*I + H) y = r`` and then
    ``(alpha*I + S) y = r`` as correction equations from a zero initial
    guess, applying the correction and recomputing the residual after each
    half-step.  Stops when ``||r|| <= eps * ||b||``.

    Parameters
    ----------
    A : csr_matrix
    b : ndarray
    alpha : float
        Positive shift.
    inner_h, inner_s : InnerSolver
        Solvers for the shifted Hermitian and shifted skew-Hermitian
        half-steps.  CG on the first requires the Hermitian part to be
        positive semidefinite.
    eps : float
        Outer relative residual threshold.
    kmax : int
        Outer iteration cap.
    x0 : ndarray or None
    callback : callable or None
        Called as ``callback(k, x)`` after each outer iteration.

    Returns
    -------
    x : ndarray
    report : HssReport
    """
    ops = build_hss_operators(A, alpha)
    b = np.asarray(b)
    bnorm = np.linalg.norm(b)
    dtype = np.promote_types(A.dtype, b.dtype)
    if bnorm == 0.0:
        return np.zeros(A.shape[0], dtype=dtype), HssReport(0, 0, 0.0, True, 0)
    x = np.zeros(A.shape[0], dtype=dtype) if x0 is None else np.array(x0, dtype=dtype)
    r = b - spmv(A, x)
    matvecs = 1
    k = 0
    k_in = 0
    while np.linalg.norm(r) > eps * bnorm and k < kmax:
        for op, solver in ((ops.shifted_hermitian, inner_h),
                           (ops.shifted_skew, inner_s)):
            y, rep = solver.solve(op, r)
            k_in += rep.iterations
            matvecs += rep.matvec_count
            if rep.reason == "numerical_failure":
                return x, HssReport(k, k_in, np.linalg.norm(r) / bnorm, False,
                                    matvecs, reason="numerical_failure")
            x = x + y
            r = b - spmv(A, x)
            matvecs += 1
        if not np.all(np.isfinite(r)):
            return x, HssReport(k, k_in, np.inf, False, matvecs,
                                reason="numerical_failure")
        k += 1
        if callback is not None:
            callback(k, x.copy())
    relres = np.linalg.norm(r) / bnorm
    converged = relres <= eps
    return x, HssReport(k, k_in, relres, converged, matvecs,
                        reason="" if converged else "maxit")


def hss_stationary(A, b, split, eps=1e-6, kmax=10**6, x0=None, callback=None):
    """Stationary alternating iteration with diagonal splitting matrices.

    One outer iteration applies the two half-steps in sequence, recomputing
    the residual explicitly after each:

        x += r / m_diag;  r = b - A x;  x += r / f_diag;  r = b - A x

    The loop test reuses the last computed residual (no extra product).

    Returns
    -------
    x : ndarray
    report : SolveReport
        ``iterations`` is the outer count; a non-finite iterate aborts with
        reason ``"diverged"`` and the offending iteration index in it.
    """
    b = np.asarray(b)
    bnorm = np.linalg.norm(b)
    dtype = np.promote_types(np.promote_types(A.dtype, b.dtype), split.m_diag.dtype)
    if bnorm == 0.0:
        return np.zeros(A.shape[0], dtype=dtype), SolveReport(0, 0.0, True, 0)
    if split.n != A.shape[0]:
        raise ValueError("shape: splitting length does not match the matrix")
    x = np.zeros(A.shape[0], dtype=dtype) if x0 is None else np.array(x0, dtype=dtype)
    r = b - spmv(A, x)
    matvecs = 1
    k = 0
    history = [np.linalg.norm(r) / bnorm]
    while np.linalg.norm(r) > eps * bnorm and k < kmax:
        x = x + r / split.m_diag
        r = b - spmv(A, x)
        x = x + r / split.f_diag
        r = b - spmv(A, x)
        matvecs += 2
        k += 1
        if not np.all(np.isfinite(x)):
            return x, SolveReport(k, np.inf, False, matvecs,
                                  reason=f"diverged at iteration {k}",
                                  residual_history=history)
        history.append(np.linalg.norm(r) / bnorm)
        if callback is not None:
            callback(k, x.copy())
    relres = np.linalg.norm(r) / bnorm
    converged = relres <= eps
    return x, SolveReport(k, relres, converged, matvecs,
                          reason="" if converged else "maxit",
                          residual_history=history)
