"""Executable convergence certificates for alternating iterations.

The certification chain mirrors the classical theory for generalized
diagonally dominant matrices: a one-sided constructive test for the
dominance weight vector, an entrywise identity check qualifying a splitting
pair, and nonnegative power-iteration estimates of the spectral radii that
control synchronous and asynchronous convergence.  A report bundles the
estimates for the two half-step operators, the paired two-block operator,
the composed alternating operator, and (optionally, for small systems) the
summed absolute block product operator governing the asynchronous scheme.

Everything here is a pure function of its inputs.  "Not certified" is
one-sided: the constructive search can fail on matrices that do satisfy the
existential characterization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .sparse import canonical_csr, entrywise_abs

__all__ = [
    "PowerResult",
    "CertificateReport",
    "comparison_matrix",
    "spectral_radius_nonneg",
    "perron_vector",
    "h_matrix_certificate",
    "check_corollary_splitting",
    "sum_abs_block_products",
    "convergence_certificate",
]


def comparison_matrix(A):
    """Comparison matrix: moduli on the diagonal, negated moduli elsewhere.

    The diagonal is materialized (explicit zero) even when the input stores
    no diagonal entry.
    """
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"shape: square matrix required, got {A.shape}")
    absA = entrywise_abs(A)
    d = absA.diagonal()
    return canonical_csr(sp.diags(2.0 * d) - absA)


class PowerResult(NamedTuple):
    value: float
    converged: bool
    iterations: int


def spectral_radius_nonneg(B, tol=1e-10, maxit=100_000, shift=1e-3):
    """Spectral radius of an entrywise-nonnegative matrix by power iteration.

    Iterates ``x <- (B + shift*I) x`` from the all-ones vector with max-norm
    normalization, tracking the largest componentwise growth ratio.  The
    positive ``shift`` removes oscillation on periodic sparsity structures
    (two-block forms are the main client) and is subtracted from the
    estimate; successive estimates within ``tol * max(1, estimate)`` stop
    the iteration, as does an exactly stationary normalized iterate.

    Returns
    -------
    PowerResult
        Estimate, convergence flag, and iterations used.
    """
    if B.shape[0] != B.shape[1]:
        raise ValueError(f"shape: square matrix required, got {B.shape}")
    if B.nnz and B.data.min() < 0:
        raise ValueError("domain: matrix has a negative entry")
    n = B.shape[0]
    x = np.ones(n)
    lam_prev = None
    lam = 0.0
    for k in range(1, maxit + 1):
        y = B @ x + shift * x
        ymax = y.max()
        if ymax == 0.0:
            return PowerResult(0.0, True, k)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(x > 0, y / x, np.inf)
        lam = float(ratios.max())
        x_new = y / ymax
        if np.array_equal(x_new, x):
            return PowerResult(lam - shift, True, k)
        if lam_prev is not None and abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
            return PowerResult(lam - shift, True, k)
        x = x_new
        lam_prev = lam
    return PowerResult(lam - shift, False, maxit)


def perron_vector(B, eps=1e-12, tol=1e-12, maxit=100_000):
    """Approximate Perron vector of ``B + eps * ones`` for nonnegative B.

    The rank-one perturbation makes the iteration matrix positive, so the
    normalized iterate converges to a strictly positive vector.  Returns
    ``(w, converged)`` with ``w`` scaled to unit max-norm.
    """
    if B.nnz and B.data.min() < 0:
        raise ValueError("domain: matrix has a negative entry")
    n = B.shape[0]
    x = np.ones(n) / 1.0
    for _ in range(maxit):
        y = B @ x + eps * x.sum()
        y /= y.max()
        if np.max(np.abs(y - x)) <= tol:
            return y, True
        x = y
    return x, False


def h_matrix_certificate(A, tol=1e-10, maxit=None, damping=0.9):
    """Constructive search for a generalized diagonal dominance vector.

    Runs damped Jacobi sweeps on ``comparison_matrix(A) u = ones`` and
    accepts when the limit is strictly positive and every row satisfies the
    strict dominance inequality ``|A_ii| u_i > sum_{j != i} |A_ij| u_j``
    with relative slack at least ``tol``.

    Returns
    -------
    u : ndarray or None
        The weight vector, or None when not certified (which is not a proof
        of the negative).
    reason : str
        ``"ok"``, ``"zero_diagonal"``, ``"no_convergence"`` or
        ``"not_dominant"``.
    """
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"shape: square matrix required, got {A.shape}")
    n = A.shape[0]
    if maxit is None:
        maxit = 10 * n
    absA = entrywise_abs(A)
    d = absA.diagonal()
    if np.any(d == 0.0):
        return None, "zero_diagonal"
    offdiag = canonical_csr(absA - sp.diags(d))
    u = np.ones(n)
    converged = False
    for _ in range(maxit):
        u_new = (1.0 - damping) * u + damping * (1.0 + offdiag @ u) / d
        if not np.all(np.isfinite(u_new)):
            return None, "no_convergence"
        if np.max(np.abs(u_new - u)) <= 1e-14 * max(1.0, np.max(np.abs(u_new))):
            u = u_new
            converged = True
            break
        u = u_new
    if not converged:
        return None, "no_convergence"
    if np.any(u <= 0.0):
        return None, "not_dominant"
    lhs = d * u
    rhs = offdiag @ u
    if np.all(lhs - rhs >= tol * lhs):
        return u, "ok"
    return None, "not_dominant"


def check_corollary_splitting(A, M, F, tol=1e-12):
    """Entrywise identity qualifying a splitting pair for the certificate.

    True iff ``<M> - |M - A| == <A>`` and ``<F> - |F - A| == <A>`` hold to
    absolute tolerance on every structurally present entry.
    """
    if A.shape != M.shape or A.shape != F.shape or A.shape[0] != A.shape[1]:
        raise ValueError("shape: A, M, F must be square and equally sized")
    for W in (M, F):
        lhs = comparison_matrix(W) - entrywise_abs(canonical_csr(W - A))
        diff = canonical_csr(lhs - comparison_matrix(A))
        if diff.nnz and np.max(np.abs(diff.data)) > tol:
            return False
    return True


def sum_abs_block_products(T_second, T_first, part):
    """Sum over blocks of ``|T_second[:, block] @ T_first[block, :]|``.

    This is the nonnegative operator whose spectral radius controls the
    asynchronous two-stage scheme; it dominates ``|T_second @ T_first|``
    entrywise.
    """
    total = None
    for start, stop in part.ranges:
        piece = entrywise_abs(canonical_csr(
            T_second[:, start:stop] @ T_first[start:stop, :]))
        total = piece if total is None else total + piece
    return canonical_csr(total)


@dataclass
class CertificateReport:
    """Convergence analysis outcome for a splitting pair.

    ``rho_t_m`` and ``rho_t_f`` estimate the radii of the absolute
    half-step operators ``|I - M^-1 A|`` and ``|I - F^-1 A|``; ``rho_q``
    the paired two-block operator built from them; ``rho_alt`` the absolute
    composed alternating operator; ``rho_sum_p`` (when computed) the summed
    absolute block product operator for a given partition.
    """

    is_h_matrix: bool
    h_vector: np.ndarray | None
    h_reason: str
    corollary_splitting_ok: bool
    rho_t_m: float
    rho_t_f: float
    rho_q: float
    rho_alt: float
    rho_sum_p: float | None
    power_iterations_used: int
    converged: dict

    def to_dict(self):
        return {
            "is_h_matrix": self.is_h_matrix,
            "h_vector": None if self.h_vector is None else list(map(float, self.h_vector)),
            "h_reason": self.h_reason,
            "corollary_splitting_ok": self.corollary_splitting_ok,
            "rho_t_m": self.rho_t_m,
            "rho_t_f": self.rho_t_f,
            "rho_q": self.rho_q,
            "rho_alt": self.rho_alt,
            "rho_sum_p": self.rho_sum_p,
            "power_iterations_used": self.power_iterations_used,
            "converged": self.converged,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _diagonal_of(Mat, name):
    off = canonical_csr(Mat - sp.diags(Mat.diagonal(), shape=Mat.shape))
    if off.nnz and np.max(np.abs(off.data)) != 0.0:
        raise ValueError(f"unsupported_splitting: {name} must be diagonal")
    d = Mat.diagonal()
    if np.any(d == 0.0):
        raise ValueError(f"unsupported_splitting: {name} has a zero diagonal entry")
    return d


def convergence_certificate(A, M, F, tol=1e-10, maxit=100_000, with_sum_p=False,
                            partition=None, sum_p_cap=2048, shift=1e-3):
    """Assemble the absolute iteration operators and estimate their radii.

    ``M`` and ``F`` must be diagonal (given as sparse matrices) so the
    half-step operators can be formed explicitly.  When ``with_sum_p`` is
    set and a partition is given, the summed absolute block product
    operator is also assembled, which is quadratic-ish in memory and
    therefore capped at ``sum_p_cap`` unknowns.

    Returns
    -------
    CertificateReport
    """
    if A.shape[0] != A.shape[1] or A.shape != M.shape or A.shape != F.shape:
        raise ValueError("shape: A, M, F must be square and equally sized")
    n = A.shape[0]
    m_diag = _diagonal_of(M, "M")
    f_diag = _diagonal_of(F, "F")
    eye = sp.identity(n, dtype=A.dtype, format="csr")
    T_m = canonical_csr(eye - sp.diags(1.0 / m_diag) @ A)
    T_f = canonical_csr(eye - sp.diags(1.0 / f_diag) @ A)
    T_m_abs = entrywise_abs(T_m)
    T_f_abs = entrywise_abs(T_f)
    Q_abs = canonical_csr(sp.bmat([[None, T_m_abs], [T_f_abs, None]]))
    alt_abs = entrywise_abs(canonical_csr(T_f @ T_m))

    est_m = spectral_radius_nonneg(T_m_abs, tol, maxit, shift)
    est_f = spectral_radius_nonneg(T_f_abs, tol, maxit, shift)
    est_q = spectral_radius_nonneg(Q_abs, tol, maxit, shift)
    est_alt = spectral_radius_nonneg(alt_abs, tol, maxit, shift)
    iterations = est_m.iterations + est_f.iterations + est_q.iterations + est_alt.iterations
    converged = {
        "rho_t_m": est_m.converged,
        "rho_t_f": est_f.converged,
        "rho_q": est_q.converged,
        "rho_alt": est_alt.converged,
        "rho_sum_p": None,
    }

    rho_sum_p = None
    if with_sum_p and partition is not None:
        if n > sum_p_cap:
            raise ValueError(f"too_large: n = {n} exceeds the cap {sum_p_cap}")
        est_p = spectral_radius_nonneg(
            sum_abs_block_products(T_f, T_m, partition), tol, maxit, shift)
        rho_sum_p = est_p.value
        converged["rho_sum_p"] = est_p.converged
        iterations += est_p.iterations

    u, reason = h_matrix_certificate(A)
    return CertificateReport(
        is_h_matrix=u is not None,
        h_vector=u,
        h_reason=reason,
        corollary_splitting_ok=check_corollary_splitting(A, M, F),
        rho_t_m=est_m.value,
        rho_t_f=est_f.value,
        rho_q=est_q.value,
        rho_alt=est_alt.value,
        rho_sum_p=rho_sum_p,
        power_iterations_used=iterations,
        converged=converged,
    )
