"""Sparse CSR kernels over a unified real/complex scalar field.

Matrices are ``scipy.sparse.csr_matrix`` instances kept in canonical form:
sorted, duplicate-free column indices within each row.  Vectors are 1-D
numpy arrays.  The scalar field (float64 or complex128) is fixed per matrix
at construction; real matrices stay real through every kernel here.

Summation order is the CSR traversal order (ascending column index within a
row), so repeated runs of the synchronous solvers are bit-reproducible and
block-row slices reproduce the full-matrix products bitwise.

All functions are pure; every object is safe to share across threads.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

__all__ = [
    "make_csr",
    "canonical_csr",
    "validate_csr",
    "spmv",
    "hermitian_split",
    "entrywise_abs",
    "tau_rowsum",
    "weighted_max_norm",
    "weighted_vector_norm",
]

_REAL = np.float64
_COMPLEX = np.complex128


def _field_dtype(dtype):
    """Map an input dtype onto the scalar field: float64 or complex128."""
    return _COMPLEX if np.issubdtype(np.dtype(dtype), np.complexfloating) else _REAL


def make_csr(rows, cols, values, shape):
    """Build a canonical CSR matrix from triplets.

    Duplicate (row, col) pairs are rejected rather than summed.
    """
    rows = np.asarray(rows, dtype=np.intp)
    cols = np.asarray(cols, dtype=np.intp)
    values = np.asarray(values)
    coo = sp.coo_matrix((values.astype(_field_dtype(values.dtype)), (rows, cols)),
                        shape=shape)
    keys = coo.row * coo.shape[1] + coo.col
    if np.unique(keys).size != keys.size:
        raise ValueError("duplicate (row, col) entries are forbidden")
    return canonical_csr(coo)


def canonical_csr(A):
    """Return ``A`` as CSR with summed duplicates and sorted indices."""
    A = sp.csr_matrix(A)
    A.sum_duplicates()
    A.sort_indices()
    if A.dtype != _field_dtype(A.dtype):
        A = A.astype(_field_dtype(A.dtype))
    return A


def validate_csr(A):
    """Check the CSR structural invariants, raising ``ValueError`` on failure."""
    if not sp.issparse(A) or A.format != "csr":
        raise ValueError("expected a CSR matrix")
    indptr, indices = A.indptr, A.indices
    if indptr.shape[0] != A.shape[0] + 1 or indptr[0] != 0:
        raise ValueError("row offsets malformed")
    if np.any(np.diff(indptr) < 0) or indptr[-1] != A.data.shape[0]:
        raise ValueError("row offsets not nondecreasing")
    if indices.size and (indices.min() < 0 or indices.max() >= A.shape[1]):
        raise ValueError("column index out of range")
    for i in range(A.shape[0]):
        row = indices[indptr[i]:indptr[i + 1]]
        if row.size > 1 and np.any(np.diff(row) <= 0):
            raise ValueError("column indices must be strictly increasing per row")
    return A


def spmv(A, x):
    """Matrix-vector product ``y = A x`` with fixed CSR summation order.

    Parameters
    ----------
    A : csr_matrix
    x : ndarray, shape (A.shape[1],)

    Returns
    -------
    ndarray, shape (A.shape[0],)
    """
    x = np.asarray(x)
    if x.ndim != 1 or A.shape[1] != x.shape[0]:
        raise ValueError(f"shape: matrix is {A.shape}, vector has length {x.shape}")
    return A @ x


def hermitian_split(A):
    """Split a square matrix into Hermitian and skew-Hermitian parts.

    Returns ``(H, S)`` with ``H = (A + A^H)/2``, ``S = (A - A^H)/2``; real
    input yields the symmetric/antisymmetric parts in the real field.
    """
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"shape: square matrix required, got {A.shape}")
    AH = canonical_csr(A.conjugate().transpose())
    H = canonical_csr((A + AH) * 0.5)
    S = canonical_csr((A - AH) * 0.5)
    return H, S


def entrywise_abs(A):
    """Entrywise modulus ``|A|``: same sparsity pattern, real-valued."""
    A = canonical_csr(A)
    return sp.csr_matrix((np.abs(A.data).astype(_REAL), A.indices.copy(),
                          A.indptr.copy()), shape=A.shape)


def tau_rowsum(A, w, v):
    """Weighted row sums ``tau_i = (1/v_i) * sum_j |A_ij| w_j``.

    ``w`` weighs the columns, ``v`` scales the rows; both must be real and
    ``v`` must have no zero entry.
    """
    w = np.asarray(w)
    v = np.asarray(v)
    if w.ndim != 1 or w.shape[0] != A.shape[1] or v.ndim != 1 or v.shape[0] != A.shape[0]:
        raise ValueError(f"shape: matrix is {A.shape}, weights have lengths "
                         f"{w.shape[0] if w.ndim == 1 else w.shape} and "
                         f"{v.shape[0] if v.ndim == 1 else v.shape}")
    if np.iscomplexobj(w) or np.iscomplexobj(v):
        raise ValueError("weights: w and v must be real")
    if np.any(v == 0):
        raise ValueError("weights: v must have no zero entry")
    return (entrywise_abs(A) @ w.astype(_REAL)) / v


def weighted_max_norm(T, w):
    """Weighted max-norm ``max_i (1/w_i) sum_j |T_ij| w_j`` for ``w > 0``.

    Equals the largest entry of ``tau_rowsum(T, w, w)`` by construction
    (identical summation order).
    """
    if T.shape[0] != T.shape[1]:
        raise ValueError(f"shape: square matrix required, got {T.shape}")
    return float(tau_rowsum(T, w, w).max())


def weighted_vector_norm(x, w):
    """Weighted max-norm of a vector: ``max_i |x_i| / w_i``."""
    return float(np.max(np.abs(np.asarray(x)) / np.asarray(w)))
