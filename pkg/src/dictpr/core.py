"""Numeric foundation: validation helpers, matrix norms and sparsity measures.

Signals are plain 1-d ``complex128`` arrays and Hermitian matrices are 2-d
``complex128`` arrays; the helpers here validate and coerce them.  All
functions are pure.
"""
import numpy as np

from .errors import InvalidParameter, NumericFailure

#: magnitudes at or below this count as zero for sparsity and support
ZERO_TOL = 1e-12
#: componentwise tolerance for Hermitian symmetry after arithmetic
HERMITIAN_TOL = 1e-12
#: default relative rank tolerance (times the spectral radius)
RANK_RTOL = 1e-9


def as_vector(x, n=None, name="x"):
    """Coerce ``x`` to a finite 1-d complex array, optionally of length ``n``."""
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1 or v.size == 0:
        raise InvalidParameter(f"{name} must be a non-empty 1-d vector, got shape {v.shape}")
    if n is not None and v.size != n:
        raise InvalidParameter(f"{name} has length {v.size}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise InvalidParameter(f"{name} has non-finite entries")
    return v


def as_hermitian(X, n=None, name="X", tol=HERMITIAN_TOL):
    """Coerce ``X`` to a square complex array and check Hermitian symmetry.

    The symmetry tolerance is scaled by ``max(1, max|X|)`` so that large
    matrices built by arithmetic are not rejected for roundoff.
    """
    M = np.asarray(X, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InvalidParameter(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if n is not None and M.shape[0] != n:
        raise InvalidParameter(f"{name} has order {M.shape[0]}, expected {n}")
    if not np.all(np.isfinite(M)):
        raise InvalidParameter(f"{name} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.conj().T)) > tol * scale:
        raise InvalidParameter(f"{name} is not Hermitian")
    return M


def hermitian_part(X):
    """Return ``(X + X*)/2``; removes roundoff asymmetry."""
    M = np.asarray(X, dtype=np.complex128)
    return 0.5 * (M + M.conj().T)


def outer(u, v=None):
    """Return ``u v*`` (``u u*`` when ``v`` is omitted)."""
    u = np.asarray(u, dtype=np.complex128)
    v = u if v is None else np.asarray(v, dtype=np.complex128)
    return np.outer(u, v.conj())


def index_set(indices, size):
    """Return a sorted array of distinct indices into ``range(size)``."""
    idx = np.unique(np.asarray(indices, dtype=np.int64).ravel())
    if idx.size and (idx[0] < 0 or idx[-1] >= size):
        raise InvalidParameter(f"indices out of range [0, {size})")
    return idx


def support(x, tol=ZERO_TOL):
    """Indices of entries of ``x`` with magnitude above ``tol``."""
    return np.flatnonzero(np.abs(np.asarray(x)) > tol)


def frobenius_norm(X):
    """Frobenius norm ``sqrt(sum |X_jk|^2)``."""
    return float(np.linalg.norm(np.asarray(X, dtype=np.complex128), "fro"))


def entrywise_lq_norm(X, q):
    """Entrywise quasi-norm ``sum_jk |X_jk|^q`` for ``0 < q <= 1``.

    Note that this returns the q-th power (no outer ``1/q`` root), the form
    used by the lq-analysis model.  At ``q = 1`` it is the entrywise l1 norm.
    """
    if not 0.0 < q <= 1.0:
        raise InvalidParameter(f"q must lie in (0, 1], got {q}")
    a = np.abs(np.asarray(X, dtype=np.complex128))
    if q == 1.0:
        return float(a.sum())
    return float(np.sum(a[a > 0.0] ** q))


def row_sparsity(Z, tol=ZERO_TOL):
    """Number of rows of ``Z`` containing an entry of magnitude above ``tol``."""
    a = np.abs(np.asarray(Z))
    if a.ndim != 2:
        raise InvalidParameter("row_sparsity expects a matrix")
    return int(np.count_nonzero(np.any(a > tol, axis=1)))


def _eigh(X):
    try:
        return np.linalg.eigh(hermitian_part(X))
    except np.linalg.LinAlgError as exc:
        raise NumericFailure(f"Hermitian eigensolver failed: {exc}") from exc


def numerical_rank(X, tol=None):
    """Number of eigenvalues of Hermitian ``X`` with magnitude above ``tol``.

    ``tol`` defaults to ``1e-9`` times the spectral radius.
    """
    if tol is not None and tol <= 0:
        raise InvalidParameter("tol must be positive")
    w = np.abs(_eigh(X)[0])
    radius = float(w.max()) if w.size else 0.0
    if radius == 0.0:
        return 0
    if tol is None:
        tol = RANK_RTOL * radius
    return int(np.count_nonzero(w > tol))


def hermitian_top_eigenpair(X):
    """Eigenpair of ``X`` for the eigenvalue of largest magnitude.

    Returns
    -------
    lam : float
        The eigenvalue (signed).
    v : ndarray
        Unit-norm eigenvector, defined up to a unimodular factor.
    """
    w, V = _eigh(X)
    j = int(np.argmax(np.abs(w)))
    v = V[:, j]
    return float(w[j]), v / np.linalg.norm(v)


def hermitian_top_eigenpairs(X, count=2):
    """Largest (algebraic) eigenvalues with eigenvectors, in descending order."""
    w, V = _eigh(X)
    order = np.argsort(w)[::-1][:count]
    return w[order], V[:, order]
