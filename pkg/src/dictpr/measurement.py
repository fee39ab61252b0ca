"""Quadratic phaseless measurements and phase-invariant error metrics.

An ensemble stores its vectors ``a_1, ..., a_m`` as the rows of an
``m x n`` array.  The map sends ``x`` to the intensities
``|<a_i, x>|^2 = |a_i^* x|^2`` and, linearly extended, a Hermitian ``X`` to
``a_i^* X a_i``.
"""
from dataclasses import dataclass
import csv
import math

import numpy as np

from . import kernels
from .core import as_hermitian, as_vector
from .errors import InvalidParameter


@dataclass(frozen=True, eq=False)
class MeasurementEnsemble:
    vectors: np.ndarray
    generator: str = "explicit"

    def __post_init__(self):
        A = np.array(self.vectors, dtype=np.complex128)
        if A.ndim != 2 or A.size == 0:
            raise InvalidParameter(f"ensemble must be a non-empty m x n array, got {A.shape}")
        if not np.all(np.isfinite(A)):
            raise InvalidParameter("ensemble has non-finite entries")
        A = np.ascontiguousarray(A)
        A.setflags(write=False)
        object.__setattr__(self, "vectors", A)

    @property
    def m(self):
        return self.vectors.shape[0]

    @property
    def n(self):
        return self.vectors.shape[1]


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    y: np.ndarray
    clean: np.ndarray
    noise: np.ndarray
    epsilon: float

    @property
    def m(self):
        return self.y.size


def gaussian_ensemble(m, n, seed=0):
    """I.i.d. standard complex Gaussian vectors, ``E|a_jk|^2 = 1``."""
    if m < 1 or n < 1:
        raise InvalidParameter("m and n must be positive")
    rng = np.random.default_rng(seed)
    A = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / math.sqrt(2.0)
    return MeasurementEnsemble(A, "complex_gaussian")


def basis_ensemble(n, scale=1.0):
    """The scaled standard basis ``scale * e_i``; blind to off-diagonal mass."""
    return MeasurementEnsemble(scale * np.eye(n, dtype=np.complex128), "basis")


def apply_map(ens, x):
    """Intensities ``|a_i^* x|^2``."""
    x = as_vector(x, ens.n)
    return kernels.intensities(ens.vectors, x)


def apply_lifted(ens, X):
    """``a_i^* X a_i`` for Hermitian ``X``; real and linear in ``X``."""
    X = as_hermitian(X, ens.n)
    A = ens.vectors
    return np.einsum("ij,jk,ik->i", A.conj(), X, A).real


def add_bounded_noise(clean, epsilon, seed=0):
    """Add Gaussian noise rescaled to have Euclidean norm exactly ``epsilon``."""
    if epsilon < 0:
        raise InvalidParameter("epsilon must be nonnegative")
    clean = np.asarray(clean, dtype=np.float64).copy()
    if epsilon == 0:
        noise = np.zeros_like(clean)
    else:
        rng = np.random.default_rng(seed)
        e = rng.standard_normal(clean.size)
        noise = e * (epsilon / np.linalg.norm(e))
    return MeasurementRecord(clean + noise, clean, noise, float(epsilon))


def inner(u, v):
    """``<u, v> = u^* v``."""
    return complex(np.vdot(u, v))


def align_phase(u, ref):
    """Return ``c u`` with ``|c| = 1`` minimizing ``||c u - ref||_2``.

    Afterwards ``<c u, ref>`` is real and nonnegative.  ``c = 1`` when the
    inner product vanishes.
    """
    u = np.asarray(u, dtype=np.complex128)
    w = inner(u, ref)
    if abs(w) == 0.0:
        return u.copy()
    return u * (w / abs(w))


def phase_aligned_distance(u, v):
    """``min_{|c|=1} ||c u - v||_2``.

    The minimizer is ``c = <u, v>/|<u, v>|``, giving
    ``sqrt(||u||^2 + ||v||^2 - 2|<u, v>|)``; the difference is formed
    explicitly to avoid cancellation when ``u`` is close to ``v``.
    """
    u = as_vector(u, name="u")
    v = as_vector(v, u.size, name="v")
    return float(np.linalg.norm(align_phase(u, v) - v))


def lifted_distance(u, v):
    """``||u u^* - v v^*||_F``.

    Equals ``sqrt(||u||^4 + ||v||^4 - 2|<u, v>|^2)``.  With ``d = u - v``
    (after phase alignment) the matrix is ``d u^* + v d^*``, whose norm is
    evaluated from Gram entries without cancellation.
    """
    u = as_vector(u, name="u")
    v = as_vector(v, u.size, name="v")
    u = align_phase(u, v)
    d = u - v
    # ||d u^* + v d^*||_F^2 = |d|^2|u|^2 + |v|^2|d|^2 + 2 Re(<d, v><u, d>)
    dd = np.vdot(d, d).real
    d2 = dd * np.vdot(u, u).real + dd * np.vdot(v, v).real \
        + 2.0 * (np.vdot(d, v) * np.vdot(u, d)).real
    return math.sqrt(max(float(d2), 0.0))


def save_record(record, path):
    """CSV with columns ``index,y,clean,noise``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "y", "clean", "noise"])
        for i in range(record.m):
            w.writerow([i, repr(float(record.y[i])), repr(float(record.clean[i])),
                        repr(float(record.noise[i]))])


def load_record(path, epsilon=None):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    y = np.array([float(r["y"]) for r in rows])
    clean = np.array([float(r["clean"]) for r in rows])
    noise = np.array([float(r["noise"]) for r in rows])
    eps = float(np.linalg.norm(noise)) if epsilon is None else float(epsilon)
    return MeasurementRecord(y, clean, noise, eps)
