"""Parseval tight-frame dictionaries and dictionary-sparse ground truth.

A dictionary is an ``n x N`` complex matrix ``D`` with ``D D^* = I_n``.
Three families are provided:

``identity``
    ``D = I_n`` (requires ``n == N``).
``truncated_unitary``
    First ``n`` rows of a Haar-random ``N x N`` unitary.
``harmonic_frame``
    First ``n`` rows of the unitary ``N``-point DFT matrix.

Because the rows of a unitary matrix are orthonormal, every family is a
Parseval frame, so the analysis operator ``x -> D^* x`` is an isometry.
"""
from dataclasses import dataclass
import math

import numpy as np

from .core import as_vector, index_set
from .errors import InvalidParameter

FAMILIES = ("identity", "truncated_unitary", "harmonic_frame")


@dataclass(frozen=True, eq=False)
class Dictionary:
    matrix: np.ndarray
    family: str = "explicit"

    def __post_init__(self):
        D = np.array(self.matrix, dtype=np.complex128)
        if D.ndim != 2 or D.shape[0] > D.shape[1] or D.size == 0:
            raise InvalidParameter(f"dictionary must be n x N with n <= N, got {D.shape}")
        D.setflags(write=False)
        object.__setattr__(self, "matrix", D)

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def N(self):
        return self.matrix.shape[1]

    @property
    def is_unitary(self):
        """True when ``D`` is square, so the analysis prox is exact."""
        return self.n == self.N

    def frame_error(self):
        """``max |D D^* - I|``."""
        D = self.matrix
        return float(np.max(np.abs(D @ D.conj().T - np.eye(self.n))))


@dataclass(frozen=True, eq=False)
class SparseCoefficients:
    z: np.ndarray
    support: np.ndarray
    k: int


def _haar_unitary(N, rng):
    G = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / math.sqrt(2.0)
    Q, R = np.linalg.qr(G)
    # fix the phases of R's diagonal so Q is Haar distributed
    d = np.diagonal(R)
    ph = d / np.where(np.abs(d) > 0, np.abs(d), 1.0)
    return Q * ph[None, :]


def dft_matrix(N):
    """Unitary DFT matrix ``F[j, l] = exp(-2 pi i j l / N) / sqrt(N)``."""
    jl = np.outer(np.arange(N), np.arange(N)) % N
    return np.exp(-2j * np.pi * jl / N) / math.sqrt(N)


def make_dictionary(family, n, N, seed=0):
    """Build a Parseval dictionary from one of :data:`FAMILIES`.

    ``seed`` only affects ``truncated_unitary``.
    """
    if n < 1 or N < 1:
        raise InvalidParameter("n and N must be positive")
    if n > N:
        raise InvalidParameter(f"need n <= N, got n={n}, N={N}")
    if family == "identity":
        if n != N:
            raise InvalidParameter("identity dictionary requires n == N")
        D = np.eye(n, dtype=np.complex128)
    elif family == "truncated_unitary":
        D = _haar_unitary(N, np.random.default_rng(seed))[:n, :]
    elif family == "harmonic_frame":
        D = dft_matrix(N)[:n, :]
    else:
        raise InvalidParameter(f"unknown dictionary family {family!r}; choose from {FAMILIES}")
    return Dictionary(D, family)


def analysis(D, x):
    """Analysis coefficients ``D^* x``."""
    x = as_vector(x, D.n)
    return D.matrix.conj().T @ x


def synthesize(D, z):
    """Synthesis ``D z``; accepts :class:`SparseCoefficients` or a plain vector."""
    if isinstance(z, SparseCoefficients):
        z = z.z
    z = as_vector(z, D.N, name="z")
    return D.matrix @ z


def top_k_support(c, k):
    """Indices of the ``k`` largest-magnitude entries of ``c``, sorted.

    Ties go to the smaller index.
    """
    a = np.abs(np.asarray(c))
    order = np.lexsort((np.arange(a.size), -a))
    return np.sort(order[:k])


def random_dictionary_sparse_signal(D, k, seed=0, norm=1.0):
    """Draw ``x0 = D z0`` with ``z0`` k-sparse and ``||x0||_2 = norm``.

    The support is uniform among k-subsets and the nonzero entries are
    standard complex Gaussian; ``z0`` is rescaled together with ``x0`` so
    that ``x0 = D z0`` holds exactly.
    """
    if not 1 <= k <= D.N:
        raise InvalidParameter(f"k must lie in [1, {D.N}], got {k}")
    if norm <= 0:
        raise InvalidParameter("norm must be positive")
    rng = np.random.default_rng(seed)
    while True:
        supp = np.sort(rng.choice(D.N, size=k, replace=False))
        z = np.zeros(D.N, dtype=np.complex128)
        z[supp] = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / math.sqrt(2.0)
        x = D.matrix @ z
        nx = np.linalg.norm(x)
        if nx > 1e-12:
            break
    scale = norm / nx
    return x * scale, SparseCoefficients(z * scale, index_set(supp, D.N), k)


def format_complex(v):
    """Round-trippable ``re+imj`` token (``complex(token)`` parses it back)."""
    re, im = repr(float(v.real)), repr(float(v.imag))
    sign = "" if im.startswith("-") else "+"
    return f"{re}{sign}{im}j"


def write_complex_matrix(path, M, header):
    lines = [header]
    for row in np.atleast_2d(M):
        lines.append(" ".join(format_complex(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_complex_matrix(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = lines[0].split()
    rows = [[complex(tok) for tok in ln.split()] for ln in lines[1:]]
    return header, np.array(rows, dtype=np.complex128)


def save_dictionary(D, path):
    """Write ``D`` as a header ``n N family`` followed by ``n`` rows of ``N`` tokens."""
    write_complex_matrix(path, D.matrix, f"{D.n} {D.N} {D.family}")


def load_dictionary(path):
    header, M = read_complex_matrix(path)
    n, N, family = int(header[0]), int(header[1]), header[2]
    if M.shape != (n, N):
        raise InvalidParameter(f"{path}: header says {n}x{N}, body is {M.shape}")
    return Dictionary(M, family)
