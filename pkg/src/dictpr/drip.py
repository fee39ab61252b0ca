"""Sampled estimates of the l1-DRIP and lq-DRIP constants, and the recovery
conditions and stability constant they feed.

For a test matrix ``Z`` (N x N Hermitian, rank <= s, at most k nonzero rows)
the two ratios are

    l1:  (1/m) ||A(D Z D^*)||_1 / ||D Z D^*||_F
    lq:  ||A(D Z D^*)||_q^q   / ||D Z D^*||_F^q

The lq form carries no ``1/m`` factor, so at ``q = 1`` it equals ``m``
times the l1 ratio.  The true constants are extremes over a continuum; the
estimates here are extremes over samples, so ``lower`` can only overshoot
the true lower constant and ``upper`` can only undershoot the true upper
constant.
"""
from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from . import kernels
from .core import ZERO_TOL, frobenius_norm, hermitian_part, numerical_rank, row_sparsity
from .errors import DegenerateInput, InvalidParameter, PreconditionViolation
from .measurement import apply_lifted

ENUMERATION_CAP = 10_000


@dataclass(frozen=True)
class DripQuery:
    s: int
    k: int
    q: float = 1.0
    num_samples: int = 1000
    enumerate_supports: bool = False

    def __post_init__(self):
        if self.s < 1 or self.k < 1:
            raise InvalidParameter("s and k must be positive")
        if not 0.0 < self.q <= 1.0:
            raise InvalidParameter(f"q must lie in (0, 1], got {self.q}")
        if self.num_samples < 1:
            raise InvalidParameter("num_samples must be positive")


@dataclass(eq=False)
class DripEstimate:
    lower: float
    upper: float
    lower_witness: np.ndarray
    upper_witness: np.ndarray
    samples_used: int
    query: DripQuery
    ratios: np.ndarray = field(repr=False, default=None)

    def fraction_within(self, lo, hi):
        """Fraction of sampled ratios inside ``[lo, hi]``."""
        return float(np.mean((self.ratios >= lo) & (self.ratios <= hi)))

    def merge(self, other):
        """Combine two estimates of the same query (min of lowers, max of uppers)."""
        lo = self if self.lower <= other.lower else other
        hi = self if self.upper >= other.upper else other
        return DripEstimate(lo.lower, hi.upper, lo.lower_witness, hi.upper_witness,
                            self.samples_used + other.samples_used, self.query,
                            np.concatenate([self.ratios, other.ratios]))


def test_matrix_from_factors(G, signs):
    """``Z = sum_j signs[j] g_j g_j^*`` for the columns ``g_j`` of ``G``."""
    G = np.asarray(G, dtype=np.complex128)
    return hermitian_part((G * np.asarray(signs, dtype=np.float64)) @ G.conj().T)


def _draw_factors(rng, N, s, k, supp=None, signs=None):
    if supp is None:
        supp = np.sort(rng.choice(N, size=k, replace=False))
    g = (rng.standard_normal((len(supp), s)) + 1j * rng.standard_normal((len(supp), s)))
    g /= np.linalg.norm(g, axis=0, keepdims=True)
    G = np.zeros((N, s), dtype=np.complex128)
    G[supp, :] = g
    if signs is None:
        signs = rng.choice(np.array([-1.0, 1.0]), size=s)
    return G, np.asarray(signs, dtype=np.float64), supp


def sample_test_matrix(N, s, k, seed=0, signs=None):
    """Random ``Z`` with rank <= s and row sparsity <= k.

    The support is a uniform k-subset, the ``s`` factors are normalized
    complex Gaussian vectors on it, and each factor gets an independent
    uniform sign unless ``signs`` is given.
    """
    if s < 1 or k < 1:
        raise InvalidParameter("s and k must be positive")
    if k > N:
        raise InvalidParameter(f"row sparsity {k} exceeds N={N}")
    if signs is not None and len(signs) != s:
        raise InvalidParameter("need one sign per factor")
    G, sg, _ = _draw_factors(np.random.default_rng(seed), N, s, k, signs=signs)
    return test_matrix_from_factors(G, sg)


def is_feasible(Z, s, k):
    """True when ``Z`` has numerical rank <= s and row sparsity <= k."""
    return numerical_rank(Z) <= s and row_sparsity(Z) <= k


def _ratio_from_measurements(meas, fro, m, q):
    if q == 1.0:
        return float(np.abs(meas).sum()) / m / fro
    return float(np.sum(np.abs(meas) ** q)) / fro ** q


def drip_ratio(D, ens, Z, q=1.0):
    """DRIP ratio of a single test matrix (see module docstring)."""
    if not 0.0 < q <= 1.0:
        raise InvalidParameter(f"q must lie in (0, 1], got {q}")
    Dm = D.matrix
    Z = np.asarray(Z, dtype=np.complex128)
    if Z.shape != (D.N, D.N):
        raise InvalidParameter(f"Z must be {D.N}x{D.N}")
    M = hermitian_part(Dm @ Z @ Dm.conj().T)
    fro = frobenius_norm(M)
    if fro <= ZERO_TOL:
        raise DegenerateInput("D Z D^* vanishes")
    return _ratio_from_measurements(apply_lifted(ens, M), fro, ens.m, q)


def rip_ratio(ens, X, q=1.0):
    """Plain (dictionary-free) RIP ratio of an n x n Hermitian ``X``."""
    fro = frobenius_norm(X)
    if fro <= ZERO_TOL:
        raise DegenerateInput("X vanishes")
    return _ratio_from_measurements(apply_lifted(ens, X), fro, ens.m, q)


def _lowrank_ratio(Dm, A, G, signs, q):
    H = Dm @ G
    gram = H.conj().T @ H
    fro2 = float(np.real(signs @ (np.abs(gram) ** 2) @ signs))
    fro = math.sqrt(max(fro2, 0.0))
    if fro <= ZERO_TOL:
        return None
    meas = kernels.lifted_lowrank(A, H, signs)
    return _ratio_from_measurements(meas, fro, A.shape[0], q)


def _sample_plan(N, query, seed):
    """Yield ``(rng, support-or-None)`` for each sample, deterministically."""
    n_supp = math.comb(N, query.k)
    if query.enumerate_supports and n_supp <= ENUMERATION_CAP:
        per = max(1, math.ceil(query.num_samples / n_supp))
        for t, supp in enumerate(itertools.combinations(range(N), query.k)):
            for j in range(per):
                ss = np.random.SeedSequence(seed, spawn_key=(t, j))
                yield np.random.default_rng(ss), np.array(supp)
    else:
        for child in np.random.SeedSequence(seed).spawn(query.num_samples):
            yield np.random.default_rng(child), None


def coordinate_probes(N, s, k, limit=4096):
    """Deterministic off-diagonal test matrices on coordinate pairs.

    For ``i < j`` yields ``e_i e_j^* + e_j e_i^*`` and
    ``i (e_i e_j^* - e_j e_i^*)``; both have rank 2, two nonzero rows and
    zero diagonal, so they expose ensembles that only see diagonals.
    Nothing is yielded unless ``s >= 2`` and ``k >= 2``.
    """
    if s < 2 or k < 2:
        return
    count = 0
    for i, j in itertools.combinations(range(N), 2):
        for val in (1.0, 1j):
            if count >= limit:
                return
            Z = np.zeros((N, N), dtype=np.complex128)
            Z[i, j] = val
            Z[j, i] = np.conj(val)
            count += 1
            yield Z


def estimate_drip(D, ens, query, seed=0, extra=(), probes=False):
    """Sampled inner estimate of the DRIP constants of order ``(s, k)``.

    Parameters
    ----------
    D : Dictionary
    ens : MeasurementEnsemble
    query : DripQuery
    seed : int
    extra : iterable of ndarray, optional
        Additional N x N test matrices (for instance the matrices a proof
        applies the DRIP to).  Each must satisfy the rank and row-sparsity
        bounds of the query.  They move ``lower``/``upper`` but are not
        added to ``ratios``, which holds the random samples only.
    probes : bool
        Also evaluate :func:`coordinate_probes` (treated like ``extra``).

    Returns
    -------
    DripEstimate
    """
    if query.k > D.N:
        raise InvalidParameter(f"row sparsity {query.k} exceeds N={D.N}")
    if D.n != ens.n:
        raise InvalidParameter("dictionary and ensemble dimensions differ")
    Dm, A = D.matrix, ens.vectors
    ratios = []
    best_lo = (math.inf, None)
    best_hi = (-math.inf, None)
    for rng, supp in _sample_plan(D.N, query, seed):
        G, signs, _ = _draw_factors(rng, D.N, query.s, query.k, supp)
        rho = _lowrank_ratio(Dm, A, G, signs, query.q)
        if rho is None:
            continue
        ratios.append(rho)
        if rho < best_lo[0]:
            best_lo = (rho, (G, signs))
        if rho > best_hi[0]:
            best_hi = (rho, (G, signs))
    lo_w = test_matrix_from_factors(*best_lo[1]) if best_lo[1] is not None else None
    hi_w = test_matrix_from_factors(*best_hi[1]) if best_hi[1] is not None else None
    n_random = len(ratios)
    candidates = list(extra)
    for Z in candidates:
        if not is_feasible(hermitian_part(Z), query.s, query.k):
            raise InvalidParameter("extra test matrix violates the rank/row-sparsity bounds")
    if probes:
        candidates = itertools.chain(candidates, coordinate_probes(D.N, query.s, query.k))
    used = n_random
    for Z in candidates:
        Z = hermitian_part(Z)
        try:
            rho = drip_ratio(D, ens, Z, query.q)
        except DegenerateInput:
            continue
        used += 1
        if rho < best_lo[0]:
            best_lo, lo_w = (rho, None), Z
        if rho > best_hi[0]:
            best_hi, hi_w = (rho, None), Z
    if not used:
        raise DegenerateInput("every sampled test matrix was degenerate")
    return DripEstimate(best_lo[0], best_hi[0], lo_w, hi_w, used, query,
                        np.asarray(ratios))


def _check_positive(**kw):
    for name, v in kw.items():
        if not v > 0:
            raise InvalidParameter(f"{name} must be positive, got {v}")


def l1_recovery_condition(alpha, beta, r):
    """Return ``(holds, margin)`` with ``margin = alpha - 4 beta/sqrt(r) - beta/r``."""
    _check_positive(alpha=alpha, beta=beta, r=r)
    margin = alpha - 4.0 * beta / math.sqrt(r) - beta / r
    return margin > 0, margin


def l1_stability_constant(alpha, beta, r):
    """``C = (1/r + 4/sqrt(r) + 1) / (alpha - 4 beta/sqrt(r) - beta/r)``."""
    holds, margin = l1_recovery_condition(alpha, beta, r)
    if not holds:
        raise PreconditionViolation(f"l1 recovery condition fails (margin {margin:.6g})")
    return (1.0 / r + 4.0 / math.sqrt(r) + 1.0) / margin


def lq_threshold(r, q):
    """``r^(q-2) + 2^(2+q/2) r^(q/2-1)``, the factor multiplying the upper constant."""
    return r ** (q - 2.0) + 2.0 ** (2.0 + q / 2.0) * r ** (q / 2.0 - 1.0)


def lq_recovery_condition(phi, psi, r, q):
    """Return ``(holds, margin)`` with ``margin = phi - psi * lq_threshold(r, q)``."""
    _check_positive(phi=phi, psi=psi)
    if not r > 1:
        raise InvalidParameter(f"r must exceed 1, got {r}")
    if not 0.0 < q <= 1.0:
        raise InvalidParameter(f"q must lie in (0, 1], got {q}")
    margin = phi - psi * lq_threshold(r, q)
    return margin > 0, margin


def theoretical_error_bound(C, epsilon, m):
    """``(2 C eps / sqrt(m), 2 sqrt(2) C eps / sqrt(m))``.

    The second value is the phase-aligned vector bound times ``||x0||_2``.
    """
    _check_positive(C=C)
    if epsilon < 0:
        raise InvalidParameter("epsilon must be nonnegative")
    if m < 1:
        raise InvalidParameter("m must be positive")
    lifted = 2.0 * C * epsilon / math.sqrt(m)
    return lifted, math.sqrt(2.0) * lifted


def drip_report(est, D, ens, r):
    """JSON-ready summary of an estimate with the matching recovery condition."""
    q = est.query
    rep = {"q": q.q, "s": q.s, "k": q.k, "m": ens.m, "n": D.n, "N": D.N,
           "samples": est.samples_used, "lower": est.lower, "upper": est.upper,
           "condition_r": r, "l1_recovery_condition": None, "lq_recovery_condition": None,
           "margin": None, "C": None}
    key = "l1_recovery_condition" if q.q == 1.0 else "lq_recovery_condition"
    rep[key] = False
    if est.lower <= 0:
        return rep
    if q.q == 1.0:
        holds, margin = l1_recovery_condition(est.lower, est.upper, r)
        rep["C"] = l1_stability_constant(est.lower, est.upper, r) if holds else None
    elif r > 1:
        holds, margin = lq_recovery_condition(est.lower, est.upper, r, q.q)
    else:
        return rep
    rep[key], rep["margin"] = bool(holds), margin
    return rep
