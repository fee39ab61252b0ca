"""Constructive versions of the proof machinery for the two recovery
theorems, and numerical verifiers for their inequality chains.

Notation used throughout (all in the analysis domain, length N):

``c``      analysis coefficients ``D^* xhat`` after phase alignment to ``x0``
``c0``     analysis coefficients ``D^* x0``
``G``      ``c c^* - c0 c0^*``  (that is ``D^* H D`` with ``H = xhat xhat^* - x0 x0^*``)
``Gbar``   ``c_T01 c_T01^* - c0_T01 c0_T01^*``
``T0``     support of ``c0``; ``T1, T2, ...`` blocks of ``T0^c`` sorted by ``|c|``

Entries of ``c`` and ``c0`` with magnitude at most ``ZERO_TOL`` are treated
as zero, and ``||H||_F`` is evaluated as ``||G||_F`` (equal for Parseval
dictionaries).
"""
from dataclasses import dataclass, field
import csv
import math

import numpy as np

from .core import ZERO_TOL, outer, support
from .dictionary import top_k_support
from .drip import l1_recovery_condition, l1_stability_constant
from .errors import DegenerateInput, InvalidParameter, NumericFailure
from .measurement import align_phase, apply_lifted, apply_map

SLACK_RTOL = 1e-9


# --------------------------------------------------------------------------
# sparse convex decomposition


@dataclass(frozen=True, eq=False)
class Decomposition:
    weights: np.ndarray
    atoms: np.ndarray  # shape (P, len(v))
    mu: float
    k: int

    @property
    def P(self):
        return len(self.weights)

    def reconstruct(self):
        return self.weights @ self.atoms


def sparse_convex_decompose(v, k, mu):
    """Write ``v`` as a convex combination of k-sparse vectors.

    Requires ``||v||_1 <= k mu`` and ``||v||_inf <= mu``.  Every atom ``u``
    satisfies ``supp(u) ⊆ supp(v)``, ``||u||_0 <= k``, ``||u||_1 = ||v||_1``,
    ``||u||_inf <= mu`` and carries the signs of ``v``.

    The construction peels one atom at a time.  The atom sits on the ``k``
    largest entries and tops them up towards ``mu`` in proportion to their
    headroom until it carries the full mass; its weight is the largest one
    that keeps the remainder feasible.  Each step either zeroes an entry or
    pins one at ``mu``, so at most ``|supp(v)| + k`` atoms are produced.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise InvalidParameter("v must be a vector")
    if k < 1 or mu <= 0:
        raise InvalidParameter("k and mu must be positive")
    a = np.abs(v)
    S = float(a.sum())
    amax = float(a.max()) if a.size else 0.0
    if S > k * mu + 1e-12 or amax > mu + 1e-12:
        raise InvalidParameter(
            f"need ||v||_1 <= k mu and ||v||_inf <= mu (||v||_1={S:.3g}, ||v||_inf={amax:.3g}, "
            f"k={k}, mu={mu:.3g})")
    mu = max(mu, amax, S / k)
    sign = np.sign(v)
    w = a.copy()
    weights, atoms = [], []
    remaining = 1.0
    max_iter = max(v.size * v.size, 4)
    for _ in range(max_iter):
        nz = np.flatnonzero(w > 0.0)
        if nz.size <= k:
            weights.append(remaining)
            atoms.append(w)
            break
        order = nz[np.lexsort((nz, -w[nz]))]
        J, rest = order[:k], order[k:]
        top = float(w[J].sum())
        deficit = S - top
        headroom = k * mu - top
        if deficit <= 1e-13 * S:
            # only roundoff left off the top k entries
            w = np.where(np.isin(np.arange(w.size), J), w * (S / top), 0.0)
            weights.append(remaining)
            atoms.append(w)
            break
        u = np.zeros_like(w)
        u[J] = w[J] + deficit * (mu - w[J]) / headroom
        u[J[w[J] == mu]] = mu
        lam_zero = w[J] / u[J]
        lam_sat = 1.0 - w[rest] / mu
        lam = min(float(lam_zero.min()), float(lam_sat.min()))
        r = (w - lam * u) / (1.0 - lam)
        r[J[lam_zero <= lam]] = 0.0
        r[rest[lam_sat <= lam]] = mu
        r[w == mu] = mu
        r[(r < 1e-15 * S)] = 0.0
        np.minimum(r, mu, out=r)
        # restore the exact mass on the free entries (division by 1 - lam
        # amplifies roundoff over many steps)
        free = (r > 0) & (r < mu)
        if np.any(free):
            r[free] *= (S - r[~free].sum()) / r[free].sum()
            np.minimum(r, mu, out=r)
        weights.append(remaining * lam)
        atoms.append(u)
        remaining *= 1.0 - lam
        w = r
    else:
        raise NumericFailure("sparse decomposition did not terminate")
    A = np.array(atoms) * sign[None, :]
    return Decomposition(np.array(weights), A, float(mu), int(k))


def check_decomposition(dec, v, k, mu, tol=1e-10):
    """Names of the decomposition invariants that ``dec`` violates for ``v``.

    Independent of the constructor; an empty list means valid.
    """
    v = np.asarray(v, dtype=np.float64)
    scale = max(1.0, float(np.abs(v).sum()))
    bad = []
    lam, U = np.asarray(dec.weights), np.atleast_2d(dec.atoms)
    if np.any(lam < -tol) or abs(lam.sum() - 1.0) > tol:
        bad.append("convex_weights")
    suppv = np.abs(v) > 0
    if np.any(np.count_nonzero(U, axis=1) > k):
        bad.append("atom_sparsity")
    if np.any((U != 0) & ~suppv[None, :]):
        bad.append("atom_support")
    if np.any(np.abs(np.abs(U).sum(axis=1) - np.abs(v).sum()) > tol * scale):
        bad.append("atom_l1_mass")
    if np.any(np.abs(U) > mu * (1 + tol) + tol):
        bad.append("atom_linf")
    if np.max(np.abs(lam @ U - v), initial=0.0) > tol * scale:
        bad.append("reconstruction")
    return bad


# --------------------------------------------------------------------------
# phases and partitions


def phase_diagonal(w):
    """Unit-modulus phases of ``w`` (1 where ``|w_j| <= ZERO_TOL``).

    ``conj(phase_diagonal(w)) * w`` is real and nonnegative.
    """
    w = np.asarray(w, dtype=np.complex128)
    a = np.abs(w)
    out = np.ones_like(w)
    nz = a > ZERO_TOL
    out[nz] = w[nz] / a[nz]
    return out


def block_size(r, k):
    """``ceil(r k)``, guarded against roundoff just above an integer."""
    rk = r * k
    if rk < 1:
        raise InvalidParameter(f"need r k >= 1, got {rk}")
    return int(math.ceil(round(rk, 9)))


@dataclass(frozen=True, eq=False)
class SupportPartition:
    T0: np.ndarray
    blocks: list
    r: float
    k: int
    size: int

    @property
    def T1(self):
        return self.blocks[0] if self.blocks else np.array([], dtype=np.int64)

    @property
    def T01(self):
        return np.union1d(self.T0, self.T1)

    @property
    def tail(self):
        """``T01^c``, the union of blocks ``T2, T3, ...``."""
        if len(self.blocks) < 2:
            return np.array([], dtype=np.int64)
        return np.sort(np.concatenate(self.blocks[1:]))

    def block(self, i):
        """``T_i`` for ``i >= 0``."""
        return self.T0 if i == 0 else self.blocks[i - 1]


def build_partition(coeffs, T0, r, k):
    """Split ``T0^c`` into blocks of ``ceil(r k)`` indices by decreasing ``|coeffs|``.

    Ties are broken by ascending index; the last block may be short.
    """
    c = np.asarray(coeffs)
    N = c.size
    T0 = np.unique(np.asarray(T0, dtype=np.int64))
    if T0.size and (T0[0] < 0 or T0[-1] >= N):
        raise InvalidParameter("T0 out of range")
    b = block_size(r, k)
    comp = np.setdiff1d(np.arange(N), T0)
    a = np.abs(c[comp])
    comp = comp[np.lexsort((comp, -a))]
    blocks = [np.sort(comp[i:i + b]) for i in range(0, comp.size, b)]
    return SupportPartition(T0, blocks, float(r), int(k), b)


# --------------------------------------------------------------------------
# proof-chain verification


@dataclass(frozen=True)
class ProofCheck:
    name: str
    lhs: float
    rhs: float

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def passed(self):
        return self.slack >= -SLACK_RTOL * max(1.0, abs(self.rhs))


@dataclass(eq=False)
class ProofCheckReport:
    chain: str
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, name, lhs, rhs):
        self.checks.append(ProofCheck(name, float(lhs), float(rhs)))

    @property
    def all_passed(self):
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def get(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def min_relative_slack(self):
        return min((c.slack / max(1.0, abs(c.rhs)) for c in self.checks), default=0.0)

    def rows(self):
        return [(c.name, c.lhs, c.rhs, c.slack, c.passed) for c in self.checks]

    def to_csv(self, path):
        """CSV with columns ``check_name,lhs,rhs,slack,passed``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["check_name", "lhs", "rhs", "slack", "passed"])
            for name, lhs, rhs, slack, ok in self.rows():
                w.writerow([name, repr(lhs), repr(rhs), repr(slack), str(ok).lower()])


def _clean(c):
    c = c.copy()
    c[np.abs(c) <= ZERO_TOL] = 0.0
    return c


def _restrict_vec(c, idx):
    out = np.zeros_like(c)
    out[idx] = c[idx]
    return out


def _block(M, I, J):
    out = np.zeros_like(M)
    if len(I) and len(J):
        out[np.ix_(I, J)] = M[np.ix_(I, J)]
    return out


def _lq(M, q):
    a = np.abs(M)
    a = a[a > 0]
    return float(a.sum()) if q == 1.0 else float(np.sum(a ** q))


def _fro(M):
    return float(np.linalg.norm(M))


@dataclass(eq=False)
class ProofState:
    """Quantities shared by both chains for one ``(instance, xhat)`` pair."""
    c: np.ndarray
    c0: np.ndarray
    part: SupportPartition
    G: np.ndarray
    Gbar: np.ndarray
    xhat: np.ndarray
    notes: list


def choose_t0(c0, k, mode="auto"):
    """``T0`` from the analysis coefficients of ``x0``.

    ``support``: the exact support; ``topk``: the ``k`` largest magnitudes;
    ``auto``: the support when it has at most ``k`` entries, else top-k.
    """
    supp = support(c0)
    if mode == "support":
        return supp
    if mode == "topk":
        return top_k_support(c0, k)
    if mode == "auto":
        return supp if supp.size <= k else top_k_support(c0, k)
    raise InvalidParameter(f"unknown T0 mode {mode!r}")


def proof_state(inst, xhat, t0_mode="auto"):
    x0 = inst.x0
    if np.linalg.norm(x0) <= ZERO_TOL:
        raise DegenerateInput("x0 vanishes")
    D = inst.D.matrix
    xa = align_phase(np.asarray(xhat, dtype=np.complex128), x0)
    c = _clean(D.conj().T @ xa)
    c0 = _clean(D.conj().T @ x0)
    T0 = choose_t0(c0, inst.k, t0_mode)
    part = build_partition(c, T0, inst.r, inst.k)
    notes = []
    if np.any(np.abs(np.delete(c0, T0)) > 0):
        notes.append("T0 does not contain supp(D^* x0); proof identities are approximate")
    if T0.size > inst.k:
        notes.append(f"|T0| = {T0.size} exceeds k = {inst.k}")
    if part.blocks and part.T1.size < part.size:
        notes.append(f"|T1| = {part.T1.size} is below the block size {part.size}")
    T01 = part.T01
    G = outer(c) - outer(c0)
    Gbar = outer(_restrict_vec(c, T01)) - outer(_restrict_vec(c0, T01))
    return ProofState(c, c0, part, G, Gbar, xa, notes)


def _tail_decomposition(st):
    """Atoms of the decomposition of ``|c_{T01^c}|`` used by the tail bounds."""
    part = st.part
    tail = part.tail
    if tail.size == 0:
        return None, None, tail
    v = np.abs(st.c[tail])
    if not np.any(v > 0):
        return None, None, tail
    b = part.size
    mu = max(np.abs(st.c[part.T1]).sum() / part.T1.size, v.sum() / b)
    dec = sparse_convex_decompose(v, b, mu)
    return dec, mu, tail


def proof_drip_matrices(inst, xhat, t0_mode="auto"):
    """Matrices the l1 proof feeds to the DRIP.

    Returns ``(lower, upper)``.  ``lower`` holds ``Gbar`` (where the lower
    constant is used).  ``upper`` holds ``c_Ti (Psi u_j)^* + (Psi u_j) c_Ti^*``
    for ``i`` in {0, 1} and every atom ``u_j`` of the tail decomposition,
    and the products ``Psi (u_i u_j^* + u_j u_i^*) Psi^*``.  All have rank
    <= 2 and at most ``2 ceil(r k)`` nonzero rows when ``|T0| <= ceil(r k)``.
    """
    st = proof_state(inst, xhat, t0_mode)
    part = st.part
    lower = [st.Gbar] if _fro(st.Gbar) > ZERO_TOL else []
    upper = []
    dec, _, tail = _tail_decomposition(st)
    if dec is not None:
        psi = phase_diagonal(st.c[tail])
        U = np.zeros((dec.P, st.c.size), dtype=np.complex128)
        U[:, tail] = dec.atoms * psi[None, :]
        for i in (0, 1):
            cTi = _restrict_vec(st.c, part.block(i))
            for j in range(dec.P):
                upper.append(outer(cTi, U[j]) + outer(U[j], cTi))
        for i in range(dec.P):
            upper.append(outer(U[i]))
            for j in range(i + 1, dec.P):
                upper.append(outer(U[i], U[j]) + outer(U[j], U[i]))
    return lower, [M for M in upper if _fro(M) > ZERO_TOL]


def _meas_l1(inst, M):
    D = inst.D.matrix
    X = D @ M @ D.conj().T
    X = 0.5 * (X + X.conj().T)
    return float(np.abs(apply_lifted(inst.ens, X)).sum()) / inst.m


def verify_l1_proof_chain(inst, xhat, alpha, beta, t0_mode="auto"):
    """Evaluate every inequality of the l1 stability proof for ``xhat``.

    ``alpha`` and ``beta`` are the DRIP constants assumed by the
    measurement-dependent steps.  ``xhat`` is phase-aligned to ``x0`` here.
    """
    st = proof_state(inst, xhat, t0_mode)
    c, c0, part, G, Gbar = st.c, st.c0, st.part, st.G, st.Gbar
    r, k, b = part.r, part.k, part.size
    rep = ProofCheckReport("l1", notes=list(st.notes))
    T0, T01 = part.T0, part.T01
    nblocks = len(part.blocks)
    fGbar = _fro(Gbar)
    G00 = _block(G, T0, T0)
    c_T01 = _restrict_vec(c, T01)
    gap = float(np.linalg.norm(c_T01 - c0))

    rep.add("cone_constraint", _lq(G - G00, 1.0), _lq(G00, 1.0))
    for i in range(2, nblocks + 1):
        rep.add(f"tail_block_bound_T{i}", np.linalg.norm(c[part.block(i)]),
                np.abs(c[part.block(i - 1)]).sum() / math.sqrt(b))
    T0c = np.setdiff1d(np.arange(c.size), T0)
    rep.add("cone_tail_l1", np.abs(c[T0c]).sum(), math.sqrt(k) * gap)

    tail_tail = sum(_fro(_block(G, part.block(i), part.block(j)))
                    for i in range(2, nblocks + 1) for j in range(2, nblocks + 1))
    rep.add("step1_tail_tail", tail_tail, fGbar / r)
    cross = []
    for i in (0, 1):
        if i > nblocks:
            break
        Ti = part.block(i)
        s = sum(_fro(_block(G, Ti, part.block(j))) for j in range(2, nblocks + 1))
        cross.append(s)
        rep.add(f"step1_cross_T{i}", s, np.linalg.norm(c[Ti]) * gap / math.sqrt(r))
    u, v = c_T01, _restrict_vec(c0, T01)
    lhs_lemma = _fro(outer(u) - outer(v)) ** 2
    rep.add("rank_one_lemma_u", 0.5 * np.vdot(u, u).real * np.vdot(u - v, u - v).real, lhs_lemma)
    rep.add("rank_one_lemma_v", 0.5 * np.vdot(v, v).real * np.vdot(u - v, u - v).real, lhs_lemma)
    rep.add("step1_aggregate", _fro(G - Gbar), (1.0 / r + 4.0 / math.sqrt(r)) * fGbar)

    dec, mu, tail = _tail_decomposition(st)
    if dec is not None:
        T1 = part.T1
        rep.add("tail_linf_bound", np.abs(c[tail]).max(), np.abs(c[T1]).sum() / T1.size)
        atom_norms = np.linalg.norm(dec.atoms, axis=1)
        rep.add("atom_norm_bound", atom_norms.max(), math.sqrt(fGbar / r))

    for i in (0, 1):
        if i > nblocks:
            break
        Ti = part.block(i)
        M = _block(G, Ti, tail) + _block(G, tail, Ti)
        rep.add(f"offdiag_measurement_T{i}", _meas_l1(inst, M),
                2.0 * beta / math.sqrt(r) * np.linalg.norm(c[Ti]) * gap)
    rep.add("tail_tail_measurement", _meas_l1(inst, _block(G, tail, tail)), beta / r * fGbar)
    rep.add("offdiag_total", _meas_l1(inst, G - Gbar),
            beta * (4.0 / math.sqrt(r) + 1.0 / r) * fGbar)
    rep.add("drip_lower_hbar", alpha * fGbar, _meas_l1(inst, Gbar))

    AH = apply_map(inst.ens, st.xhat) - inst.record.clean
    rep.add("measurement_tube", np.linalg.norm(AH), 2.0 * inst.epsilon)
    fH = _fro(G)
    rep.add("final_assembly", fH, (1.0 / r + 4.0 / math.sqrt(r) + 1.0) * fGbar)
    holds, _ = l1_recovery_condition(alpha, beta, r) if alpha > 0 and beta > 0 else (False, 0)
    if holds:
        C = l1_stability_constant(alpha, beta, r)
        rep.add("stability_bound", fH, 2.0 * C * inst.epsilon / math.sqrt(inst.m))
    return rep


def verify_lq_proof_chain(inst, xhat, q, t0_mode="auto"):
    """Evaluate every inequality of the lq uniqueness proof for ``xhat``.

    Two versions of the closing bound are reported: ``lq_final_assembly``
    with the coefficient ``1/r^(2-q) + 2^(q/2)/r^(1-q/2) + 1`` as printed,
    and ``lq_final_assembly_hf`` with the factor ``4`` carried through from
    the split bound (``2^(2+q/2)``), which is what the preceding steps give.
    """
    if not 0.0 < q <= 1.0:
        raise InvalidParameter(f"q must lie in (0, 1], got {q}")
    st = proof_state(inst, xhat, t0_mode)
    c, c0, part, G, Gbar = st.c, st.c0, st.part, st.G, st.Gbar
    r, k, b = part.r, part.k, part.size
    rep = ProofCheckReport(f"lq(q={q:g})", notes=list(st.notes))
    T0, T01 = part.T0, part.T01
    nblocks = len(part.blocks)
    fGbar_q = _fro(Gbar) ** q
    G00 = _block(G, T0, T0)
    gap = float(np.linalg.norm(c0 - _restrict_vec(c, T01)))

    rep.add("lq_cone_constraint", _lq(G - G00, q), _lq(G00, q))
    for j in range(2, nblocks + 1):
        rep.add(f"lq_tail_block_bound_T{j}", np.linalg.norm(c[part.block(j)]) ** q,
                _lq(c[part.block(j - 1)], q) / b ** (1.0 - q / 2.0))
    tail = part.tail
    tail_q = _fro(_block(G, tail, tail)) ** q
    rep.add("lq_tail", tail_q, fGbar_q / r ** (2.0 - q))
    T0c = np.setdiff1d(np.arange(c.size), T0)
    rep.add("lq_cone_tail", _lq(c[T0c], q), k ** (1.0 - q / 2.0) * gap ** q)
    cross_total = 0.0
    for i in (0, 1):
        if i > nblocks:
            break
        Ti = part.block(i)
        s = sum(_fro(_block(G, Ti, part.block(j))) ** q for j in range(2, nblocks + 1))
        cross_total += s
        rep.add(f"lq_cross_T{i}", s, 2.0 ** (q / 2.0) / r ** (1.0 - q / 2.0) * fGbar_q)
    fH_q = _fro(G) ** q
    rep.add("lq_hf_split", fH_q, fGbar_q + tail_q + 2.0 * cross_total)
    AH = apply_map(inst.ens, st.xhat) - inst.record.clean
    rep.add("measurement_tube", np.linalg.norm(AH), 2.0 * inst.epsilon)
    rep.add("lq_final_assembly", fH_q,
            (r ** (q - 2.0) + 2.0 ** (q / 2.0) * r ** (q / 2.0 - 1.0) + 1.0) * fGbar_q)
    rep.add("lq_final_assembly_hf", fH_q,
            (r ** (q - 2.0) + 2.0 ** (2.0 + q / 2.0) * r ** (q / 2.0 - 1.0) + 1.0) * fGbar_q)
    return rep


def corrupt_off_support(inst, xhat, scale=1.0, seed=0, t0_mode="auto"):
    """Push analysis mass of ``xhat`` off ``T0`` so the cone constraint breaks.

    Adds ``D w`` where ``w`` lives on ``T0^c`` with ``||w||_1 = scale *
    ||D^* x0||_1``.  For square dictionaries this raises
    ``||(D^* xhat)_{T0^c}||_1`` by exactly that amount when ``xhat`` is
    sparse on ``T0``.
    """
    D = inst.D.matrix
    c0 = _clean(D.conj().T @ inst.x0)
    T0 = choose_t0(c0, inst.k, t0_mode)
    T0c = np.setdiff1d(np.arange(inst.N), T0)
    if T0c.size == 0:
        raise InvalidParameter("T0 covers every index; nothing to corrupt")
    rng = np.random.default_rng(seed)
    w = np.zeros(inst.N, dtype=np.complex128)
    w[T0c] = rng.standard_normal(T0c.size) + 1j * rng.standard_normal(T0c.size)
    w *= scale * np.abs(c0).sum() / np.abs(w).sum()
    return np.asarray(xhat, dtype=np.complex128) + D @ w
