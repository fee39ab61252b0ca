"""Command-line harness.

Subcommands (all write under ``--out``):

gen            instance files per trial in ``trial_NNNN/``
solve          ``solve.csv`` (one row per trial), ``solve_summary.json``,
               ``results.json`` (one solve record per trial)
drip           ``drip.json``
verify         ``verify/trial_NNNN_<chain>.csv`` proof-check reports and
               ``verify_summary.csv``
phase-diagram  ``phase_diagram.csv`` with columns m,k,q,success_rate,median_error
lemma-test     ``lemma_test.csv`` with columns test,trials,failures,min_slack

Column orders:

solve.csv
    trial,seed,status,iterations,residual,error_lifted,error_phase_aligned,
    bound,bound_satisfied,runtime_ms
verify_summary.csv
    trial,seed,chain,checks,failed,min_relative_slack,failed_checks
trial_NNNN/measurements.csv
    index,y,clean,noise
verify/trial_NNNN_<chain>.csv
    check_name,lhs,rhs,slack,passed

Outputs are a pure function of the configuration and seed.  Wall-clock
times are written only with ``--timing``.

Exit codes: 0 success, 2 invalid configuration, 3 numeric failure (also
returned by ``lemma-test`` when a property check fails).
"""
import argparse
from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, field, fields
import json
import math
import os
import sys

import numpy as np

from . import lemmas
from .core import outer
from .dictionary import FAMILIES, make_dictionary
from .drip import (DripQuery, drip_report, estimate_drip, l1_recovery_condition,
                   l1_stability_constant, theoretical_error_bound)
from .errors import DictPRError, InvalidParameter, NumericFailure
from .measurement import phase_aligned_distance
from .problem import load_instance, make_instance, save_instance
from .solver import (SolverConfig, oracle_support_solver, solve_l1_analysis,
                     solve_lq_analysis)

SUCCESS_THRESHOLD = 1e-3
SOLVERS = ("l1", "lq", "oracle")
VERIFY_SOURCES = ("oracle", "truth", "corrupt")


@dataclass
class ExperimentConfig:
    n: int = 8
    N: int = 8
    m: int = 64
    k: int = 2
    family: str = "identity"
    ensemble: str = "gaussian"
    q: float = 1.0
    epsilon: float = 0.0
    r: float = 1.0
    trials: int = 1
    seed: int = 0
    solver: str = "l1"
    output_dir: str = "out"
    # solver settings
    lam: float = 1e-2
    lam_final: float = 1e-6
    max_iters: int = 5000
    tol_rel_change: float = 1e-9
    smoothing_delta0: float = 1.0
    smoothing_decay: float = 0.1
    constrained: bool = True
    # DRIP estimation
    drip_s: int = 2
    drip_k: int = 0  # 0 means 2 ceil(r k)
    drip_samples: int = 1000
    drip_enumerate: bool = False
    # verification
    verify_source: str = "oracle"
    verify_q: list = field(default_factory=lambda: [0.5, 1.0])
    t0_mode: str = "auto"
    corrupt_scale: float = 1.0
    # phase diagram
    grid_m: list = field(default_factory=lambda: [8, 16, 32, 64])
    grid_k: list = field(default_factory=lambda: [1, 2, 4])
    # lemma-test
    lemma_trials: int = 1000

    def validate(self):
        if min(self.n, self.N, self.m, self.k) < 1:
            raise InvalidParameter("n, N, m, k must be positive")
        if self.trials < 1:
            raise InvalidParameter("trials must be >= 1")
        if not 0.0 < self.q <= 1.0:
            raise InvalidParameter("q must lie in (0, 1]")
        if self.epsilon < 0:
            raise InvalidParameter("epsilon must be nonnegative")
        if self.r <= 0:
            raise InvalidParameter("r must be positive")
        if self.family not in FAMILIES:
            raise InvalidParameter(f"family must be one of {FAMILIES}")
        if self.solver not in SOLVERS:
            raise InvalidParameter(f"solver must be one of {SOLVERS}")
        if self.verify_source not in VERIFY_SOURCES:
            raise InvalidParameter(f"verify_source must be one of {VERIFY_SOURCES}")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise InvalidParameter("seed must be an unsigned 64-bit integer")
        if any(not 0 < q <= 1 for q in self.verify_q):
            raise InvalidParameter("verify_q entries must lie in (0, 1]")
        if self.drip_samples < 1 or self.lemma_trials < 1:
            raise InvalidParameter("sample counts must be positive")
        self.solver_config()
        return self

    def solver_config(self):
        return SolverConfig(lam=self.lam, lam_final=self.lam_final, max_iters=self.max_iters,
                            tol_rel_change=self.tol_rel_change, q=self.q,
                            smoothing_delta0=self.smoothing_delta0,
                            smoothing_decay=self.smoothing_decay, seed=self.seed)

    def drip_order(self):
        return self.drip_s, self.drip_k or min(self.N, 2 * lemmas.block_size(self.r, self.k))


# --------------------------------------------------------------------------
# configuration


def _coerce(name, raw, proto):
    if isinstance(raw, str):
        text = raw.strip()
        try:
            raw = json.loads(text)
        except ValueError:
            raw = text
            if isinstance(proto, list):
                raw = [json.loads(t) for t in text.split(",") if t.strip()]
    try:
        if isinstance(proto, bool):
            if isinstance(raw, str):
                if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(raw)
                return raw.lower() in ("true", "1", "yes")
            return bool(raw)
        if isinstance(proto, int):
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError(raw)
            return int(raw)
        if isinstance(proto, float):
            return float(raw)
        if isinstance(proto, list):
            return list(raw) if isinstance(raw, (list, tuple)) else [raw]
        return str(raw)
    except (TypeError, ValueError):
        raise InvalidParameter(f"bad value for {name}: {raw!r}") from None


def parse_config_text(text):
    """Key/value pairs from JSON (an object) or ``key=value`` lines."""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except ValueError as exc:
            raise InvalidParameter(f"invalid JSON config: {exc}") from None
        if not isinstance(data, dict):
            raise InvalidParameter("JSON config must be an object")
        return data
    data = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameter(f"config line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        data[key.strip()] = value.strip()
    return data


def build_config(pairs):
    defaults = ExperimentConfig()
    known = {f.name for f in fields(ExperimentConfig)}
    kw = {}
    for key, raw in pairs.items():
        if key == "lambda":
            key = "lam"
        if key not in known:
            raise InvalidParameter(f"unknown config key {key!r}")
        kw[key] = _coerce(key, raw, getattr(defaults, key))
    return ExperimentConfig(**kw).validate()


def load_config(args):
    pairs = {}
    if args.config:
        try:
            with open(args.config) as fh:
                pairs.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise InvalidParameter(f"cannot read config: {exc}") from None
    for item in args.set or []:
        if "=" not in item:
            raise InvalidParameter(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        pairs[key.strip()] = value
    if args.seed is not None:
        pairs["seed"] = args.seed
    if args.out is not None:
        pairs["output_dir"] = args.out
    return build_config(pairs)


# --------------------------------------------------------------------------
# helpers


def trial_seed(seed, trial):
    return int(seed) ^ int(trial)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _parallel(fn, items, threads):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _instance(cfg, seed, m=None, k=None, epsilon=None):
    return make_instance(cfg.n, cfg.N, cfg.m if m is None else m, cfg.k if k is None else k,
                         family=cfg.family, seed=seed,
                         epsilon=cfg.epsilon if epsilon is None else epsilon,
                         r=cfg.r, q=cfg.q, ensemble=cfg.ensemble)


def _trial_dir(cfg, t):
    return os.path.join(cfg.output_dir, f"trial_{t:04d}")


def _trial_instance(cfg, t):
    d = _trial_dir(cfg, t)
    if os.path.exists(os.path.join(d, "meta.json")):
        return load_instance(d)
    return _instance(cfg, trial_seed(cfg.seed, t))


def run_solver(cfg, inst):
    if cfg.solver == "oracle":
        return oracle_support_solver(inst, constrained=cfg.constrained and inst.epsilon > 0)
    sc = cfg.solver_config()
    if cfg.solver == "lq":
        return solve_lq_analysis(inst, sc)
    return solve_l1_analysis(inst, sc)


def _median_quartiles(vals):
    vals = [v for v in vals if v is not None and math.isfinite(v)]
    if not vals:
        return None, None, None
    q1, med, q3 = np.percentile(vals, [25, 50, 75])
    return float(med), float(q1), float(q3)


def stability_constant_estimate(cfg, inst, seed):
    """Sampled ``(alpha, beta)`` at the configured order and the resulting C (or None)."""
    s, k = cfg.drip_order()
    est = estimate_drip(inst.D, inst.ens, DripQuery(s, k, 1.0, cfg.drip_samples),
                        seed=seed)
    C = None
    if est.lower > 0 and l1_recovery_condition(est.lower, est.upper, inst.r)[0]:
        C = l1_stability_constant(est.lower, est.upper, inst.r)
    return est, C


# --------------------------------------------------------------------------
# commands


def cmd_gen(cfg, args):
    os.makedirs(cfg.output_dir, exist_ok=True)

    def one(t):
        inst = _instance(cfg, trial_seed(cfg.seed, t))
        save_instance(inst, _trial_dir(cfg, t))
        return t

    _parallel(one, range(cfg.trials), args.threads)
    return 0


def _solve_row(cfg, t, timing):
    seed = trial_seed(cfg.seed, t)
    inst = _trial_instance(cfg, t)
    try:
        res = run_solver(cfg, inst)
    except NumericFailure:
        return [t, seed, "failed", 0, None, None, None, None, "n/a", None], None
    rec = res.summary(inst.x0, timing)
    bound, sat = None, "n/a"
    if inst.epsilon > 0:
        _, C = stability_constant_estimate(cfg, inst, seed)
        if C is not None:
            bound = theoretical_error_bound(C, inst.epsilon, inst.m)[0]
            sat = bool(rec["error_lifted"] <= bound)
    else:
        bound, sat = None, "n/a"
    rec.update({"trial": t, "seed": seed, "bound": bound, "bound_satisfied": sat})
    row = [t, seed, res.status, res.iterations, rec["residual"], rec["error_lifted"],
           rec["error_phase_aligned"], bound, sat, rec["runtime_ms"]]
    return row, rec


def cmd_solve(cfg, args):
    os.makedirs(cfg.output_dir, exist_ok=True)
    out = _parallel(lambda t: _solve_row(cfg, t, args.timing), range(cfg.trials), args.threads)
    rows = [r for r, _ in out]
    _write_csv(os.path.join(cfg.output_dir, "solve.csv"),
               ["trial", "seed", "status", "iterations", "residual", "error_lifted",
                "error_phase_aligned", "bound", "bound_satisfied", "runtime_ms"], rows)
    _write_json(os.path.join(cfg.output_dir, "results.json"), [r for _, r in out])
    rel = []
    for (row, rec), t in zip(out, range(cfg.trials)):
        if rec is None:
            rel.append(None)
            continue
        x0n = float(np.linalg.norm(_trial_instance(cfg, t).x0))
        rel.append(rec["error_phase_aligned"] / x0n)
    lifted = [r[5] for r in rows]
    med_l, q1_l, q3_l = _median_quartiles(lifted)
    med_p, q1_p, q3_p = _median_quartiles(rel)
    statuses = {}
    for r in rows:
        statuses[r[2]] = statuses.get(r[2], 0) + 1
    summary = {
        "trials": cfg.trials, "solver": cfg.solver,
        "success_threshold": SUCCESS_THRESHOLD,
        "success_rate": sum(1 for e in rel if e is not None and e < SUCCESS_THRESHOLD) / cfg.trials,
        "error_lifted": {"median": med_l, "q1": q1_l, "q3": q3_l},
        "error_phase_aligned_relative": {"median": med_p, "q1": q1_p, "q3": q3_p},
        "status_counts": dict(sorted(statuses.items())),
        "bound_rows": {"true": sum(1 for r in rows if r[8] is True),
                       "false": sum(1 for r in rows if r[8] is False),
                       "n/a": sum(1 for r in rows if r[8] == "n/a")},
    }
    _write_json(os.path.join(cfg.output_dir, "solve_summary.json"), summary)
    return 0


def _witness_entries(Z):
    if Z is None:
        return None
    idx = np.argwhere(np.abs(Z) > 1e-15)
    return [[int(i), int(j), float(Z[i, j].real), float(Z[i, j].imag)] for i, j in idx]


def cmd_drip(cfg, args):
    os.makedirs(cfg.output_dir, exist_ok=True)
    inst = _instance(cfg, cfg.seed)
    s, k = cfg.drip_order()
    query = DripQuery(s, k, cfg.q, cfg.drip_samples, cfg.drip_enumerate)
    est = estimate_drip(inst.D, inst.ens, query, seed=cfg.seed, probes=True)
    rep = drip_report(est, inst.D, inst.ens, cfg.r)
    rep["family"] = cfg.family
    rep["ensemble"] = cfg.ensemble
    rep["random_samples"] = int(est.ratios.size)
    rep["ratio_quantiles"] = {f"{p:g}": float(np.percentile(est.ratios, p))
                              for p in (0.5, 1, 50, 99, 99.5)}
    rep["fraction_in_0.12_2.45"] = est.fraction_within(0.12, 2.45)
    rep["lower_witness"] = _witness_entries(est.lower_witness)
    rep["upper_witness"] = _witness_entries(est.upper_witness)
    _write_json(os.path.join(cfg.output_dir, "drip.json"), rep)
    return 0


def verification_pair(cfg, inst, seed, polish=True):
    """The ``xhat`` a verification trial checks, per ``verify_source``.

    Oracle pairs are moved onto the noise sphere along the l1 path when
    ``polish`` is set and the instance is noisy.
    """
    if cfg.verify_source == "truth":
        return inst.x0.copy()
    res = oracle_support_solver(inst, constrained=polish and inst.epsilon > 0)
    if res.status == "failed":
        raise NumericFailure("oracle solver failed")
    if cfg.verify_source == "corrupt":
        return lemmas.corrupt_off_support(inst, res.xhat, cfg.corrupt_scale, seed, cfg.t0_mode)
    return res.xhat


def proof_constants(cfg, inst, xhat, seed):
    """``(alpha, beta)`` sampled at the proof's order, including its own matrices."""
    lower, upper = lemmas.proof_drip_matrices(inst, xhat, cfg.t0_mode)
    b = lemmas.block_size(inst.r, inst.k)
    query = DripQuery(2, min(inst.N, 2 * b), 1.0, cfg.drip_samples)
    est = estimate_drip(inst.D, inst.ens, query, seed=seed, extra=lower + upper)
    return est.lower, est.upper


def _verify_trial(cfg, t):
    seed = trial_seed(cfg.seed, t)
    inst = _trial_instance(cfg, t)
    reports = []
    xhat = verification_pair(cfg, inst, seed)
    alpha, beta = proof_constants(cfg, inst, xhat, seed)
    reports.append(("l1", lemmas.verify_l1_proof_chain(inst, xhat, alpha, beta, cfg.t0_mode)))
    for q in cfg.verify_q:
        # the l1-polished point is an l1 solution, not an lq one; below q = 1
        # the chain is checked on the plain oracle solution
        xq = xhat if q == 1.0 else verification_pair(cfg, inst, seed, polish=False)
        reports.append((f"lq_q{q:g}", lemmas.verify_lq_proof_chain(inst, xq, q, cfg.t0_mode)))
    return t, seed, reports


def cmd_verify(cfg, args):
    vdir = os.path.join(cfg.output_dir, "verify")
    os.makedirs(vdir, exist_ok=True)

    def one(t):
        try:
            return _verify_trial(cfg, t)
        except DictPRError as exc:
            return t, trial_seed(cfg.seed, t), exc

    rows = []
    for t, seed, reports in _parallel(one, range(cfg.trials), args.threads):
        if isinstance(reports, Exception):
            rows.append([t, seed, "error", 0, None, None, type(reports).__name__])
            continue
        for name, rep in reports:
            rep.to_csv(os.path.join(vdir, f"trial_{t:04d}_{name}.csv"))
            failed = rep.failed()
            rows.append([t, seed, name, len(rep.checks), len(failed),
                         rep.min_relative_slack(), ";".join(failed)])
    _write_csv(os.path.join(cfg.output_dir, "verify_summary.csv"),
               ["trial", "seed", "chain", "checks", "failed", "min_relative_slack",
                "failed_checks"], rows)
    return 0


def cmd_phase_diagram(cfg, args):
    os.makedirs(cfg.output_dir, exist_ok=True)
    cells = [(int(m), int(k)) for k in cfg.grid_k for m in cfg.grid_m]
    for m, k in cells:
        if m < 1 or not 1 <= k <= cfg.N:
            raise InvalidParameter(f"grid cell (m={m}, k={k}) out of range")
    jobs = [(m, k, t) for m, k in cells for t in range(cfg.trials)]

    def one(job):
        m, k, t = job
        inst = _instance(cfg, trial_seed(cfg.seed, t), m=m, k=k)
        try:
            res = run_solver(cfg, inst)
        except NumericFailure:
            return math.inf
        return phase_aligned_distance(res.xhat, inst.x0) / float(np.linalg.norm(inst.x0))

    errs = _parallel(one, jobs, args.threads)
    rows = []
    for i, (m, k) in enumerate(cells):
        e = np.array(errs[i * cfg.trials:(i + 1) * cfg.trials])
        rows.append([m, k, cfg.q, float(np.mean(e < SUCCESS_THRESHOLD)), float(np.median(e))])
    _write_csv(os.path.join(cfg.output_dir, "phase_diagram.csv"),
               ["m", "k", "q", "success_rate", "median_error"], rows)
    return 0


def lemma_suite(trials, seed):
    """Property scans behind the ``lemma-test`` command.

    Returns rows ``(test, trials, failures, min_slack)``; ``min_slack`` is
    the smallest relative slack observed (negative means a violation).
    """
    rng = np.random.default_rng(seed)
    rows = []

    # sparse convex decomposition
    fails, worst = 0, math.inf
    for _ in range(trials):
        N = int(rng.integers(2, 25))
        k = int(rng.integers(1, N + 1))
        v = rng.standard_normal(N) * (rng.random(N) < 0.7)
        if not np.any(v):
            v[0] = 1.0
        a = np.abs(v)
        mu = max(a.max(), a.sum() / k) * (1.0 + rng.random() * (rng.random() < 0.5))
        dec = lemmas.sparse_convex_decompose(v, k, mu)
        bad = lemmas.check_decomposition(dec, v, k, mu)
        bound = math.sqrt(mu * a.sum())
        norms = np.linalg.norm(dec.atoms, axis=1)
        worst = min(worst, float((bound - norms.max()) / max(1.0, bound)))
        fails += bool(bad) or norms.max() > bound * (1 + 1e-12)
    rows.append(("sparse_convex_decomposition", trials, fails, float(worst)))

    # rank-one distance lemma
    fails, worst = 0, math.inf
    for _ in range(trials):
        n = int(rng.integers(1, 17))
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        w = np.vdot(u, v)
        if abs(w) > 0:
            v = v * (abs(w) / w)
        rhs = float(np.linalg.norm(outer(u) - outer(v))) ** 2
        d2 = float(np.vdot(u - v, u - v).real)
        for lhs in (0.5 * np.vdot(u, u).real * d2, 0.5 * np.vdot(v, v).real * d2):
            s = (rhs - lhs) / max(1.0, rhs)
            worst = min(worst, s)
            fails += s < -1e-10
    rows.append(("rank_one_distance", trials, fails, float(worst)))

    # tail-block bound of the partition
    fails, worst = 0, math.inf
    for _ in range(trials):
        N = int(rng.integers(2, 40))
        c = (rng.standard_normal(N) + 1j * rng.standard_normal(N)) * (rng.random(N) < 0.8)
        k = int(rng.integers(1, max(2, N // 3)))
        r = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
        T0 = np.sort(rng.choice(N, size=min(k, N), replace=False))
        part = lemmas.build_partition(c, T0, r, k)
        for i in range(2, len(part.blocks) + 1):
            lhs = float(np.linalg.norm(c[part.block(i)]))
            rhs = float(np.abs(c[part.block(i - 1)]).sum()) / math.sqrt(part.size)
            s = (rhs - lhs) / max(1.0, rhs)
            worst = min(worst, s)
            fails += s < -1e-12
    rows.append(("partition_tail_block", trials, fails, float(worst)))

    # tight-frame identities
    fails, worst = 0, math.inf
    for fam in FAMILIES:
        for _ in range(max(1, trials // 10)):
            n = int(rng.integers(2, 9))
            N = n if fam == "identity" else int(rng.integers(n, 2 * n + 1))
            D = make_dictionary(fam, n, N, int(rng.integers(2 ** 31)))
            x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            Y = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            Y = Y + Y.conj().T
            Dm = D.matrix
            e1 = abs(np.linalg.norm(Dm.conj().T @ Y @ Dm) / np.linalg.norm(Y) - 1.0)
            e2 = abs(np.linalg.norm(Dm.conj().T @ x) / np.linalg.norm(x) - 1.0)
            worst = min(worst, -max(e1, e2))
            fails += max(e1, e2) > 1e-8
    rows.append(("tight_frame_identities", max(1, trials // 10) * len(FAMILIES), fails,
                 float(worst)))
    return rows


def cmd_lemma_test(cfg, args):
    os.makedirs(cfg.output_dir, exist_ok=True)
    rows = lemma_suite(cfg.lemma_trials, cfg.seed)
    _write_csv(os.path.join(cfg.output_dir, "lemma_test.csv"),
               ["test", "trials", "failures", "min_slack"], rows)
    return 3 if any(r[2] for r in rows) else 0


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "drip": cmd_drip,
    "verify": cmd_verify,
    "phase-diagram": cmd_phase_diagram,
    "lemma-test": cmd_lemma_test,
}


def build_parser():
    p = argparse.ArgumentParser(
        prog="dictpr", description=__doc__.split("\n\n")[0],
        epilog=__doc__.split("\n\n", 1)[1], formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="key=value or JSON file with ExperimentConfig fields")
    p.add_argument("--seed", type=int, help="base seed (unsigned 64-bit); overrides the config")
    p.add_argument("--out", help="output directory; overrides output_dir")
    p.add_argument("--threads", type=int, default=1, help="worker threads for trials")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    p.add_argument("--timing", action="store_true",
                   help="record wall-clock times (outputs are then not reproducible)")
    p.add_argument("command", choices=sorted(COMMANDS))
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.threads < 1:
            raise InvalidParameter("--threads must be >= 1")
        cfg = load_config(args)
    except InvalidParameter as exc:
        print(f"dictpr: invalid configuration: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg, args)
    except InvalidParameter as exc:
        print(f"dictpr: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except (NumericFailure, DictPRError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"dictpr: numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
