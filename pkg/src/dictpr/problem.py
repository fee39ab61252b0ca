"""Problem instances: dictionary, ensemble, ground truth and measurements."""
from dataclasses import dataclass
import json
import os

import numpy as np

from .dictionary import (
    SparseCoefficients,
    format_complex,
    load_dictionary,
    make_dictionary,
    random_dictionary_sparse_signal,
    read_complex_matrix,
    save_dictionary,
    write_complex_matrix,
)
from .errors import InvalidParameter
from .measurement import (
    MeasurementEnsemble,
    MeasurementRecord,
    add_bounded_noise,
    apply_map,
    basis_ensemble,
    gaussian_ensemble,
    load_record,
    save_record,
)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    D: object
    ens: MeasurementEnsemble
    x0: np.ndarray
    z0: SparseCoefficients
    record: object
    k: int
    r: float = 1.0
    q: float = 1.0

    @property
    def y(self):
        return self.record.y

    @property
    def epsilon(self):
        return self.record.epsilon

    @property
    def n(self):
        return self.D.n

    @property
    def N(self):
        return self.D.N

    @property
    def m(self):
        return self.ens.m


def derive_seeds(seed, count):
    """``count`` independent 63-bit seeds derived deterministically from ``seed``."""
    ss = np.random.SeedSequence(int(seed) & ((1 << 64) - 1))
    return [int(s) for s in ss.generate_state(count, dtype=np.uint64) >> np.uint64(1)]


def make_instance(n, N, m, k, family="identity", epsilon=0.0, seed=0, r=1.0, q=1.0,
                  norm=1.0, ensemble="gaussian"):
    """Generate a random dictionary-sparse phase retrieval instance.

    The dictionary, ensemble, signal and noise each use their own seed
    derived from ``seed``, so changing ``epsilon`` alone keeps everything
    but the noise magnitude fixed (the noise direction is unchanged).
    """
    if min(n, N, m, k) < 1:
        raise InvalidParameter("n, N, m, k must be positive")
    s_dict, s_ens, s_sig, s_noise = derive_seeds(seed, 4)
    D = make_dictionary(family, n, N, s_dict)
    if ensemble == "gaussian":
        ens = gaussian_ensemble(m, n, s_ens)
    elif ensemble == "basis":
        if m != n:
            raise InvalidParameter("basis ensemble requires m == n")
        ens = basis_ensemble(n)
    else:
        raise InvalidParameter(f"unknown ensemble {ensemble!r}")
    x0, z0 = random_dictionary_sparse_signal(D, k, s_sig, norm)
    record = add_bounded_noise(apply_map(ens, x0), epsilon, s_noise)
    return ProblemInstance(D, ens, x0, z0, record, k, float(r), float(q))


def with_measurements(inst, y, epsilon=None):
    """Copy of ``inst`` with replaced measurements (noise set to ``y - clean``)."""
    y = np.asarray(y, dtype=np.float64)
    noise = y - inst.record.clean
    eps = float(np.linalg.norm(noise)) if epsilon is None else float(epsilon)
    return ProblemInstance(inst.D, inst.ens, inst.x0, inst.z0,
                           MeasurementRecord(y, inst.record.clean, noise, eps),
                           inst.k, inst.r, inst.q)


def save_instance(inst, outdir):
    """Write the instance as text files under ``outdir``."""
    os.makedirs(outdir, exist_ok=True)
    save_dictionary(inst.D, os.path.join(outdir, "dictionary.txt"))
    write_complex_matrix(os.path.join(outdir, "ensemble.txt"), inst.ens.vectors,
                         f"{inst.m} {inst.n} {inst.ens.generator}")
    with open(os.path.join(outdir, "truth.txt"), "w") as fh:
        fh.write(f"{inst.n} {inst.N} {inst.k}\n")
        fh.write(" ".join(format_complex(v) for v in inst.x0) + "\n")
        fh.write(" ".join(format_complex(v) for v in inst.z0.z) + "\n")
        fh.write(" ".join(str(int(i)) for i in inst.z0.support) + "\n")
    save_record(inst.record, os.path.join(outdir, "measurements.csv"))
    meta = {"epsilon": inst.epsilon, "k": inst.k, "r": inst.r, "q": inst.q}
    with open(os.path.join(outdir, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_instance(outdir):
    D = load_dictionary(os.path.join(outdir, "dictionary.txt"))
    header, A = read_complex_matrix(os.path.join(outdir, "ensemble.txt"))
    ens = MeasurementEnsemble(A, header[2] if len(header) > 2 else "explicit")
    with open(os.path.join(outdir, "truth.txt")) as fh:
        lines = fh.read().splitlines()
    x0 = np.array([complex(t) for t in lines[1].split()])
    z = np.array([complex(t) for t in lines[2].split()])
    supp = np.array([int(t) for t in lines[3].split()], dtype=np.int64)
    with open(os.path.join(outdir, "meta.json")) as fh:
        meta = json.load(fh)
    record = load_record(os.path.join(outdir, "measurements.csv"), meta["epsilon"])
    k = int(meta["k"])
    return ProblemInstance(D, ens, x0, SparseCoefficients(z, supp, k), record, k,
                           float(meta["r"]), float(meta["q"]))
