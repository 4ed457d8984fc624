"""Extremal energies of classical Ising Hamiltonians sum_{i<j} J_ij Z_i Z_j and their scaling with n."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import stats

EXACT_MAX_N = 24
PT_MAX_N = 256
ENSEMBLES = ("all_to_all", "sparse")


@dataclass
class IsingInstance:
    n: int
    couplings: np.ndarray  # symmetric, zero diagonal
    ensemble: str = "all_to_all"
    s: float = 0.0
    seed: int = 0

    def __post_init__(self):
        J = np.asarray(self.couplings, dtype=float)
        if J.shape != (self.n, self.n):
            raise ValueError("couplings must be n x n")
        if not np.allclose(J, J.T) or np.any(np.diag(J) != 0):
            raise ValueError("couplings must be symmetric with zero diagonal")
        if np.any(np.abs(J) > 1):
            raise ValueError("couplings must lie in [-1, 1]")
        self.couplings = J

    @property
    def degree_bound(self):
        """n s with s = edges / n, so n s counts the edges."""
        return float(np.count_nonzero(np.triu(self.couplings, 1)))

    def energy(self, z):
        z = np.asarray(z, dtype=float)
        return float(z @ self.couplings @ z / 2)


@dataclass
class NormEstimate:
    e_min: float
    e_max: float
    method: str
    confidence: int = 0
    restarts: int = 0
    reliable: bool = True

    @property
    def norm(self):
        return max(abs(self.e_min), abs(self.e_max))


def random_instance(n, ensemble="all_to_all", s=1.5, seed=0, rep=0):
    """Uniform [-1, 1] couplings; the sparse ensemble keeps each pair with probability 2s/n (mean degree 2s)."""
    if ensemble not in ENSEMBLES:
        raise ValueError(f"ensemble must be one of {ENSEMBLES}")
    rng = np.random.default_rng([seed, n, rep])
    J = np.triu(rng.uniform(-1.0, 1.0, (n, n)), 1)
    if ensemble == "sparse":
        J = J * np.triu(rng.random((n, n)) < min(1.0, 2 * s / n), 1)
    return IsingInstance(n, J + J.T, ensemble, s if ensemble == "sparse" else (n - 1) / 2, seed)


@njit(cache=True)
def _gray_extrema(J):
    n = J.shape[0]
    z = np.ones(n)
    field = np.zeros(n)
    for i in range(n):
        for j in range(n):
            field[i] += J[i, j]
    e = 0.0
    for i in range(n):
        e += field[i]
    e *= 0.5
    lo, hi = e, e
    m = n - 1  # spin n-1 stays +1 by the global flip symmetry
    for g in range(1, 1 << m):
        k = 0
        while not (g >> k) & 1:
            k += 1
        e -= 2.0 * z[k] * field[k]
        z[k] = -z[k]
        for j in range(n):
            field[j] += 2.0 * z[k] * J[j, k]
        if e < lo:
            lo = e
        if e > hi:
            hi = e
    return lo, hi


def exact_extrema(inst: IsingInstance) -> NormEstimate:
    """Certified extrema by Gray-code enumeration of 2^(n-1) configurations."""
    if inst.n > EXACT_MAX_N:
        raise ValueError(f"exact enumeration limited to n <= {EXACT_MAX_N}")
    lo, hi = _gray_extrema(np.ascontiguousarray(inst.couplings))
    return NormEstimate(float(lo), float(hi), "exact", 1, 1, True)


def naive_extrema(inst: IsingInstance):
    """All 2^n configurations at once; a slow oracle for small n."""
    n = inst.n
    bits = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
    Z = 1.0 - 2.0 * bits
    E = np.einsum("ci,ij,cj->c", Z, inst.couplings, Z) / 2
    return float(E.min()), float(E.max())


def default_ladder(n, s, replicas=32, t_min=0.1):
    """Geometric temperatures from t_min to 3 n s."""
    return np.geomspace(t_min, max(3.0 * n * s, 2 * t_min), replicas)


@njit(cache=True)
def _pt_min(J, temps, sweeps, seed):
    np.random.seed(seed)
    n = J.shape[0]
    R = temps.shape[0]
    Z = np.empty((R, n))
    F = np.zeros((R, n))
    E = np.zeros(R)
    for r in range(R):
        for i in range(n):
            Z[r, i] = 1.0 if np.random.random() < 0.5 else -1.0
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += J[i, j] * Z[r, j]
            F[r, i] = acc
        e = 0.0
        for i in range(n):
            e += Z[r, i] * F[r, i]
        E[r] = 0.5 * e
    slot = np.arange(R)  # slot[t] = replica held at temperature t
    best = E.min()
    swaps = np.zeros(R - 1)
    tries = np.zeros(R - 1)
    for _ in range(sweeps):
        for t in range(R):
            r = slot[t]
            beta = 1.0 / temps[t]
            for i in range(n):
                dE = -2.0 * Z[r, i] * F[r, i]
                if dE <= 0.0 or np.random.random() < math.exp(-beta * dE):
                    Z[r, i] = -Z[r, i]
                    E[r] += dE
                    for j in range(n):
                        F[r, j] += 2.0 * Z[r, i] * J[j, i]
            if E[r] < best:
                best = E[r]
        for t in range(R - 1):
            a, b = slot[t], slot[t + 1]
            x = (1.0 / temps[t] - 1.0 / temps[t + 1]) * (E[a] - E[b])
            tries[t] += 1.0
            if x >= 0.0 or np.random.random() < math.exp(x):
                slot[t], slot[t + 1] = b, a
                swaps[t] += 1.0
    return best, swaps / np.maximum(tries, 1.0)


def pt_minimum(inst: IsingInstance, sweeps=2000, replicas=32, seed=0, temps=None):
    """Lowest energy found by one parallel-tempering run and the swap acceptance per adjacent pair."""
    if inst.n > PT_MAX_N:
        raise ValueError(f"parallel tempering limited to n <= {PT_MAX_N}")
    temps = default_ladder(inst.n, max(inst.s, 0.5), replicas) if temps is None else np.asarray(temps, float)
    best, acc = _pt_min(np.ascontiguousarray(inst.couplings), temps, int(sweeps), int(seed))
    return float(best), acc


def pt_extrema(inst: IsingInstance, sweeps=2000, replicas=32, restarts=10, seed=0, tol=1e-9) -> NormEstimate:
    """Minimum and maximum (minimum of -J) over independent restarts; confidence counts agreeing restarts."""
    neg = IsingInstance(inst.n, -inst.couplings, inst.ensemble, inst.s, inst.seed)
    mins = [pt_minimum(inst, sweeps, replicas, seed=int(np.random.SeedSequence([seed, 0, r]).generate_state(1)[0]))[0]
            for r in range(restarts)]
    maxs = [-pt_minimum(neg, sweeps, replicas, seed=int(np.random.SeedSequence([seed, 1, r]).generate_state(1)[0]))[0]
            for r in range(restarts)]
    lo, hi = min(mins), max(maxs)
    agree = min(sum(abs(m - lo) <= tol for m in mins), sum(abs(m - hi) <= tol for m in maxs))
    return NormEstimate(lo, hi, "heuristic", int(agree), restarts, agree * 2 > restarts)


def fit_power_law(ns, values):
    """Slope and standard error of log(values) against log(ns)."""
    ns, values = np.asarray(ns, float), np.asarray(values, float)
    if ns.size < 4:
        raise ValueError("need at least 4 sizes for a scaling fit")
    res = stats.linregress(np.log(ns), np.log(values))
    return float(res.slope), float(res.stderr)


@dataclass
class ScalingFit:
    a: float
    stderr: float
    a_median: float
    stderr_median: float
    rows: list = field(default_factory=list)


def scaling_fit(ensemble, n_list, reps=40, seed=0, s=1.5, method="exact", pt_kwargs=None) -> ScalingFit:
    """Fit norm ~ n^a on disorder-averaged norms (mean, with the median fit alongside)."""
    if len(n_list) < 4:
        raise ValueError("need at least 4 sizes for a scaling fit")
    rows, means, medians = [], [], []
    for n in n_list:
        norms = []
        for rep in range(reps):
            inst = random_instance(n, ensemble, s, seed, rep)
            est = exact_extrema(inst) if method == "exact" else pt_extrema(inst, seed=seed, **(pt_kwargs or {}))
            norms.append(est.norm)
            rows.append(dict(ensemble=ensemble, n=n, rep=rep, e_min=est.e_min, e_max=est.e_max, norm=est.norm,
                             method=est.method, confidence=est.confidence))
        means.append(np.mean(norms))
        medians.append(np.median(norms))
    a, se = fit_power_law(n_list, means)
    am, sem = fit_power_law(n_list, medians)
    return ScalingFit(a, se, am, sem, rows)


def write_rows_csv(rows, path):
    cols = ["ensemble", "n", "rep", "e_min", "e_max", "norm", "method", "confidence"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])
