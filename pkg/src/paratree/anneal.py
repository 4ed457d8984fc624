"""Anneal gap scans: minor-embedded chains versus paramagnetic chain mediators.

Each logical qubit owns a block of k consecutive sites on a ring of n*k
hardware qubits. Minor embedding locks the whole block into a ferromagnetic
chain. The paramagnetic construction keeps one problem qubit per block and
uses the remaining k-1 sites as a critical transverse-field chain mediator.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import minimize_scalar

from . import linalg as la
from .problems import TargetProblem, triangle_fixture

ANNEAL_CAP = 4096
ZERO_GAP = 1e-12
METHODS = ("minor_embedding", "paramagnetic")


def linear_A(s):
    return 1.0 - s


def linear_B(s):
    return s


@dataclass
class AnnealSchedule:
    kind: str
    scale: float = 1.0  # alpha (paramagnetic) or 1/M (minor embedding)
    A: object = linear_A
    B: object = linear_B
    J: float = 1.0  # qubit to mediator coupling
    J_star: float = 1.0  # mediator chain coupling

    def __post_init__(self):
        if self.kind not in METHODS:
            raise ValueError(f"kind must be one of {METHODS}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.kind == "minor_embedding" and self.scale > 1 + 1e-12:
            raise ValueError("1/M must not exceed 1 (M >= 1)")


@dataclass
class EmbeddedProblem:
    logical: TargetProblem
    k: int
    hardware_edges: list = field(default_factory=list)
    qubit_sites: list = field(default_factory=list)
    mediator_sites: list = field(default_factory=list)
    coupling_type: dict = field(default_factory=dict)  # logical edge -> kind of hardware coupling
    logical_to_hardware: dict = field(default_factory=dict)  # logical edge -> (site a, site b)

    @property
    def n_sites(self):
        return self.logical.n * self.k


@dataclass
class GapTrace:
    s_grid: list
    gap: list
    min_gap: float
    argmin_s: float
    scale_used: float
    ground_state_preserved: bool
    method: str = ""

    def to_rows(self):
        return [(float(s), float(g)) for s, g in zip(self.s_grid, self.gap)]


def embed_problem(logical: TargetProblem = None, k=1):
    """Place each logical qubit on a block of k ring sites; logical edges must join neighboring blocks."""
    logical = logical or triangle_fixture()
    if k < 1:
        raise ValueError("k must be >= 1")
    n = logical.n
    N = n * k
    if 2**N > ANNEAL_CAP:
        raise la.DimensionCapError(f"2^{N} exceeds the anneal cap {ANNEAL_CAP}")
    ring = [(i, (i + 1) % N) for i in range(N)] if N > 2 else [(0, 1)]
    ep = EmbeddedProblem(logical, k, hardware_edges=ring)
    ep.qubit_sites = [g * k for g in range(n)]
    ep.mediator_sites = [list(range(g * k + 1, g * k + k)) for g in range(n)]
    for (i, j), _ in logical.edges():
        if (i + 1) % n == j:
            a, b = i, j
        elif (j + 1) % n == i:
            a, b = j, i
        else:
            raise ValueError(f"logical edge ({i}, {j}) does not join neighboring blocks")
        ep.logical_to_hardware[(i, j)] = (a * k + k - 1, b * k)
        ep.coupling_type[(i, j)] = "qubit-qubit" if k == 1 else "mediator-qubit"
    return ep


def _op(o, i, N):
    return la.embed(o, i, [2] * N)


def chain_mediator_facts(length, J=1.0, J_star=1.0):
    """chi and F of a transverse-field chain driven at site 0 by a qubit with Z = +-1; chi read at the far end."""
    if length < 1:
        raise ValueError("chain length must be >= 1")
    X, Z = la.PAULI["X"], la.PAULI["Z"]
    Hm = sum(_op(X, i, length) for i in range(length))
    for i in range(length - 1):
        Hm = Hm + J_star * _op(Z, i, length) @ _op(Z, i + 1, length)
    gs = {}
    for b in (1, -1):
        w, v = np.linalg.eigh((Hm + b * J * _op(Z, 0, length)).toarray())
        gs[b] = v[:, 0]
    chi = float(gs[1] @ (_op(Z, length - 1, length) @ gs[1]))
    F = float(abs(gs[1] @ gs[-1]))
    return chi, F


def scale_limit(ep: EmbeddedProblem, kind, J=1.0, J_star=1.0):
    """Largest scale keeping every coefficient within [-1, 1]."""
    if kind == "minor_embedding" or ep.k == 1:
        return 1.0
    chi, F = chain_mediator_facts(ep.k - 1, J, J_star)
    return min(1.0, F, abs(chi))


@dataclass
class AnnealParts:
    """H(s) = A(s) Hx + B(s) Hz + Hc."""
    Hx: object
    Hz: object
    Hc: object
    max_coefficient: float

    def at(self, A, B):
        return (A * self.Hx + B * self.Hz + self.Hc).tocsr()


def anneal_parts(ep: EmbeddedProblem, sched: AnnealSchedule):
    N, k, p = ep.n_sites, ep.k, ep.logical
    X, Z = la.PAULI["X"], la.PAULI["Z"]
    dim = 2**N
    zero = sp.csr_matrix((dim, dim))
    Hx, Hz, Hc = zero.copy(), zero.copy(), zero.copy()
    coefs = []
    if sched.kind == "minor_embedding" or k == 1:
        m = sched.scale
        if sched.kind == "paramagnetic":
            Hx = m * sum(_op(X, i, N) for i in range(N))
            coefs.append(m)
        else:
            Hx = sum(_op(X, i, N) for i in range(N))
            coefs.append(1.0)
        for g in range(p.n):
            sites = list(range(g * k, g * k + k))
            for a, b in zip(sites, sites[1:]):
                Hz = Hz - _op(Z, a, N) @ _op(Z, b, N)
            for site in sites:
                Hz = Hz + m * p.h[g] / k * _op(Z, site, N)
            coefs.append(abs(m * p.h[g] / k))
        for e, Jij in p.edges():
            a, b = ep.logical_to_hardware[e]
            Hz = Hz + m * Jij * _op(Z, a, N) @ _op(Z, b, N)
            coefs.append(abs(m * Jij))
        if k > 1:
            coefs.append(1.0)
    else:
        alpha = sched.scale
        chi, F = chain_mediator_facts(k - 1, sched.J, sched.J_star)
        for g in range(p.n):
            q = ep.qubit_sites[g]
            meds = ep.mediator_sites[g]
            Hx = Hx + alpha / F * _op(X, q, N)
            Hz = Hz + alpha * p.h[g] * _op(Z, q, N)
            coefs += [alpha / F, abs(alpha * p.h[g])]
            for site in meds:
                Hc = Hc + _op(X, site, N)
            for a, b in zip(meds, meds[1:]):
                Hc = Hc + sched.J_star * _op(Z, a, N) @ _op(Z, b, N)
            Hc = Hc + sched.J * _op(Z, q, N) @ _op(Z, meds[0], N)
        coefs += [1.0, sched.J, sched.J_star]
        for e, Jij in p.edges():
            a, b = ep.logical_to_hardware[e]
            f = alpha * Jij / chi
            Hz = Hz + f * _op(Z, a, N) @ _op(Z, b, N)
            coefs.append(abs(f))
    return AnnealParts(sp.csr_matrix(Hx), sp.csr_matrix(Hz), sp.csr_matrix(Hc), float(max(coefs)))


def build_anneal_hamiltonian(ep: EmbeddedProblem, sched: AnnealSchedule, s):
    if not 0 <= s <= 1:
        raise ValueError("s must lie in [0, 1]")
    parts = anneal_parts(ep, sched)
    return la.HermitianOperator(parts.at(sched.A(s), sched.B(s)))


def _lowest_two(H, v0=None):
    if H.shape[0] <= 256:
        w, v = np.linalg.eigh(H.toarray())
        return w[:2], v[:, 0]
    w, v = spla.eigsh(H, k=2, which="SA", tol=1e-12, v0=v0, ncv=20)
    order = np.argsort(w)
    return w[order], v[:, order[0]]


def logical_ground_state(p: TargetProblem):
    """Z values of the classical ground state (transverse fields ignored); None when degenerate."""
    n = p.n
    best, arg, second = math.inf, None, math.inf
    for m in range(2**n):
        z = [1 - 2 * ((m >> (n - 1 - i)) & 1) for i in range(n)]
        e = sum(p.h[i] * z[i] for i in range(n)) + sum(J * z[i] * z[j] for (i, j), J in p.edges())
        if e < best - 1e-12:
            second, best, arg = best, e, z
        elif e < second:
            second = e
    return None if second - best < 1e-12 else tuple(arg)


def decode(ep: EmbeddedProblem, sched: AnnealSchedule, psi):
    """Logical Z values read from a hardware state (chain majority or problem-qubit sign)."""
    N = ep.n_sites
    Z = la.PAULI["Z"]
    out = []
    for g in range(ep.logical.n):
        sites = range(g * ep.k, g * ep.k + ep.k) if sched.kind == "minor_embedding" else [ep.qubit_sites[g]]
        val = sum(float(np.real(np.vdot(psi, _op(Z, site, N) @ psi))) for site in sites)
        out.append(0 if abs(val) < 1e-9 else int(np.sign(val)))
    return tuple(out)


def gap_scan(ep: EmbeddedProblem, sched: AnnealSchedule, grid_points=201, refine_tol=1e-6, parts=None):
    if grid_points < 51:
        raise ValueError("grid_points must be >= 51")
    parts = parts or anneal_parts(ep, sched)
    grid = np.linspace(0.0, 1.0, grid_points)

    def gap_at(s, v0=None):
        w, v = _lowest_two(parts.at(sched.A(s), sched.B(s)), v0)
        g = float(w[1] - w[0])
        return (0.0 if g < ZERO_GAP else g), v

    gaps, v = [], None
    for s in grid:
        g, v = gap_at(s, v)
        gaps.append(g)
    gaps = np.array(gaps)
    i = int(np.argmin(gaps))
    min_gap, arg = float(gaps[i]), float(grid[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid_points - 1)]
    if min_gap > 0 and hi > lo:
        res = minimize_scalar(lambda s: gap_at(s)[0], bounds=(lo, hi), method="bounded",
                              options=dict(xatol=refine_tol))
        if res.fun < min_gap:
            min_gap, arg = float(res.fun), float(res.x)
    _, psi = gap_at(1.0)
    target = logical_ground_state(ep.logical)
    preserved = target is not None and decode(ep, sched, psi) == target
    return GapTrace(list(map(float, grid)), list(map(float, gaps)), min_gap, arg, sched.scale, bool(preserved),
                    sched.kind)


def optimize_scale(ep: EmbeddedProblem, kind, scale_range=None, grid_points=101, coarse=8, tol=1e-3,
                   enforce_constraint=True):
    """Maximize the minimal gap over the scale, discarding scales that change the end ground state."""
    limit = scale_limit(ep, kind)
    lo, hi = scale_range if scale_range is not None else (0.05 * limit, limit)
    if enforce_constraint and hi > limit + 1e-12:
        raise ValueError(f"scale {hi} exceeds the coefficient limit {limit}")
    cache = {}

    def trace(x):
        x = float(x)
        if x not in cache:
            cache[x] = gap_scan(ep, AnnealSchedule(kind, x), grid_points)
        return cache[x]

    def score(x):
        t = trace(x)
        return t.min_gap if t.ground_state_preserved else -math.inf

    xs = np.linspace(lo, hi, coarse)
    vals = [score(x) for x in xs]
    k = int(np.argmax(vals))
    if not math.isfinite(vals[k]):
        raise RuntimeError("no scale in range preserves the logical ground state")
    a, b = xs[max(k - 1, 0)], xs[min(k + 1, coarse - 1)]
    if b > a:
        res = minimize_scalar(lambda x: -score(x), bounds=(a, b), method="bounded", options=dict(xatol=tol))
        best = float(res.x) if -res.fun > vals[k] else float(xs[k])
    else:
        best = float(xs[k])
    return best, trace(best)


def crossover_report(k_max=4, logical=None, grid_points=201, coarse=8, ks=None):
    """Rows (k, method, min_gap, best_scale, argmin_s) for k = 1..k_max."""
    logical = logical or triangle_fixture()
    if logical.n * k_max > 12:
        raise la.DimensionCapError("n * k_max must not exceed 12")
    rows = []
    for k in ks or range(1, k_max + 1):
        ep = embed_problem(logical, k)
        for kind in METHODS:
            scale, tr = optimize_scale(ep, kind, grid_points=grid_points, coarse=coarse)
            rows.append(dict(k=k, method=kind, min_gap=tr.min_gap, best_scale=scale, argmin_s=tr.argmin_s))
    return rows


def fit_exponential(ks, gaps):
    """Least-squares fit log gap = b - c k; returns c."""
    c, _ = np.polyfit(np.asarray(ks, float), np.log(gaps), 1)
    return float(-c)


def fit_power(ks, gaps):
    """Least-squares fit log gap = b - a log k; returns a."""
    a, _ = np.polyfit(np.log(np.asarray(ks, float)), np.log(gaps), 1)
    return float(-a)


def write_table_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "method", "min_gap", "best_scale"])
        for r in rows:
            w.writerow([r["k"], r["method"], repr(r["min_gap"]), repr(r["best_scale"])])


def write_trace_csv(trace: GapTrace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "gap"])
        for s, g in trace.to_rows():
            w.writerow([repr(s), repr(g)])
