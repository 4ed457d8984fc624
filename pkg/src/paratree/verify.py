"""End-to-end spectral checks of small mediator gadgets by exact diagonalization.

Qubits occupy tensor factors 0..n-1 and mediators n..2n-1. The logical basis
state for bitstring m is |m> on the qubits times the mediator ground states
selected by each qubit value (bit 0 means Z = +1).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, asdict

import numpy as np
import scipy.sparse as sp

from . import linalg as la
from . import mediators as med
from .problems import TargetProblem
from .sw import schrieffer_wolff, SwApplicabilityError
from .theorem import NoiseBudget, TheoremReport, general_theorem, tl_main_result, _jsonable

NOISE_TERMS = ("h", "t", "zx", "x", "f")


class BoundViolation(AssertionError):
    """A certified design violated its guaranteed error bound."""


@dataclass
class GadgetDesign:
    problem: TargetProblem
    mediator: med.MediatorModel
    alpha: float
    epsilon: float
    hardware: dict = None
    chi: dict = None  # (i, j) -> signed susceptibility of mediator i toward j
    overlap: list = None
    noise_sample: dict = None  # term name -> per-term signed errors
    certified: bool = False
    report: TheoremReport = None

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.hardware is None:
            self.hardware = derive_hardware(self)

    @property
    def n(self):
        return self.problem.n


@dataclass
class SpectrumComparison:
    eigen_target: list
    eigen_eff: list
    max_abs_dev: float
    epsilon_emp: float
    gap_to_rest: float
    uncentered_dev: float = 0.0
    heff_dev: float = 0.0
    heff_dev_raw: float = 0.0
    heff_spectrum_match: float = 0.0
    alpha: float = 0.0
    bound: float = 0.0
    norm_V: float = 0.0
    sw_x: float = 0.0
    noisy: bool = False

    def to_dict(self):
        return _jsonable(asdict(self))


def _local_models(design):
    return [med.local_mediator(design.mediator, i, design.n) for i in range(design.n)]


def _calibrate(design, lms):
    """Signed chi per directed edge and overlap per qubit from the local ground states."""
    chi, F = {}, []
    for i, lm in enumerate(lms):
        gp, gm, _ = med.local_ground_states(lm)
        F.append(float(abs(np.vdot(gp, gm))))
        for j, op in lm.couple.items():
            chi[(i, j)] = float(np.real(np.vdot(gp, op @ gp)))
    return chi, F


def derive_hardware(design: GadgetDesign):
    """h^c = alpha h, t^c = alpha F^-1 t, f_ij = alpha J_ij / (chi_ij chi_ji)."""
    if design.chi is None or design.overlap is None:
        design.chi, design.overlap = _calibrate(design, _local_models(design))
    p, a = design.problem, design.alpha
    f = {}
    for (i, j), Jij in p.edges():
        cc = design.chi[(i, j)] * design.chi[(j, i)]
        if cc == 0:
            raise ValueError(f"zero susceptibility on edge ({i}, {j})")
        f[(i, j)] = a * Jij / cc
    return dict(h_c=[a * x for x in p.h], t_c=[a * x / F for x, F in zip(p.t, design.overlap)], f=f)


def design_gadget(problem: TargetProblem, mediator: med.MediatorModel, epsilon=0.1, noise: NoiseBudget = None,
                  alpha=None, allow_nonrigorous=False):
    """Design with alpha from the matching theorem unless alpha is given."""
    noise = noise or NoiseBudget()
    if mediator.kind == "tl":
        rep = tl_main_result(mediator.n, problem.s, epsilon, noise, allow_nonrigorous=allow_nonrigorous)
    else:
        facts = med.qubit_coupler_facts(mediator.J) if mediator.kind == "qubit" else med.lc_facts(mediator.J)
        rep = general_theorem(facts, problem, noise, epsilon, allow_nonrigorous=allow_nonrigorous)
    a = rep.alpha_o if alpha is None else float(alpha)
    certified = rep.feasible and alpha is None
    return GadgetDesign(problem, mediator, a, epsilon, certified=certified, report=rep)


def sample_noise(design: GadgetDesign, delta, rng=None, worst_case=False):
    """Per-term signed errors, uniform in [-delta, delta] or all +delta."""
    n = design.n
    draw = (lambda k: np.full(k, float(delta))) if worst_case else (lambda k: rng.uniform(-delta, delta, k))
    edges = [e for e, _ in design.problem.edges()]
    fvals = draw(len(edges))
    return dict(h=draw(n), t=draw(n), zx=draw(n), x=draw(n), f={e: float(v) for e, v in zip(edges, fvals)})


def _dims(design, lms):
    return [2] * design.n + [lm.dim for lm in lms]


def assemble_gadget(design: GadgetDesign, cap=None):
    """(H0, V, W): bare Hamiltonian with ground energy 0, perturbation, logical basis."""
    n = design.n
    lms = _local_models(design)
    dims = _dims(design, lms)
    D = int(np.prod(dims))
    la.check_dim(D, cap)
    factors = tuple(la.Factor("spin", 2) for _ in range(n)) + tuple(
        la.Factor("spin" if design.mediator.kind == "qubit" else "boson", d) for d in dims[n:])
    Z, X = la.PAULI["Z"], la.PAULI["X"]
    H0 = sp.csr_matrix((D, D))
    e0 = 0.0
    ground = []
    for i, lm in enumerate(lms):
        H0 = H0 + la.embed(lm.H, n + i, dims) + la.embed(Z, i, dims) @ la.embed(lm.qubit_op, n + i, dims)
        gp, gm, en = med.local_ground_states(lm)
        ground.append((gp, gm))
        e0 += en[0]
    H0 = (H0 - e0 * sp.identity(D, format="csr")).tocsr()

    hw = design.hardware
    V = sp.csr_matrix((D, D))
    for i in range(n):
        if hw["h_c"][i]:
            V = V + hw["h_c"][i] * la.embed(Z, i, dims)
        if hw["t_c"][i]:
            V = V + hw["t_c"][i] * la.embed(X, i, dims)
    coup = {}
    for (i, j), f in hw["f"].items():
        op = la.embed(lms[i].couple[j], n + i, dims) @ la.embed(lms[j].couple[i], n + j, dims)
        coup[(i, j)] = op
        V = V + f * op
    ns = design.noise_sample
    if ns:
        J = design.mediator.J
        for i, lm in enumerate(lms):
            V = V + ns["h"][i] * la.embed(Z, i, dims) + ns["t"][i] * la.embed(X, i, dims)
            V = V + ns["x"][i] * la.embed(lm.H, n + i, dims)
            if J:
                V = V + (ns["zx"][i] / J) * (la.embed(Z, i, dims) @ la.embed(lm.qubit_op, n + i, dims))
        for e, d in ns["f"].items():
            if e in coup:
                V = V + d * coup[e]
            else:
                i, j = e
                V = V + d * (la.embed(lms[i].couple[j], n + i, dims) @ la.embed(lms[j].couple[i], n + j, dims))
    V = ((V + V.conj().T) / 2).tocsr()
    V.eliminate_zeros()

    W = _logical_basis(n, ground)
    return la.HermitianOperator(H0, factors), la.HermitianOperator(V, factors), W


def _logical_basis(n, ground):
    cols = []
    for m in range(2**n):
        bits = [(m >> (n - 1 - k)) & 1 for k in range(n)]
        q = np.zeros(2**n)
        q[m] = 1.0
        vec = q
        for k, b in enumerate(bits):
            vec = np.kron(vec, ground[k][b])
        cols.append(vec)
    return np.stack(cols, axis=1)


def verify_spectrum(design: GadgetDesign, cap=None, check_bound=True) -> SpectrumComparison:
    """Compare the lowest 2^n gadget levels and the SW effective Hamiltonian with alpha H_target."""
    n, p = design.n, design.problem
    H0, V, W = assemble_gadget(design, cap)
    r = 2**n
    Ht = design.alpha * p.hamiltonian().dense()
    et = np.linalg.eigvalsh(Ht)
    H = (H0.matrix + V.matrix).tocsr()
    w, _ = la.eigensolve_lowest(H, min(r + 1, H.shape[0]))
    norm_V = la.operator_norm(V.matrix) if V.matrix.nnz else 0.0
    # with V = 0 the low block is the ground cluster of H0, which sits at 0 by construction
    eg = w[:r] if norm_V else np.zeros(r)
    gap_rest = float(w[r] - w[r - 1]) if w.size > r else math.inf
    uncentered = float(np.max(np.abs(eg - et)))
    dev = float(np.max(np.abs((eg - eg.mean()) - (et - et.mean()))))
    if norm_V == 0:
        Heff = np.zeros((r, r))
        sw_x = 0.0
    else:
        res = schrieffer_wolff(H0.matrix, V.matrix, P=W, variant="finite_dim", check=False)
        Heff, sw_x = res.H_eff, res.x_param
    shift = np.trace(Heff - Ht).real / r
    heff_dev = la.spectral_norm(Heff - Ht - shift * np.eye(r))
    heff_raw = la.spectral_norm(Heff - Ht)
    spec_match = float(np.max(np.abs(np.linalg.eigvalsh(Heff) - eg))) if norm_V else 0.0
    scale = design.alpha * n * p.s
    eps_emp = dev / scale if scale > 0 else (0.0 if dev == 0 else math.inf)
    bound = design.alpha * design.epsilon * n * p.s
    comp = SpectrumComparison(
        eigen_target=[float(x) for x in et], eigen_eff=[float(x) for x in eg], max_abs_dev=dev,
        epsilon_emp=float(eps_emp), gap_to_rest=gap_rest, uncentered_dev=uncentered,
        heff_dev=float(heff_dev), heff_dev_raw=float(heff_raw), heff_spectrum_match=spec_match,
        alpha=design.alpha, bound=bound, norm_V=float(norm_V), sw_x=float(sw_x),
        noisy=bool(design.noise_sample),
    )
    if check_bound and design.certified and not design.noise_sample and dev > bound:
        raise BoundViolation(f"deviation {dev:.3e} exceeds certified bound {bound:.3e}")
    return comp


def noise_stress(design: GadgetDesign, trials, scale_grid, seed=0, delta=None, cap=None):
    """epsilon_emp statistics versus noise magnitude scale*delta over random signed samples."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if delta is None:
        delta = design.report.extra.get("delta_max_uniform", 0.0) if design.report else 0.0
    rows = []
    for k, scale in enumerate(scale_grid):
        rng = np.random.default_rng([seed, k])
        vals = []
        for _ in range(trials):
            ns = sample_noise(design, scale * delta, rng)
            d = GadgetDesign(design.problem, design.mediator, design.alpha, design.epsilon,
                             hardware=design.hardware, chi=design.chi, overlap=design.overlap,
                             noise_sample=ns, certified=False)
            vals.append(verify_spectrum(d, cap).epsilon_emp)
        vals = np.array(vals)
        rows.append(dict(scale=float(scale), delta=float(scale * delta), mean=float(vals.mean()),
                         max=float(vals.max()), min=float(vals.min()),
                         all_within=bool(np.all(vals <= design.epsilon))))
    means = [r["mean"] for r in rows]
    order = np.argsort(scale_grid)
    monotone = bool(np.all(np.diff(np.array(means)[order]) >= -1e-12))
    return dict(rows=rows, monotone_mean=monotone, delta=float(delta))


def basis_distance(design: GadgetDesign, cap=None):
    """‖U_SW − 1‖, checked against the lemma bound; returns (distance, bound)."""
    H0, V, W = assemble_gadget(design, cap)
    if V.matrix.nnz == 0:
        return 0.0, 0.0
    res = schrieffer_wolff(H0.matrix, V.matrix, P=W, variant="finite_dim")
    if res.u_distance > res.bound_u * (1 + 1e-9) + 1e-12:
        raise BoundViolation(f"‖U−1‖ = {res.u_distance:.3e} above bound {res.bound_u:.3e}")
    return res.u_distance, res.bound_u


def truncation_sweep(design: GadgetDesign, truncations, cap=None):
    """epsilon_emp as the boson truncation grows; converged when the last change is small."""
    if design.mediator.kind == "qubit":
        raise ValueError("truncation applies to bosonic mediators only")
    rows = []
    for t in truncations:
        m = med.MediatorModel(design.mediator.kind, design.mediator.J, truncation=t, n=design.mediator.n)
        d = GadgetDesign(design.problem, m, design.alpha, design.epsilon, certified=design.certified,
                         report=design.report)
        c = verify_spectrum(d, cap)
        rows.append(dict(truncation=t, epsilon_emp=c.epsilon_emp, max_abs_dev=c.max_abs_dev,
                         heff_dev=c.heff_dev, comparison=c))
    if len(rows) >= 2:
        a, b = rows[-2]["epsilon_emp"], rows[-1]["epsilon_emp"]
        converged = abs(a - b) < max(0.1 * abs(b), 1e-8)
    else:
        converged = False
    return rows, converged


def write_trace_csv(comp: SpectrumComparison, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "target", "gadget", "deviation"])
        mt, mg = np.mean(comp.eigen_target), np.mean(comp.eigen_eff)
        for k, (a, b) in enumerate(zip(comp.eigen_target, comp.eigen_eff)):
            w.writerow([k, repr(a), repr(b), repr((b - mg) - (a - mt))])
