"""Closed-form feasibility verdicts for mediator gadgets.

Given a target problem, mediator facts, a precision target epsilon and a
control-noise budget, decide whether the gadget is guaranteed to reproduce
alpha*H_target within alpha*epsilon*n*s, and with which reduction factor alpha.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.optimize import minimize_scalar

from .mediators import MediatorFacts, qubit_coupler_facts, lc_facts, tl_facts, tl_overlap_inv
from .problems import TargetProblem
from .sw import sw_constants

EPS_MAX = 7.0 / 16.0
NONRIGOROUS = "no rigorous guarantee"


@dataclass
class NoiseBudget:
    delta: float = 0.0
    delta_H: float = 0.0
    delta_I: float = 0.0
    delta_1: float = 0.0
    delta_H_loc: float = 0.0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if v < 0:
                raise ValueError(f"{k} must be non-negative")

    @classmethod
    def uniform(cls, delta):
        return cls(delta=delta, delta_H=delta, delta_I=delta, delta_1=delta, delta_H_loc=delta)


@dataclass
class TheoremReport:
    variant: str
    feasible: bool
    alpha_o: float
    Delta: float
    Delta_V: float
    v: float
    epsilon: float
    lhs: float
    rhs: float
    binding_inequality: str
    rigorous: bool = True
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    hardware_params: dict = None

    def to_dict(self):
        d = asdict(self)
        return _jsonable(d)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isinf(x) or math.isnan(x):
            return str(x)
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _check_eps(epsilon, allow_nonrigorous):
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if epsilon > EPS_MAX and not allow_nonrigorous:
        raise ValueError(f"epsilon={epsilon} exceeds 7/16; pass allow_nonrigorous to evaluate anyway")
    return epsilon <= EPS_MAX


def amplification(facts: MediatorFacts, s):
    """1 + F^-1 + s max(i i / |chi chi|)."""
    return 1.0 + facts.overlap_inv + s * facts.coupling_bound**2 / facts.chi**2


def hardware_parameters(facts: MediatorFacts, problem: TargetProblem, alpha):
    chichi = facts.chi * facts.chi
    return dict(
        h_c=[alpha * h for h in problem.h],
        t_c=[alpha * facts.overlap_inv * t for t in problem.t],
        f={f"{i},{j}": alpha * J / chichi for (i, j), J in problem.edges()},
    )


def general_theorem(facts: MediatorFacts, problem: TargetProblem, noise: NoiseBudget, epsilon, v=0.0,
                    allow_nonrigorous=False, fully_tunable=False) -> TheoremReport:
    """Feasibility of a mediator gadget with control noise `noise` at precision epsilon.

    Two first-order noise coefficients are evaluated: 2 + s max|chi chi| (stated
    form) and 1 + F + s max|chi chi| (expanded form, never larger). The verdict
    uses the stated form.
    """
    rigorous = _check_eps(epsilon, allow_nonrigorous)
    n, s = problem.n, problem.s
    Delta = facts.gap
    Delta_V = Delta - v * (1 + Delta)
    notes = []
    if Delta_V <= 0:
        raise ValueError(f"adjusted gap {Delta_V} is not positive")
    if not facts.feasible:
        return TheoremReport("general", False, 0.0, Delta, Delta_V, v, epsilon, math.inf, 0.0,
                             "F = 0: the mediator ground states are orthogonal", rigorous,
                             ["degenerate mediator"], {})
    K = amplification(facts, s)
    chichi = facts.chi**2
    alpha = s * epsilon * Delta_V / (21 * n * K**2)
    rhs = Delta_V * (s * epsilon) ** 2 / (84 * n * K**2)
    dmult = n if fully_tunable else 1.0
    coef_thm = 2 + s * chichi
    coef_alt = 1 + facts.overlap + s * chichi
    lhs = noise.delta_H + noise.delta_I + dmult * noise.delta * coef_thm
    lhs_alt = noise.delta_H + noise.delta_I + dmult * noise.delta * coef_alt
    if fully_tunable:
        rigorous = False
        notes.append("fully tunable architecture: delta tightened by 1/n heuristically")
    if not rigorous:
        notes.append(NONRIGOROUS)
    feasible = lhs <= rhs
    binding = (f"dH + dI + d({coef_thm:.6g}) <= Delta_V (s eps)^2 / (84 n K^2), K={K:.6g}"
               if lhs >= lhs_alt else "expanded form")
    extra = dict(
        K=K, lhs_expanded=lhs_alt, feasible_expanded=lhs_alt <= rhs,
        coef_stated=coef_thm, coef_expanded=coef_alt,
        delta_max_uniform=rhs / (2 + dmult * coef_thm),
        delta_max_uniform_expanded=rhs / (2 + dmult * coef_alt),
        nominal_range=problem.nominal_range,
    )
    return TheoremReport("general", feasible, alpha, Delta, Delta_V, v, epsilon, lhs, rhs, binding,
                         rigorous, notes, extra, hardware_parameters(facts, problem, alpha))


def explicit_v(facts: MediatorFacts, problem: TargetProblem, epsilon, C_H, C_I, C_J):
    """Explicit custom-norm bound v and the largest epsilon for which it is valid."""
    Delta = facts.gap
    inv_chichi = 1.0 / facts.chi**2
    ii = facts.coupling_bound**2 * inv_chichi
    cmax = max(C_H, C_I)
    v = Delta * epsilon * (0.25 * cmax * epsilon + C_J**2 * inv_chichi) / (21 * ii**2)
    cap = min(EPS_MAX, 21 * ii**2 / ((Delta + 1) * (7.0 / 64 * cmax + C_J**2 * inv_chichi)))
    if epsilon > cap:
        raise ValueError(f"epsilon={epsilon} above the admissible cap {cap}")
    return v, cap


# ---------------------------------------------------------------- qubit coupler and LC specializations

def qubit_delta_bound(J, n, s, epsilon, Delta_V=0.95):
    """Largest uniform delta for a qubit-coupler gadget at coupler strength J."""
    facts = qubit_coupler_facts(J)
    prob = _dummy_problem(n, s)
    rep = general_theorem(facts, prob, NoiseBudget(), epsilon, v=(1 - Delta_V) / 2)
    return rep.extra["delta_max_uniform_expanded"]


def qubit_delta_max(n, s, epsilon, Delta_V=0.95):
    """max over J of qubit_delta_bound; returns (delta, J)."""
    grid = np.linspace(0.01, 0.99, 99)
    vals = [qubit_delta_bound(J, n, s, epsilon, Delta_V) for J in grid]
    k = int(np.argmax(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(lambda J: -qubit_delta_bound(J, n, s, epsilon, Delta_V), bounds=(lo, hi),
                          method="bounded", options=dict(xatol=1e-10))
    return -res.fun, float(res.x)


def qubit_v_bound(J, n, s, epsilon, delta=None, Delta_V=1.0):
    """n(delta_J + delta_H) + n alpha (1 + F^-1 + s/J^2), with delta at its allowed maximum by default."""
    facts = qubit_coupler_facts(J)
    rep = general_theorem(facts, _dummy_problem(n, s), NoiseBudget(), epsilon, v=(1 - Delta_V) / 2)
    if delta is None:
        delta = rep.extra["delta_max_uniform_expanded"]
    return n * 2 * delta + n * rep.alpha_o * amplification(facts, s)


def lc_delta_bound(J, n, s, epsilon, Delta_V=0.9936):
    facts = lc_facts(J)
    rep = general_theorem(facts, _dummy_problem(n, s), NoiseBudget(), epsilon, v=(1 - Delta_V) / 2)
    return rep.extra["delta_max_uniform_expanded"]


def _dummy_problem(n, s):
    return TargetProblem(n=n, s=s)


# ---------------------------------------------------------------- transmission line

TL_RHS_CONST = 0.01
TL_ALPHA_CONST = 0.035


def tl_v_bound(n):
    """Upper bound on v/Delta along the transmission-line derivation (n >= 4)."""
    term = 7 * math.pi / (2**12 * 3 * (n + 1) ** 3) + math.pi * (2 + 0.5 * (n + 1) ** 2 * (0.5 + n)) / (
        9 * 2**5 * (n + 1) ** 4)
    Delta = 2 * math.sin(math.pi / (2 * (n + 1)))
    return term * math.sin(math.pi / (2 * (n + 1))) / Delta


def tl_delta_v_star(n, s, J=1.0, Delta_V_ratio=0.9991):
    """Delta_V* = pi Delta_V / ((n+1) Delta (J^2(1+F^-1)/(2s(n+1)^2) + 1)^2)."""
    finv = tl_overlap_inv(n, J)
    return math.pi * Delta_V_ratio / ((n + 1) * (J * J * (1 + finv) / (2 * s * (n + 1) ** 2) + 1) ** 2)


def tl_main_result(n, s, epsilon, noise: NoiseBudget, allow_nonrigorous=False) -> TheoremReport:
    rigorous = _check_eps(epsilon, allow_nonrigorous)
    if n < 2 or s <= 0:
        raise ValueError("need n >= 2 and s > 0")
    notes = [] if rigorous else [NONRIGOROUS]
    if n < 4 or s < 1.5:
        notes.append("outside n >= 4, s >= 1.5: constants not certified")
    facts = tl_facts(n, 1.0)
    lhs = math.sqrt(2) * n * noise.delta_H_loc + (1 + math.sqrt(math.log(n))) * noise.delta_1 + 3 * noise.delta
    rhs = TL_RHS_CONST * epsilon**2 / (n * (n + 1) ** 5)
    alpha = TL_ALPHA_CONST * epsilon / (n * s * (n + 1) ** 5)
    Delta_V = (1 - 0.0009) * facts.gap
    extra = dict(
        overlap_inv=facts.overlap_inv, chi=facts.chi, coupling_bound=facts.coupling_bound,
        delta_v_star=tl_delta_v_star(n, s), delta_v_star_const=0.934 * 0.9991,
        alpha_derived=tl_delta_v_star(n, s) * epsilon / (84 * n * s * (n + 1) ** 4),
        v_over_Delta_bound=tl_v_bound(n) if n >= 4 else None,
    )
    return TheoremReport("tl_main", lhs <= rhs, alpha, facts.gap, Delta_V, 0.0009 * facts.gap / (1 + facts.gap),
                         epsilon, lhs, rhs,
                         "sqrt2 n dHloc + (1+sqrt(ln n)) d1 + 3 d <= 0.01 eps^2/(n(n+1)^5)",
                         rigorous and n >= 4 and s >= 1.5, notes, extra)


F_INV_C_LOWER = math.exp((np.euler_gamma - 1 - math.log(math.pi / 4)) / (2 * math.pi))
F_INV_C_UPPER = math.exp(1 / (8 * math.sqrt(2))) / 2 ** (1 / (2 * math.pi))


def F_inverse_bounds_check(n_max, n_min=2):
    """Check c_l (n+1)^(1/2pi) <= F^-1(n, J=1) <= c_u (n+1)^(1/2pi) for all n in range."""
    if n_max < n_min:
        raise ValueError("n_max below n_min")
    ns = np.arange(n_min, n_max + 1)
    finv = np.array([tl_overlap_inv(int(n), 1.0) for n in ns])
    p = (ns + 1.0) ** (1 / (2 * math.pi))
    lo, hi = F_INV_C_LOWER * p, F_INV_C_UPPER * p
    bad = ns[(finv < lo) | (finv > hi)]
    return dict(
        n_max=int(n_max), violations=[int(x) for x in bad],
        max_rel_gap_lower=float(np.max((finv - lo) / finv)),
        max_rel_gap_upper=float(np.max((hi - finv) / finv)),
        quarter_power_ok=bool(np.all(finv <= math.exp(1 / 8) * ns**0.25)),
    )


# ---------------------------------------------------------------- warm-up: non-qubit levels

@dataclass
class WarmupParams:
    n: int
    s: float
    omega_p: float
    r: float
    delta: float = 0.0
    epsilon: float = 0.1

    def __post_init__(self):
        if not 0 <= self.r <= 1:
            raise ValueError("r must lie in [0, 1]")
        if self.delta < 0 or self.omega_p <= 0 or self.epsilon <= 0:
            raise ValueError("delta >= 0, omega_p > 0, epsilon > 0 required")


def _warm(p):
    two_s = 2 + p.s
    A1 = 3.5 * p.r * p.n * two_s**2
    A2 = A1 * p.delta
    A3 = p.delta * two_s * p.omega_p
    E = 0.5 * p.epsilon * p.s * p.omega_p
    return A1, A2, A3, E


def warmup_orig0(p: WarmupParams, alpha):
    """(1+r)A1 a^2 + (A2 − eps s w_p) a + A3; non-positive means the error budget holds."""
    A1, A2, A3, _ = _warm(p)
    return (1 + p.r) * A1 * alpha**2 + (A2 - p.epsilon * p.s * p.omega_p) * alpha + A3


def warmup_in_range(p: WarmupParams, alpha):
    """Perturbation-theory applicability ((1+r)a + d)(2+s)n/w_p <= 1/16."""
    return ((1 + p.r) * alpha + p.delta) * (2 + p.s) * p.n / p.omega_p <= 1 / 16 + 1e-15


def warmup_thresholds(p: WarmupParams):
    two_s = 2 + p.s
    _, _, _, E = _warm(p)
    return dict(
        r_b=16 * p.epsilon * p.s / (7 * two_s),
        delta_b=E / (81 * p.n * two_s**2),
        alpha_b=0.5 * (p.omega_p / (16 * p.n * two_s) - p.delta),
        delta_r_cap=8 * (p.epsilon * p.s) ** 2 * p.omega_p / (7 * 81 * p.n * two_s**3),
        delta_one=p.epsilon * p.s / (6 * two_s),
    )


def warmup_solve(p: WarmupParams):
    """Walk the region tree; returns (feasible, alpha, branch)."""
    A1, A2, A3, E = _warm(p)
    th = warmup_thresholds(p)
    if p.r <= th["r_b"]:
        a = th["alpha_b"]
        if a <= 1:
            return (p.delta <= th["delta_b"] and a > 0), a, "alpha_b"
    else:
        a = (E - A2) / (2 * A1)
        if a <= 1:
            return (p.delta * p.r <= th["delta_r_cap"] and a > 0), a, "alpha_c"
    return p.delta <= th["delta_one"], 1.0, "one"


def warmup_vertex(p: WarmupParams):
    """Minimizer of the error-budget quadratic in alpha; returns (alpha, value, in_range)."""
    A1, A2, _, _ = _warm(p)
    a = (p.epsilon * p.s * p.omega_p - A2) / (2 * (1 + p.r) * A1)
    return a, warmup_orig0(p, a), warmup_in_range(p, a)


def warmup_delta_max(n, s, omega_p, r, epsilon):
    """Positive root of eps s w_p = A d + 2 sqrt(B d) with A = 3.5 r n (2+s)^2, B = 3.5 r (1+r) n (2+s)^3 w_p."""
    if r <= 0:
        raise ValueError("r must be positive")
    A = 3.5 * r * n * (2 + s) ** 2
    B = 3.5 * r * (1 + r) * n * (2 + s) ** 3 * omega_p
    target = epsilon * s * omega_p
    u = (-math.sqrt(B) + math.sqrt(B + A * target)) / A
    return u * u


def warmup_residual(n, s, omega_p, r, epsilon, delta):
    A = 3.5 * r * n * (2 + s) ** 2
    B = 3.5 * r * (1 + r) * n * (2 + s) ** 3 * omega_p
    return A * delta + 2 * math.sqrt(B * delta) - epsilon * s * omega_p


# ---------------------------------------------------------------- 40-qubit qubit-coupler layout

FLAVORS = ("simple_2PV", "PVQ_split", "finite_dim")


@dataclass(frozen=True)
class Pegasus40Instance:
    n: int = 40
    s: float = 2.0
    vq_count: int = 18
    vd_count: int = 22
    v_count: int = 31
    epsilon: float = 0.1
    c: float = 3.5

    def __post_init__(self):
        if self.vq_count + self.vd_count != self.n:
            raise ValueError("|vq| + |vd| must equal n")
        if min(self.vq_count, self.vd_count, self.v_count) < 0:
            raise ValueError("counts must be non-negative")


@dataclass
class PegasusResult:
    flavor: str
    delta_max: float
    J_opt: float
    alpha: float
    checks: dict = field(default_factory=dict)


def _peg_parts(inst, J):
    n, s, vq, vd, v = inst.n, inst.s, inst.vq_count, inst.vd_count, inst.v_count
    F = math.sqrt(1 - J * J)
    S = n + vq / F + vd + v / J + s * n - v  # alpha coefficient of ‖V‖ and ‖PV‖
    G4c = (J + F) * vq + (n + vq * F + vd + v * J + n * s - v)  # first-order noise coefficient
    aJ = math.sqrt(0.5 * (1 + J * J + math.sqrt(1 + 2 * J * J - 3 * J**4)))
    bJ = 0.5 * (F + math.sqrt(1 + 3 * J * J))
    cJ = 0.5 * (J + math.sqrt(4 - 3 * J * J))
    S2 = n + vq * aJ / F + vd + v / J + s * n - v  # alpha coefficient of ‖V − QVQ‖
    p0 = vq * ((1 - J * J) ** 0.25 + J)  # delta coefficient of ‖PVQ‖
    p1 = vq * J / F  # alpha coefficient of ‖PVQ‖
    return dict(F=F, S=S, G4c=G4c, S2=S2, cb=cJ + bJ, p0=p0, p1=p1)


def _qmin(a2, a1, a0, lo, hi):
    """Minimum of a2 x^2 + a1 x + a0 on [lo, hi] and its argmin."""
    if hi < lo:
        return math.inf, float("nan")
    xs = [lo, hi]
    if a2 > 0:
        xv = -a1 / (2 * a2)
        if lo < xv < hi:
            xs.append(xv)
    vals = [a2 * x * x + a1 * x + a0 for x in xs]
    k = int(np.argmin(vals))
    return vals[k], xs[k]


def _peg_simple(inst, J, d):
    """Returns (feasible, alpha, checks) for the 2‖PV‖ form with c* = 1.01 c."""
    P = _peg_parts(inst, J)
    n, s, eps, c = inst.n, inst.s, inst.epsilon, inst.c
    cstar = 1.01 * c
    G1 = 2 * cstar * P["S"] ** 2 / n**2
    G2 = 2 * d * inst.vq_count / P["S"]
    G4 = P["G4c"] * d / n
    need = 2 * (n * G1 * G2 + math.sqrt(n * G1 * G4 + (n * G1 * G2) ** 2))
    alpha = (s * eps - 2 * n * G1 * G2) / (2 * n * G1)
    normV = 2 * d * inst.vq_count + alpha * P["S"]
    denom = 1 - 2 * normV
    ok_c = denom > 0 and c / denom <= cstar
    x = 2 * normV / denom if denom > 0 else math.inf
    checks = dict(c_ratio=c / denom / c if denom > 0 else math.inf, x=x, norm_V=normV)
    return need <= s * eps and ok_c and x < 1 / 16, alpha, checks


def _peg_split(inst, J, d):
    P = _peg_parts(inst, J)
    n, s, eps, c, vq = inst.n, inst.s, inst.epsilon, inst.c, inst.vq_count
    ens = eps * n * s
    # (G4 d − a ens)(1 − 2‖V‖) + c ‖PVQ‖ ‖V−QVQ‖ <= 0, with ‖V‖ = 2 d vq + a S
    A = 1 - 4 * d * vq
    a2 = 2 * ens * P["S"] + c * P["p1"] * P["S2"]
    a1 = -ens * A - 2 * P["S"] * P["G4c"] * d + c * (P["p0"] * d * P["S2"] + P["p1"] * d * vq * P["cb"])
    a0 = P["G4c"] * d * A + c * P["p0"] * d * d * vq * P["cb"]
    # x = ‖V−QVQ‖ / (1 − 2‖V‖) <= 1/16
    hi = (1 / 16 - d * vq / 4 - d * vq * P["cb"]) / (P["S2"] + P["S"] / 8)
    val, alpha = _qmin(a2, a1, a0, 0.0, hi)
    normV = 2 * d * vq + alpha * P["S"] if alpha == alpha else math.nan
    vp = d * vq * P["cb"] + alpha * P["S2"] if alpha == alpha else math.nan
    checks = dict(x=vp / (1 - 2 * normV) if alpha == alpha else math.inf, norm_V=normV,
                  c_star_ratio=1 / (1 - 2 * normV) if alpha == alpha else math.inf)
    return val <= 0, alpha, checks


def _peg_finite(inst, J, d):
    P = _peg_parts(inst, J)
    n, s, eps, c, vq = inst.n, inst.s, inst.epsilon, inst.c, inst.vq_count
    ens = eps * n * s
    # G4 d + c ‖PVQ‖ ‖V‖ − a ens <= 0 with ‖V‖ <= 1/16
    a2 = c * P["p1"] * P["S"]
    a1 = c * (P["p0"] * d * P["S"] + P["p1"] * 2 * d * vq) - ens
    a0 = c * P["p0"] * d * 2 * d * vq + P["G4c"] * d
    hi = (1 / 16 - 2 * d * vq) / P["S"]
    val, alpha = _qmin(a2, a1, a0, 0.0, hi)
    normV = 2 * d * vq + alpha * P["S"] if alpha == alpha else math.nan
    return val <= 0, alpha, dict(norm_V=normV, x=normV)


_PEG = {"simple_2PV": _peg_simple, "PVQ_split": _peg_split, "finite_dim": _peg_finite}


def pegasus40_at(inst: Pegasus40Instance, flavor, J, iters=100):
    """Largest feasible delta at fixed J (bisection) with its alpha and checks."""
    if flavor not in _PEG:
        raise ValueError(f"flavor must be one of {FLAVORS}")
    f = _PEG[flavor]
    ok, a, ch = f(inst, J, 0.0)
    if not ok:
        return 0.0, float("nan"), ch
    lo, hi = 0.0, 1e-6
    while f(inst, J, hi)[0]:
        lo, hi = hi, 2 * hi
        if hi > 1:
            break
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(inst, J, mid)[0]:
            lo = mid
        else:
            hi = mid
    ok, a, ch = f(inst, J, lo)
    return lo, a, ch


def pegasus40_optimize(inst: Pegasus40Instance, flavor, grid=99, J_range=(0.01, 0.99)) -> PegasusResult:
    """Maximize the admissible delta over coupler strength J."""
    Js = np.linspace(J_range[0], J_range[1], grid)
    vals = np.array([pegasus40_at(inst, flavor, J, iters=60)[0] for J in Js])
    if not np.any(vals > 0):
        return PegasusResult(flavor, 0.0, float("nan"), float("nan"), {"reason": "infeasible for all J"})
    k = int(np.argmax(vals))
    lo, hi = Js[max(k - 1, 0)], Js[min(k + 1, grid - 1)]
    res = minimize_scalar(lambda J: -pegasus40_at(inst, flavor, J)[0], bounds=(lo, hi), method="bounded",
                          options=dict(xatol=1e-7))
    J = float(res.x)
    d, a, ch = pegasus40_at(inst, flavor, J)
    if d < vals[k]:
        J = float(Js[k])
        d, a, ch = pegasus40_at(inst, flavor, J)
    return PegasusResult(flavor, float(d), J, float(a), ch)


def sw_constant_at_boundary():
    """c(1/16), the largest first-order constant allowed."""
    return sw_constants(1 / 16)[0]
