"""Mediator models: qubit coupler, LC oscillator and transmission line.

Each model exposes the handful of numbers the feasibility theorem consumes
(gap, susceptibility chi, inverse overlap F^-1, coupling bound i, ground
energy shift E0), and a small local Hamiltonian for exact checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict, field

import numpy as np
import scipy.sparse as sp

from . import linalg as la

KINDS = ("qubit", "lc", "tl")
DEFAULT_TRUNCATION = {"lc": 16, "tl": 8}


@dataclass(frozen=True)
class MediatorModel:
    kind: str
    J: float
    truncation: int = 0
    n: int = 0  # transmission-line segments

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"mediator kind must be one of {KINDS}")
        lo_ok = self.J >= 0 if self.kind == "lc" else self.J > 0
        if not (lo_ok and self.J <= 1):
            raise ValueError(f"J={self.J} outside (0, 1]")
        if self.kind != "qubit" and self.truncation and self.truncation < 2:
            raise ValueError("truncation must be >= 2")
        if self.kind == "tl" and self.n < 2:
            raise ValueError("transmission line needs n >= 2 segments")


@dataclass
class MediatorFacts:
    gap: float
    chi: float
    overlap_inv: float
    coupling_bound: float
    energy_shift: float  # constant added to H_m + Z I_m so the ground energy is 0
    zeta_matrix: list = None

    def __post_init__(self):
        if not self.gap > 0:
            raise ValueError("gap must be positive")
        if self.overlap_inv < 1 - 1e-12:
            raise ValueError("F^-1 must be >= 1")
        if self.coupling_bound < abs(self.chi) - 1e-12:
            raise ValueError("coupling bound below |chi|")

    @property
    def overlap(self):
        return 0.0 if math.isinf(self.overlap_inv) else 1.0 / self.overlap_inv

    @property
    def feasible(self):
        return math.isfinite(self.overlap_inv)

    def to_dict(self):
        d = asdict(self)
        if math.isinf(self.overlap_inv):
            d["overlap_inv"] = "inf"
        return d


def _check_J(J, allow_zero=False):
    if not ((J >= 0 if allow_zero else J > 0) and J <= 1):
        raise ValueError(f"J={J} outside (0, 1]")


# ---------------------------------------------------------------- qubit coupler

def qubit_coupler_facts(J):
    _check_J(J)
    omega = math.sqrt(max(0.0, 1.0 - J * J))
    finv = math.inf if omega == 0 else 1.0 / omega
    return MediatorFacts(gap=1.0, chi=J, overlap_inv=finv, coupling_bound=1.0, energy_shift=0.5)


def qubit_coupler_pair(J, z):
    """Coupler Hamiltonian (Omega X + z J Z)/2 seen by a qubit frozen at Z = z; its gap is 1."""
    omega = math.sqrt(1.0 - J * J)
    return 0.5 * (omega * la.PAULI["X"] + z * J * la.PAULI["Z"])


def qubit_coupler_state(J, z):
    """Density matrix of the coupler ground state for qubit value z."""
    omega = math.sqrt(1.0 - J * J)
    return 0.5 * (np.eye(2) - (omega * la.PAULI["X"] + z * J * la.PAULI["Z"]))


# ---------------------------------------------------------------- LC oscillator

def lc_facts(J):
    _check_J(J, allow_zero=True)
    return MediatorFacts(gap=1.0, chi=2 * J, overlap_inv=math.exp(2 * J * J),
                         coupling_bound=1 + 2 * J, energy_shift=J * J)


def lc_hamiltonian(J, z, truncation):
    a, ad, _, _ = la.boson_operators(truncation)
    return ad @ a + z * J * (a + ad) + J * J * np.eye(truncation)


def lc_overlap_numeric(J, truncation=16):
    gp = np.linalg.eigh(lc_hamiltonian(J, 1, truncation))[1][:, 0]
    gm = np.linalg.eigh(lc_hamiltonian(J, -1, truncation))[1][:, 0]
    return abs(gp @ gm)


# ---------------------------------------------------------------- transmission line

def tl_mode_data(n):
    """Mode frequencies omega_k (ascending) and the orthonormal mode matrix v[k, m]."""
    if n < 2:
        raise ValueError("n must be >= 2")
    k = np.arange(1, n + 1)
    omega = 2 * np.sin(k * np.pi / (2 * (n + 1)))
    v = np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(k, k) * np.pi / (n + 1))
    return omega, v


def tl_mode_couplings(n):
    """g[k, r] = sin(k r pi/(n+1)) / sqrt(omega_k (n+1)), so x_r = sum_k g[k,r](a_k + a_k†)."""
    omega, v = tl_mode_data(n)
    return v / np.sqrt(2 * omega)[:, None]


def tl_zeta(n, r, s):
    """Ground-state displacement response zeta_{r,s} (1-based sites)."""
    if not (1 <= r <= n and 1 <= s <= n):
        raise IndexError("site index outside 1..n")
    return -((n + 1) * min(r, s) - r * s) / (n + 1)


def tl_zeta_modesum(n, r, s):
    omega, _ = tl_mode_data(n)
    g = tl_mode_couplings(n)
    return float(-np.sum(2 * g[:, r - 1] * g[:, s - 1] / omega))


def tl_zeta_matrix(n):
    return [[tl_zeta(n, r, s) for s in range(1, n + 1)] for r in range(1, n + 1)]


def tl_overlap_sum(n):
    """sum_k cos^2(k pi/2(n+1)) / sin(k pi/2(n+1))."""
    th = np.arange(1, n + 1) * np.pi / (2 * (n + 1))
    return float(np.sum(np.cos(th) ** 2 / np.sin(th)))


def tl_overlap_inv(n, J):
    """Closed-form F^-1 used by the feasibility theorem."""
    return math.exp(J * J / (4 * (n + 1)) * tl_overlap_sum(n))


def tl_overlap_inv_model(n, J):
    """Inverse overlap of the two displaced ground states of the mode Hamiltonian.

    For sum_k omega_k(a†a + 1/2) + zJ x_1 the coherent displacements are
    -zJ g_k/omega_k, so F = exp(-2 J^2 sum_k g_k^2/omega_k^2).
    """
    omega, _ = tl_mode_data(n)
    g1 = tl_mode_couplings(n)[:, 0]
    return math.exp(2 * J * J * float(np.sum(g1**2 / omega**2)))


def tl_energy_shift(n, J):
    """E0 such that the ground energy of H_m + Z I_m + E0 is zero."""
    minus_e0 = 0.5 * (1 / math.tan(math.pi / (4 * (n + 1))) - 1) - J * J * n / (2 * (n + 1))
    return -minus_e0


def tl_facts(n, J):
    if n < 2:
        raise ValueError("n must be >= 2")
    _check_J(J)
    return MediatorFacts(
        gap=2 * math.sin(math.pi / (2 * (n + 1))),
        chi=J / (n + 1),
        overlap_inv=tl_overlap_inv(n, J),
        coupling_bound=math.sqrt(2),
        energy_shift=tl_energy_shift(n, J),
        zeta_matrix=tl_zeta_matrix(n),
    )


def coupling_site(i, j):
    """Segment r (0-based) of line i that couples to line j: I_{i,j} = x_r − x_{r−1}.

    For a fixed line the map j -> r is a bijection from the other n−1 lines
    onto segments 1..n−1.
    """
    if i == j:
        raise ValueError("a line does not couple to itself")
    return j if j > i else j + 1


def tl_site_operators(n, truncation):
    """Site coordinates x_r (sparse, mode basis) for r = 1..n (list index r−1)."""
    g = tl_mode_couplings(n)
    dims = [truncation] * n
    a, ad, _, _ = la.boson_operators(truncation)
    quad = [la.embed(a + ad, k, dims) for k in range(n)]
    return [sum(g[k, r] * quad[k] for k in range(n)) for r in range(n)]


def tl_exact_hamiltonian(n, J, z, truncation, cap=None):
    """sum_k omega_k(a_k†a_k + 1/2) + zJ x_1 + E0 in a truncated Fock basis of the modes."""
    dims = [truncation] * n
    la.check_dim(truncation**n, cap)
    omega, _ = tl_mode_data(n)
    a, ad, _, _ = la.boson_operators(truncation)
    num = ad @ a
    H = sum(omega[k] * la.embed(num + 0.5 * np.eye(truncation), k, dims) for k in range(n))
    x1 = tl_site_operators(n, truncation)[0]
    H = H + z * J * x1 + tl_energy_shift(n, J) * sp.identity(truncation**n, format="csr")
    return la.HermitianOperator(H.tocsr(), tuple(la.Factor("boson", truncation) for _ in dims))


def _ground(H):
    w, v = la.eigensolve_lowest(la.as_matrix(H), 2)
    return w, v[:, 0]


def tl_numeric_facts(n, J, truncation):
    """Gap, chi per segment, overlap and ground energy from the truncated model."""
    wp, gp = _ground(tl_exact_hamiltonian(n, J, 1, truncation))
    wm, gm = _ground(tl_exact_hamiltonian(n, J, -1, truncation))
    xs = tl_site_operators(n, truncation)
    xexp = np.array([gp @ (x @ gp) for x in xs])
    return dict(
        gap=float(wp[1] - wp[0]), ground_energy=float(wp[0]),
        x_expect=xexp, chi=np.diff(xexp), overlap=float(abs(gp @ gm)),
    )


def tl_flux_residual(n, J, x_expect=None):
    """chi (n−1) + <x_1> − <x_n>; zero when ground fluxes cancel."""
    if x_expect is None:
        x_expect = [J * tl_zeta(n, r, 1) for r in range(1, n + 1)]
    return J / (n + 1) * (n - 1) + x_expect[0] - x_expect[-1]


# ---------------------------------------------------------------- circuit elements

def circuit_map(f):
    """Inductances (L, M) with L/(2(L²−M²)) = 1 and −M/(L²−M²) = f.

    Writing D = L² − M² gives L = 2D and M = −fD, hence D = 1/(4 − f²).
    Returns (L, M, feasible) with feasible meaning |M| < L.
    """
    if abs(f) >= 2:
        raise ValueError(f"no real inductances for coupling f={f}")
    D = 1.0 / (4.0 - f * f)
    L, M = 2 * D, -f * D
    return L, M, abs(M) < L


# ---------------------------------------------------------------- local models for gadgets

@dataclass
class LocalMediator:
    """Mediator Hamiltonian, its operator coupled to the qubit Z, and coupling operators."""

    H: object
    qubit_op: object
    couple: dict = field(default_factory=dict)  # partner qubit -> operator
    dim: int = 0


def local_mediator(model: MediatorModel, i, n_qubits):
    """Local model of mediator attached to qubit i in an n-qubit gadget."""
    J = model.J
    others = [j for j in range(n_qubits) if j != i]
    if model.kind == "qubit":
        H = 0.5 * math.sqrt(1 - J * J) * la.PAULI["X"]
        Zc = la.PAULI["Z"]
        return LocalMediator(sp.csr_matrix(H), sp.csr_matrix(0.5 * J * Zc), {j: sp.csr_matrix(Zc) for j in others}, 2)
    if model.kind == "lc":
        t = model.truncation or DEFAULT_TRUNCATION["lc"]
        a, ad, _, _ = la.boson_operators(t)
        q = sp.csr_matrix(a + ad)
        return LocalMediator(sp.csr_matrix(ad @ a), J * q, {j: q for j in others}, t)
    t = model.truncation or DEFAULT_TRUNCATION["tl"]
    n = model.n
    if n != n_qubits:
        raise ValueError("transmission line length must equal the number of qubits")
    omega, _ = tl_mode_data(n)
    dims = [t] * n
    a, ad, _, _ = la.boson_operators(t)
    H = sum(omega[k] * la.embed(ad @ a, k, dims) for k in range(n))
    xs = tl_site_operators(n, t)
    couple = {}
    for j in others:
        r = coupling_site(i, j)
        couple[j] = (xs[r] - xs[r - 1]).tocsr()
    return LocalMediator(H.tocsr(), (J * xs[0]).tocsr(), couple, t**n)


def local_ground_states(lm: LocalMediator):
    """Ground states g_+ and g_- of H + z qubit_op with <g_+|g_-> > 0, and their energy."""
    states, energies = [], []
    for z in (1, -1):
        M = (lm.H + z * lm.qubit_op).tocsr()
        w, v = la.eigensolve_lowest(M, min(2, M.shape[0]))
        states.append(np.real_if_close(v[:, 0]))
        energies.append(w[0])
    gp, gm = states
    if np.vdot(gp, gm).real < 0:
        gm = -gm
    # fix a deterministic global sign
    k = int(np.argmax(np.abs(gp)))
    if gp[k].real < 0:
        gp, gm = -gp, -gm
    return gp, gm, energies


def numeric_facts(lm: LocalMediator, partner):
    """chi (signed, for qubit value +1), F and gap of a local mediator model."""
    gp, gm, _ = local_ground_states(lm)
    op = lm.couple[partner]
    chi = float(np.real(np.vdot(gp, op @ gp)))
    F = float(abs(np.vdot(gp, gm)))
    M = (lm.H + lm.qubit_op).tocsr()
    w, _ = la.eigensolve_lowest(M, 2)
    return dict(chi=chi, overlap=F, gap=float(w[1] - w[0]))
