"""Exact Schrieffer-Wolff block diagonalization and its error constants.

The rotation U = sqrt((2P-1)(2P_V-1)) acts as the identity outside
span(P) + span(P_V), so everything is computed on that (at most 2r)
dimensional subspace. This keeps sparse, large gadgets cheap while staying
exact.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import linalg as la

X_MAX = 1.0 / 16.0
FULL_MATRIX_LIMIT = 4096
VARIANTS = ("finite_dim", "infinite_dim")


class SwApplicabilityError(ValueError):
    def __init__(self, msg, ratios):
        super().__init__(msg)
        self.ratios = ratios


class LevelCrossingError(RuntimeError):
    pass


def sw_constants(x):
    """Return (c(x), c_S(x)) for 0 < x <= 1/16 (the endpoint is the finite limit)."""
    x = float(x)
    if not 0.0 < x <= X_MAX:
        raise ValueError(f"x={x} outside (0, 1/16]")
    y = 8.0 * x / (1.0 - 2.0 * x)
    c = np.tan(-0.25 * np.log1p(-y)) / x
    c_s = np.expm1(-0.5 * np.log1p(-y)) / x
    return float(c), float(c_s)


def z_norm_bound(x):
    return 8.0 * x / (1.0 - 2.0 * x)


def adjusted_gap(delta, v):
    if v < 0:
        raise ValueError("v must be non-negative")
    return delta - v * (1.0 + delta)


@dataclass
class SwResult:
    P: object  # projector (dense) or None above FULL_MATRIX_LIMIT
    P_V: object
    U_SW: object
    H_eff: np.ndarray  # in the basis `basis` of range(P)
    x_param: float
    bound_first_order: float
    u_distance: float
    variant: str = "finite_dim"
    basis: np.ndarray = None
    gap: float = 0.0
    gap_used: float = 0.0  # Δ or Δ_V
    z_norm: float = 0.0
    offblock: float = 0.0
    rotation_residual: float = 0.0
    bound_u: float = 0.0
    norms: dict = field(default_factory=dict)
    low_energies: np.ndarray = None

    @property
    def first_order_error(self):
        """‖P(H_SW − V)P‖ evaluated with P H0 P = 0."""
        return self.norms["first_order_error"]


def _orth(A, tol=1e-12):
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    keep = s > tol * max(1.0, s[0] if s.size else 1.0)
    return u[:, keep]


def unitary_sqrt(G):
    """Principal square root of a unitary; branch continuous to 1 at G = 1."""
    T, Zs = sla.schur(G, output="complex")
    d = np.diag(T)
    if np.any(np.abs(d + 1) < 1e-10):
        raise LevelCrossingError("rotation has eigenvalue -1: ‖P − P_V‖ = 1")
    return (Zs * np.sqrt(d)) @ Zs.conj().T


def _basis_from(P, dim):
    if P is None:
        return None
    P = la.as_dense(P)
    if P.shape == (dim, dim):
        w, v = np.linalg.eigh((P + P.conj().T) / 2)
        return v[:, w > 0.5]
    return P


def _low_rank_norm(W, K):
    """‖P V + Q V P‖ with P = W W†, K = V W."""
    QK = K - W @ (W.conj().T @ K)
    B = _orth(np.hstack([W, QK]))
    M = (B.conj().T @ W) @ (K.conj().T @ B) + (B.conj().T @ QK) @ (W.conj().T @ B)
    return la.spectral_norm(M)


def schrieffer_wolff(H0, V, P=None, variant="finite_dim", check=True) -> SwResult:
    """Block-diagonalize H0 + V with respect to the ground projector P of H0.

    H0 is shifted internally so its ground cluster sits at 0. P may be a
    projector matrix or an orthonormal basis; by default the lowest
    eigencluster of H0 is used.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    H0m, Vm = la.as_matrix(H0), la.as_matrix(V)
    dim = H0m.shape[0]
    if Vm.shape != H0m.shape:
        raise ValueError("H0 and V dimensions differ")
    sparse = sp.issparse(H0m) or sp.issparse(Vm)

    W = _basis_from(P, dim)
    if W is None:
        W, e0, gap = la.ground_space(H0m)
    else:
        r = W.shape[1]
        w0, _ = la.eigensolve_lowest(H0m, min(dim, r + 1))
        e0 = float(w0[0])
        gap = float(w0[r] - w0[r - 1]) if r < dim else np.inf
        HW = H0m @ W - e0 * W
        if np.linalg.norm(HW) > 1e-8 * max(1.0, abs(e0)) or abs(w0[r - 1] - e0) > 1e-8 * max(1.0, abs(e0)):
            raise ValueError("P is not the ground eigenspace of H0")
    r = W.shape[1]
    ident = sp.identity(dim, format="csr") if sparse else np.eye(dim)
    H0s = H0m - e0 * ident
    H = H0s + Vm

    K = Vm @ W
    PVP = W.conj().T @ K
    norm_pv = la.spectral_norm(K)
    norm_pvq = la.spectral_norm(K - W @ PVP)
    norm_vp = _low_rank_norm(W, K)
    norm_v = la.operator_norm(Vm)
    norms = dict(V=norm_v, PV=norm_pv, PVQ=norm_pvq, V_P=norm_vp)

    if variant == "finite_dim":
        gap_used = gap
        x = norm_v / gap
        size = norm_v
        ratios = {"norm_V/gap": x}
        ok = x < X_MAX
    else:
        v = la.custom_norm(la.as_dense(Vm), la.as_dense(H0s))
        gap_used = adjusted_gap(gap, v)
        norms["custom"] = v
        x = norm_vp / gap_used if gap_used > 0 else np.inf
        size = norm_vp
        ratios = {"norm_VP/gap_V": x, "norm_PV/gap_V": norm_pv / gap_used if gap_used > 0 else np.inf}
        ok = gap_used > 0 and x < X_MAX
    if check and not ok:
        raise SwApplicabilityError(f"perturbation too large: {ratios}", ratios)

    # exact perturbed low-energy projector
    m = min(dim, r + 1)
    w, Y = la.eigensolve_lowest(H, m)
    if r < w.size and w[r] - w[r - 1] <= 1e-9 * max(1.0, abs(w[r])):
        raise LevelCrossingError("perturbed low-energy cluster is not separated")
    Y = Y[:, :r]
    sv = np.linalg.svd(W.conj().T @ Y, compute_uv=False)
    if sv.min() < 1e-8:
        raise LevelCrossingError("‖P − P_V‖ = 1: perturbed states left the unperturbed space")

    B = _orth(np.hstack([W, Y]))
    C, D = B.conj().T @ W, B.conj().T @ Y
    k = B.shape[1]
    Ik = np.eye(k)
    Ps, PVs = C @ C.conj().T, D @ D.conj().T
    G = (2 * Ps - Ik) @ (2 * PVs - Ik)
    Us = unitary_sqrt(G)
    HB = H @ B
    Hs = B.conj().T @ HB
    Hs = (Hs + Hs.conj().T) / 2
    CU = Us.conj().T @ C  # B† U† W
    H_eff = CU.conj().T @ Hs @ CU
    H_eff = (H_eff + H_eff.conj().T) / 2

    # off-block residual ‖P H_SW Q‖ via M = U H U† W
    T = B @ CU
    X = H @ T
    M = X + B @ ((Us - Ik) @ (B.conj().T @ X))
    offblock = la.spectral_norm(M - W @ (W.conj().T @ M))
    rotation_residual = la.spectral_norm(Us @ PVs @ Us.conj().T - Ps)
    u_distance = la.spectral_norm(Us - Ik)
    z_norm = la.spectral_norm(G - Ik)
    first_err = la.spectral_norm(H_eff - PVP)

    if 0 < x <= X_MAX:
        c, c_s = sw_constants(x)
    elif x == 0:
        c, c_s = 2.0, 4.0
    else:
        c = c_s = np.inf
    bound = c * norm_pvq * size / gap_used if size > 0 else 0.0
    bound_u = c_s * size / gap_used if size > 0 else 0.0
    norms["first_order_error"] = first_err

    Pm = PVm = Um = None
    if dim <= FULL_MATRIX_LIMIT:
        Pm = W @ W.conj().T
        PVm = Y @ Y.conj().T
        Um = np.eye(dim) + B @ (Us - Ik) @ B.conj().T
    return SwResult(
        P=Pm, P_V=PVm, U_SW=Um, H_eff=H_eff, x_param=float(x),
        bound_first_order=float(bound), u_distance=float(u_distance), variant=variant,
        basis=W, gap=float(gap), gap_used=float(gap_used), z_norm=float(z_norm),
        offblock=float(offblock), rotation_residual=float(rotation_residual),
        bound_u=float(bound_u), norms=norms, low_energies=w[:r],
    )


def expm_hermitian(H, t):
    """exp(iHt) for Hermitian H via eigendecomposition."""
    w, v = np.linalg.eigh(la.as_dense(H))
    return (v * np.exp(1j * w * t)) @ v.conj().T


def duhamel_check(H, dH, t):
    """(lhs, rhs) of ‖exp(i(H+dH)t) − exp(iHt)‖ <= t‖dH‖."""
    if t < 0:
        raise ValueError("t must be non-negative")
    H, dH = la.as_dense(H), la.as_dense(dH)
    lhs = la.spectral_norm(expm_hermitian(H + dH, t) - expm_hermitian(H, t))
    rhs = t * la.operator_norm(dH)
    return float(lhs), float(rhs)


def _random_hermitian(rng, d):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (A + A.conj().T) / 2


def random_gapped_instance(rng, dim, x=None, adversarial=False):
    """Random H0 >= 0 with degenerate ground space and gap Δ, and V with ‖V‖ = xΔ."""
    r = int(rng.integers(1, dim // 2 + 1))
    gap = float(rng.uniform(0.5, 2.0))
    ev = np.concatenate([np.zeros(r), gap + rng.exponential(2.0, dim - r)])
    ev[r] = gap
    U, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    H0 = (U * ev) @ U.conj().T
    H0 = (H0 + H0.conj().T) / 2
    W = U[:, :r]
    if adversarial:
        a = rng.normal(size=r) + 1j * rng.normal(size=r)
        b = rng.normal(size=dim - r) + 1j * rng.normal(size=dim - r)
        u = W @ a
        q = U[:, r:] @ b
        V = np.outer(u, q.conj())
        V = V + V.conj().T
    else:
        V = _random_hermitian(rng, dim)
    if x is None:
        x = float(rng.uniform(1e-3, X_MAX * 0.999))
    nv = la.operator_norm(V)
    V = V * (x * gap / nv) if x > 0 else np.zeros_like(V)
    return H0, V, W, gap


def empirical_lemma_audit(trials=500, dims=(8, 64), seed=0, tol=1e-10):
    """Check the first-order, ‖Z‖ and ‖U−1‖ inequalities on random instances.

    Ratios reported are observed/bound, so a value above 1 is a violation.
    """
    lo, hi = dims
    worst = dict(first_order=0.0, Z=0.0, U=0.0, first_order_infinite=0.0, U_infinite=0.0)
    violations = []
    checked_infinite = 0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        dim = int(rng.integers(lo, hi + 1))
        H0, V, W, gap = random_gapped_instance(rng, dim, adversarial=(trial % 4 == 3))
        res = schrieffer_wolff(H0, V, W, "finite_dim")
        x = res.x_param
        checks = {
            "first_order": (res.first_order_error, res.bound_first_order),
            "Z": (res.z_norm, z_norm_bound(x)),
            "U": (res.u_distance, res.bound_u),
        }
        try:
            inf = schrieffer_wolff(H0, V, W, "infinite_dim")
        except SwApplicabilityError:
            inf = None
        if inf is not None:
            checked_infinite += 1
            checks["first_order_infinite"] = (inf.first_order_error, inf.bound_first_order)
            checks["U_infinite"] = (inf.u_distance, inf.bound_u)
        for name, (obs, bnd) in checks.items():
            ratio = obs / bnd if bnd > 0 else (0.0 if obs <= tol else np.inf)
            worst[name] = max(worst[name], ratio)
            if obs > bnd + tol:
                violations.append(dict(trial=trial, check=name, observed=obs, bound=bnd, x=x, dim=dim,
                                       H0=_ser(H0), V=_ser(V)))
    return dict(
        trials=trials, dims=list(dims), seed=seed,
        max_ratio_first_order=worst["first_order"], max_ratio_Z=worst["Z"], max_ratio_U=worst["U"],
        max_ratio_first_order_infinite=worst["first_order_infinite"],
        max_ratio_U_infinite=worst["U_infinite"], infinite_variant_checked=checked_infinite,
        violations=violations,
    )


def _ser(M):
    return {"re": np.real(M).tolist(), "im": np.imag(M).tolist()}


def audit_json(report):
    return json.dumps(report, sort_keys=True, indent=2)
