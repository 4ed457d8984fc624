"""Hermitian linear algebra on small spin/boson Hilbert spaces.

Tensor ordering: site 0 is the slowest-varying Kronecker factor, so Z on
site 0 of three spins is diag(+1,+1,+1,+1,-1,-1,-1,-1).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DIM_CAP = int(os.environ.get("PARATREE_DIM_CAP", 2**14))
# above this size a sparse input is diagonalized iteratively
DENSE_LIMIT = 2048


class DimensionCapError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


PAULI = {
    "I": np.eye(2),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Y": np.array([[0.0, -1j], [1j, 0.0]]),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}


@dataclass(frozen=True)
class Factor:
    kind: str  # "spin" or "boson"
    levels: int

    def __post_init__(self):
        if self.kind not in ("spin", "boson"):
            raise ValueError(f"unknown factor kind {self.kind!r}")
        if self.levels < 2:
            raise ValueError("a tensor factor needs at least 2 levels")


@dataclass
class HermitianOperator:
    """A Hermitian matrix together with its tensor-factor layout."""

    matrix: object
    factors: tuple = ()

    def __post_init__(self):
        m = self.matrix
        if m.shape[0] != m.shape[1]:
            raise ValueError("operator must be square")
        if self.factors:
            self.factors = tuple(self.factors)
            if int(np.prod([f.levels for f in self.factors])) != m.shape[0]:
                raise ValueError("dimension does not match tensor factors")
        if not is_hermitian(m):
            raise ValueError("matrix is not Hermitian")

    @property
    def dim(self):
        return self.matrix.shape[0]

    def dense(self):
        return as_dense(self.matrix)

    def __add__(self, other):
        return HermitianOperator(self.matrix + as_matrix(other), self.factors)

    def __mul__(self, c):
        if np.iscomplexobj(c) and np.imag(c) != 0:
            raise ValueError("complex scaling breaks Hermiticity")
        return HermitianOperator(self.matrix * float(np.real(c)), self.factors)

    __rmul__ = __mul__


@dataclass(frozen=True)
class SpinTerm:
    coefficient: float
    factors: tuple = field(default_factory=tuple)  # ((site, "X"|"Y"|"Z"), ...)

    def __post_init__(self):
        sites = [s for s, _ in self.factors]
        if len(set(sites)) != len(sites):
            raise ValueError("repeated site in a spin term")
        for _, ax in self.factors:
            if ax not in ("X", "Y", "Z"):
                raise ValueError(f"bad Pauli axis {ax!r}")


@dataclass(frozen=True)
class BosonSite:
    truncation: int

    def __post_init__(self):
        if self.truncation < 2:
            raise ValueError("truncation must be >= 2")


def as_matrix(H):
    return H.matrix if isinstance(H, HermitianOperator) else H


def as_dense(H):
    H = as_matrix(H)
    return H.toarray() if sp.issparse(H) else np.asarray(H)


def is_hermitian(H, rtol=1e-12):
    H = as_matrix(H)
    D = H - H.conj().T
    if sp.issparse(H):
        scale = abs(H).max() if H.nnz else 0.0
        diff = abs(D).max() if D.nnz else 0.0
    else:
        scale = np.max(np.abs(H)) if H.size else 0.0
        diff = np.max(np.abs(D)) if D.size else 0.0
    return diff <= rtol * max(scale, 1e-300) or diff == 0.0


def check_dim(dim, cap=None):
    cap = DIM_CAP if cap is None else cap
    if dim > cap:
        raise DimensionCapError(f"Hilbert space dimension {dim} exceeds cap {cap}")


def embed(local, site, dims):
    """Kronecker-embed a local operator acting on factor `site` of `dims`."""
    left = int(np.prod(dims[:site]))
    right = int(np.prod(dims[site + 1:]))
    out = sp.csr_matrix(local)
    if left > 1:
        out = sp.kron(sp.identity(left, format="csr"), out, format="csr")
    if right > 1:
        out = sp.kron(out, sp.identity(right, format="csr"), format="csr")
    return out


def pauli_string(factors, dims):
    """Product of Paulis on spin factors, identity elsewhere (sparse)."""
    out = None
    by_site = dict(factors)
    for site, d in enumerate(dims):
        m = sp.csr_matrix(PAULI[by_site[site]]) if site in by_site else sp.identity(d, format="csr")
        out = m if out is None else sp.kron(out, m, format="csr")
    return out


def build_spin_hamiltonian(n_sites: int, terms: Sequence[SpinTerm], cap=None) -> HermitianOperator:
    dim = 2**n_sites
    check_dim(dim, cap)
    for t in terms:
        for s, _ in t.factors:
            if not 0 <= s < n_sites:
                raise IndexError(f"site {s} out of range for {n_sites} sites")
    dims = [2] * n_sites
    H = sp.csr_matrix((dim, dim), dtype=complex if _has_y(terms) else float)
    for t in terms:
        if t.factors:
            H = H + t.coefficient * pauli_string(t.factors, dims)
        else:
            H = H + t.coefficient * sp.identity(dim, format="csr")
    return HermitianOperator(H.tocsr(), tuple(Factor("spin", 2) for _ in range(n_sites)))


def _has_y(terms):
    return any(ax == "Y" for t in terms for _, ax in t.factors)


def boson_operators(site):
    """(a, a_dag, x, p) on a truncated Fock space with x=(a+a†)/√2, p=i(a†−a)/√2."""
    m = site.truncation if isinstance(site, BosonSite) else BosonSite(int(site)).truncation
    a = np.diag(np.sqrt(np.arange(1, m)), k=1)
    ad = a.T.copy()
    x = (a + ad) / np.sqrt(2)
    p = 1j * (ad - a) / np.sqrt(2)
    return a, ad, x, p


def _dense_eigh(H, m=None):
    Hd = as_dense(H)
    if m is None or m >= Hd.shape[0]:
        return np.linalg.eigh(Hd)
    return sla.eigh(Hd, subset_by_index=[0, m - 1])


def eigensolve_lowest(H, m: int, tol=1e-9):
    """Lowest m eigenpairs, ascending; checks residuals against tol·‖H‖."""
    M = as_matrix(H)
    dim = M.shape[0]
    if not 1 <= m <= dim:
        raise ValueError(f"m={m} outside [1, {dim}]")
    if sp.issparse(M) and dim > DENSE_LIMIT and m < dim // 4:
        v0 = np.ones(dim) / np.sqrt(dim)
        w, v = spla.eigsh(M, k=m, which="SA", tol=1e-13, v0=v0, ncv=max(2 * m + 1, 40))
        order = np.argsort(w)
        w, v = w[order], v[:, order]
    else:
        w, v = _dense_eigh(M, m)
        w, v = w[:m], v[:, :m]
    scale = max(1.0, operator_norm_estimate(M))
    res = np.linalg.norm(M @ v - v * w, axis=0).max() if m else 0.0
    if res > tol * scale:
        raise ConvergenceError(f"eigensolver residual {res:.3e} above tolerance", res)
    return w, v


def operator_norm_estimate(M):
    if sp.issparse(M):
        return float(spla.norm(M, 1))
    return float(np.linalg.norm(M, 1)) if M.size else 0.0


def operator_norm(H) -> float:
    """Spectral norm of a Hermitian operator (largest |eigenvalue|)."""
    M = as_matrix(H)
    if M.shape[0] == 0:
        return 0.0
    if sp.issparse(M) and M.shape[0] > DENSE_LIMIT:
        hi = spla.eigsh(M, k=1, which="LA", return_eigenvectors=False)[0]
        lo = spla.eigsh(M, k=1, which="SA", return_eigenvectors=False)[0]
        return float(max(abs(hi), abs(lo)))
    return float(np.max(np.abs(np.linalg.eigvalsh(as_dense(M)))))


def spectral_norm(A) -> float:
    """Largest singular value of a general (possibly non-Hermitian) matrix."""
    A = as_dense(A)
    return float(np.linalg.norm(A, 2)) if A.size else 0.0


def psd_sqrt(H, neg_tol=1e-10):
    """Principal square root of a Hermitian PSD matrix."""
    w, v = np.linalg.eigh(as_dense(H))
    scale = max(1.0, np.max(np.abs(w)))
    if w.size and w.min() < -neg_tol * scale:
        raise ValueError(f"matrix has negative eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def custom_norm(V, H0) -> float:
    """Smallest v with -v(1+H0) <= V <= v(1+H0); H0 is shifted to have minimum 0."""
    V, H0 = as_dense(V), as_dense(H0)
    if V.shape != H0.shape:
        raise ValueError(f"dimension mismatch {V.shape} vs {H0.shape}")
    w, u = np.linalg.eigh(H0)
    w = w - w[0]
    d = 1.0 / np.sqrt(1.0 + w)
    Vt = (u.conj().T @ V @ u) * np.outer(d, d)
    return float(np.max(np.abs(np.linalg.eigvalsh((Vt + Vt.conj().T) / 2))))


def clusters(evals, tol=None):
    """Group sorted eigenvalues into degenerate clusters; returns list of index lists."""
    evals = np.asarray(evals)
    if tol is None:
        tol = 1e-9 * max(1.0, np.max(np.abs(evals)) if evals.size else 1.0)
    groups = [[0]] if evals.size else []
    for i in range(1, evals.size):
        if evals[i] - evals[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def ground_space(H, max_rank=None):
    """Orthonormal basis of the lowest eigencluster, its energy, and the gap above it."""
    M = as_matrix(H)
    dim = M.shape[0]
    m = dim if max_rank is None else min(dim, max_rank + 1)
    w, v = eigensolve_lowest(M, m)
    tol = 1e-9 * max(1.0, operator_norm_estimate(M))
    g = clusters(w, tol)[0]
    r = len(g)
    if max_rank is not None and r > max_rank:
        raise ValueError("ground cluster larger than requested rank")
    gap = w[r] - w[0] if r < w.size else np.inf
    return v[:, :r], float(w[0]), float(gap)


def projector(basis):
    return basis @ basis.conj().T
