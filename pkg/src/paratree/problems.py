"""Target Ising problems with transverse fields, and their JSON form.

H_target = sum_i h_i Z_i + t_i X_i + sum_{i<j} J_ij Z_i Z_j
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la


class ProblemFormatError(ValueError):
    pass


@dataclass
class TargetProblem:
    n: int
    s: float
    J: dict = field(default_factory=dict)  # (i, j) with i < j -> coupling
    h: list = None
    t: list = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 qubits")
        self.h = [0.0] * self.n if self.h is None else [float(x) for x in self.h]
        self.t = [0.0] * self.n if self.t is None else [float(x) for x in self.t]
        if len(self.h) != self.n or len(self.t) != self.n:
            raise ValueError("h and t must have length n")
        clean = {}
        for (i, j), val in self.J.items():
            i, j = int(i), int(j)
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"bad edge ({i}, {j})")
            key = (min(i, j), max(i, j))
            if key in clean:
                raise ValueError(f"duplicate edge {key}")
            clean[key] = float(val)
        self.J = clean
        for x in list(self.h) + list(self.t) + list(self.J.values()):
            if abs(x) > 1:
                raise ValueError("coefficients must lie in [-1, 1]")
        if max(self.degrees(), default=0) > 2 * self.s + 1e-12:
            raise ValueError(f"graph degree {max(self.degrees())} exceeds 2s = {2 * self.s}")

    @property
    def nominal_range(self):
        """True when n >= 4 and s >= 1.5, the regime the guarantees are stated for."""
        return self.n >= 4 and self.s >= 1.5

    def degrees(self):
        d = [0] * self.n
        for i, j in self.J:
            d[i] += 1
            d[j] += 1
        return d

    def edges(self):
        return sorted(self.J.items())

    def terms(self):
        out = []
        for i in range(self.n):
            if self.h[i]:
                out.append(la.SpinTerm(self.h[i], ((i, "Z"),)))
            if self.t[i]:
                out.append(la.SpinTerm(self.t[i], ((i, "X"),)))
        for (i, j), val in self.edges():
            if val:
                out.append(la.SpinTerm(val, ((i, "Z"), (j, "Z"))))
        return out

    def hamiltonian(self):
        return la.build_spin_hamiltonian(self.n, self.terms())

    def spectrum(self):
        return np.linalg.eigvalsh(self.hamiltonian().dense())

    def to_dict(self):
        return dict(
            n=self.n, s=self.s,
            edges=[dict(i=i, j=j, J=v) for (i, j), v in self.edges()],
            h=list(self.h), t=list(self.t),
        )

    @classmethod
    def from_dict(cls, d):
        try:
            n = int(d["n"])
            s = float(d["s"])
            edges = d.get("edges", [])
            J = {}
            for k, e in enumerate(edges):
                try:
                    J[(int(e["i"]), int(e["j"]))] = float(e["J"])
                except (KeyError, TypeError, ValueError) as exc:
                    raise ProblemFormatError(f"edges[{k}]: expected {{i, j, J}} ({exc})") from None
            return cls(n=n, s=s, J=J, h=d.get("h"), t=d.get("t"))
        except ProblemFormatError:
            raise
        except KeyError as exc:
            raise ProblemFormatError(f"missing field {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ProblemFormatError(str(exc)) from None


def load_problem(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return TargetProblem.from_dict(data)


def load_edges_csv(path):
    """Edges from a CSV with header i,j,J."""
    import csv

    J = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for line, row in enumerate(csv.DictReader(fh), start=2):
            try:
                J[(int(row["i"]), int(row["j"]))] = float(row["J"])
            except (KeyError, TypeError, ValueError):
                raise ProblemFormatError(f"{path}: line {line}: expected columns i,j,J") from None
    return J


def random_problem(n, s=1.5, seed=0, transverse=True):
    """Random instance with degree <= 2s: a ring plus random chords, fields in [-1, 1]."""
    rng = np.random.default_rng(seed)
    deg = [0] * n
    J = {}
    ring = [(0, 1)] if n == 2 else [(min(i, (i + 1) % n), max(i, (i + 1) % n)) for i in range(n)]
    for i, j in ring:
        J[(i, j)] = float(rng.uniform(-1, 1))
        deg[i] += 1
        deg[j] += 1
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in J]
    rng.shuffle(pairs)
    for i, j in pairs:
        if deg[i] + 1 <= 2 * s and deg[j] + 1 <= 2 * s:
            J[(i, j)] = float(rng.uniform(-1, 1))
            deg[i] += 1
            deg[j] += 1
    h = rng.uniform(-1, 1, n).tolist()
    t = rng.uniform(-1, 1, n).tolist() if transverse else [0.0] * n
    return TargetProblem(n=n, s=s, J=J, h=h, t=t)


def triangle_fixture():
    """Frustrated antiferromagnetic triangle with a unique classical ground state."""
    return TargetProblem(n=3, s=1.0, J={(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0}, h=[0.3, -0.5, 0.9])
