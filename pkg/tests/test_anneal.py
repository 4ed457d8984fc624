import numpy as np
import pytest

from paratree import anneal as an
from paratree import theorem as th
from paratree.linalg import DimensionCapError
from paratree.mediators import MediatorFacts
from paratree.problems import TargetProblem, triangle_fixture

X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.diag([1.0, -1.0])
I2 = np.eye(2)


def op(m, i, n):
    out = np.eye(1)
    for k in range(n):
        out = np.kron(out, m if k == i else I2)
    return out


def bare_anneal(p, s):
    n = p.n
    H = (1 - s) * sum(op(X, i, n) for i in range(n))
    H = H + s * sum(p.h[i] * op(Z, i, n) for i in range(n))
    H = H + s * sum(J * op(Z, i, n) @ op(Z, j, n) for (i, j), J in p.edges())
    return H


@pytest.mark.parametrize("kind", an.METHODS)
@pytest.mark.parametrize("s", [0.0, 0.4, 1.0])
def test_single_site_blocks_give_bare_anneal(kind, s):
    ep = an.embed_problem(triangle_fixture(), 1)
    H = an.build_anneal_hamiltonian(ep, an.AnnealSchedule(kind, 1.0), s)
    assert np.allclose(H.dense(), bare_anneal(triangle_fixture(), s))


def test_minor_embedding_end_spectrum():
    p, k, m = triangle_fixture(), 2, 0.2
    ep = an.embed_problem(p, k)
    H = an.build_anneal_hamiltonian(ep, an.AnnealSchedule("minor_embedding", m), 1.0).dense()
    low = np.sort(np.diag(H))[:8]
    logical = np.sort(np.diag(bare_anneal(p, 1.0)))
    assert np.allclose(low - low[0], m * (logical - logical[0]))


def test_chain_mediator_two_sites_oracle():
    chi, F = an.chain_mediator_facts(2)
    gs = {}
    for b in (1, -1):
        H = np.kron(X, I2) + np.kron(I2, X) + np.kron(Z, Z) + b * np.kron(Z, I2)
        gs[b] = np.linalg.eigh(H)[1][:, 0]
    assert chi == pytest.approx(gs[1] @ np.kron(I2, Z) @ gs[1], abs=1e-10)
    assert F == pytest.approx(abs(gs[1] @ gs[-1]), abs=1e-10)


def test_gap_at_start_is_transverse_gap():
    ep = an.embed_problem(triangle_fixture(), 1)
    tr = an.gap_scan(ep, an.AnnealSchedule("minor_embedding", 1.0), 51)
    assert tr.gap[0] == pytest.approx(2.0)


def test_free_spins_gap_is_linear():
    p = TargetProblem(n=3, s=1.0)
    ep = an.embed_problem(p, 1)
    tr = an.gap_scan(ep, an.AnnealSchedule("minor_embedding", 1.0), 51)
    s = np.array(tr.s_grid)
    assert np.allclose(tr.gap, 2 * (1 - s), atol=1e-10)
    assert min(tr.gap[:-1]) > 0


def test_grid_minimum():
    with pytest.raises(ValueError):
        an.gap_scan(an.embed_problem(triangle_fixture(), 1), an.AnnealSchedule("minor_embedding"), 50)


def test_cap():
    with pytest.raises(DimensionCapError):
        an.embed_problem(triangle_fixture(), 5)


def test_non_neighbor_edge_rejected():
    p = TargetProblem(n=4, s=1.5, J={(0, 2): 1.0})
    with pytest.raises(ValueError):
        an.embed_problem(p, 1)


def test_penalty_scale_bounded():
    with pytest.raises(ValueError):
        an.AnnealSchedule("minor_embedding", 1.5)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("kind", an.METHODS)
def test_coefficients_within_hardware_range(k, kind):
    ep = an.embed_problem(triangle_fixture(), k)
    parts = an.anneal_parts(ep, an.AnnealSchedule(kind, an.scale_limit(ep, kind)))
    assert parts.max_coefficient <= 1 + 1e-12


def test_single_site_families_agree():
    ep = an.embed_problem(triangle_fixture(), 1)
    a = an.optimize_scale(ep, "minor_embedding", grid_points=51, coarse=4)
    b = an.optimize_scale(ep, "paramagnetic", grid_points=51, coarse=4)
    assert a[0] == pytest.approx(1.0) and b[0] == pytest.approx(1.0)
    assert a[1].min_gap == pytest.approx(b[1].min_gap, abs=1e-12)


def test_grid_refinement_is_stable():
    ep = an.embed_problem(triangle_fixture(), 2)
    sched = an.AnnealSchedule("minor_embedding", 0.9)
    g1 = an.gap_scan(ep, sched, 101).min_gap
    g2 = an.gap_scan(ep, sched, 201).min_gap
    assert abs(g1 - g2) < 0.01 * g2


def test_ground_state_decoding():
    ep = an.embed_problem(triangle_fixture(), 2)
    tr = an.gap_scan(ep, an.AnnealSchedule("paramagnetic", 0.5), 51)
    assert tr.ground_state_preserved
    assert an.logical_ground_state(triangle_fixture()) == (-1, 1, -1)


def test_degenerate_logical_problem_has_no_target():
    assert an.logical_ground_state(TargetProblem(n=3, s=1.0)) is None


@pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
def test_paramagnetic_levels_track_scaled_target(s):
    # theorem-feasible alpha for the single-site chain mediator, zero noise
    p, k = triangle_fixture(), 2
    ep = an.embed_problem(p, k)
    chi, F = an.chain_mediator_facts(1)
    w = np.linalg.eigvalsh(X + Z)  # mediator seen by a frozen qubit
    facts = MediatorFacts(gap=w[1] - w[0], chi=chi, overlap_inv=1 / F, coupling_bound=1.0, energy_shift=0.0)
    rep = th.general_theorem(facts, p, th.NoiseBudget(), 0.1)
    alpha = rep.alpha_o
    H = an.build_anneal_hamiltonian(ep, an.AnnealSchedule("paramagnetic", alpha), s).dense()
    low = np.linalg.eigvalsh(H)[:8]
    target = np.linalg.eigvalsh(alpha * bare_anneal(p, s))
    dev = np.max(np.abs((low - low.mean()) - (target - target.mean())))
    assert dev <= alpha * 0.1 * p.n * p.s


def test_crossover_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        an.write_table_csv(an.crossover_report(2, grid_points=51, coarse=3), path)
    assert a.read_bytes() == b.read_bytes()


def test_fits():
    ks = np.array([2, 3, 4])
    assert an.fit_exponential(ks, 3 * np.exp(-0.4 * ks)) == pytest.approx(0.4)
    assert an.fit_power(ks, 2 * ks**-1.5) == pytest.approx(1.5)
