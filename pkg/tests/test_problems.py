import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from paratree.problems import (TargetProblem, ProblemFormatError, load_problem, load_edges_csv, random_problem,
                               triangle_fixture)


def test_two_qubit_spectrum():
    p = TargetProblem(n=2, s=0.5, J={(0, 1): 1.0})
    assert np.allclose(p.spectrum(), [-1, -1, 1, 1])


def test_edge_orientation_normalized():
    p = TargetProblem(n=3, s=1, J={(2, 0): 0.5})
    assert p.edges() == [((0, 2), 0.5)]


@pytest.mark.parametrize("J", [{(0, 0): 0.1}, {(0, 5): 0.1}, {(0, 1): 1.5}, {(0, 1): 0.1, (1, 0): 0.2}])
def test_invalid_problems(J):
    with pytest.raises(ValueError):
        TargetProblem(n=3, s=1, J=J)


def test_degree_limit():
    with pytest.raises(ValueError):
        TargetProblem(n=4, s=1, J={(0, 1): 1, (0, 2): 1, (0, 3): 1})


def test_nominal_range_flag():
    assert not TargetProblem(n=3, s=1.5).nominal_range
    assert TargetProblem(n=4, s=1.5).nominal_range


def test_round_trip(tmp_path):
    p = random_problem(4, seed=3)
    path = tmp_path / "p.json"
    path.write_text(json.dumps(p.to_dict()))
    q = load_problem(path)
    assert q.to_dict() == p.to_dict()


def test_malformed_json_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 2,\n "s": }')
    with pytest.raises(ProblemFormatError, match="line 2"):
        load_problem(path)


def test_bad_edge_names_field():
    with pytest.raises(ProblemFormatError, match=r"edges\[1\]"):
        TargetProblem.from_dict({"n": 3, "s": 1, "edges": [{"i": 0, "j": 1, "J": 0.1}, {"i": 0}]})


def test_missing_field():
    with pytest.raises(ProblemFormatError, match="missing field"):
        TargetProblem.from_dict({"n": 3})


def test_edges_csv(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("i,j,J\n0,1,0.5\n1,2,-0.25\n")
    assert load_edges_csv(path) == {(0, 1): 0.5, (1, 2): -0.25}
    path.write_text("i,j,J\n0,x,0.5\n")
    with pytest.raises(ProblemFormatError, match="line 2"):
        load_edges_csv(path)


def test_triangle_fixture_unique_ground_state():
    E = np.sort(np.linalg.eigvalsh(triangle_fixture().hamiltonian().dense()))
    assert E[0] == pytest.approx(-2.7) and E[1] == pytest.approx(-2.1)


def test_fixtures_are_frozen(fixtures_dir):
    for n in (2, 3, 4):
        for seed in range(3):
            stored = load_problem(fixtures_dir / f"problem_n{n}_seed{seed}.json")
            assert stored.to_dict() == random_problem(n, s=1.5, seed=seed).to_dict()


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 9), st.sampled_from([1.0, 1.5, 2.0]), st.integers(0, 10**6))
def test_random_problems_respect_limits(n, s, seed):
    p = random_problem(n, s=s, seed=seed)
    assert max(p.degrees()) <= 2 * s
    assert all(abs(v) <= 1 for v in p.J.values())
    H = p.hamiltonian().dense()
    assert np.allclose(H, H.conj().T)
