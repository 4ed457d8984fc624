import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from paratree import sw


def dense_oracle(H0, V, W):
    """Exact SW via matrix square root of the reflection product, in the logical basis W."""
    r = W.shape[1]
    H = H0 - np.linalg.eigvalsh(H0)[0] * np.eye(len(H0)) + V
    w, u = np.linalg.eigh(H)
    P, PV = W @ W.conj().T, u[:, :r] @ u[:, :r].conj().T
    n = len(H0)
    U = sla.sqrtm((2 * P - np.eye(n)) @ (2 * PV - np.eye(n)))
    Heff = W.conj().T @ U @ H @ U.conj().T @ W
    return U, Heff


def test_constants_at_boundary():
    c, cs = sw.sw_constants(1 / 16)
    assert c == pytest.approx(16 * np.tan(0.25 * np.log(7 / 3)), abs=1e-12)
    assert cs == pytest.approx(16 * (np.sqrt(7 / 3) - 1), abs=1e-12)
    assert c <= 3.441 and cs < 8.441


def test_constants_small_x_limits():
    c, cs = sw.sw_constants(1e-9)
    assert c == pytest.approx(2, rel=1e-7) and cs == pytest.approx(4, rel=1e-7)


@pytest.mark.parametrize("x", [0.0, -0.1, 0.07])
def test_constants_domain(x):
    with pytest.raises(ValueError):
        sw.sw_constants(x)


def test_constants_monotone():
    xs = np.linspace(1e-6, 1 / 16, 1000)
    vals = np.array([sw.sw_constants(x) for x in xs])
    assert np.all(np.diff(vals[:, 0]) > 0) and np.all(np.diff(vals[:, 1]) > 0)


@pytest.mark.parametrize("seed", range(5))
def test_matches_dense_square_root(seed):
    rng = np.random.default_rng(seed)
    H0, V, W, gap = sw.random_gapped_instance(rng, 12, x=0.05)
    res = sw.schrieffer_wolff(H0, V, W)
    U, Heff = dense_oracle(H0, V, W)
    assert np.allclose(res.U_SW, U, atol=1e-10)
    assert np.allclose(res.H_eff, Heff, atol=1e-10)


def test_zero_perturbation():
    H0 = np.diag([0.0, 0.0, 1.0, 2.0])
    res = sw.schrieffer_wolff(H0, np.zeros((4, 4)))
    assert res.u_distance == pytest.approx(0, abs=1e-14)
    assert np.allclose(res.H_eff, 0)


def test_two_level_block_matches_textbook_second_order():
    # H0 = diag(0, 1), V = g X: exact ground energy -g^2 + O(g^4)
    g = 0.01
    res = sw.schrieffer_wolff(np.diag([0.0, 1.0]), g * np.array([[0.0, 1.0], [1.0, 0.0]]))
    exact = (1 - np.sqrt(1 + 4 * g * g)) / 2
    assert res.H_eff[0, 0].real == pytest.approx(exact, abs=1e-14)
    assert abs(exact + g * g) < 2 * g**4


def test_applicability_error_carries_ratio():
    H0 = np.diag([0.0, 1.0, 1.0])
    V = 0.2 * np.ones((3, 3))
    with pytest.raises(sw.SwApplicabilityError) as exc:
        sw.schrieffer_wolff(H0, V)
    assert exc.value.ratios["norm_V/gap"] > 1 / 16


def test_rejects_wrong_projector():
    H0 = np.diag([0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        sw.schrieffer_wolff(H0, np.zeros((3, 3)), P=np.eye(3)[:, [1]])


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 24), st.floats(1e-4, 0.0624), st.booleans(), st.integers(0, 2**31 - 1))
def test_lemma_bounds_hold(dim, x, adversarial, seed):
    rng = np.random.default_rng(seed)
    H0, V, W, gap = sw.random_gapped_instance(rng, dim, x=x, adversarial=adversarial)
    res = sw.schrieffer_wolff(H0, V, W)
    assert res.first_order_error <= res.bound_first_order + 1e-12
    assert res.z_norm <= sw.z_norm_bound(res.x_param) + 1e-12
    assert res.u_distance <= res.bound_u + 1e-12
    # unitary equivalence: H_eff spectrum equals the low block of H0 + V
    assert np.allclose(np.linalg.eigvalsh(res.H_eff), res.low_energies, atol=1e-10)
    assert res.offblock < 1e-9 and res.rotation_residual < 1e-9


def test_duhamel_small_example():
    H = np.diag([0.0, 1.0])
    dH = 0.1 * np.array([[0.0, 1.0], [1.0, 0.0]])
    lhs, rhs = sw.duhamel_check(H, dH, 2.0)
    assert lhs <= rhs


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.floats(0.0, 5.0), st.integers(0, 2**31 - 1))
def test_duhamel_property(d, t, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    B = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    lhs, rhs = sw.duhamel_check(A + A.conj().T, 0.1 * (B + B.conj().T), t)
    assert lhs <= rhs + 1e-9


def test_audit_report_is_serializable_and_deterministic():
    a = sw.audit_json(sw.empirical_lemma_audit(trials=12, dims=(6, 10), seed=3))
    b = sw.audit_json(sw.empirical_lemma_audit(trials=12, dims=(6, 10), seed=3))
    assert a == b and '"violations": []' in a
