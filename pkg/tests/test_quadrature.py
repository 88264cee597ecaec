import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadbt.errors import InvalidInput, InvalidRange, NodeCollision, OddN
from quadbt.intrusive import quadrature_factors
from quadbt.lti import StateSpaceSystem
from quadbt.mateq import reachability_gramian
from quadbt.models import ModelSpec, generate, normalize_hinf
from quadbt.quadrature import (
    FrequencyDataset,
    QuadratureRule,
    interleaved_rules,
    logtrap_rule,
    sample_dataset,
)
from quadbt.spectral import build_factors, make_oracles


def test_logtrap_four_nodes_wide_band():
    rule = logtrap_rule(0.1, 1e4, 4)
    np.testing.assert_allclose(rule.nodes, [-1e4, -0.1, 0.1, 1e4])
    np.testing.assert_allclose(rule.weights, np.sqrt(4999.95 / (2 * np.pi)))
    assert rule.weights[0] == pytest.approx(28.2093, abs=1e-4)
    assert rule.conj_closed


def test_logtrap_four_nodes_narrow_band():
    rule = logtrap_rule(1, 3, 4)
    np.testing.assert_allclose(rule.nodes, [-3, -1, 1, 3])
    np.testing.assert_allclose(rule.weights, 0.39894228, atol=1e-8)


def test_logtrap_errors():
    with pytest.raises(OddN):
        logtrap_rule(0.1, 10, 5)
    with pytest.raises(InvalidRange):
        logtrap_rule(10, 1, 4)
    with pytest.raises(InvalidRange):
        logtrap_rule(0, 1, 4)
    with pytest.raises(InvalidRange):
        logtrap_rule(0.1, 1, 2)


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-3, 1e1), st.floats(1.5, 1e4), st.integers(2, 60))
def test_logtrap_structure(lo, ratio, half):
    rule = logtrap_rule(lo, lo * ratio, 2 * half)
    assert len(rule) == 2 * half
    assert np.all(np.diff(rule.nodes) > 0)
    np.testing.assert_allclose(rule.nodes, -rule.nodes[::-1])
    np.testing.assert_array_equal(rule.weights, rule.weights[::-1])
    # squared weights sum to the band length over 2 pi (trapezoid partition of unity)
    pos = rule.nodes[rule.nodes > 0]
    total = np.sum(rule.weights[rule.nodes > 0] ** 2) * 2 * np.pi
    assert total == pytest.approx(pos[-1] - pos[0], rel=1e-12)


def test_interleaved_rules_disjoint():
    left, right = interleaved_rules(0.1, 1e4, 40)
    assert len(left) == len(right) == 40
    assert not set(left.nodes) & set(right.nodes)
    # left nodes below the top of the band are geometric midpoints of right nodes
    lp, rp = left.nodes[left.nodes > 0], right.nodes[right.nodes > 0]
    np.testing.assert_allclose(lp[:-1], np.sqrt(rp[:-1] * rp[1:]), rtol=1e-12)
    assert rp[0] == pytest.approx(0.1) and lp[-1] == pytest.approx(1e4)


def test_rule_validation():
    with pytest.raises(InvalidInput):
        QuadratureRule([1.0, 1.0], [1.0, 1.0])
    with pytest.raises(InvalidInput):
        QuadratureRule([1.0, 2.0], [1.0, -1.0])
    with pytest.raises(InvalidInput):
        QuadratureRule([-1.0, 2.0], [1.0, 1.0], conj_closed=True)
    zero_paired = QuadratureRule([-1.0, 0.0, 1.0], [1.0, 2.0, 1.0], conj_closed=True)
    assert zero_paired.conj_closed


def test_sample_scalar(lag):
    oracles = make_oracles(lag, "lyapunov")
    data = sample_dataset(oracles, QuadratureRule([2.0], [1.0]), QuadratureRule([1.0], [1.0]))
    assert data.GsA_right[0, 0, 0] == pytest.approx(1 / (1 + 1j))
    assert data.GsA_left[0, 0, 0] == pytest.approx(1 / (1 + 2j))


def test_sample_brbt_shapes(s2):
    left, right = interleaved_rules(0.1, 10, 4)
    data = sample_dataset(make_oracles(s2, "brbt"), left, right)
    assert data.GsA_left.shape[1:] == (2, 2)
    assert data.GB_right.shape[1:] == (2, 1)
    assert data.GC_left.shape[1:] == (1, 2)
    assert data.shapes == {"p_y": 2, "m_x": 2, "p": 1, "m": 1}


def test_collision(lag):
    rule = QuadratureRule([1.0], [1.0])
    with pytest.raises(NodeCollision):
        sample_dataset(make_oracles(lag, "lyapunov"), rule, QuadratureRule([1.0 + 1e-12], [1.0]))


def test_dataset_json_round_trip(tmp_path, s1):
    left, right = interleaved_rules(0.1, 100, 8)
    data = sample_dataset(make_oracles(s1, "bst"), left, right, feedthrough=s1.D)
    path = tmp_path / "data.json"
    data.save(path)
    again = FrequencyDataset.load(path)
    for name in ("GsA_left", "GC_left", "GsA_right", "GB_right"):
        np.testing.assert_array_equal(getattr(again, name), getattr(data, name))
    np.testing.assert_array_equal(again.left.nodes, left.nodes)
    np.testing.assert_array_equal(again.feedthrough, s1.D)
    assert again.variant == "bst"
    with pytest.raises(InvalidInput):
        FrequencyDataset.from_json('{"left": {}}')


def test_dataset_shape_validation():
    r1, r2 = QuadratureRule([1.0], [1.0]), QuadratureRule([2.0], [1.0])
    z = np.zeros((1, 1, 1))
    with pytest.raises(InvalidInput):
        FrequencyDataset(r1, r2, z, z, np.zeros((2, 1, 1)), z, "x")
    with pytest.raises(InvalidInput):
        FrequencyDataset(r1, r2, z * np.nan, z, z, z, "x")


def _banded_system():
    # spectrum centred in [1e-1, 1e4], so both truncated tails stay below 1%;
    # past N=160 that truncation floor dominates and the error stops shrinking
    rng = np.random.default_rng(0)
    poles = -np.array([10.0, 30.0, 100.0])
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    return StateSpaceSystem(Q @ np.diag(poles) @ Q.T, rng.standard_normal((3, 1)),
                            rng.standard_normal((1, 3)), 0)


def test_implicit_gramian_converges_with_N():
    sys = _banded_system()
    f = build_factors(sys, "lyapunov")
    P = reachability_gramian(sys).X
    errs = []
    for N in (40, 80, 160):
        left, right = interleaved_rules(0.1, 1e4, N)
        U, _ = quadrature_factors(sys, f, left, right)
        Pq = U @ U.conj().T
        assert np.abs(Pq.imag).max() <= 1e-12 * np.linalg.norm(Pq)
        errs.append(np.linalg.norm(Pq.real - P) / np.linalg.norm(P))
    assert errs[0] > errs[1] > errs[2]
