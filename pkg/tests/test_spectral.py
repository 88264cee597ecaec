import numpy as np
import pytest

from quadbt.errors import NonSquareSystem, NotBoundedReal, PreconditionViolated, SingularD
from quadbt.lti import StateSpaceSystem, eval_tf, is_stable, strictly_proper
from quadbt.mateq import lyapunov_residual
from quadbt.models import ModelSpec, generate, normalize_hinf
from quadbt.spectral import (
    SpectralFactorSet,
    bst_factor,
    build_factors,
    cascade_oracle_check,
    make_oracles,
    popov,
    verify_factorization,
)

SQ2, SQ3 = np.sqrt(2.0), np.sqrt(3.0)
GRID50 = np.logspace(-2, 3, 50)


def test_popov_scalar(s1):
    assert popov(s1, 0)[0, 0] == pytest.approx(4.0)
    for w in (0.1, 1.0, 10.0):
        val = popov(s1, 1j * w)
        assert val[0, 0] == pytest.approx(2 * (1 + 1 / (1 + w**2)), abs=1e-13)
        assert val[0, 0].real > 0


def test_popov_hermitian_on_axis():
    sys = generate(ModelSpec("random_passive", 6, seed=1, params={"m": 3}))
    for w in (0.3, 3.0):
        Phi = popov(sys, 1j * w)
        np.testing.assert_allclose(Phi, Phi.conj().T, atol=1e-13)


def test_bst_factor_scalar(s1):
    f = build_factors(s1, "bst")
    W = f.factors["W"]
    assert W.B[0, 0] == pytest.approx(1.5)
    assert W.C[0, 0] == pytest.approx(2 / 3, abs=1e-12)
    assert W.D[0, 0] == 1.0
    for w in (0.1, 0.5, 1, 5, 20):
        s = 1j * w
        assert eval_tf(W, s)[0, 0] == pytest.approx((s + 2) / (s + 1), abs=1e-12)
    assert verify_factorization(f, s1, [0.1, 1, 10]).max_residual <= 1e-12


def test_bst_wrong_branch_detected(s1):
    P = np.array([[0.5]])
    wrong = bst_factor(s1, P, np.array([[2.0]]))
    np.testing.assert_allclose(wrong.C, [[1 - 1.5 * 2.0]])
    f = SpectralFactorSet("bst", {"W": wrong}, {}, wrong.C, s1.B)
    check = verify_factorization(f, s1, [0.1, 1, 10])
    assert check.zero_abscissa == pytest.approx(2.0)
    assert not check.minimum_phase


def test_prbt_factor_scalar(s1):
    f = build_factors(s1, "prbt")
    M = f.factors["M"]
    assert M.C[0, 0] == pytest.approx(2 - SQ2, abs=1e-12)
    assert M.D[0, 0] == pytest.approx(SQ2)
    assert eval_tf(M, 0)[0, 0].real ** 2 == pytest.approx(4.0)


def test_brbt_factor_scalar(s2):
    f = build_factors(s2, "brbt")
    J = f.factors["J"]
    assert J.C[0, 0] == pytest.approx(-(1 - SQ3 / 2), abs=1e-12)
    assert J.D[0, 0] == pytest.approx(1.0)
    assert abs(eval_tf(J, 1j)[0, 0]) ** 2 == pytest.approx(1 - abs(eval_tf(s2, 1j)[0, 0]) ** 2,
                                                         abs=1e-12)
    assert verify_factorization(f, s2, [0.1, 0.5, 1, 5, 10]).max_residual <= 1e-12


def test_factor_preconditions():
    with pytest.raises(NonSquareSystem):
        build_factors(generate(ModelSpec("random_stable", 4, seed=0, params={"m": 1, "p": 2})), "bst")
    with pytest.raises(SingularD):
        build_factors(StateSpaceSystem(-1, 1, 1, 0), "bst")
    with pytest.raises(NotBoundedReal):
        build_factors(StateSpaceSystem(-1, 1, 3, 0), "brbt")
    with pytest.raises(PreconditionViolated):
        build_factors(StateSpaceSystem(-1, 1, 1, 1), "lqg")


@pytest.mark.parametrize("variant", ["bst", "prbt", "brbt"])
def test_factorizations_on_generated_models(variant):
    sys = generate(ModelSpec("random_passive", 20, seed=2))
    if variant == "brbt":
        sys = normalize_hinf(sys, 0.5)
    f = build_factors(sys, variant)
    check = verify_factorization(f, sys, GRID50)
    assert check.max_residual <= 1e-8
    assert check.minimum_phase
    for F in f.factors.values():
        np.testing.assert_array_equal(F.A, sys.A)
        assert is_stable(F)


def test_gramian_cross_identities():
    sys = generate(ModelSpec("random_passive", 10, seed=3))
    A = sys.A
    fb = build_factors(sys, "bst")
    QW, CW = fb.gramians["Q_W"].X, fb.factors["W"].C
    assert lyapunov_residual(A, QW, CW.T @ CW) <= 1e-9 * np.linalg.norm(QW)

    fp = build_factors(sys, "prbt")
    QM, PN = fp.gramians["Q_M"].X, fp.gramians["P_N"].X
    CM, BN = fp.factors["M"].C, fp.factors["N"].B
    assert lyapunov_residual(A, QM, CM.T @ CM) <= 1e-9 * np.linalg.norm(QM)
    assert lyapunov_residual(A.T, PN, BN @ BN.T) <= 1e-9 * np.linalg.norm(PN)

    nsys = normalize_hinf(sys, 0.5)
    fr = build_factors(nsys, "brbt")
    QJ, PK = fr.gramians["Q_J"].X, fr.gramians["P_K"].X
    assert lyapunov_residual(A, QJ, fr.C_Y.T @ fr.C_Y) <= 1e-9 * np.linalg.norm(QJ)
    assert lyapunov_residual(A.T, PK, fr.B_X @ fr.B_X.T) <= 1e-9 * np.linalg.norm(PK)


def test_popov_positive_on_grid():
    sys = generate(ModelSpec("random_passive", 12, seed=4))
    assert min(np.linalg.eigvalsh(popov(sys, 1j * w)).min() for w in GRID50) > 0


def test_oracle_values(s1, s2):
    g_sa, g_b, g_c = make_oracles(s1, "bst")
    assert g_sa(0)[0, 0] == pytest.approx(2 / 3, abs=1e-12)
    rng = np.random.default_rng(5)
    sys = generate(ModelSpec("random_stable", 5, seed=6))
    for s in rng.standard_normal(5) + 1j * rng.standard_normal(5):
        ref = eval_tf(strictly_proper(sys), s)
        for o in make_oracles(sys, "lyapunov"):
            np.testing.assert_allclose(o(s), ref, atol=1e-13)

    g_sa, g_b, g_c = make_oracles(s2, "brbt")
    assert g_sa.shape == (2, 2) and g_b.shape == (2, 1) and g_c.shape == (1, 2)
    J = build_factors(s2, "brbt").factors["J"]
    stacked = np.vstack([eval_tf(strictly_proper(s2), 1j), eval_tf(strictly_proper(J), 1j)])
    np.testing.assert_allclose(g_b(1j), stacked, atol=1e-12)


def test_oracle_sample_matches_call():
    sys = generate(ModelSpec("random_passive", 6, seed=7))
    g_sa, _, _ = make_oracles(sys, "prbt")
    pts = 1j * np.array([0.1, 1.0, 7.0])
    stacked = g_sa.sample(pts)
    for k, s in enumerate(pts):
        np.testing.assert_allclose(stacked[k], g_sa(s), atol=1e-14)


@pytest.mark.parametrize("variant", ["bst", "prbt"])
def test_cascade_scalar(s1, variant):
    assert cascade_oracle_check(s1, variant, [0.0, 1.0, 10.0]) <= 1e-10


@pytest.mark.parametrize("variant", ["bst", "prbt", "brbt"])
def test_cascade_random(variant):
    sys = generate(ModelSpec("random_passive", 8, seed=8))
    if variant == "brbt":
        sys = normalize_hinf(sys, 0.5)
    assert cascade_oracle_check(sys, variant, np.logspace(-1, 2, 10)) <= 1e-8
