import numpy as np
import pytest

from conftest import random_stable, well_conditioned
from quadbt.errors import (
    IllConditionedSeparation,
    IndefiniteR,
    NoStabilizingSolution,
    NonSquareSystem,
    NotBoundedReal,
    NotPositiveReal,
    SingularD,
    UnstableA,
)
from quadbt.lti import StateSpaceSystem, spectral_abscissa, transform
from quadbt.mateq import (
    observability_gramian,
    reachability_gramian,
    solve_are_stabilizing,
    solve_br_ares,
    solve_bst_are,
    solve_lyapunov,
    solve_pr_ares,
    sqrt_factor,
)
from quadbt.models import ModelSpec, generate

SQ3 = np.sqrt(3.0)


def test_lyapunov_closed_forms():
    assert solve_lyapunov([[-1.0]], [[1.0]]).X[0, 0] == pytest.approx(0.5)
    X = solve_lyapunov(-np.eye(2), np.ones((2, 2))).X
    np.testing.assert_allclose(X, 0.5 * np.ones((2, 2)), atol=1e-15)


def test_lyapunov_factor_rhs_matches_full():
    sys = random_stable(6, 2, 2, seed=0)
    a = solve_lyapunov(sys.A, sys.C.T).X
    b = solve_lyapunov(sys.A, sys.C.T @ sys.C).X
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


def test_lyapunov_residual_random():
    sys = random_stable(8, 2, 2, seed=1)
    rhs = sys.C.T @ sys.C
    sol = solve_lyapunov(sys.A, rhs)
    X = sol.X
    assert sol.residual_norm <= 1e-9 * (np.linalg.norm(sys.A) * np.linalg.norm(X) + np.linalg.norm(rhs))
    assert np.abs(X - X.T).max() <= 1e-12 * np.linalg.norm(X)
    assert np.linalg.eigvalsh(X).min() > -1e-10 * np.linalg.norm(X)


def test_lyapunov_errors():
    with pytest.raises(UnstableA):
        solve_lyapunov([[1.0]], [[1.0]])
    # eigenvalues -1 and +1 keep the operator singular, but the stability check fires first
    with pytest.raises(UnstableA):
        solve_lyapunov(np.diag([-1.0, 1.0]), np.eye(2))
    # nearly marginal pair: lambda_i + conj(lambda_j) ~ 0 at roundoff scale
    A = np.diag([-1e-16, -1.0])
    with pytest.raises(IllConditionedSeparation):
        solve_lyapunov(A, np.eye(2))


def test_gramians_congruence_under_similarity():
    sys = random_stable(6, 2, 2, seed=2)
    T = well_conditioned(6, 3)
    Ti = np.linalg.inv(T)
    sysT = transform(sys, T)
    P, Q = reachability_gramian(sys).X, observability_gramian(sys).X
    PT, QT = reachability_gramian(sysT).X, observability_gramian(sysT).X
    assert np.linalg.norm(PT - T @ P @ T.T) <= 1e-9 * np.linalg.norm(PT)
    assert np.linalg.norm(QT - Ti.T @ Q @ Ti) <= 1e-9 * np.linalg.norm(QT)


def test_are_zero_solution():
    sys = random_stable(4, 1, 1, seed=4)
    sol = solve_are_stabilizing(sys.A, sys.B, np.eye(1))
    np.testing.assert_allclose(sol.X, 0, atol=1e-12)


def test_are_no_stabilizing_solution():
    with pytest.raises(NoStabilizingSolution):
        solve_are_stabilizing([[1.0]], [[0.0]], [[1.0]], Q=[[1.0]])
    with pytest.raises(IndefiniteR):
        solve_are_stabilizing([[-1.0]], [[1.0]], [[-1.0]])


def test_bst_scalar(s1):
    P = reachability_gramian(s1).X
    assert P[0, 0] == pytest.approx(0.5)
    sol = solve_bst_are(s1, P)
    assert sol.X[0, 0] == pytest.approx(2 / 9, abs=1e-12)
    assert sol.closed_loop_abscissa == pytest.approx(-2.0)
    # other root of 2.25 Q^2 - 5 Q + 1: closed loop A - B_W (C - B_W Q) = +2
    BW = 1.5
    assert -1 - BW * (1 - BW * 2.0) == pytest.approx(2.0)


def test_bst_errors():
    with pytest.raises(NonSquareSystem):
        solve_bst_are(random_stable(3, 1, 2, seed=5))
    with pytest.raises(SingularD):
        solve_bst_are(StateSpaceSystem(-1, 1, 1, 0))


def test_bst_residual_random_passive():
    sys = generate(ModelSpec("random_passive", 10, seed=6))
    sol = solve_bst_are(sys)
    assert sol.residual_norm <= 1e-10 * max(1.0, np.linalg.norm(sol.X))
    assert sol.closed_loop_abscissa < 0


def test_pr_scalar(s1):
    QM, PN = solve_pr_ares(s1)
    assert QM.X[0, 0] == pytest.approx(3 - 2 * np.sqrt(2), abs=1e-12)
    assert PN.X[0, 0] == pytest.approx(3 - 2 * np.sqrt(2), abs=1e-12)
    # larger root 3 + 2 sqrt 2 gives closed loop A - B R^{-1}(C - B^T Q) > 0
    assert -1 - 0.5 * (1 - (3 + 2 * np.sqrt(2))) > 0


def test_pr_residuals_random_ph():
    sys = generate(ModelSpec("random_passive", 12, seed=7))
    QM, PN = solve_pr_ares(sys)
    for sol in (QM, PN):
        assert sol.residual_norm <= 1e-9 * max(1.0, np.linalg.norm(sol.X))
        assert sol.closed_loop_abscissa < 0
        assert np.linalg.eigvalsh(sol.X).min() > 0


def test_pr_rejects_non_passive():
    with pytest.raises(NotPositiveReal):
        solve_pr_ares(StateSpaceSystem(-1, 1, 1, -0.1))
    with pytest.raises(NotPositiveReal):
        # D + D^T > 0 but Re G(iw) dips below zero
        solve_pr_ares(StateSpaceSystem(-1, 1, -1, 0.2))


def test_br_scalar(s2):
    QJ, PK = solve_br_ares(s2)
    assert QJ.X[0, 0] == pytest.approx(1 - SQ3 / 2, abs=1e-12)
    assert PK.X[0, 0] == pytest.approx(4 - 2 * SQ3, abs=1e-12)
    J0 = 1 - QJ.X[0, 0]  # J(0) = 1 + c_J / 1 with c_J = -Q_J
    assert J0 == pytest.approx(SQ3 / 2, abs=1e-12)
    assert J0**2 == pytest.approx(1 - 0.5**2, abs=1e-12)
    # minimality: returned roots are the smaller ones
    assert QJ.X[0, 0] < 1 + SQ3 / 2 and PK.X[0, 0] < 4 + 2 * SQ3


def test_br_rejects_large_gain():
    with pytest.raises(NotBoundedReal):
        solve_br_ares(StateSpaceSystem(-1, 1, 2, 0))
    with pytest.raises(NotBoundedReal):
        solve_br_ares(StateSpaceSystem(-1, 1, 0.1, 1.0))


def test_sqrt_factor():
    X = np.array([[2.0, 1.0], [1.0, 2.0]])
    F = sqrt_factor(X)
    np.testing.assert_allclose(F @ F.T, X, atol=1e-14)
    semidef = np.ones((2, 2)) + np.diag([0, -1e-14])
    F = sqrt_factor(semidef)
    np.testing.assert_allclose(F @ F.T, semidef, atol=1e-12)
    with pytest.raises(ValueError):
        sqrt_factor(np.diag([1.0, -1.0]))


def test_are_solutions_symmetric_spd_random_passive():
    sys = generate(ModelSpec("random_passive", 8, seed=8))
    for sol in solve_pr_ares(sys):
        assert np.abs(sol.X - sol.X.T).max() <= 1e-12 * np.linalg.norm(sol.X)
        assert spectral_abscissa(sys.A) < 0
