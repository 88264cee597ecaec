"""Dense Lyapunov and Riccati solvers used for the balancing Gramians.

Orientation convention: every solver returns the *observability-type*
solution ``X`` of an equation written with ``A^T X + X A``.  Reachability
Gramians are obtained by passing ``A^T`` and the transposed data.

All Riccati equations handled here share the form::

    A^T X + X A + (X B + S) R^{-1} (X B + S)^T + Q = 0

with ``R`` SPD. The quadratic term enters with a *plus* sign, so the
stabilizing solution (closed loop ``A + B R^{-1}(B^T X + S^T)`` Hurwitz) is
the minimal one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    IllConditionedSeparation,
    IndefiniteR,
    NoStabilizingSolution,
    NonSquareSystem,
    NotBoundedReal,
    NotPositiveReal,
    SingularD,
    UnstableA,
)
from .lti import StateSpaceSystem, spectral_abscissa

__all__ = [
    "GramianSolution",
    "solve_lyapunov",
    "solve_are_stabilizing",
    "solve_bst_are",
    "solve_pr_ares",
    "solve_br_ares",
    "reachability_gramian",
    "observability_gramian",
    "sqrt_factor",
    "spd_sqrt",
    "lyapunov_residual",
]

KINDS = ("lyapunov_P", "lyapunov_Q", "bst_QW", "pr_QM", "pr_PN", "br_QJ", "br_PK")


@dataclass(frozen=True, eq=False)
class GramianSolution:
    X: np.ndarray
    residual_norm: float
    closed_loop_abscissa: float
    kind: str

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.X, dtype=dtype)


def _sym(X):
    return 0.5 * (X + X.T)


def lyapunov_residual(A, X, rhs) -> float:
    return float(np.linalg.norm(A.T @ X + X @ A + rhs, "fro"))


def solve_lyapunov(A, rhs, kind: str = "lyapunov_Q") -> GramianSolution:
    """Solve ``A^T X + X A + RHS = 0`` by Bartels-Stewart.

    Parameters
    ----------
    A : (n, n) array
        Hurwitz matrix.
    rhs : array
        Either the symmetric ``(n, n)`` right-hand side or a tall factor
        ``F`` with ``RHS = F F^T``.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    rhs = np.asarray(rhs, dtype=float)
    if rhs.ndim == 1:
        rhs = rhs.reshape(n, -1)
    if rhs.shape != (n, n):
        rhs = rhs @ rhs.T
    rhs = _sym(rhs)
    if n == 0:
        return GramianSolution(np.zeros((0, 0)), 0.0, -np.inf, kind)
    abscissa = spectral_abscissa(A)
    if abscissa >= 0:
        raise UnstableA(f"A is not Hurwitz (spectral abscissa {abscissa:.3e})")

    # complex Schur form A = U T U^H, then T^H Y + Y T = -U^H RHS U
    T, U = sla.schur(A.astype(complex), output="complex")
    F = -(U.conj().T @ rhs @ U)
    lam = np.diag(T)
    normA = max(np.linalg.norm(A, 2), 1.0)
    pivots = np.abs(lam.conj()[:, None] + lam[None, :])
    if pivots.min() < 1e-14 * normA:
        raise IllConditionedSeparation("Lyapunov operator is numerically singular")
    TH = T.conj().T  # lower triangular
    Y = np.zeros((n, n), dtype=complex)
    for j in range(n):
        rhs_j = F[:, j] - Y[:, :j] @ T[:j, j]
        Y[:, j] = sla.solve_triangular(TH + T[j, j] * np.eye(n), rhs_j,
                                       lower=True, check_finite=False)
    X = _sym((U @ Y @ U.conj().T).real)
    return GramianSolution(X, lyapunov_residual(A, X, rhs), abscissa, kind)


def reachability_gramian(sys: StateSpaceSystem) -> GramianSolution:
    return solve_lyapunov(sys.A.T, sys.B, kind="lyapunov_P")


def observability_gramian(sys: StateSpaceSystem) -> GramianSolution:
    return solve_lyapunov(sys.A, sys.C.T, kind="lyapunov_Q")


def _check_spd(R, exc=IndefiniteR, what="R"):
    R = _sym(np.atleast_2d(np.asarray(R, dtype=float)))
    if R.size and np.linalg.eigvalsh(R).min() <= 0:
        raise exc(f"{what} is not symmetric positive definite")
    return R


def _are_residual(A, B, R, Q, S, X):
    K = X @ B + S
    return A.T @ X + X @ A + K @ np.linalg.solve(R, K.T) + Q


def solve_are_stabilizing(A, B, R, Q=None, S=None, kind: str = "are",
                          refine: int = 2) -> GramianSolution:
    """Stabilizing solution of ``A^T X + X A + (XB+S) R^{-1} (XB+S)^T + Q = 0``.

    The stable invariant subspace of the associated Hamiltonian matrix is
    extracted with an ordered real Schur decomposition, followed by up to
    ``refine`` Newton steps. Branch selection is then re-checked explicitly
    on the closed-loop matrix ``A + B R^{-1} (B^T X + S^T)``.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    B = np.asarray(B, dtype=float).reshape(n, -1)
    R = _check_spd(R)
    Q = np.zeros((n, n)) if Q is None else _sym(np.asarray(Q, dtype=float))
    S = np.zeros_like(B) if S is None else np.asarray(S, dtype=float).reshape(B.shape)

    RiSt = np.linalg.solve(R, S.T)
    At = A + B @ RiSt
    G = _sym(B @ np.linalg.solve(R, B.T))
    H = _sym(Q + S @ RiSt)
    Ham = np.block([[At, G], [-H, -At.T]])
    _, Z, sdim = sla.schur(Ham, output="real", sort="lhp")
    if sdim != n:
        raise NoStabilizingSolution(
            f"Hamiltonian has {sdim} stable eigenvalues, expected {n}")
    U1, U2 = Z[:n, :n], Z[n:, :n]
    if np.linalg.cond(U1) > 1e12:
        raise NoStabilizingSolution("stable subspace is not a graph subspace")
    X = _sym(np.linalg.solve(U1.T, U2.T).T)

    def closed_loop(X):
        return At + G @ X

    for _ in range(refine):
        res = _sym(_are_residual(A, B, R, Q, S, X))
        Acl = closed_loop(X)
        if spectral_abscissa(Acl) >= 0:
            break
        dX = solve_lyapunov(Acl, res).X
        X_new = _sym(X + dX)
        if np.linalg.norm(_are_residual(A, B, R, Q, S, X_new)) >= np.linalg.norm(res):
            break
        X = X_new

    abscissa = spectral_abscissa(closed_loop(X))
    if abscissa >= 0:
        raise NoStabilizingSolution(
            f"closed-loop abscissa {abscissa:.3e} is not negative")
    residual = float(np.linalg.norm(_are_residual(A, B, R, Q, S, X), "fro"))
    return GramianSolution(X, residual, abscissa, kind)


def _require_square(sys):
    if sys.m != sys.p:
        raise NonSquareSystem(f"system must be square, got p={sys.p}, m={sys.m}")


def solve_bst_are(sys: StateSpaceSystem, P=None) -> GramianSolution:
    """Minimal solution ``Q_W`` of the stochastic-balancing Riccati equation.

    ``A^T Q + Q A + (C - B_W^T Q)^T (D D^T)^{-1} (C - B_W^T Q) = 0`` with
    ``B_W = P C^T + B D^T`` and ``P`` the reachability Gramian.
    """
    _require_square(sys)
    if np.linalg.matrix_rank(sys.D) < sys.m:
        raise SingularD("stochastic balancing needs a nonsingular D")
    if P is None:
        P = reachability_gramian(sys).X
    P = np.asarray(P)
    BW = P @ sys.C.T + sys.B @ sys.D.T
    return solve_are_stabilizing(sys.A, BW, sys.D @ sys.D.T, S=-sys.C.T,
                                 kind="bst_QW")


def solve_pr_ares(sys: StateSpaceSystem):
    """Minimal solutions ``(Q_M, P_N)`` of the dual positive-real AREs."""
    _require_square(sys)
    R = _check_spd(sys.D + sys.D.T, NotPositiveReal, "D + D^T")
    try:
        QM = solve_are_stabilizing(sys.A, sys.B, R, S=-sys.C.T, kind="pr_QM")
        PN = solve_are_stabilizing(sys.A.T, sys.C.T, R, S=-sys.B, kind="pr_PN")
    except NoStabilizingSolution as exc:
        raise NotPositiveReal(f"positive-real Riccati equations unsolvable: {exc}") from exc
    return QM, PN


def solve_br_ares(sys: StateSpaceSystem):
    """Minimal solutions ``(Q_J, P_K)`` of the dual bounded-real AREs."""
    D = sys.D
    RJ = _check_spd(np.eye(sys.m) - D.T @ D, NotBoundedReal, "I - D^T D")
    RK = _check_spd(np.eye(sys.p) - D @ D.T, NotBoundedReal, "I - D D^T")
    try:
        QJ = solve_are_stabilizing(sys.A, sys.B, RJ, Q=sys.C.T @ sys.C,
                                   S=sys.C.T @ D, kind="br_QJ")
        PK = solve_are_stabilizing(sys.A.T, sys.C.T, RK, Q=sys.B @ sys.B.T,
                                   S=sys.B @ D.T, kind="br_PK")
    except NoStabilizingSolution as exc:
        raise NotBoundedReal(f"bounded-real Riccati equations unsolvable: {exc}") from exc
    return QJ, PK


def sqrt_factor(X, tol: float = 1e-10) -> np.ndarray:
    """Square-root factor ``F`` with ``X = F F^T`` from a symmetric eigendecomposition.

    Eigenvalues down to ``-tol * ||X||`` are accepted as roundoff and clipped to 0.
    """
    X = _sym(np.asarray(X, dtype=float))
    lam, V = np.linalg.eigh(X)
    scale = max(np.abs(lam).max(), np.finfo(float).tiny) if lam.size else 1.0
    if lam.size and lam.min() < -tol * scale:
        raise ValueError(f"matrix is indefinite (min eigenvalue {lam.min():.3e})")
    return V * np.sqrt(np.clip(lam, 0.0, None))


def spd_sqrt(R) -> np.ndarray:
    """Principal square root of an SPD matrix."""
    lam, V = np.linalg.eigh(_sym(np.asarray(R, dtype=float)))
    return (V * np.sqrt(lam)) @ V.T
