"""Spectral factors of the balancing variants and the transfer functions to sample.

Each balancing variant pairs a reachability-type Gramian ``P_X`` with an
observability-type Gramian ``Q_Y``.  Both are Lyapunov Gramians of auxiliary
systems sharing ``A`` with the model::

    A P_X + P_X A^T + B_X B_X^T = 0,    A^T Q_Y + Q_Y A + C_Y^T C_Y = 0

and the data-driven construction needs samples of three strictly proper
transfer functions built from ``B_X`` and ``C_Y``:

* ``G_sigmaA(s) = C_Y (sI - A)^{-1} B_X``
* ``G_B(s)      = C_Y (sI - A)^{-1} B``
* ``G_C(s)      = C   (sI - A)^{-1} B_X``

==========  ==============================  ===============================
variant     C_Y                             B_X
==========  ==============================  ===============================
lyapunov    C                               B
bst         C_W = D^{-1}(C - B_W^T Q_W)     B
prbt        C_M = R^{-1/2}(C - B^T Q_M)     B_N = (B - P_N C^T) R^{-1/2}
brbt        [C; C_J]                        [B, B_K]
==========  ==============================  ===============================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NonSquareSystem, PreconditionViolated, SingularD
from .lti import (
    StateSpaceSystem,
    dual,
    eval_tf,
    freqresp,
    inverse,
    series,
    stable_part,
    transmission_zeros,
)
from .mateq import (
    GramianSolution,
    observability_gramian,
    reachability_gramian,
    solve_br_ares,
    solve_bst_are,
    solve_pr_ares,
    spd_sqrt,
)

__all__ = [
    "VARIANTS",
    "popov",
    "SpectralFactorSet",
    "TransferOracle",
    "build_factors",
    "bst_factor",
    "pr_factors",
    "br_factors",
    "verify_factorization",
    "FactorizationCheck",
    "make_oracles",
    "cascade_oracle_check",
]

VARIANTS = ("lyapunov", "bst", "prbt", "brbt")


def popov(sys: StateSpaceSystem, s: complex) -> np.ndarray:
    """Popov function ``G(s) + G(-s)^T``."""
    return eval_tf(sys, s) + eval_tf(sys, -s).T


@dataclass(frozen=True, eq=False)
class SpectralFactorSet:
    """Factor realizations and Gramians for one balancing variant.

    ``C_Y`` and ``B_X`` are the output/input maps of the auxiliary systems
    whose Lyapunov Gramians are the balancing pair.
    """

    variant: str
    factors: dict
    gramians: dict
    C_Y: np.ndarray
    B_X: np.ndarray


class TransferOracle:
    """Evaluator ``s -> C_o (sI - A)^{-1} B_o`` with fixed output shape.

    Stands in for a measurement device: callers only see sampled values.
    """

    def __init__(self, realization: StateSpaceSystem, quantity: str, variant: str):
        self._sys = realization
        self.quantity = quantity
        self.variant = variant
        self.shape = (realization.p, realization.m)

    def __call__(self, s) -> np.ndarray:
        return eval_tf(self._sys, s)

    def sample(self, points) -> np.ndarray:
        return freqresp(self._sys, points)

    def __repr__(self):
        return (f"TransferOracle({self.quantity!r}, variant={self.variant!r}, "
                f"shape={self.shape})")


def bst_factor(sys: StateSpaceSystem, P, Q_W) -> StateSpaceSystem:
    """Left spectral factor ``W = (A, B_W, C_W, D^T)`` of ``G(s) G(-s)^T``."""
    P, Q_W = np.asarray(P), np.asarray(Q_W)
    BW = P @ sys.C.T + sys.B @ sys.D.T
    CW = np.linalg.solve(sys.D, sys.C - BW.T @ Q_W)
    return StateSpaceSystem(sys.A, BW, CW, sys.D.T)


def pr_factors(sys: StateSpaceSystem, Q_M, P_N):
    """Minimum-phase factors ``M`` (left) and ``N`` (right) of the Popov function."""
    R = sys.D + sys.D.T
    Rh = spd_sqrt(R)
    Rih = np.linalg.inv(Rh)
    CM = Rih @ (sys.C - sys.B.T @ np.asarray(Q_M))
    BN = (sys.B - np.asarray(P_N) @ sys.C.T) @ Rih
    return (StateSpaceSystem(sys.A, sys.B, CM, Rh),
            StateSpaceSystem(sys.A, BN, sys.C, Rh))


def br_factors(sys: StateSpaceSystem, Q_J, P_K):
    """Bounded-real factors ``J, K`` and the stacked systems ``J_hat, K_hat``."""
    D = sys.D
    RJh = spd_sqrt(np.eye(sys.m) - D.T @ D)
    RKh = spd_sqrt(np.eye(sys.p) - D @ D.T)
    CJ = -np.linalg.solve(RJh, sys.B.T @ np.asarray(Q_J) + D.T @ sys.C)
    BK = -np.linalg.solve(RKh, (np.asarray(P_K) @ sys.C.T + sys.B @ D.T).T).T
    J = StateSpaceSystem(sys.A, sys.B, CJ, RJh)
    K = StateSpaceSystem(sys.A, BK, sys.C, RKh)
    J_hat = StateSpaceSystem(sys.A, sys.B, np.vstack([sys.C, CJ]), np.vstack([D, RJh]))
    K_hat = StateSpaceSystem(sys.A, np.hstack([sys.B, BK]), sys.C, np.hstack([D, RKh]))
    return J, K, J_hat, K_hat


def build_factors(sys: StateSpaceSystem, variant: str) -> SpectralFactorSet:
    """Solve the variant's Gramian equations and realize its spectral factors."""
    if variant == "lyapunov":
        P = reachability_gramian(sys)
        Q = observability_gramian(sys)
        return SpectralFactorSet(variant, {}, {"Q": Q, "P": P}, sys.C, sys.B)

    if variant == "bst":
        if sys.m != sys.p:
            raise NonSquareSystem("stochastic balancing needs a square system")
        if np.linalg.matrix_rank(sys.D) < sys.m:
            raise SingularD("stochastic balancing needs a nonsingular D")
        P = reachability_gramian(sys)
        QW = solve_bst_are(sys, P.X)
        W = bst_factor(sys, P.X, QW.X)
        return SpectralFactorSet(variant, {"W": W}, {"Q_W": QW, "P": P}, W.C, sys.B)

    if variant == "prbt":
        if sys.m != sys.p:
            raise NonSquareSystem("positive-real balancing needs a square system")
        QM, PN = solve_pr_ares(sys)
        M, N = pr_factors(sys, QM.X, PN.X)
        return SpectralFactorSet(variant, {"M": M, "N": N},
                                 {"Q_M": QM, "P_N": PN}, M.C, N.B)

    if variant == "brbt":
        QJ, PK = solve_br_ares(sys)
        J, K, J_hat, K_hat = br_factors(sys, QJ.X, PK.X)
        return SpectralFactorSet(variant,
                                 {"J": J, "K": K, "J_hat": J_hat, "K_hat": K_hat},
                                 {"Q_J": QJ, "P_K": PK}, J_hat.C, K_hat.B)

    raise PreconditionViolated(f"unknown variant {variant!r}; expected one of {VARIANTS}")


class FactorizationCheck(NamedTuple):
    max_residual: float
    zero_abscissa: float  # max real part over all factor zeros

    @property
    def minimum_phase(self) -> bool:
        return self.zero_abscissa < 0


def verify_factorization(factors: SpectralFactorSet, sys: StateSpaceSystem,
                         grid) -> FactorizationCheck:
    """Largest Frobenius residual of the variant's factorization identities on ``i*grid``.

    Also reports the rightmost transmission zero over the square factors.
    """
    grid = np.asarray(grid, dtype=float).ravel()
    s = 1j * grid
    G = freqresp(sys, s)
    Gm = freqresp(sys, -s)
    GmT = np.swapaxes(Gm, 1, 2)
    f = factors.factors

    def tf(name, sign=1):
        return freqresp(f[name], sign * s)

    def T(x):
        return np.swapaxes(x, 1, 2)

    residuals = []
    if factors.variant == "bst":
        residuals.append(G @ GmT - T(tf("W", -1)) @ tf("W"))
    elif factors.variant == "prbt":
        Phi = G + GmT
        residuals.append(Phi - T(tf("M", -1)) @ tf("M"))
        residuals.append(Phi - tf("N") @ T(tf("N", -1)))
    elif factors.variant == "brbt":
        residuals.append(np.eye(sys.m) - GmT @ G - T(tf("J", -1)) @ tf("J"))
        residuals.append(np.eye(sys.p) - G @ GmT - tf("K") @ T(tf("K", -1)))
    max_res = max((float(np.linalg.norm(r, axis=(1, 2)).max()) for r in residuals),
                  default=0.0)

    square = [f[k] for k in ("W", "M", "N", "J", "K") if k in f]
    zero_abscissa = max((float(transmission_zeros(F).real.max()) for F in square
                         if F.n), default=-np.inf)
    return FactorizationCheck(max_res, zero_abscissa)


def make_oracles(sys: StateSpaceSystem, variant: str,
                 factors: SpectralFactorSet | None = None):
    """The three samplers ``(G_sigmaA, G_B, G_C)`` for ``variant``.

    The realizations are the decoupled stable parts identified analytically;
    only their sampled values are meant to cross into the data-driven stage.
    """
    if factors is None:
        factors = build_factors(sys, variant)
    A, C_Y, B_X = sys.A, factors.C_Y, factors.B_X
    zero = np.zeros

    def oracle(C, B, quantity):
        return TransferOracle(StateSpaceSystem(A, B, C, zero((C.shape[0], B.shape[1]))),
                              quantity, variant)

    return (oracle(C_Y, B_X, "G_sigmaA"),
            oracle(C_Y, sys.B, "G_B"),
            oracle(sys.C, B_X, "G_C"))


def _cascade(sys: StateSpaceSystem, factors: SpectralFactorSet) -> StateSpaceSystem:
    """Full cascade ``Z(-s)^{-T} Y(s)`` whose stable part should equal ``G_sigmaA``."""
    f = factors.factors
    zero_d = np.zeros
    if factors.variant == "bst":
        Z = f["W"]
        Y = StateSpaceSystem(sys.A, sys.B, sys.C, zero_d((sys.p, sys.m)))
    elif factors.variant == "prbt":
        Z = f["M"]
        Y = StateSpaceSystem(sys.A, f["N"].B, sys.C, zero_d((sys.p, sys.m)))
    elif factors.variant == "brbt":
        p, m = sys.p, sys.m
        J = f["J"]
        # Z(s) = [[I, G_inf(s)], [0, J(s)]], so Z(-s)^T = [[I, 0], [G_inf(-s)^T, J(-s)^T]]
        Z = StateSpaceSystem(sys.A,
                             np.hstack([zero_d((sys.n, p)), sys.B]),
                             np.vstack([sys.C, J.C]),
                             np.block([[np.eye(p), zero_d((p, m))],
                                       [zero_d((m, p)), J.D]]))
        B_hat = f["K_hat"].B
        Y = StateSpaceSystem(sys.A, B_hat, np.vstack([sys.C, -sys.D.T @ sys.C]),
                             zero_d((p + m, B_hat.shape[1])))
    else:
        raise PreconditionViolated(f"no cascade representation for variant {factors.variant!r}")
    return series(inverse(dual(Z)), Y)


def cascade_oracle_check(sys: StateSpaceSystem, variant: str, grid,
                         factors: SpectralFactorSet | None = None) -> float:
    """Max entrywise deviation between ``G_sigmaA`` and the numerically
    extracted stable part of the cascade realization, on ``i*grid``."""
    if factors is None:
        factors = build_factors(sys, variant)
    g_sa, _, _ = make_oracles(sys, variant, factors)
    part = stable_part(_cascade(sys, factors))
    s = 1j * np.asarray(grid, dtype=float).ravel()
    return float(np.abs(freqresp(part, s) - g_sa.sample(s)).max())
