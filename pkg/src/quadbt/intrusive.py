"""Square-root balanced truncation with access to the state-space matrices.

This is the reference every data-driven result is compared against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .genquadbt import ReducedModel, _admissible_order, project
from .lti import StateSpaceSystem
from .mateq import sqrt_factor
from .quadrature import QuadratureRule
from .spectral import VARIANTS, SpectralFactorSet, build_factors
from .errors import PreconditionViolated

__all__ = ["GramianPair", "gramian_pair", "sqrt_bt", "quadrature_factors", "GRAMIAN_KEYS"]

# (reachability-type, observability-type) Gramian per variant
GRAMIAN_KEYS = {
    "lyapunov": ("P", "Q"),
    "bst": ("P", "Q_W"),
    "prbt": ("P_N", "Q_M"),
    "brbt": ("P_K", "Q_J"),
}


@dataclass(frozen=True, eq=False)
class GramianPair:
    """Square-root factors ``P_X = U_X U_X^T`` and ``Q_Y = L_Y L_Y^T``."""

    U_X: np.ndarray
    L_Y: np.ndarray
    P_X: np.ndarray
    Q_Y: np.ndarray
    variant: str
    factors: SpectralFactorSet | None = None

    @property
    def singular_values(self) -> np.ndarray:
        """Singular values of ``L_Y^T U_X`` (Hankel values for the Lyapunov pair)."""
        return np.linalg.svd(self.L_Y.T @ self.U_X, compute_uv=False)

    def reconstruction_residuals(self):
        return (float(np.linalg.norm(self.U_X @ self.U_X.T - self.P_X)),
                float(np.linalg.norm(self.L_Y @ self.L_Y.T - self.Q_Y)))


def gramian_pair(sys: StateSpaceSystem, variant: str,
                 factors: SpectralFactorSet | None = None) -> GramianPair:
    if variant not in VARIANTS:
        raise PreconditionViolated(f"unknown variant {variant!r}")
    if factors is None:
        factors = build_factors(sys, variant)
    kx, ky = GRAMIAN_KEYS[variant]
    P = factors.gramians[kx].X
    Q = factors.gramians[ky].X
    return GramianPair(sqrt_factor(P), sqrt_factor(Q), P, Q, variant, factors)


def sqrt_bt(sys: StateSpaceSystem, variant: str, r: int,
            pair: GramianPair | None = None) -> ReducedModel:
    """Order-``r`` Petrov-Galerkin reduction ``W_r^T A V_r`` with ``W_r^T V_r = I``.

    ``W_r = L_Y Z_1 S^{-1/2}`` and ``V_r = U_X Y_1 S^{-1/2}`` from the SVD
    ``L_Y^T U_X = Z S Y^T``; the feedthrough is kept, ``D_r = D``.
    """
    if pair is None:
        pair = gramian_pair(sys, variant)
    Z, sv, Yt = np.linalg.svd(pair.L_Y.T @ pair.U_X)
    _admissible_order(sv, r, (sys.n, sys.n))
    Ar, Br, Cr = project(Z[:, :r], sv[:r], Yt[:r].T,
                         pair.L_Y.T @ sys.A @ pair.U_X, pair.L_Y.T @ sys.B,
                         sys.C @ pair.U_X)
    return ReducedModel(Ar, Br, Cr, sys.D.copy(), sv, variant, {"method": "intrusive"})


def projection_bases(pair: GramianPair, r: int):
    """``(W_r, V_r)`` for inspecting biorthogonality."""
    Z, sv, Yt = np.linalg.svd(pair.L_Y.T @ pair.U_X)
    isq = 1.0 / np.sqrt(sv[:r])
    return pair.L_Y @ Z[:, :r] * isq, pair.U_X @ Yt[:r].T * isq


def quadrature_factors(sys: StateSpaceSystem, factors: SpectralFactorSet,
                       left: QuadratureRule, right: QuadratureRule):
    """Explicit quadrature factors ``(U_X, L_Y^*)`` (complex) for verification.

    Block column ``j`` of ``U_X`` is ``rho_j (i zeta_j I - A)^{-1} B_X``; block
    row ``k`` of ``L_Y^*`` is ``phi_k C_Y (i omega_k I - A)^{-1}``.
    """
    n = sys.n
    I = np.eye(n)
    U = np.hstack([w * np.linalg.solve(1j * z * I - sys.A, factors.B_X)
                   for z, w in zip(left.nodes, left.weights)])
    Ls = np.vstack([w * np.linalg.solve((1j * z * I - sys.A).T, factors.C_Y.T).T
                    for z, w in zip(right.nodes, right.weights)])
    return U, Ls
