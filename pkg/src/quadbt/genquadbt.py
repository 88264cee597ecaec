"""Loewner-matrix form of quadrature-based balanced truncation.

With implicit quadrature factors built from the left rule ``(zeta_j, rho_j)``
and the right rule ``(omega_k, phi_k)``::

    U_X   = [ ..., rho_j (i zeta_j I - A)^{-1} B_X, ... ]
    L_Y^* = [ ...; phi_k C_Y (i omega_k I - A)^{-1}; ... ]

the products ``L_Y^* U_X``, ``L_Y^* A U_X``, ``L_Y^* B`` and ``C U_X`` are
divided differences of transfer samples (resolvent identity), so reduction
needs only the samples of ``G_sigmaA``, ``G_B`` and ``G_C``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateGap,
    InvalidInput,
    NotConjugateClosed,
    RankDeficient,
    ResidualImaginary,
)
from .lti import StateSpaceSystem
from .quadrature import FrequencyDataset, QuadratureRule, check_disjoint, sample_dataset

__all__ = [
    "LoewnerQuadruple",
    "ReducedModel",
    "assemble_loewner",
    "realify",
    "reduce",
    "project",
    "genquadbt_pipeline",
    "GAP_RTOL",
]

GAP_RTOL = 1e-10
_REALIFY_TOL = 1e-9
_COMPLEX_ROM_TOL = 1e-8
_CONJ_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LoewnerQuadruple:
    """``L`` and ``M`` are ``(p_y K) x (m_x J)``; ``H`` is ``(p_y K) x m``; ``G`` is ``p x (m_x J)``."""

    L: np.ndarray
    M: np.ndarray
    H: np.ndarray
    G: np.ndarray
    blocks: tuple  # (p_y, m_x, K, J)

    @property
    def is_real(self) -> bool:
        return not any(np.iscomplexobj(x) for x in (self.L, self.M, self.H, self.G))


@dataclass(frozen=True, eq=False)
class ReducedModel:
    Ar: np.ndarray
    Br: np.ndarray
    Cr: np.ndarray
    Dr: np.ndarray
    singular_values: np.ndarray
    variant: str
    provenance: dict = field(default_factory=dict)

    @property
    def r(self) -> int:
        return self.Ar.shape[0]

    @property
    def system(self) -> StateSpaceSystem:
        return StateSpaceSystem(self.Ar, self.Br, self.Cr, self.Dr)


def assemble_loewner(data: FrequencyDataset) -> LoewnerQuadruple:
    """Divided-difference blocks; rows follow right nodes, columns left nodes."""
    check_disjoint(data.left, data.right)
    sw = data.right.points  # i*omega_k
    sz = data.left.points   # i*zeta_j
    phi, rho = data.right.weights, data.left.weights
    K, J = sw.size, sz.size
    py, mx = data.GsA_left.shape[1:]

    denom = (sw[:, None] - sz[None, :])[:, :, None, None]
    scale = -(phi[:, None] * rho[None, :])[:, :, None, None]
    GR, GL = data.GsA_right[:, None], data.GsA_left[None, :]
    L4 = scale * (GR - GL) / denom
    M4 = scale * (sw[:, None, None, None] * GR - sz[None, :, None, None] * GL) / denom

    def flat(X):  # (K, J, py, mx) -> (K py, J mx)
        return X.transpose(0, 2, 1, 3).reshape(K * py, J * mx)

    H = (phi[:, None, None] * data.GB_right).reshape(K * py, -1)
    G = (rho[:, None, None] * data.GC_left).transpose(1, 0, 2).reshape(data.GC_left.shape[1], J * mx)
    return LoewnerQuadruple(flat(L4), flat(M4), H, G, (py, mx, K, J))


def _pair_transform(rule: QuadratureRule, block: int) -> np.ndarray:
    """Block unitary mapping each conjugate sample pair to its real coordinates."""
    n = len(rule)
    T = np.zeros((n, n), dtype=complex)
    c = 1.0 / np.sqrt(2.0)
    for lo in range(n // 2):
        hi = n - 1 - lo  # nodes sorted, so hi carries +w and lo carries -w
        T[hi, hi], T[hi, lo] = c, c
        T[lo, hi], T[lo, lo] = 1j * c, -1j * c
    if n % 2:
        T[n // 2, n // 2] = 1.0
    return np.kron(T, np.eye(block))


def _check_conj_samples(samples: np.ndarray, name: str):
    mirrored = np.conj(samples[::-1])
    scale = max(np.abs(samples).max(), np.finfo(float).tiny)
    if np.abs(samples - mirrored).max() > _CONJ_TOL * scale:
        raise NotConjugateClosed(f"{name} samples are not conjugate symmetric")


def realify(q: LoewnerQuadruple, data: FrequencyDataset) -> LoewnerQuadruple:
    """Unitary change of coordinates turning conjugate-closed data real."""
    if not (data.left.conj_closed and data.right.conj_closed):
        raise NotConjugateClosed("both rules must be closed under conjugation")
    for name in ("GsA_left", "GC_left", "GsA_right", "GB_right"):
        _check_conj_samples(getattr(data, name), name)
    py, mx, _, _ = q.blocks
    TR = _pair_transform(data.right, py)
    TLh = _pair_transform(data.left, mx).conj().T
    out = {"L": TR @ q.L @ TLh, "M": TR @ q.M @ TLh, "H": TR @ q.H, "G": q.G @ TLh}
    for name, X in out.items():
        ref = max(np.linalg.norm(X), np.finfo(float).tiny)
        if np.linalg.norm(X.imag) > _REALIFY_TOL * ref:
            raise ResidualImaginary(f"{name} keeps an imaginary part after realification")
        out[name] = np.ascontiguousarray(X.real)
    return LoewnerQuadruple(out["L"], out["M"], out["H"], out["G"], q.blocks)


def _admissible_order(sv: np.ndarray, r: int, shape) -> None:
    if int(r) != r or r < 1:
        raise InvalidInput(f"order must be a positive integer, got {r}")
    tol = max(shape) * np.finfo(float).eps * (sv[0] if sv.size else 0.0)
    rank = int(np.count_nonzero(sv > tol))
    if r > rank:
        raise RankDeficient(f"order {r} exceeds numerical rank {rank}")
    if r < sv.size and sv[r - 1] <= sv[r] * (1.0 + GAP_RTOL):
        raise DegenerateGap(
            f"no gap between singular values {r} and {r + 1}: {sv[r - 1]:.6e}, {sv[r]:.6e}")


def project(Z1, s1, Y1, Lmat_A, Lmat_B, Cmat):
    """Petrov-Galerkin projection shared by the intrusive and data-driven paths.

    Returns ``(S Z1^* Lmat_A Y1 S, S Z1^* Lmat_B, Cmat Y1 S)`` with
    ``S = diag(s1)^{-1/2}``.
    """
    isq = 1.0 / np.sqrt(s1)
    Zs = Z1.conj().T * isq[:, None]
    Ys = Y1 * isq[None, :]
    return Zs @ Lmat_A @ Ys, Zs @ Lmat_B, Cmat @ Ys


def _drop_imag(X, name):
    if not np.iscomplexobj(X):
        return X
    ref = max(np.linalg.norm(X), np.finfo(float).tiny)
    if np.linalg.norm(X.imag) > _COMPLEX_ROM_TOL * ref:
        raise ResidualImaginary(
            f"reduced {name} is complex; realify the Loewner quadruple first")
    return np.ascontiguousarray(X.real)


def reduce(q: LoewnerQuadruple, r: int, feedthrough=None, variant: str = "unknown",
           provenance: dict | None = None) -> ReducedModel:
    """Order-``r`` model from the SVD ``L = Z Sigma Y^*`` of the Loewner matrix."""
    Z, sv, Yh = np.linalg.svd(q.L, full_matrices=False)
    _admissible_order(sv, r, q.L.shape)
    Ar, Br, Cr = project(Z[:, :r], sv[:r], Yh[:r].conj().T, q.M, q.H, q.G)
    Ar, Br, Cr = (_drop_imag(X, nm) for X, nm in ((Ar, "A"), (Br, "B"), (Cr, "C")))
    p, m = q.G.shape[0], q.H.shape[1]
    Dr = np.zeros((p, m)) if feedthrough is None else np.atleast_2d(
        np.asarray(feedthrough, dtype=float))
    if Dr.shape != (p, m):
        raise InvalidInput(f"feedthrough must be {p}x{m}, got {Dr.shape}")
    return ReducedModel(Ar, Br, Cr, Dr, sv, variant, dict(provenance or {}))


def genquadbt_pipeline(oracles, left_rule: QuadratureRule, right_rule: QuadratureRule,
                       r: int, feedthrough=None) -> ReducedModel:
    """Sample, assemble, realify (conjugate-closed rules only) and reduce."""
    data = sample_dataset(oracles, left_rule, right_rule)
    q = assemble_loewner(data)
    if left_rule.conj_closed and right_rule.conj_closed:
        q = realify(q, data)
    prov = {"method": "quadrature", "N_left": len(left_rule), "N_right": len(right_rule)}
    return reduce(q, r, feedthrough, variant=data.variant, provenance=prov)
