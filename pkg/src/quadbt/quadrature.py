"""Imaginary-axis quadrature rules and sampled frequency datasets.

A rule ``(nodes, weights)`` stands for the Gramian integral
``P = 1/(2 pi) int (iw I - A)^{-1} B B^T (iw I - A)^{-H} dw``, approximated
by ``sum_j rho_j^2 (i z_j I - A)^{-1} B B^T (...)^H``.  The ``1/(2 pi)``
prefactor is folded into the weights, so ``rho_j = sqrt(w_j / (2 pi))`` for
trapezoid widths ``w_j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, InvalidRange, NodeCollision, OddN

__all__ = [
    "QuadratureRule",
    "FrequencyDataset",
    "logtrap_rule",
    "trapezoid_rule",
    "interleaved_rules",
    "sample_dataset",
    "check_disjoint",
    "GAP_RTOL",
]

GAP_RTOL = 1e-10
_PAIR_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Real frequencies ``nodes`` (evaluated at ``i*w``) with positive weights.

    Nodes are stored sorted ascending. With ``conj_closed`` set, every node
    ``w != 0`` has its mirror ``-w`` with the same weight.
    """

    nodes: np.ndarray
    weights: np.ndarray
    conj_closed: bool = field(default=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if nodes.shape != weights.shape:
            raise InvalidInput("nodes and weights must have equal length")
        if nodes.size == 0:
            raise InvalidInput("a quadrature rule needs at least one node")
        if not (np.all(np.isfinite(nodes)) and np.all(weights > 0)):
            raise InvalidInput("nodes must be finite and weights positive")
        order = np.argsort(nodes, kind="stable")
        nodes, weights = nodes[order], weights[order]
        if np.any(np.diff(nodes) <= 0):
            raise InvalidInput("duplicate quadrature nodes")
        conj = bool(self.conj_closed)
        if conj and not _mirror_symmetric(nodes, weights):
            raise InvalidInput("conj_closed rule must contain +-w pairs with equal weights")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "conj_closed", conj)

    def __len__(self):
        return self.nodes.size

    @property
    def points(self) -> np.ndarray:
        return 1j * self.nodes

    def to_dict(self) -> dict:
        return {"nodes": self.nodes.tolist(), "weights": self.weights.tolist(),
                "conj_closed": self.conj_closed}

    @classmethod
    def from_dict(cls, d: dict) -> "QuadratureRule":
        return cls(d["nodes"], d["weights"], d.get("conj_closed", False))


def _mirror_symmetric(nodes, weights) -> bool:
    # nodes sorted ascending, so reversing pairs w with -w
    scale = max(np.abs(nodes).max(), 1.0)
    return bool(np.allclose(nodes, -nodes[::-1], rtol=0, atol=_PAIR_RTOL * scale)
                and np.allclose(weights, weights[::-1], rtol=_PAIR_RTOL, atol=0))


def trapezoid_rule(theta) -> QuadratureRule:
    """Conjugate-closed rule from positive nodes ``theta`` via trapezoid widths.

    The widths use the neighbour spacings on the positive axis; each width
    is shared by ``+theta_i`` and ``-theta_i``.
    """
    theta = np.sort(np.asarray(theta, dtype=float).ravel())
    if theta.size < 2 or theta[0] <= 0:
        raise InvalidRange("need at least two positive nodes")
    w = np.empty_like(theta)
    w[0] = 0.5 * (theta[1] - theta[0])
    w[-1] = 0.5 * (theta[-1] - theta[-2])
    w[1:-1] = 0.5 * (theta[2:] - theta[:-2])
    weight = np.sqrt(w / (2.0 * np.pi))
    return QuadratureRule(np.concatenate([-theta[::-1], theta]),
                          np.concatenate([weight[::-1], weight]), conj_closed=True)


def _check_band(omega_min, omega_max, N):
    if int(N) != N:
        raise InvalidRange(f"N must be an integer, got {N}")
    if N % 2:
        raise OddN(f"N must be even, got {N}")
    if N < 4:
        raise InvalidRange(f"N must be at least 4, got {N}")
    if not (0 < omega_min < omega_max < np.inf):
        raise InvalidRange(f"need 0 < omega_min < omega_max, got [{omega_min}, {omega_max}]")


def logtrap_rule(omega_min: float, omega_max: float, N: int) -> QuadratureRule:
    """Trapezoid rule on ``N/2`` log-spaced frequencies in the band, mirrored to ``+-w``."""
    _check_band(omega_min, omega_max, N)
    return trapezoid_rule(np.geomspace(omega_min, omega_max, N // 2))


def interleaved_rules(omega_min: float, omega_max: float, N: int):
    """Disjoint ``(left, right)`` rules of ``N`` nodes each.

    ``N`` log-spaced positive frequencies cover the band; the right rule takes
    the odd-numbered ones and the left rule the even-numbered ones, so every
    interior left node sits at the geometric midpoint of two right nodes.
    """
    _check_band(omega_min, omega_max, N)
    theta = np.geomspace(omega_min, omega_max, N)
    return trapezoid_rule(theta[1::2]), trapezoid_rule(theta[0::2])


def check_disjoint(left: QuadratureRule, right: QuadratureRule) -> float:
    """Smallest distance between left and right nodes; raises on collision.

    Two nodes collide when their distance is at most ``GAP_RTOL`` times the
    larger of the two magnitudes, so wide log-spaced bands are not rejected
    because of their small nodes.
    """
    R, L = right.nodes[:, None], left.nodes[None, :]
    dist = np.abs(R - L)
    local = np.maximum(np.abs(R), np.abs(L))
    hit = dist <= GAP_RTOL * local
    if np.any(hit) or np.any(dist == 0):
        k, j = np.argwhere(hit | (dist == 0))[0]
        raise NodeCollision(
            f"right node {right.nodes[k]!r} collides with left node {left.nodes[j]!r}")
    return float(dist.min())


def _encode_complex(arr: np.ndarray):
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def _decode_complex(data, shape):
    arr = np.asarray(data, dtype=float)
    if arr.shape != tuple(shape) + (2,):
        raise InvalidInput(f"sample array has shape {arr.shape[:-1]}, expected {tuple(shape)}")
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass(frozen=True, eq=False)
class FrequencyDataset:
    """Everything the data-driven reduction consumes.

    ``GsA_left[j]`` and ``GC_left[j]`` are sampled at ``i*zeta_j`` (left rule),
    ``GsA_right[k]`` and ``GB_right[k]`` at ``i*omega_k`` (right rule).
    ``feedthrough`` optionally carries a measured high-frequency limit.
    """

    left: QuadratureRule
    right: QuadratureRule
    GsA_left: np.ndarray
    GC_left: np.ndarray
    GsA_right: np.ndarray
    GB_right: np.ndarray
    variant: str
    feedthrough: np.ndarray | None = None

    def __post_init__(self):
        J, K = len(self.left), len(self.right)
        arrays = {name: np.asarray(getattr(self, name), dtype=complex)
                  for name in ("GsA_left", "GC_left", "GsA_right", "GB_right")}
        for name, arr in arrays.items():
            if arr.ndim != 3:
                raise InvalidInput(f"{name} must be a stack of matrices")
            if not np.all(np.isfinite(arr)):
                raise InvalidInput(f"{name} has non-finite entries")
        py, mx = arrays["GsA_left"].shape[1:]
        p, m = arrays["GC_left"].shape[1], arrays["GB_right"].shape[2]
        expected = {"GsA_left": (J, py, mx), "GC_left": (J, p, mx),
                    "GsA_right": (K, py, mx), "GB_right": (K, py, m)}
        for name, shape in expected.items():
            if arrays[name].shape != shape:
                raise InvalidInput(
                    f"{name} has shape {arrays[name].shape}, expected {shape}")
            object.__setattr__(self, name, arrays[name])
        if self.feedthrough is not None:
            D = np.atleast_2d(np.asarray(self.feedthrough, dtype=float))
            if D.shape != (p, m):
                raise InvalidInput(f"feedthrough must be {p}x{m}, got {D.shape}")
            object.__setattr__(self, "feedthrough", D)
        check_disjoint(self.left, self.right)

    @property
    def shapes(self) -> dict:
        py, mx = self.GsA_left.shape[1:]
        return {"p_y": py, "m_x": mx, "p": self.GC_left.shape[1], "m": self.GB_right.shape[2]}

    def to_json(self) -> str:
        doc = {
            "variant": self.variant,
            "shapes": self.shapes,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
            "GsA_left": _encode_complex(self.GsA_left),
            "GC_left": _encode_complex(self.GC_left),
            "GsA_right": _encode_complex(self.GsA_right),
            "GB_right": _encode_complex(self.GB_right),
            "feedthrough": None if self.feedthrough is None else self.feedthrough.tolist(),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "FrequencyDataset":
        try:
            doc = json.loads(text)
            left = QuadratureRule.from_dict(doc["left"])
            right = QuadratureRule.from_dict(doc["right"])
            sh = doc["shapes"]
            J, K = len(left), len(right)
            py, mx, p, m = sh["p_y"], sh["m_x"], sh["p"], sh["m"]
            return cls(left, right,
                       _decode_complex(doc["GsA_left"], (J, py, mx)),
                       _decode_complex(doc["GC_left"], (J, p, mx)),
                       _decode_complex(doc["GsA_right"], (K, py, mx)),
                       _decode_complex(doc["GB_right"], (K, py, m)),
                       doc["variant"], doc.get("feedthrough"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInput):
                raise
            raise InvalidInput(f"malformed dataset file: {exc}") from exc

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "FrequencyDataset":
        with open(path) as fh:
            return cls.from_json(fh.read())


def sample_dataset(oracles, left: QuadratureRule, right: QuadratureRule,
                   feedthrough=None) -> FrequencyDataset:
    """Sample ``(G_sigmaA, G_B, G_C)`` on the two rules."""
    check_disjoint(left, right)
    g_sa, g_b, g_c = oracles
    if g_b.shape[0] != g_sa.shape[0] or g_c.shape[1] != g_sa.shape[1]:
        raise InvalidInput("oracle shapes are inconsistent")
    return FrequencyDataset(
        left, right,
        GsA_left=g_sa.sample(left.points),
        GC_left=g_c.sample(left.points),
        GsA_right=g_sa.sample(right.points),
        GB_right=g_b.sample(right.points),
        variant=getattr(g_sa, "variant", "unknown"),
        feedthrough=feedthrough,
    )
