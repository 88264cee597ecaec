"""Dense continuous-time state-space systems.

A system is the real quadruple ``(A, B, C, D)`` with transfer function
``G(s) = C (sI - A)^{-1} B + D``.  All functions here are pure; systems are
immutable once constructed.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from .errors import (
    DimensionMismatch,
    ImaginaryAxisEigenvalue,
    InvalidInput,
    SingularFeedthrough,
    SingularResolvent,
    UnstableSystem,
)

__all__ = [
    "StateSpaceSystem",
    "eval_tf",
    "freqresp",
    "strictly_proper",
    "dual",
    "inverse",
    "series",
    "parallel",
    "difference",
    "transform",
    "stable_part",
    "spectral_abscissa",
    "is_stable",
    "transmission_zeros",
    "hinf_norm",
    "load_model",
    "save_model",
    "model_to_json",
    "model_from_json",
]

# relative pivot threshold below which sI - A counts as singular
_RESOLVENT_RTOL = 1e3 * np.finfo(float).eps
# imaginary-axis gap for spectral splitting, relative to ||A||
_SPLIT_GAP_RTOL = 1e-8


def _as_matrix(x, rows=None, cols=None, name="matrix"):
    a = np.array(x, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        # a bare vector is ambiguous; resolve it from the expected shape
        if rows is not None and a.size == rows and (cols is None or cols == 1):
            a = a.reshape(rows, 1)
        else:
            a = a.reshape(1, -1) if a.size else a.reshape(rows or 0, cols or 0)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class StateSpaceSystem:
    """Real LTI realization ``(A, B, C, D)``.

    Scalars and 1-D inputs are promoted to 2-D arrays. A pure gain is
    encoded with ``A`` of shape ``(0, 0)``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = _as_matrix(self.A, name="A")
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        B = _as_matrix(self.B, rows=n, name="B")
        C = _as_matrix(self.C, cols=n, name="C")
        if n == 0:
            D = _as_matrix(self.D, name="D")
            B = B.reshape(0, D.shape[1])
            C = C.reshape(D.shape[0], 0)
        else:
            D = _as_matrix(self.D, rows=C.shape[0], cols=B.shape[1], name="D")
        if B.shape[0] != n or C.shape[1] != n:
            raise DimensionMismatch(
                f"inconsistent shapes A{A.shape} B{B.shape} C{C.shape}")
        if D.shape != (C.shape[0], B.shape[1]):
            raise DimensionMismatch(
                f"D must be {C.shape[0]}x{B.shape[1]}, got {D.shape}")
        for name, mat in zip("ABCD", (A, B, C, D)):
            if not np.all(np.isfinite(mat)):
                raise InvalidInput(f"{name} has non-finite entries")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def poles(self) -> np.ndarray:
        return np.linalg.eigvals(self.A) if self.n else np.zeros(0, complex)

    def __call__(self, s):
        return eval_tf(self, s)

    def __repr__(self):
        return f"StateSpaceSystem(n={self.n}, m={self.m}, p={self.p})"


def eval_tf(sys: StateSpaceSystem, s: complex) -> np.ndarray:
    """Evaluate ``C (sI - A)^{-1} B + D`` at one complex point.

    One LU factorization of ``sI - A`` and a solve with ``m`` right-hand
    sides; the inverse is never formed.
    """
    s = complex(s)
    if sys.n == 0:
        return sys.D.astype(complex)
    M = s * np.eye(sys.n) - sys.A
    with warnings.catch_warnings():
        # an exactly zero pivot is reported below as SingularResolvent
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(M, check_finite=False)
    pivots = np.abs(np.diag(lu))
    scale = max(np.abs(M).max(), 1.0)
    if pivots.min() <= _RESOLVENT_RTOL * scale:
        raise SingularResolvent(f"sI - A is numerically singular at s={s}")
    X = sla.lu_solve((lu, piv), sys.B.astype(complex), check_finite=False)
    return sys.C @ X + sys.D


def freqresp(sys: StateSpaceSystem, points, chunk: int = 256) -> np.ndarray:
    """Transfer values at many complex points, shape ``(len(points), p, m)``.

    Uses stacked LAPACK solves (one LU per point).
    """
    points = np.asarray(points, dtype=complex).ravel()
    out = np.empty((points.size, sys.p, sys.m), dtype=complex)
    if sys.n == 0:
        out[:] = sys.D
        return out
    eye = np.eye(sys.n)
    Bc = sys.B.astype(complex)
    for start in range(0, points.size, chunk):
        s = points[start:start + chunk]
        M = s[:, None, None] * eye - sys.A
        try:
            X = np.linalg.solve(M, np.broadcast_to(Bc, (s.size,) + Bc.shape))
        except np.linalg.LinAlgError:
            # fall back to the checked scalar path to report the offending point
            for k, sk in enumerate(s):
                out[start + k] = eval_tf(sys, sk)
            continue
        out[start:start + s.size] = sys.C @ X + sys.D
    if not np.all(np.isfinite(out)):
        raise SingularResolvent("non-finite transfer value; a point hits a pole")
    return out


def strictly_proper(sys: StateSpaceSystem) -> StateSpaceSystem:
    return StateSpaceSystem(sys.A, sys.B, sys.C, np.zeros_like(sys.D))


def dual(sys: StateSpaceSystem) -> StateSpaceSystem:
    """Realization of ``G(-s)^T``: ``(-A^T, -C^T, B^T, D^T)``."""
    return StateSpaceSystem(-sys.A.T, -sys.C.T, sys.B.T, sys.D.T)


def inverse(sys: StateSpaceSystem, rcond: float = 1e-12) -> StateSpaceSystem:
    """Realization of ``G(s)^{-1}``; requires a square nonsingular ``D``."""
    if sys.p != sys.m:
        raise SingularFeedthrough("D must be square to invert the system")
    if sys.m and 1.0 / np.linalg.cond(sys.D) <= rcond:
        raise SingularFeedthrough("D is singular to working precision")
    Dinv = np.linalg.inv(sys.D)
    return StateSpaceSystem(sys.A - sys.B @ Dinv @ sys.C, sys.B @ Dinv,
                            -Dinv @ sys.C, Dinv)


def series(sys1: StateSpaceSystem, sys2: StateSpaceSystem) -> StateSpaceSystem:
    """Cascade with transfer function ``G1(s) G2(s)`` (``sys2`` acts first)."""
    if sys2.p != sys1.m:
        raise DimensionMismatch(
            f"output of sys2 ({sys2.p}) does not match input of sys1 ({sys1.m})")
    n1, n2 = sys1.n, sys2.n
    A = np.block([[sys1.A, sys1.B @ sys2.C],
                  [np.zeros((n2, n1)), sys2.A]])
    B = np.vstack([sys1.B @ sys2.D, sys2.B])
    C = np.hstack([sys1.C, sys1.D @ sys2.C])
    return StateSpaceSystem(A, B, C, sys1.D @ sys2.D)


def parallel(sys1: StateSpaceSystem, sys2: StateSpaceSystem,
             sign: float = 1.0) -> StateSpaceSystem:
    """Realization of ``G1(s) + sign * G2(s)``."""
    if (sys1.p, sys1.m) != (sys2.p, sys2.m):
        raise DimensionMismatch("parallel connection needs equal I/O sizes")
    A = sla.block_diag(sys1.A, sys2.A)
    B = np.vstack([sys1.B, sys2.B])
    C = np.hstack([sys1.C, sign * sys2.C])
    return StateSpaceSystem(A, B, C, sys1.D + sign * sys2.D)


def difference(sys1: StateSpaceSystem, sys2: StateSpaceSystem) -> StateSpaceSystem:
    return parallel(sys1, sys2, sign=-1.0)


def transform(sys: StateSpaceSystem, T) -> StateSpaceSystem:
    """State similarity ``x -> T x``."""
    T = np.asarray(T, dtype=float)
    Ti = np.linalg.inv(T)
    return StateSpaceSystem(T @ sys.A @ Ti, T @ sys.B, sys.C @ Ti, sys.D)


def spectral_abscissa(A) -> float:
    A = np.asarray(A)
    if A.size == 0:
        return -np.inf
    return float(np.max(np.linalg.eigvals(A).real))


def is_stable(sys: StateSpaceSystem) -> bool:
    return spectral_abscissa(sys.A) < 0


def transmission_zeros(sys: StateSpaceSystem) -> np.ndarray:
    """Zeros of a square system with invertible ``D``: eig(A - B D^{-1} C)."""
    return inverse(sys).poles


def stable_part(sys: StateSpaceSystem) -> StateSpaceSystem:
    """Strictly proper stable part ``[G - D]_+`` via an ordered Schur split.

    The real Schur form is ordered with left-half-plane eigenvalues first and
    the coupling block is removed with a Sylvester solve. The feedthrough of
    the returned system is zero.
    """
    n = sys.n
    if n == 0:
        return StateSpaceSystem(np.zeros((0, 0)), np.zeros((0, sys.m)),
                                np.zeros((sys.p, 0)), np.zeros_like(sys.D))
    normA = max(np.linalg.norm(sys.A, 2), 1.0)
    T, Z, k = sla.schur(sys.A, output="real", sort="lhp")
    eigs = np.linalg.eigvals(T)
    if np.min(np.abs(eigs.real)) <= _SPLIT_GAP_RTOL * normA:
        raise ImaginaryAxisEigenvalue("A has eigenvalues too close to the imaginary axis")
    Bt = Z.T @ sys.B
    Ct = sys.C @ Z
    if k == n:
        return StateSpaceSystem(T, Bt, Ct, np.zeros_like(sys.D))
    T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
    # T11 X - X T22 = -T12 block-diagonalizes the Schur form
    X = sla.solve_sylvester(T11, -T22, -T12)
    B1 = Bt[:k] - X @ Bt[k:]
    return StateSpaceSystem(T11, B1, Ct[:, :k], np.zeros_like(sys.D))


def _sigma_max(values: np.ndarray) -> np.ndarray:
    if values.shape[1] == 1 or values.shape[2] == 1:
        return np.sqrt(np.sum(np.abs(values) ** 2, axis=(1, 2)))
    return np.linalg.svd(values, compute_uv=False)[:, 0]


def hinf_norm(sys: StateSpaceSystem, rel_tol: float = 1e-6,
              points_per_decade: int = 40) -> float:
    """Estimate ``sup_w sigma_max(G(iw))`` by a log grid plus golden-section.

    The grid spans ``[1e-6, 1e8]`` rad/time, is augmented with ``w = 0`` and
    with the imaginary parts of the poles, and the largest local maxima are
    refined by golden-section search in ``log w``. The feedthrough limit
    ``sigma_max(D)`` is included since the supremum may be attained at
    infinity.
    """
    if sys.n and not is_stable(sys):
        raise UnstableSystem("H-infinity norm requires a stable system")
    dnorm = float(np.linalg.norm(sys.D, 2)) if sys.D.size else 0.0
    if sys.n == 0:
        return dnorm

    decades = 14
    grid = np.logspace(-6, 8, decades * points_per_decade + 1)
    pole_freqs = np.abs(sys.poles.imag)
    pole_freqs = pole_freqs[(pole_freqs > 1e-6) & (pole_freqs < 1e8)]
    grid = np.unique(np.concatenate([grid, pole_freqs]))
    vals = _sigma_max(freqresp(sys, 1j * grid))
    best = max(float(vals.max()), dnorm)
    g0 = float(_sigma_max(freqresp(sys, [0.0]))[0])
    best = max(best, g0)

    def f(logw):
        return float(_sigma_max(freqresp(sys, [1j * 10.0 ** logw]))[0])

    # local maxima of the sampled curve, largest first
    interior = np.flatnonzero((vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:])) + 1
    candidates = sorted(interior, key=lambda i: -vals[i])[:5]
    if vals[0] >= vals[1]:
        candidates.append(0)
    if vals[-1] >= vals[-2]:
        candidates.append(len(vals) - 1)
    lg = np.log10(grid)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    for i in candidates:
        a = lg[max(i - 1, 0)]
        b = lg[min(i + 1, len(lg) - 1)]
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc, fd = f(c), f(d)
        for _ in range(200):
            if fc > fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = f(c)
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = f(d)
            best = max(best, fc, fd)
            if b - a < 1e-10:
                break
    return best


# ---------------------------------------------------------------------------
# JSON model interchange


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_matrix(M: np.ndarray) -> str:
    rows = ["[" + ", ".join(_fmt(v) for v in row) + "]" for row in M]
    return "[" + ", ".join(rows) + "]"


def model_to_json(sys: StateSpaceSystem) -> str:
    """Serialize with 17 significant digits (exact round trip)."""
    parts = [f'"n": {sys.n}', f'"m": {sys.m}', f'"p": {sys.p}']
    parts += [f'"{name}": {_fmt_matrix(getattr(sys, name))}' for name in "ABCD"]
    return "{\n  " + ",\n  ".join(parts) + "\n}\n"


def model_from_json(text: str) -> StateSpaceSystem:
    obj = json.loads(text)
    try:
        n, m, p = int(obj["n"]), int(obj["m"]), int(obj["p"])
        mats = {}
        for name, shape in zip("ABCD", [(n, n), (n, m), (p, n), (p, m)]):
            mats[name] = np.array(obj[name], dtype=float).reshape(shape)
    except (KeyError, ValueError, TypeError) as exc:
        raise InvalidInput(f"malformed model file: {exc}") from exc
    return StateSpaceSystem(**mats)


def save_model(sys: StateSpaceSystem, path) -> None:
    Path(path).write_text(model_to_json(sys))


def load_model(path) -> StateSpaceSystem:
    return model_from_json(Path(path).read_text())
