"""Seeded test systems with structural guarantees.

``passive_ladder`` is an RLC chain written in port-Hamiltonian form:
energy states alternate inductor fluxes and capacitor charges, the port is
driven by a voltage and returns a current, and a shunt conductance
``1/Rbar`` at the port gives a nonzero feedthrough.  Every section has a
series resistance ``R`` with its inductor and a leakage resistance ``Rbar``
across its capacitor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpec
from .lti import StateSpaceSystem, hinf_norm

__all__ = ["ModelSpec", "generate", "normalize_hinf", "KINDS"]

KINDS = ("passive_ladder", "random_passive", "random_stable")

_LADDER_DEFAULTS = {"R": 0.1, "L": 0.1, "C": 0.1, "Rbar": 1.0}


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    n: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    def validate(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown model kind {self.kind!r}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidSpec(f"order must be a positive integer, got {self.n}")
        if self.kind == "passive_ladder":
            unknown = set(self.params) - set(_LADDER_DEFAULTS)
            if unknown:
                raise InvalidSpec(f"unknown ladder parameters {sorted(unknown)}")
            for key, val in self.params.items():
                if not float(val) > 0:
                    raise InvalidSpec(f"ladder parameter {key} must be positive")
        for key in ("m", "p"):
            if key in self.params and int(self.params[key]) < 1:
                raise InvalidSpec(f"{key} must be a positive integer")


def _ladder(n, R, L, C, Rbar):
    # states: 0 flux of L1, 1 charge of C1, 2 flux of L2, ...
    Jm = np.zeros((n, n))
    for k in range(n - 1):
        # inductor k (even) feeds capacitor k+1; capacitor feeds next inductor
        sign = 1.0 if k % 2 == 0 else -1.0
        Jm[k + 1, k] = sign
        Jm[k, k + 1] = -sign
    diss = np.array([R if k % 2 == 0 else 1.0 / Rbar for k in range(n)])
    energy = np.array([1.0 / L if k % 2 == 0 else 1.0 / C for k in range(n)])
    A = (Jm - np.diag(diss)) * energy
    B = np.zeros((n, 1))
    B[0, 0] = 1.0
    Cm = B.T * energy
    return A, B, Cm, np.array([[1.0 / Rbar]])


def _random_passive(n, rng, m):
    X = rng.standard_normal((n, n))
    Jm = 0.5 * (X - X.T)
    Wr = rng.standard_normal((n, n)) / np.sqrt(n)
    Rh = Wr @ Wr.T + 0.1 * np.eye(n)
    Wq = rng.standard_normal((n, n)) / np.sqrt(n)
    Qh = Wq @ Wq.T + np.eye(n)
    B = rng.standard_normal((n, m))
    Sd = rng.standard_normal((m, m))
    Kd = rng.standard_normal((m, m))
    D = 0.5 * (Sd @ Sd.T) / m + 0.5 * np.eye(m) + 0.25 * (Kd - Kd.T)
    return (Jm - Rh) @ Qh, B, B.T @ Qh, D


def _random_stable(n, rng, m, p):
    X = rng.standard_normal((n, n)) / np.sqrt(n)
    shift = np.max(np.linalg.eigvals(X).real) + 0.5 + rng.uniform()
    A = X - shift * np.eye(n)
    return (A, rng.standard_normal((n, m)), rng.standard_normal((p, n)),
            0.5 * rng.standard_normal((p, m)))


def generate(spec: ModelSpec) -> StateSpaceSystem:
    """Build the system described by ``spec``; deterministic per seed."""
    spec.validate()
    n = int(spec.n)
    if spec.kind == "passive_ladder":
        prm = {**_LADDER_DEFAULTS, **{k: float(v) for k, v in spec.params.items()}}
        mats = _ladder(n, prm["R"], prm["L"], prm["C"], prm["Rbar"])
    else:
        rng = np.random.default_rng(spec.seed)
        m = int(spec.params.get("m", 2))
        if spec.kind == "random_passive":
            mats = _random_passive(n, rng, m)
        else:
            mats = _random_stable(n, rng, m, int(spec.params.get("p", m)))
    return StateSpaceSystem(*mats)


def normalize_hinf(sys: StateSpaceSystem, gamma_target: float = 0.5,
                   rel_tol: float = 1e-8) -> StateSpaceSystem:
    """Scale ``C`` and ``D`` so that the H-infinity norm equals ``gamma_target``."""
    if not gamma_target > 0:
        raise InvalidSpec("gamma_target must be positive")
    scale = gamma_target / hinf_norm(sys, rel_tol)
    return StateSpaceSystem(sys.A, sys.B, scale * sys.C, scale * sys.D)
