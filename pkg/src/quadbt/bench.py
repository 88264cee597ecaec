"""Batch experiments: intrusive vs quadrature reductions across variants, N and r.

Outputs per variant ``singular_values_<variant>.csv`` and
``errors_<variant>.csv`` plus a ``manifest.json``.  Failed cells are written
as ``nan`` and explained in the ``reason`` column; the sweep keeps going.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import InvalidInput, InvalidSpec, QuadBTError
from .genquadbt import assemble_loewner, realify, reduce
from .intrusive import gramian_pair, sqrt_bt
from .lti import StateSpaceSystem, difference, hinf_norm, load_model
from .models import ModelSpec, generate, normalize_hinf
from .quadrature import interleaved_rules, sample_dataset
from .spectral import VARIANTS, build_factors, make_oracles

__all__ = ["ExperimentConfig", "run", "compare_models", "fmt_float"]


def fmt_float(x) -> str:
    x = float(x)
    return "nan" if np.isnan(x) else format(x, ".17g")


@dataclass
class ExperimentConfig:
    model: dict | str = field(default_factory=lambda: {"kind": "passive_ladder", "n": 100})
    variants: list = field(default_factory=lambda: list(VARIANTS))
    omega_min: float = 1e-1
    omega_max: float = 1e4
    N_list: list = field(default_factory=lambda: [40, 80, 160])
    orders: list = field(default_factory=lambda: list(range(2, 21, 2)))
    normalization: float | None = 0.5
    output_dir: str = "results"
    hinf_rel_tol: float = 1e-6

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        quad = d.pop("quadrature", None)
        if quad is not None:
            d.update({k: quad[k] for k in ("omega_min", "omega_max", "N_list") if k in quad})
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidSpec(f"unknown config keys {sorted(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInput(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)

    def validate(self):
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad or not self.variants:
            raise InvalidSpec(f"variants must be a nonempty subset of {VARIANTS}")
        if not 0 < self.omega_min < self.omega_max:
            raise InvalidSpec("need 0 < omega_min < omega_max")
        if not self.N_list or any(int(N) != N or N < 4 or N % 2 for N in self.N_list):
            raise InvalidSpec("N_list entries must be even integers >= 4")
        if not self.orders or any(int(r) != r or r < 1 for r in self.orders):
            raise InvalidSpec("orders must be positive integers")
        if list(self.orders) != sorted(set(self.orders)):
            raise InvalidSpec("orders must be strictly ascending")
        if self.normalization is not None and not 0 < self.normalization <= 1:
            raise InvalidSpec("normalization must lie in (0, 1]")
        if not self.hinf_rel_tol > 0:
            raise InvalidSpec("hinf_rel_tol must be positive")

    def model_spec(self) -> ModelSpec | None:
        if isinstance(self.model, str):
            return None
        return ModelSpec(self.model["kind"], self.model["n"], self.model.get("seed", 0),
                         dict(self.model.get("params", {})))

    def build_model(self) -> StateSpaceSystem:
        if isinstance(self.model, str):
            return load_model(self.model)
        return generate(self.model_spec())


def compare_models(sys: StateSpaceSystem, rom: StateSpaceSystem,
                   rel_tol: float = 1e-6) -> float:
    """Relative H-infinity error ``||G - G_r|| / ||G||``."""
    return hinf_norm(difference(sys, rom), rel_tol) / hinf_norm(sys, rel_tol)


def _reason(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}".replace("\n", " ")


class _Cell:
    """Outcome of one (column, r) reduction: value or failure reason."""

    __slots__ = ("value", "reason")

    def __init__(self, value=np.nan, reason=""):
        self.value, self.reason = value, reason


def _variant_tables(sys, variant, cfg, pool):
    cols = ["err_intrusive"] + [f"err_quad_N{N}" for N in cfg.N_list]
    sv_cols = ["sigma_true"] + [f"sigma_quad_N{N}" for N in cfg.N_list]
    svals = {c: np.array([]) for c in sv_cols}
    setup_error = {}
    info = {"status": "ok"}

    try:
        if variant == "brbt" and cfg.normalization is not None:
            sys = normalize_hinf(sys, cfg.normalization, cfg.hinf_rel_tol)
        norm = hinf_norm(sys, cfg.hinf_rel_tol)
        info["hinf_norm"] = norm
        factors = build_factors(sys, variant)
        pair = gramian_pair(sys, variant, factors)
        svals["sigma_true"] = pair.singular_values
    except QuadBTError as exc:
        reason = _reason(exc)
        info["status"] = reason
        err_rows = [(r, {c: _Cell(reason=reason) for c in cols}) for r in cfg.orders]
        return svals, err_rows, info

    # one reducer per column; each maps r -> ReducedModel
    reducers = {"err_intrusive": lambda r: sqrt_bt(sys, variant, r, pair)}
    oracles = make_oracles(sys, variant, factors)
    for N in cfg.N_list:
        col = f"err_quad_N{N}"
        try:
            left, right = interleaved_rules(cfg.omega_min, cfg.omega_max, N)
            data = sample_dataset(oracles, left, right, feedthrough=sys.D)
            q = realify(assemble_loewner(data), data)
            svals[f"sigma_quad_N{N}"] = np.linalg.svd(q.L, compute_uv=False)
            prov = {"method": "quadrature", "N_left": N, "N_right": N}
            reducers[col] = (lambda q, prov: lambda r: reduce(
                q, r, sys.D, variant=variant, provenance=prov))(q, prov)
        except QuadBTError as exc:
            setup_error[col] = _reason(exc)

    def cell(job):
        col, r = job
        if col in setup_error:
            return _Cell(reason=setup_error[col])
        try:
            rom = reducers[col](r)
            return _Cell(hinf_norm(difference(sys, rom.system), cfg.hinf_rel_tol) / norm)
        except QuadBTError as exc:
            return _Cell(reason=_reason(exc))

    jobs = [(c, r) for r in cfg.orders for c in cols]
    results = list(pool.map(cell, jobs))  # map preserves submission order
    err_rows = []
    for i, r in enumerate(cfg.orders):
        err_rows.append((r, dict(zip(cols, results[i * len(cols):(i + 1) * len(cols)]))))
    return svals, err_rows, info


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def run(config: ExperimentConfig, workers: int = 1) -> dict:
    """Execute the sweep and write the CSV tables; returns the written paths."""
    config.validate()
    os.makedirs(config.output_dir, exist_ok=True)
    sys = config.build_model()
    written = {}
    manifest = {
        "tool": "quadbt",
        "version": __version__,
        "config": asdict(config),
        "seeds": {"model": None if isinstance(config.model, str) else config.model.get("seed", 0)},
        "model": {"n": sys.n, "m": sys.m, "p": sys.p},
        "variants": {},
    }
    with ThreadPoolExecutor(max_workers=max(1, int(workers))) as pool:
        for variant in config.variants:
            svals, err_rows, info = _variant_tables(sys, variant, config, pool)
            manifest["variants"][variant] = info

            sv_cols = list(svals)
            length = max(len(v) for v in svals.values())
            rows = []
            for i in range(length):
                vals = [svals[c][i] if i < len(svals[c]) else np.nan for c in sv_cols]
                rows.append([i + 1] + [fmt_float(x) for x in vals])
            path = os.path.join(config.output_dir, f"singular_values_{variant}.csv")
            _write_csv(path, ["index"] + sv_cols, rows)
            written[f"singular_values_{variant}"] = path

            cols = list(err_rows[0][1]) if err_rows else []
            rows = []
            for r, cells in err_rows:
                reasons = [f"{c}: {cells[c].reason}" for c in cols if cells[c].reason]
                rows.append([r] + [fmt_float(cells[c].value) for c in cols]
                            + ["; ".join(reasons)])
            path = os.path.join(config.output_dir, f"errors_{variant}.csv")
            _write_csv(path, ["r"] + cols + ["reason"], rows)
            written[f"errors_{variant}"] = path

    path = os.path.join(config.output_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    written["manifest"] = path
    return written
