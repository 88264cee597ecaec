"""Balanced truncation from frequency-response data.

Intrusive square-root balanced truncation (Lyapunov, stochastic,
positive-real and bounded-real variants) and its data-driven counterpart
built from Loewner matrices of transfer-function samples.
"""

__version__ = "0.1.0"

from .errors import InvalidInput, NumericalFailure, QuadBTError
from .lti import StateSpaceSystem, eval_tf, freqresp, hinf_norm, load_model, save_model
from .spectral import VARIANTS, build_factors, make_oracles
from .quadrature import FrequencyDataset, QuadratureRule, interleaved_rules, logtrap_rule, sample_dataset
from .genquadbt import LoewnerQuadruple, ReducedModel, assemble_loewner, genquadbt_pipeline, realify, reduce
from .intrusive import GramianPair, gramian_pair, sqrt_bt
from .models import ModelSpec, generate, normalize_hinf

__all__ = [
    "__version__",
    "QuadBTError",
    "InvalidInput",
    "NumericalFailure",
    "StateSpaceSystem",
    "eval_tf",
    "freqresp",
    "hinf_norm",
    "load_model",
    "save_model",
    "VARIANTS",
    "build_factors",
    "make_oracles",
    "QuadratureRule",
    "FrequencyDataset",
    "logtrap_rule",
    "interleaved_rules",
    "sample_dataset",
    "LoewnerQuadruple",
    "ReducedModel",
    "assemble_loewner",
    "realify",
    "reduce",
    "genquadbt_pipeline",
    "GramianPair",
    "gramian_pair",
    "sqrt_bt",
    "ModelSpec",
    "generate",
    "normalize_hinf",
]
