"""Command-line front end: ``quadbt {gen,sample,reduce,hinf,run}``.

Exit status: 0 on success, 1 for invalid input, 2 for numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import ExperimentConfig, run
from .errors import InvalidInput, NumericalFailure
from .genquadbt import assemble_loewner, realify, reduce
from .intrusive import sqrt_bt
from .lti import hinf_norm, load_model, save_model
from .models import KINDS, ModelSpec, generate, normalize_hinf
from .quadrature import FrequencyDataset, interleaved_rules, sample_dataset
from .spectral import VARIANTS, make_oracles

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; that code is reserved here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _param(text):
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key, float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"value of {key} must be a number") from None


def _add_band(p):
    p.add_argument("--omega-min", type=float, default=1e-1)
    p.add_argument("--omega-max", type=float, default=1e4)
    p.add_argument("-N", type=int, default=80, help="nodes per rule (even)")


def _cmd_gen(args):
    params = dict(args.param or [])
    for key in ("m", "p"):
        if key in params:
            params[key] = int(params[key])
    model = generate(ModelSpec(args.kind, args.n, args.seed, params))
    if args.normalize is not None:
        model = normalize_hinf(model, args.normalize)
    save_model(model, args.output)


def _cmd_sample(args):
    model = load_model(args.model)
    left, right = interleaved_rules(args.omega_min, args.omega_max, args.N)
    data = sample_dataset(make_oracles(model, args.variant), left, right,
                          feedthrough=model.D)
    data.save(args.output)


def _cmd_reduce(args):
    if (args.dataset is None) == (args.model is None):
        raise InvalidInput("give exactly one of --dataset or --model")
    if args.dataset is not None:
        if args.intrusive:
            raise InvalidInput("--intrusive needs --model")
        data = FrequencyDataset.load(args.dataset)
        q = assemble_loewner(data)
        if data.left.conj_closed and data.right.conj_closed:
            q = realify(q, data)
        rom = reduce(q, args.r, data.feedthrough, variant=data.variant,
                     provenance={"method": "quadrature", "N_left": len(data.left),
                                 "N_right": len(data.right)})
    else:
        model = load_model(args.model)
        if args.intrusive:
            rom = sqrt_bt(model, args.variant, args.r)
        else:
            left, right = interleaved_rules(args.omega_min, args.omega_max, args.N)
            data = sample_dataset(make_oracles(model, args.variant), left, right)
            q = realify(assemble_loewner(data), data)
            rom = reduce(q, args.r, model.D, variant=args.variant,
                         provenance={"method": "quadrature", "N_left": args.N,
                                     "N_right": args.N})
    save_model(rom.system, args.output)
    sidecar = args.sv_output or args.output.rsplit(".json", 1)[0] + ".sv.json"
    with open(sidecar, "w") as fh:
        json.dump({"variant": rom.variant, "r": rom.r, "provenance": rom.provenance,
                   "singular_values": [float(x) for x in rom.singular_values]}, fh, indent=2)
        fh.write("\n")


def _cmd_hinf(args):
    print(format(hinf_norm(load_model(args.model), args.rel_tol), ".17g"))


def _cmd_run(args):
    cfg = ExperimentConfig.load(args.config)
    if args.output_dir:
        cfg.output_dir = args.output_dir
    for path in run(cfg, workers=args.workers).values():
        print(path)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quadbt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a test model")
    p.add_argument("--kind", choices=KINDS, default="passive_ladder")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--param", type=_param, action="append", metavar="KEY=VALUE")
    p.add_argument("--normalize", type=float, metavar="GAMMA",
                   help="rescale so the H-infinity norm equals GAMMA")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("sample", help="sample a model's oracles into a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--variant", choices=VARIANTS, default="lyapunov")
    _add_band(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("reduce", help="reduce from a dataset or a model")
    p.add_argument("--dataset")
    p.add_argument("--model")
    p.add_argument("--variant", choices=VARIANTS, default="lyapunov")
    p.add_argument("-r", type=int, required=True)
    p.add_argument("--intrusive", action="store_true",
                   help="square-root balancing from the Gramians instead of samples")
    _add_band(p)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--sv-output", help="singular value sidecar (default: <output>.sv.json)")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("hinf", help="print the H-infinity norm of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_hinf)

    p = sub.add_parser("run", help="run an experiment sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (InvalidInput, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
