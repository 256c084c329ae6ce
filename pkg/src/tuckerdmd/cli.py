"""Command-line benchmark front end.

Exit codes: 0 success, 2 usage error, 3 data-format error, 4 numerical
failure. Results go to stdout as single machine-parsable lines (or to the
output file named on the command line); diagnostics go to stderr.
"""

import argparse
import sys
from dataclasses import replace

from . import channel_sim, dmd, evaluation, predictors, tensor_ops, tucker
from .errors import DataFormatError, NumericalError
from .evaluation import ExperimentSpec
from .predictors import ChannelSequence, Method, PredictorConfig

_ALL_METHODS = ", ".join(m.value for m in Method)

_FIGURE_HORIZONS = {1: tuple(range(1, 11)), 2: (5,), 3: (5,)}
_FIGURE_SNRS = {1: (30.0,), 2: (-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0), 3: (None,)}
_FIGURE_PERIODS = {1: (5.0,), 2: (5.0,), 3: (5.0, 10.0, 15.0, 20.0)}
_FIGURE_SWEEP = {1: evaluation.sweep_horizon, 2: evaluation.sweep_snr, 3: evaluation.sweep_period}


def _parse_methods(text):
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise ValueError("method list must not be empty")
    try:
        return tuple(Method(name) for name in names)
    except ValueError:
        raise ValueError(f"unknown method in {text!r}; choose from: {_ALL_METHODS}") from None


def _predictor_config(args, method):
    return PredictorConfig(
        method=method,
        history=args.history,
        ar_order=args.ar_order,
        tucker_threshold=args.threshold,
        dmd_rank=args.dmd_rank,
    )


def cmd_generate(args):
    cfg = channel_sim.load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    seq = channel_sim.generate_sequence(cfg)
    if cfg.snr_db is not None:
        seq = channel_sim.add_noise(seq, cfg.snr_db, cfg.seed + 2 ** 32)
    seq.save(args.out)
    dims = ",".join(str(d) for d in seq.dims)
    print(f"wrote={args.out} snapshots={len(seq)} dims={dims} period_ms={seq.period_ms:g}")
    return 0


def cmd_predict(args):
    seq = ChannelSequence.load(args.sequence)
    method = Method(args.method)
    cfg = _predictor_config(args, method)
    prediction = predictors.predict(seq, cfg, args.tau)
    if method in (Method.T_AR, Method.T_DMD):
        model = predictors.fixed_tucker_model(seq, cfg)
        ranks = model.ranks
        compression = tucker.compression_ratio(model.dims, model.ranks)
    else:
        ranks = seq.dims
        compression = 1.0
    tensor_ops.write_tensor(args.out, prediction)
    if args.truth is not None:
        truth = tensor_ops.read_tensor(args.truth)
        db = evaluation.nmse_db(evaluation.nmse(truth, prediction))
        nmse_text = f"{db:.6f}"
    else:
        nmse_text = "n/a"
    ranks_text = ",".join(str(r) for r in ranks)
    print(f"method={method.value} tau={args.tau} ranks={ranks_text} "
          f"compression={compression:.6g} nmse_db={nmse_text}")
    return 0


def cmd_sweep(args):
    scenario = channel_sim.load_config(args.config)
    if args.paper_dims:
        scenario = replace(scenario, n_rx=4, n_tx=64, n_sc=1632)
    methods = _parse_methods(args.methods)
    spec = ExperimentSpec(
        scenario=scenario,
        predictors=tuple(_predictor_config(args, m) for m in methods),
        horizons=_FIGURE_HORIZONS[args.figure],
        snrs_db=_FIGURE_SNRS[args.figure],
        periods_ms=_FIGURE_PERIODS[args.figure],
        n_trials=args.trials,
        base_seed=args.seed,
    )
    report = _FIGURE_SWEEP[args.figure](spec)
    report.write_csv(args.out)
    print(f"wrote={args.out} rows={len(report.rows)}")
    return 0


def cmd_equivalence(args):
    seq = ChannelSequence.load(args.sequence)
    cfg = PredictorConfig(method=Method.T_DMD, history=args.history,
                          tucker_threshold=args.threshold, dmd_rank=args.dmd_rank)
    res = predictors.verify_operator_equivalence(seq, cfg)
    print(f"opdiff={res.operator_diff:.6e} eigdiff={res.eigenvalue_diff:.6e} "
          f"tucker_residual={res.tucker_residual:.6e}")
    return 0


def _sniff_magic(path):
    with open(path, "rb") as f:
        head = f.read(8)
    return head.split(b" ", 1)[0].decode("ascii", errors="replace")


def cmd_inspect(args):
    magic = _sniff_magic(args.path)
    if magic == "CT1":
        t = tensor_ops.read_tensor(args.path)
        print(f"format=CT1 dims={','.join(str(d) for d in t.shape)}")
    elif magic == "CTS1":
        seq = ChannelSequence.load(args.path)
        dims = ",".join(str(d) for d in seq.dims)
        print(f"format=CTS1 snapshots={len(seq)} dims={dims} period_ms={seq.period_ms:g}")
    elif magic == "TKM1":
        model = tucker.TuckerModel.load(args.path)
        dims = ",".join(str(d) for d in model.dims)
        ranks = ",".join(str(r) for r in model.ranks)
        print(f"format=TKM1 dims={dims} ranks={ranks}")
    elif magic == "DMD1":
        model = dmd.DmdModel.load(args.path)
        print(f"format=DMD1 n={model.modes.shape[0]} rank={model.rank}")
    else:
        raise DataFormatError(f"{args.path}: unrecognised file magic {magic!r}")
    return 0


def _add_predictor_flags(p):
    p.add_argument("--history", type=int, default=10, help="observation window length")
    p.add_argument("--ar-order", dest="ar_order", type=int, default=3, help="AR model order")
    p.add_argument("--threshold", type=float, default=1e-3,
                   help="relative Tucker truncation threshold")
    p.add_argument("--dmd-rank", dest="dmd_rank", type=int, default=None,
                   help="fixed DMD rank (default: adaptive)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tuckerdmd",
        description="Tucker-compressed DMD channel prediction benchmark",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic channel sequence (CTS1)")
    p.add_argument("config", help="scenario key=value file")
    p.add_argument("out", help="output CTS1 path")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("predict", help="predict tau steps past a sequence end")
    p.add_argument("sequence", help="input CTS1 path")
    p.add_argument("out", help="output CT1 path")
    p.add_argument("--method", choices=[m.value for m in Method], default=Method.T_DMD.value)
    p.add_argument("--tau", type=int, default=1, help="prediction horizon (>= 1)")
    p.add_argument("--truth", default=None, help="CT1 file to score the prediction against")
    _add_predictor_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sweep", help="Monte-Carlo NMSE sweep to CSV")
    p.add_argument("config", help="scenario key=value file")
    p.add_argument("out", help="output CSV path")
    p.add_argument("--figure", type=int, choices=(1, 2, 3), required=True,
                   help="1: horizon sweep, 2: SNR sweep, 3: period sweep")
    p.add_argument("--methods", default=_ALL_METHODS.replace(" ", ""),
                   help="comma-separated method list")
    p.add_argument("--trials", type=int, default=100, help="Monte-Carlo trials per cell")
    p.add_argument("--seed", type=int, default=0, help="base seed; trial i uses seed+i")
    p.add_argument("--paper-dims", action="store_true",
                   help="full-size 4x64x1632 tensors (slow)")
    _add_predictor_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("equivalence", help="compare full-space and core-space DMD operators")
    p.add_argument("sequence", help="input CTS1 path")
    _add_predictor_flags(p)
    p.set_defaults(func=cmd_equivalence)

    p = sub.add_parser("inspect", help="print the header summary of a data file")
    p.add_argument("path")
    p.set_defaults(func=cmd_inspect)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except DataFormatError as exc:
        print(f"error: data-format: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: data-format: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return 4
    except (ValueError, KeyError) as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
