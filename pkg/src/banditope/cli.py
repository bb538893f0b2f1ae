"""Command-line interface.

Subcommands: ``eval`` (policy-evaluation protocol), ``learn``
(policy-optimization protocol), ``shift`` (covariate-shift protocol) and
``oracle-check`` (exact bias/variance agreement suite on an instance
file).  All emit CSV to stdout or ``--out``; with ``--out`` a run
manifest is written next to the CSV, and ``--figures DIR`` additionally
renders the report as a PNG.  Exit code 0 on success, 1 on a failed
oracle check, 2 on any error (with a one-line diagnostic on stderr).
"""

import argparse
import io
import sys
from pathlib import Path

from . import protocols
from .datasets import load_csv_dataset
from .diagnostics import theoretical_bias, theoretical_variance
from .dlm import DlmConfig
from .errors import InputError
from .oracle import (
    enumerate_expected_value,
    enumerate_variance,
    load_instance_file,
)
from .shift import (
    ShiftConfig,
    export_population_csv,
    load_population_csv,
    synth_population,
)
from .seeding import named_rng


def _write_output(rows, args, kind: str, dataset: str, config, audit_rows=None) -> None:
    buffer = io.StringIO()
    protocols.write_csv(rows, buffer)
    text = buffer.getvalue()
    if args.out:
        out = Path(args.out)
        out.write_text(text, encoding="utf-8")
        manifest = out.with_suffix(out.suffix + ".manifest.txt")
        manifest.write_text(protocols.manifest_text(kind, dataset, config), encoding="utf-8")
    else:
        sys.stdout.write(text)
    if audit_rows is not None and args.audit:
        with open(args.audit, "w", encoding="utf-8") as fh:
            protocols.write_csv(audit_rows, fh)


def _dataset_name(path: str) -> str:
    return Path(path).stem


def cmd_eval(args) -> int:
    examples = load_csv_dataset(args.dataset, add_bias=not args.no_bias)
    config = protocols.EvalProtocolConfig(
        replicates=args.replicates,
        split_fraction=args.split,
        ridge_lambda=getattr(args, "lambda"),
        seed=args.seed,
        dlm=DlmConfig(restarts=args.restarts),
        propensity_floor=args.min_propensity,
    )
    name = _dataset_name(args.dataset)
    report = protocols.run_eval_protocol(examples, config, name)
    _write_output(
        protocols.eval_report_rows(report), args, "eval", name, config,
        audit_rows=protocols.eval_audit_rows(report),
    )
    if args.figures:
        from .plots import save_eval_figure

        save_eval_figure(report, args.figures)
    return 0


def cmd_learn(args) -> int:
    examples = load_csv_dataset(args.dataset, add_bias=not args.no_bias)
    learners = ("dlm", "ft") if args.learner == "both" else (args.learner,)
    imputations = ("ips", "dr") if args.impute == "both" else (args.impute,)
    config = protocols.OptProtocolConfig(
        runs=args.runs,
        train_fraction=args.train_fraction,
        ridge_lambda=getattr(args, "lambda"),
        imputations=imputations,
        learners=learners,
        seed=args.seed,
        dlm=DlmConfig(restarts=args.restarts),
    )
    name = _dataset_name(args.dataset)
    report = protocols.run_opt_protocol(examples, config, name)
    _write_output(
        protocols.opt_report_rows(report), args, "learn", name, config,
        audit_rows=protocols.opt_audit_rows(report),
    )
    if args.figures:
        from .plots import save_opt_figure

        save_opt_figure(report, args.figures)
    return 0


def cmd_shift(args) -> int:
    fractions = tuple(float(t) for t in args.fractions.split(","))
    config = ShiftConfig(
        population_size=args.units,
        fractions=fractions,
        replicates=args.replicates,
        seed=args.seed,
        ridge_lambda=getattr(args, "lambda"),
    )
    population = None
    name = "synthetic"
    if args.population:
        population = load_population_csv(args.population)
        name = _dataset_name(args.population)
    elif args.export_population:
        population = synth_population(config, named_rng(config.seed, "shift-pop"))
        export_population_csv(population, args.export_population)
    report = protocols.run_shift_protocol(config, population, name)
    _write_output(protocols.shift_report_rows(report), args, "shift", name, config)
    if args.figures:
        from .plots import save_shift_figure

        save_shift_figure(report, args.figures)
    return 0


def cmd_oracle_check(args) -> int:
    instance, policy, model = load_instance_file(args.instance)
    truth = instance.policy_value(policy)
    rows = []
    worst = 0.0
    for kind in ("dm", "ips", "dr"):
        expected = enumerate_expected_value(instance, policy, model, kind)
        bias = theoretical_bias(instance, policy, model, kind)
        gap_bias = abs(expected - truth - bias)
        var = enumerate_variance(instance, policy, model, kind)
        decomp = theoretical_variance(instance, policy, model, 1, kind)
        gap_var = abs(var - decomp.total)
        worst = max(worst, gap_bias, gap_var)
        name = _dataset_name(args.instance)
        rows.append((name, kind, "enumerated_mean", f"{expected:.12g}"))
        rows.append((name, kind, "closed_form_bias", f"{bias:.12g}"))
        rows.append((name, kind, "bias_agreement_error", f"{gap_bias:.3g}"))
        rows.append((name, kind, "enumerated_variance", f"{var:.12g}"))
        rows.append((name, kind, "closed_form_variance", f"{decomp.total:.12g}"))
        rows.append((name, kind, "variance_agreement_error", f"{gap_var:.3g}"))
    passed = worst <= args.tolerance
    rows.append((_dataset_name(args.instance), "all", "pass", "1" if passed else "0"))
    buffer = io.StringIO()
    protocols.write_csv(rows, buffer, header=("instance", "kind", "metric", "value"))
    if args.out:
        Path(args.out).write_text(buffer.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buffer.getvalue())
    return 0 if passed else 1


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--lambda", type=float, default=1.0, dest="lambda",
                        help="ridge strength for payoff models")
    parser.add_argument("--out", help="write CSV here instead of stdout "
                                      "(also writes a .manifest.txt)")
    parser.add_argument("--figures", help="directory for a rendered PNG of the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="banditope",
        description="Offline evaluation and optimization of contextual-bandit policies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="policy-evaluation protocol on a CSV dataset")
    p_eval.add_argument("dataset", help="UCI-style CSV (1-based label in last column)")
    p_eval.add_argument("--replicates", type=int, default=500)
    p_eval.add_argument("--split", type=float, default=0.5, help="training fraction")
    p_eval.add_argument("--restarts", type=int, default=20, help="policy-training restarts")
    p_eval.add_argument("--min-propensity", type=float, default=None,
                        help="optional propensity floor (off by default)")
    p_eval.add_argument("--no-bias", action="store_true",
                        help="do not append a constant-1 feature on load")
    p_eval.add_argument("--audit", help="write per-replicate estimates to this CSV")
    _add_common(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_learn = sub.add_parser("learn", help="policy-optimization protocol on a CSV dataset")
    p_learn.add_argument("dataset")
    p_learn.add_argument("--runs", type=int, default=30)
    p_learn.add_argument("--train-fraction", type=float, default=0.7)
    p_learn.add_argument("--learner", choices=("dlm", "ft", "both"), default="both")
    p_learn.add_argument("--impute", choices=("ips", "dr", "both"), default="both")
    p_learn.add_argument("--restarts", type=int, default=20)
    p_learn.add_argument("--no-bias", action="store_true")
    p_learn.add_argument("--audit", help="write per-run test errors to this CSV")
    _add_common(p_learn)
    p_learn.set_defaults(func=cmd_learn)

    p_shift = sub.add_parser("shift", help="covariate-shift estimation protocol")
    p_shift.add_argument("--population", help="population CSV to reuse "
                                              "(default: generate synthetically)")
    p_shift.add_argument("--fractions", default="0.0001,0.0005,0.001,0.005,0.01,0.05")
    p_shift.add_argument("--replicates", type=int, default=100)
    p_shift.add_argument("--units", type=int, default=100_000,
                         help="population size when generating")
    p_shift.add_argument("--export-population",
                         help="write the generated population to this CSV")
    p_shift.set_defaults(audit=None)
    _add_common(p_shift)
    p_shift.set_defaults(func=cmd_shift)

    p_oracle = sub.add_parser(
        "oracle-check",
        help="exact agreement suite: enumerated vs closed-form bias/variance",
    )
    p_oracle.add_argument("instance", help="instance text file")
    p_oracle.add_argument("--tolerance", type=float, default=1e-10)
    p_oracle.add_argument("--out")
    p_oracle.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
