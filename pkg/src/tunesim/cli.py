"""Command-line front end.

Verbs: generate (write a synthetic benchmark), run (execute an experiment),
report (re-aggregate a per-run cells file), crossings (curve-order
diagnostic). Exit codes: 0 success, 1 usage error, 2 data error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import sys

from .benchgen import CurveModel, crossing_report, generate, load, save
from .core import DataError, InternalError, ResourceSpec, UsageError
from .experiment import (
    ExperimentSpec,
    MethodSpec,
    aggregate,
    emit_report,
    read_cells,
    run_experiment,
)
from .ranking import RankingCriterion


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; route through UsageError
    instead so the documented exit-code contract holds."""

    def error(self, message):
        raise UsageError(message)


def _parse_seeds(text: str) -> tuple[int, ...]:
    """Comma-separated integers; "a..b" expands to the inclusive range."""
    seeds: list[int] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            if ".." in token:
                lo, hi = token.split("..", 1)
                start, stop = int(lo), int(hi)
                if stop < start:
                    raise UsageError(f"empty seed range {token!r}")
                seeds.extend(range(start, stop + 1))
            else:
                seeds.append(int(token))
        except ValueError as exc:
            raise UsageError(f"bad seed list {text!r}: {exc}") from exc
    if not seeds:
        raise UsageError(f"no seeds in {text!r}")
    return tuple(seeds)


def _build_parser() -> _Parser:
    parser = _Parser(prog="tunesim", description=__doc__)
    verbs = parser.add_subparsers(dest="verb", required=True)

    gen = verbs.add_parser("generate", help="write a synthetic benchmark file")
    gen.add_argument("--out", required=True, help="output benchmark path")
    gen.add_argument("--num-configs", type=int, required=True)
    gen.add_argument("--units", type=int, required=True, help="curve length U")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--family", choices=("power_law", "exponential_saturation"))
    gen.add_argument("--crossing-horizon", type=int)
    gen.add_argument("--noise-std", type=float)
    gen.add_argument("--hard", action="store_true", default=None,
                     help="accept noise levels that may reorder curves late")
    gen.add_argument("--top-metric", type=float)
    gen.add_argument("--head-count", type=int)
    gen.add_argument("--head-gap", type=float)
    gen.add_argument("--head-jitter", type=float)
    gen.add_argument("--gap-scale", type=float)
    gen.add_argument("--tail-theta", type=float)
    gen.add_argument("--decay", type=float)
    gen.add_argument("--early-scale", type=float)
    gen.add_argument("--damp-lo", type=float)
    gen.add_argument("--damp-hi", type=float)
    gen.add_argument("--cost-mean", type=float)
    gen.add_argument("--cost-spread", type=float)

    run = verbs.add_parser("run", help="run an experiment grid")
    run.add_argument("--config", help="INI experiment file; flags override it")
    run.add_argument("--benchmark", help="benchmark path; {seed} expands per benchmark seed")
    run.add_argument("--method", action="append", dest="methods", metavar="TOKEN",
                     help="mode[:criterion], e.g. asha or pasha:soft:0.025; repeatable")
    run.add_argument("--ranking", help="criterion for pasha methods given without one")
    run.add_argument("--eta", type=int, help="reduction factor (default 3)")
    run.add_argument("--min-resource", type=int, help="rung 0 resource (default 1)")
    run.add_argument("--max-resource", type=int, help="safety-net resource cap")
    run.add_argument("--num-configs", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--seeds", type=_parse_seeds,
                     help="scheduler seeds, e.g. 0,1,2 or 0..4")
    run.add_argument("--bench-seeds", type=_parse_seeds,
                     help="benchmark seeds (same syntax)")
    run.add_argument("--random-draws", type=int,
                     help="candidate pool size for random methods")
    run.add_argument("--pair-below-cap", action="store_true", default=None,
                     help="compare the two rungs beneath the cap instead")
    run.add_argument("--out", help="write the report here instead of stdout")
    run.add_argument("--format", choices=("markdown", "csv"))
    run.add_argument("--cells", help="also write per-run results to this csv")
    run.add_argument("--traces", help="also write per-run event traces here")

    rep = verbs.add_parser("report", help="re-aggregate a per-run cells file")
    rep.add_argument("--cells", required=True)
    rep.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    rep.add_argument("--out")

    cross = verbs.add_parser("crossings", help="pairwise curve-order diagnostic")
    cross.add_argument("--benchmark", required=True)
    cross.add_argument("--out")
    return parser


def _generate_command(args) -> int:
    fields = {
        "family": args.family,
        "crossing_horizon": args.crossing_horizon,
        "noise_std": args.noise_std,
        "hard": args.hard,
        "top_metric": args.top_metric,
        "head_count": args.head_count,
        "head_gap": args.head_gap,
        "head_jitter": args.head_jitter,
        "gap_scale": args.gap_scale,
        "tail_theta": args.tail_theta,
        "decay": args.decay,
        "early_scale": args.early_scale,
        "damp_lo": args.damp_lo,
        "damp_hi": args.damp_hi,
        "cost_mean": args.cost_mean,
        "cost_spread": args.cost_spread,
    }
    model = CurveModel(**{k: v for k, v in fields.items() if v is not None})
    table = generate(args.num_configs, args.units, model, args.seed)
    save(table, args.out)
    print(f"wrote {args.out}: {args.num_configs} configs x {args.units} units")
    return 0


def _read_experiment_file(path: str) -> tuple[dict[str, str], list[MethodSpec]]:
    parser = configparser.ConfigParser()
    try:
        found = parser.read(path)
    except configparser.Error as exc:
        raise DataError(f"config file {path}: {exc}") from exc
    if not found:
        raise DataError(f"config file {path!r} not found")
    settings: dict[str, str] = {}
    methods: list[MethodSpec] = []
    for section in parser.sections():
        if section == "experiment":
            settings = dict(parser[section])
        elif section.startswith("method:"):
            token = section[len("method:"):].strip()
            options = parser[section]
            for key in options:
                if key not in ("ranking", "pair-below-cap", "random-draws"):
                    raise DataError(f"config file [{section}]: unknown key {key!r}")
            try:
                below = options.getboolean("pair-below-cap", fallback=False)
                draws = options.getint("random-draws", fallback=None)
            except ValueError as exc:
                raise DataError(f"config file [{section}]: {exc}") from exc
            spec = MethodSpec.parse(token, pair_below_cap=below, random_draws=draws)
            ranking = options.get("ranking", fallback=None)
            if ranking is not None:
                if spec.mode != "pasha":
                    raise DataError(
                        f"config file [{section}]: {spec.mode!r} takes no ranking"
                    )
                if spec.criterion is None:
                    spec = dataclasses.replace(
                        spec, criterion=RankingCriterion.parse(ranking)
                    )
            methods.append(spec)
        else:
            raise DataError(f"config file: unknown section [{section}]")
    return settings, methods


def _run_command(args) -> int:
    settings: dict[str, str] = {}
    file_methods: list[MethodSpec] = []
    if args.config:
        settings, file_methods = _read_experiment_file(args.config)

    def pick(cli_value, key, cast, default=None):
        # CLI flag beats file value beats default
        if cli_value is not None:
            return cli_value
        if key in settings:
            try:
                return cast(settings[key])
            except (ValueError, UsageError) as exc:
                raise DataError(f"config file {key}: {exc}") from exc
        return default

    benchmark = pick(args.benchmark, "benchmark", str)
    if benchmark is None:
        raise UsageError("--benchmark is required (flag or config file)")
    max_resource = pick(args.max_resource, "max-resource", int)
    if max_resource is None:
        raise UsageError("--max-resource is required (flag or config file)")
    num_configs = pick(args.num_configs, "num-configs", int)
    if num_configs is None:
        raise UsageError("--num-configs is required (flag or config file)")

    if args.methods:
        methods = [
            MethodSpec.parse(
                token,
                pair_below_cap=bool(args.pair_below_cap),
                random_draws=args.random_draws,
            )
            for token in args.methods
        ]
    elif file_methods:
        methods = file_methods
    else:
        raise UsageError("give at least one --method or a config file with methods")
    ranking = pick(args.ranking, "ranking", str)
    if ranking is not None:
        criterion = RankingCriterion.parse(ranking)
        methods = [
            dataclasses.replace(m, criterion=criterion)
            if m.mode == "pasha" and m.criterion is None
            else m
            for m in methods
        ]

    spec = ExperimentSpec(
        methods=tuple(methods),
        resources=ResourceSpec(
            min_resource=pick(args.min_resource, "min-resource", int, 1),
            reduction_factor=pick(args.eta, "eta", int, 3),
            max_resource=max_resource,
        ),
        num_configs=num_configs,
        benchmark=benchmark,
        workers=pick(args.workers, "workers", int, 1),
        scheduler_seeds=pick(args.seeds, "seeds", _parse_seeds, (0,)),
        benchmark_seeds=pick(args.bench_seeds, "bench-seeds", _parse_seeds, (0,)),
        out=pick(args.out, "out", str),
        format=pick(args.format, "format", str, "markdown"),
    )
    report = run_experiment(
        spec,
        traces_dir=pick(args.traces, "traces", str),
        cells_out=pick(args.cells, "cells", str),
    )
    text = emit_report(report, spec.format)
    if spec.out:
        with open(spec.out, "w", encoding="utf-8") as handle:
            handle.write(text)
        print(f"wrote {spec.out}")
    else:
        print(text, end="")
    return 0


def _report_command(args) -> int:
    report = aggregate(read_cells(args.cells))
    text = emit_report(report, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _crossings_command(args) -> int:
    table = load(args.benchmark)
    lines = ["config_a,config_b,last_crossing"]
    for (a, b), resource in crossing_report(table):
        lines.append(f"{a},{b},{resource}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.verb == "generate":
            return _generate_command(args)
        if args.verb == "run":
            return _run_command(args)
        if args.verb == "report":
            return _report_command(args)
        return _crossings_command(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
