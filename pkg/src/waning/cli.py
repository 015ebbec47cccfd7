"""Command-line interface.

Exit status: 0 on success, 1 on data errors, 2 on usage errors. Randomized
subcommands use ``--seed`` and default to :data:`DEFAULT_SEED`.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bounds, power_study, stratified, strata_sim, trial_data, waning_test
from .errors import WaningError
from .plotting import line_chart_svg

DEFAULT_SEED = 20240101


def _method(value: str) -> str:
    name = value.replace("-", "_")
    if name not in (waning_test.DIRECT_DELTA, waning_test.CONSERVATIVE_DELTA):
        raise argparse.ArgumentTypeError(f"expected direct-delta or conservative-delta, got {value!r}")
    return name


def _alpha(value: str) -> float:
    try:
        a = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None
    if not 0 < a < 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {value}")
    return a


def _positive_int(value: str) -> int:
    try:
        k = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from None
    if k < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return k


def _grid(value: str) -> list[float]:
    """Comma list ``0,0.5,1`` or range ``start:stop:step`` (stop inclusive)."""
    try:
        if ":" in value:
            start, stop, step = (float(x) for x in value.split(":"))
            if step <= 0:
                raise ValueError
            k = int(round((stop - start) / step))
            return [round(start + i * step, 12) for i in range(k + 1)]
        return [float(x) for x in value.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad p12 grid {value!r}; use 0,0.5,1 or 0:1:0.1") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="waning",
        description="Tests of vaccine waning from two-period trial data.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def common(p, seed=False, workers=False):
        p.add_argument("--out", type=Path, help="write the main output here instead of stdout")
        p.add_argument("--alpha", type=_alpha, default=0.05, help="significance level (default 0.05)")
        if seed:
            p.add_argument("--seed", type=int, default=None, help=f"random seed (default {DEFAULT_SEED})")
        if workers:
            p.add_argument("--workers", type=_positive_int, default=1, help="worker threads; output does not depend on it")

    p = sub.add_parser("test", help="test IR1/IR2 = 1 from a summary JSON or a records CSV")
    p.add_argument("--summary", type=Path, help="summary JSON (count or person_time mode)")
    p.add_argument("--records", type=Path, help="individual records CSV with columns arm,outcome")
    p.add_argument("--method", type=_method, default=waning_test.DIRECT_DELTA,
                   help="direct-delta (default) or conservative-delta")
    p.add_argument("--bootstrap", action="store_true", help="bootstrap percentile test (needs --records)")
    p.add_argument("--B", type=_positive_int, default=2000, help="bootstrap replicates (default 2000)")
    p.add_argument("--stratified-bootstrap", action="store_true", help="resample within arms")
    p.add_argument("--continuity-correction", action="store_true", help="add 0.5 to every cell")
    p.add_argument("--pretty", action="store_true", help="human-readable output")
    common(p, seed=True, workers=True)

    p = sub.add_parser("hr-test", help="bootstrap test of HR1/HR2 = 1 (biased; for comparison only)")
    p.add_argument("--records", type=Path, required=True, help="individual records CSV")
    p.add_argument("--B", type=_positive_int, default=2000)
    p.add_argument("--stratified-bootstrap", action="store_true")
    p.add_argument("--pretty", action="store_true")
    common(p, seed=True, workers=True)

    p = sub.add_parser("bound", help="upper bound on the period-2 challenge effect over a p12 grid")
    p.add_argument("--summary", type=Path, required=True)
    p.add_argument("--records", type=Path, help="records CSV; enables the bootstrap confidence limit")
    p.add_argument("--p12-grid", type=_grid, default=_grid("0:1:0.1"), help="0,0.5,1 or start:stop:step")
    p.add_argument("--B", type=_positive_int, default=2000)
    p.add_argument("--svg", type=Path, help="also write a line chart here")
    common(p, seed=True, workers=True)

    p = sub.add_parser("simulate", help="simulate a trial from a SimConfig JSON; writes records CSV")
    p.add_argument("--config", type=Path, required=True)
    common(p, seed=True, workers=True)

    for name, helptext in (("power", "rejection-rate grid for IR-based tests"),
                           ("hr-power", "rejection-rate grid for the hazard-ratio test")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--grid", type=Path, required=True, help="grid JSON (PowerGrid fields plus dist)")
        p.add_argument("--replications", type=_positive_int, help="override the grid's replications")
        p.add_argument("--svg", type=Path, help="also write the panel chart here")
        common(p, seed=True, workers=True)

    p = sub.add_parser("stratified", help="per-stratum tests with adjusted p-values and a pooled row")
    p.add_argument("--input", type=Path, required=True, help='stratified JSON {"strata": {...}}')
    p.add_argument("--method", type=_method, default=waning_test.DIRECT_DELTA)
    common(p)
    return parser


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise WaningError(f"cannot read {path}: {exc.strerror}") from exc


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _seed(args) -> int:
    return DEFAULT_SEED if args.seed is None else args.seed


def _render_result(result: waning_test.TestResult, pretty: bool) -> str:
    if not pretty:
        return result.to_json(sort_keys=True) + "\n"
    level = round(100 * (1 - result.alpha), 6)
    lines = [
        f"method      {result.method}",
        f"IR1/IR2     {result.estimate:.4g}",
        f"{level:g}% CI      [{result.ci_low:.4g}, {result.ci_high:.4g}]",
        f"p-value     {result.p_value:.4g}" if result.p_value is not None else "p-value     n/a",
    ]
    if result.log_se is not None:
        lines.insert(2, f"SE(log)     {result.log_se:.4g}")
    if result.note:
        lines.append(f"note        {result.note}")
    return "\n".join(lines) + "\n"


def _cmd_test(args, parser) -> None:
    if (args.summary is None) == (args.records is None):
        parser.error("test: give exactly one of --summary or --records")
    if args.bootstrap and args.records is None:
        parser.error("test: --bootstrap needs --records")
    if args.records is not None:
        records = trial_data.read_records_csv(_read(args.records))
        if args.bootstrap:
            result = waning_test.bootstrap_ir_test(
                records, B=args.B, alpha=args.alpha, seed=_seed(args),
                stratified=args.stratified_bootstrap, workers=args.workers,
            )
        else:
            summary = trial_data.aggregate(records)
            result = waning_test.ir_ratio_test(summary, args.method, args.alpha, args.continuity_correction)
    else:
        summary = trial_data.parse_summary(_read(args.summary))
        result = waning_test.ir_ratio_test(summary, args.method, args.alpha, args.continuity_correction)
    _emit(_render_result(result, args.pretty), args.out)


def _cmd_hr_test(args, parser) -> None:
    records = trial_data.read_records_csv(_read(args.records))
    result = waning_test.hr_ratio_test(
        records, B=args.B, alpha=args.alpha, seed=_seed(args),
        stratified=args.stratified_bootstrap, workers=args.workers,
    )
    _emit(_render_result(result, args.pretty), args.out)


def _cmd_bound(args, parser) -> None:
    summary = trial_data.parse_summary(_read(args.summary))
    records = trial_data.read_records_csv(_read(args.records)) if args.records else None
    curve = bounds.ve2_bound_curve(
        summary, args.p12_grid, alpha=args.alpha, B=args.B, seed=_seed(args),
        records=records, workers=args.workers,
    )
    _emit(bounds.curve_to_csv(curve), args.out)
    if args.svg:
        svg = line_chart_svg(
            "Upper bound on period-2 challenge effect",
            [("upper bound", {r.p12: r.upper_bound for r in curve}),
             (f"one-sided {1 - args.alpha:.0%} limit", {r.p12: r.ci_upper_onesided for r in curve})],
            x_label="p12",
            y_label="VE2 challenge",
        )
        args.svg.write_text(svg, encoding="utf-8")


def _cmd_simulate(args, parser) -> None:
    config = strata_sim.SimConfig.from_json(_read(args.config))
    if args.seed is not None:
        config = strata_sim.SimConfig(**{**config.__dict__, "seed": args.seed})
    records = strata_sim.simulate_trial(config, workers=args.workers)
    _emit(trial_data.write_records_csv(records), args.out)


def _cmd_power(args, parser, hr: bool) -> None:
    grid, dist = power_study.load_grid(_read(args.grid))
    overrides = {}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.replications is not None:
        overrides["replications"] = args.replications
    if args.alpha != 0.05:
        overrides["alpha"] = args.alpha
    if overrides:
        grid = power_study.PowerGrid(**{**grid.__dict__, **overrides})
    run = power_study.run_hr_power_grid if hr else power_study.run_power_grid
    cells = run(grid, dist, workers=args.workers)
    _emit(power_study.emit_table(cells), args.out)
    if args.svg:
        args.svg.write_text(power_study.emit_plot(cells, grid.alpha), encoding="utf-8")


def _cmd_stratified(args, parser) -> None:
    s = stratified.parse_stratified(_read(args.input))
    _emit(stratified.stratified_table(s, args.method, args.alpha), args.out)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    handlers = {
        "test": _cmd_test,
        "hr-test": _cmd_hr_test,
        "bound": _cmd_bound,
        "simulate": _cmd_simulate,
        "power": lambda a, p: _cmd_power(a, p, hr=False),
        "hr-power": lambda a, p: _cmd_power(a, p, hr=True),
        "stratified": _cmd_stratified,
    }
    try:
        handlers[args.command](args, parser)
    except WaningError as exc:
        print(f"waning {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
