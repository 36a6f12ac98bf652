"""Command-line entry point: simulate, bounds, weights, rates."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, _kernels
from .adaptive_target import construct_weights, heterogeneity_margin, verify_weighting
from .bounds import BoundRow, bound_row
from .config import config_digest, config_to_dict, parse_config, parse_distribution_spec
from .distributions import mean
from .errors import ConfigError, SchemaError, SupereffError, TargetOutOfRange
from .simulation import BoundCheckRow, CellSummary, ReplicationRecord, fit_rates, run_experiment

log = logging.getLogger("supereff")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_text(fields, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([_fmt(getattr(row, f)) for f in fields])
    return buf.getvalue()


def cells_csv(cells) -> str:
    return _csv_text(CellSummary.FIELDS, cells)


def rates_json(rates: dict) -> str:
    return json.dumps(rates, indent=2, sort_keys=True) + "\n"


def read_cells_csv(path) -> list[CellSummary]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError("cells", f"cannot read {path}: {exc}") from None
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CellSummary.FIELDS:
        raise SchemaError("cells", f"header must be {','.join(CellSummary.FIELDS)}")
    cells = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(CellSummary.FIELDS):
            raise SchemaError(f"cells:{lineno}", f"expected {len(CellSummary.FIELDS)} fields")
        try:
            vals = dict(zip(CellSummary.FIELDS, row))
            cells.append(CellSummary(
                n=int(vals["n"]), R_effective=int(vals["R_effective"]),
                mse_pop=float(vals["mse_pop"]), mse_pop_se=float(vals["mse_pop_se"]),
                mse_adaptive=float(vals["mse_adaptive"]), mse_adaptive_se=float(vals["mse_adaptive_se"]),
                mismatch_rate=float(vals["mismatch_rate"]), mismatch_se=float(vals["mismatch_se"]),
                discards=int(vals["discards"]),
            ))
        except ValueError as exc:
            raise SchemaError(f"cells:{lineno}", str(exc)) from None
    return cells


def cmd_simulate(args) -> int:
    started = datetime.now(timezone.utc).isoformat()
    config = parse_config(args.config, seed_override=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    result = run_experiment(config, workers=args.workers)
    log.info("simulated %d cells in %.2fs (backend=%s)", len(result.cells), time.perf_counter() - t0, _kernels.BACKEND)

    files = {"cells.csv": cells_csv(result.cells), "rates.json": rates_json(result.rates)}
    if config.record_replications:
        rows = (rec for n in config.n_grid for rec in result.replications[n].records())
        files["reps.csv"] = _csv_text(ReplicationRecord.FIELDS, rows)
    if result.bound_rows:
        files["bound_check.csv"] = _csv_text(BoundCheckRow.FIELDS, result.bound_rows)
    for name, text in files.items():
        (out / name).write_text(text)

    manifest = {
        "config_digest": config_digest(config),
        "config": config_to_dict(config),
        "tool_version": __version__,
        "master_seed": config.master_seed,
        "backend": _kernels.BACKEND,
        "workers": args.workers,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "outputs": sorted(files),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def bounds_table(c: float, sigma: float, ns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BoundRow.FIELDS)
    for n in ns:
        row = bound_row(c, sigma, n)
        w.writerow([str(n)] + [f"{getattr(row, f):.12g}" for f in BoundRow.FIELDS[1:]])
    return buf.getvalue()


def cmd_bounds(args) -> int:
    if not (args.c > 0 and args.sigma > 0):
        print("error: --c and --sigma must be positive", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(bounds_table(args.c, args.sigma, args.n))
    return EXIT_OK


def weights_report(spec: str, m: float) -> str:
    dist = parse_distribution_spec(spec)
    w = construct_weights(dist, m)
    resid = verify_weighting(dist, w, m)
    c = heterogeneity_margin(dist, allow_zero=True)
    lines = [
        f"distribution: {json.dumps(dist.as_dict(), sort_keys=True)}",
        f"mean: {mean(dist)!r}",
        f"band: [{mean(dist) - c!r}, {mean(dist) + c!r}]",
        f"target: {m!r}",
        f"direction: {w.direction}",
        f"lambda: {w.lam!r}",
        f"threshold: {w.threshold!r}",
        f"weight_ratio: {_ratio(w)}",
        f"achieved: {m + resid!r}",
        f"residual: {resid!r}",
    ]
    return "\n".join(lines) + "\n"


def _ratio(w) -> str:
    """Weight inside the indicator region relative to outside it."""
    if w.direction == "flat":
        return "1:1"
    outside = 1.0 - w.lam
    if outside == 0.0:
        return "inf:1"
    return f"{1.0 / outside!r}:1"


def cmd_weights(args) -> int:
    try:
        sys.stdout.write(weights_report(args.dist, args.target))
    except TargetOutOfRange as exc:
        print(f"error: TargetOutOfRange: target {exc.m!r} outside [{exc.lo!r}, {exc.hi!r}]", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def cmd_rates(args) -> int:
    sys.stdout.write(rates_json(fit_rates(read_cells_csv(args.cells))))
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("sizes must be positive integers")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="supereff", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a Monte Carlo experiment from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--seed", type=int, default=None, help="override master_seed")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bounds", help="tabulate mismatch probability and MSE bounds as CSV")
    b.add_argument("--c", type=float, required=True)
    b.add_argument("--sigma", type=float, required=True)
    b.add_argument("--n", type=_int_list, required=True, help="comma-separated sample sizes")
    b.set_defaults(func=cmd_bounds)

    w = sub.add_parser("weights", help="construct and verify a nonnegative weighting for a target")
    w.add_argument("--dist", required=True, help='e.g. two_point:a=0,b=2,p=0.5 or a JSON object')
    w.add_argument("--target", type=float, required=True)
    w.set_defaults(func=cmd_weights)

    r = sub.add_parser("rates", help="refit log-log rates from a cells.csv")
    r.add_argument("--cells", required=True)
    r.set_defaults(func=cmd_rates)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SupereffError, OSError, RuntimeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
