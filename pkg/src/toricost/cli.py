"""Command-line front end.

Subcommands: systems, cost, scan, classify, transport, plot.  Angles and flow
times are radians.  Every output file is written atomically and floats are
printed with 17 significant digits, so rerunning a command with identical
arguments produces byte-identical files.

Exit codes: 0 success, 2 validation error, 3 numeric failure,
4 inconclusive classification.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import systems as catalog
from .costs import make_cost, periodicity_cost
from .dynamics import DEFAULT_INTEGRATOR, IntegratorConfig
from .errors import NumericError, ToricostError, ValidationError
from .ioutil import atomic_write_text, fmt_float, json_dumps
from .toricity import (INCONCLUSIVE, ScanGrid, classify, scan, scan_csv_text,
                       scan_sidecar_json)
from .transport import (cost_matrix, graph_plan, measure_from_json,
                        plan_csv_text, verify_monge_kantorovich_bound)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_INCONCLUSIVE = 4


def _parse_times(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError as exc:
        raise ValidationError(f"could not parse --t value {text!r}") from exc


def _integrator_from_args(args) -> IntegratorConfig:
    if args.step_size is None:
        return DEFAULT_INTEGRATOR
    return IntegratorConfig(step_size=args.step_size)


def _system_from_args(args):
    params = {}
    if getattr(args, "eps", None) is not None:
        params["eps"] = args.eps
    return catalog.build(args.system, params)


def _grid_from_args(args, ndim: int) -> ScanGrid:
    if args.t_min is None and args.t_max is None and args.steps is None:
        return ScanGrid.default(ndim)
    t_min = args.t_min if args.t_min is not None else 0.0
    t_max = args.t_max if args.t_max is not None else 4.0 * np.pi
    steps = args.steps if args.steps is not None else 129
    return ScanGrid(mins=(t_min,) * ndim, maxs=(t_max,) * ndim,
                    steps=(steps,) * ndim)


def _estimate_payload(est, system_name: str, cost_name: str) -> dict:
    return {
        "value": float(est.value),
        "std_error": float(est.std_error),
        "n_samples": int(est.n_samples),
        "t": [float(v) for v in est.t],
        "seed": est.seed,
        "system": system_name,
        "cost": cost_name,
    }


def cmd_systems(args) -> int:
    rows = [("id", "dim", "expected_verdict", "parameters")]
    for entry in catalog.list_catalog():
        rows.append((entry.id, str(entry.dim), entry.expected_verdict,
                     entry.params_doc))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    for r in rows:
        print("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    return EXIT_OK


def cmd_cost(args) -> int:
    system = _system_from_args(args)
    cost = make_cost(args.cost, system.chart)
    times = _parse_times(args.t)
    est = periodicity_cost(system, times, cost, n_samples=args.samples,
                           seed=args.seed, cfg=_integrator_from_args(args))
    text = json_dumps(_estimate_payload(est, args.system, args.cost)) + "\n"
    sys.stdout.write(text)
    if args.out:
        atomic_write_text(args.out, text)
    return EXIT_OK


def cmd_scan(args) -> int:
    system = _system_from_args(args)
    cost = make_cost(args.cost, system.chart)
    grid = _grid_from_args(args, system.n)
    result = scan(system, cost, grid, n_samples=args.samples, seed=args.seed,
                  cfg=_integrator_from_args(args))
    atomic_write_text(args.out + ".csv", scan_csv_text(result))
    atomic_write_text(args.out + ".json", scan_sidecar_json(result))
    print(f"verdict: {result.verdict}")
    print(f"wrote {args.out}.csv and {args.out}.json")
    return EXIT_OK


def cmd_classify(args) -> int:
    system = _system_from_args(args)
    cost = make_cost(args.cost, system.chart)
    grid = _grid_from_args(args, system.n)
    report = classify(system, cost, grid, n_samples=args.samples,
                      seed=args.seed, cfg=_integrator_from_args(args))
    payload = {
        "system": args.system,
        "cost": args.cost,
        "verdict": report.verdict,
        "period": list(report.period) if report.period else None,
        "zeros": [[float(v) for v in z] for z in report.zeros],
        "notes": report.notes,
        "seed": args.seed,
        "n_samples": args.samples,
    }
    text = json_dumps(payload) + "\n"
    sys.stdout.write(text)
    if args.out:
        atomic_write_text(args.out, text)
    return EXIT_INCONCLUSIVE if report.verdict == INCONCLUSIVE else EXIT_OK


def cmd_transport(args) -> int:
    with open(args.mu_minus, encoding="utf-8") as fh:
        mu_minus = measure_from_json(fh.read())
    with open(args.mu_plus, encoding="utf-8") as fh:
        mu_plus = measure_from_json(fh.read())
    costs = cost_matrix(mu_minus, mu_plus, args.cost)
    epsilon = args.epsilon
    if epsilon is None:
        epsilon = 0.1 * max(float(costs.mean()), 1e-12)
    report = verify_monge_kantorovich_bound(mu_minus, mu_plus, costs, epsilon)
    plan = graph_plan(mu_minus, np.array(report["assignment"]), mu_plus.size)
    atomic_write_text(args.out + ".csv", plan_csv_text(plan))
    text = json_dumps(report) + "\n"
    atomic_write_text(args.out + ".json", text)
    sys.stdout.write(text)
    return EXIT_OK


def _read_scan_csv(path: str):
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2:
        raise ValidationError(f"scan CSV {path!r} has no data rows")
    header = lines[0].split(",")
    t_cols = [c for c in header if c.startswith("t_")]
    ndim = len(t_cols)
    if ndim < 1 or header[ndim] != "value":
        raise ValidationError(f"unrecognized scan CSV header in {path!r}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise ValidationError(f"ragged row in scan CSV {path!r}")
        rows.append([float(v) for v in parts])
    data = np.asarray(rows, dtype=float)
    return ndim, data[:, :ndim], data[:, ndim]


_SVG_W, _SVG_H, _SVG_PAD = 800.0, 500.0, 50.0


def _svg_header():
    return ('<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W:g}" '
            f'height="{_SVG_H:g}" viewBox="0 0 {_SVG_W:g} {_SVG_H:g}">\n'
            '<rect width="100%" height="100%" fill="white"/>\n')


def _plot_line_svg(times: np.ndarray, values: np.ndarray) -> str:
    t = times[:, 0]
    lo_t, hi_t = float(t.min()), float(t.max())
    lo_v, hi_v = 0.0, float(max(values.max(), 1e-300))
    span_t = (hi_t - lo_t) or 1.0
    span_v = (hi_v - lo_v) or 1.0

    def sx(x):
        return _SVG_PAD + (x - lo_t) / span_t * (_SVG_W - 2 * _SVG_PAD)

    def sy(y):
        return _SVG_H - _SVG_PAD - (y - lo_v) / span_v * (_SVG_H - 2 * _SVG_PAD)

    pts = " ".join(f"{fmt_float(sx(x))},{fmt_float(sy(y))}"
                   for x, y in zip(t, values))
    parts = [_svg_header()]
    parts.append(f'<line x1="{_SVG_PAD:g}" y1="{_SVG_H - _SVG_PAD:g}" '
                 f'x2="{_SVG_W - _SVG_PAD:g}" y2="{_SVG_H - _SVG_PAD:g}" '
                 'stroke="black"/>\n')
    parts.append(f'<line x1="{_SVG_PAD:g}" y1="{_SVG_PAD:g}" '
                 f'x2="{_SVG_PAD:g}" y2="{_SVG_H - _SVG_PAD:g}" '
                 'stroke="black"/>\n')
    parts.append(f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" '
                 f'points="{pts}"/>\n')
    parts.append(f'<text x="{_SVG_PAD:g}" y="{_SVG_H - 10:g}" '
                 f'font-size="12">t from {fmt_float(lo_t)} to {fmt_float(hi_t)}'
                 '</text>\n')
    parts.append(f'<text x="10" y="{_SVG_PAD - 10:g}" font-size="12">'
                 f'cost up to {fmt_float(hi_v)}</text>\n')
    parts.append("</svg>\n")
    return "".join(parts)


def _plot_heatmap_svg(times: np.ndarray, values: np.ndarray) -> str:
    t1 = np.unique(times[:, 0])
    t2 = np.unique(times[:, 1])
    n1, n2 = len(t1), len(t2)
    if n1 * n2 != len(values):
        raise ValidationError("scan CSV rows do not form a full grid")
    vmax = float(max(values.max(), 1e-300))
    cell_w = (_SVG_W - 2 * _SVG_PAD) / n1
    cell_h = (_SVG_H - 2 * _SVG_PAD) / n2
    grid_vals = values.reshape(n1, n2)
    parts = [_svg_header()]
    for i in range(n1):
        for j in range(n2):
            shade = int(round(255 * (1.0 - grid_vals[i, j] / vmax)))
            x = _SVG_PAD + i * cell_w
            y = _SVG_H - _SVG_PAD - (j + 1) * cell_h
            parts.append(
                f'<rect x="{fmt_float(x)}" y="{fmt_float(y)}" '
                f'width="{fmt_float(cell_w)}" height="{fmt_float(cell_h)}" '
                f'fill="rgb({shade},{shade},{shade})"/>\n')
    parts.append(f'<text x="{_SVG_PAD:g}" y="{_SVG_H - 10:g}" font-size="12">'
                 f't_1 from {fmt_float(float(t1.min()))} to '
                 f'{fmt_float(float(t1.max()))}; t_2 from '
                 f'{fmt_float(float(t2.min()))} to {fmt_float(float(t2.max()))}'
                 '</text>\n')
    parts.append("</svg>\n")
    return "".join(parts)


def cmd_plot(args) -> int:
    ndim, times, values = _read_scan_csv(args.scan)
    if ndim == 1:
        text = _plot_line_svg(times, values)
    elif ndim == 2:
        text = _plot_heatmap_svg(times, values)
    else:
        raise ValidationError("plotting supports 1- and 2-axis scans only")
    atomic_write_text(args.out, text)
    print(f"wrote {args.out}")
    return EXIT_OK


def _add_common_estimate_args(parser):
    parser.add_argument("--system", required=True, help="catalog system id")
    parser.add_argument("--eps", type=float, default=None,
                        help="parameter for s2-spin-perturbed")
    parser.add_argument("--cost", default="chordal-sq",
                        choices=["chordal", "chordal-sq"])
    parser.add_argument("--samples", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--step-size", type=float, default=None,
                        help="integrator step override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toricost",
        description="Periodicity-cost estimates, scans and toric verdicts "
                    "for catalog integrable systems; discrete transport checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("systems", help="list the system catalog")
    p.add_argument("action", nargs="?", default="list", choices=["list"])
    p.set_defaults(func=cmd_systems)

    p = sub.add_parser("cost", help="one periodicity-cost estimate")
    _add_common_estimate_args(p)
    p.add_argument("--t", required=True,
                   help="flow time(s) in radians, comma-separated for n=2")
    p.add_argument("--out", default=None, help="also write the JSON here")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("scan", help="cost landscape over a time grid")
    _add_common_estimate_args(p)
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--out", required=True,
                   help="output prefix: writes <out>.csv and <out>.json")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("classify", help="toric verdict with detected period")
    _add_common_estimate_args(p)
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--out", default=None, help="also write the JSON here")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("transport", help="solve a discrete transport instance")
    p.add_argument("--mu-minus", required=True, help="source measure JSON")
    p.add_argument("--mu-plus", required=True, help="target measure JSON")
    p.add_argument("--cost", default="chordal-sq",
                   choices=["chordal", "chordal-sq"])
    p.add_argument("--epsilon", type=float, default=None,
                   help="entropic regularization (default 0.1 * mean cost)")
    p.add_argument("--out", required=True,
                   help="output prefix: writes <out>.csv and <out>.json")
    p.set_defaults(func=cmd_transport)

    p = sub.add_parser("plot", help="render a scan CSV to SVG")
    p.add_argument("--scan", required=True, help="scan CSV path")
    p.add_argument("--out", required=True, help="SVG output path")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage, which matches the contract
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ToricostError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
