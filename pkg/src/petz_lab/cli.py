"""Command-line entry point: ``petz-lab <command> [options]``.

Exit codes: 0 success, 2 usage, 3 I/O, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path

import numpy as np

from petz_lab.channels import CHANNEL_FAMILIES
from petz_lab.errors import NumericalError, PreconditionError
from petz_lab.nonmarkov import (
    DynamicsModel,
    GeneratorModel,
    backflow_trajectory,
    choi_distance_trajectory,
    gamma_to_probability,
    generator_for_case,
    markovianity_witness,
    p_case2,
)
from petz_lab.sampling import SampleConfig, compare_strategies, sweep_reference

log = logging.getLogger("petz_lab")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERICAL = 0, 2, 3, 4
COMMANDS = ("sweep", "strategies", "backflow", "choi-distance", "generator-check")


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.12g}"


def parse_grid(text: str) -> np.ndarray:
    """Inclusive grid from ``a:b:step`` (or a single number)."""
    try:
        parts = [float(s) for s in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}, expected a:b:step") from None
    if len(parts) == 1:
        return np.array(parts)
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}, expected a:b:step")
    a, b, step = parts
    if step <= 0 or b < a:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: need step > 0 and a <= b")
    n = int(math.floor((b - a) / step + 1e-9)) + 1
    return np.round(a + step * np.arange(n), 12)


def time_grid(t_max: float, dt: float) -> np.ndarray:
    n = int(math.floor(t_max / dt + 1e-9)) + 1
    return np.round(dt * np.arange(n), 12)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="petz-lab",
        description="Petz recovery maps for qubit noise and non-Markovian dephasing.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--channel", choices=sorted(CHANNEL_FAMILIES))
    parser.add_argument("--case", type=int, choices=(1, 2), default=1)
    parser.add_argument("--p-grid", type=parse_grid, default=parse_grid("0:1:0.05"))
    parser.add_argument("--q-grid", type=parse_grid, default=parse_grid("0:1:0.05"))
    parser.add_argument("--samples", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--t-max", type=float, default=10.0, help="largest omega*t (rad)")
    parser.add_argument("--dt", type=float, default=0.01)
    parser.add_argument("--ratio", type=float, default=2.0, help="final / intermediate time")
    parser.add_argument("--gamma-const", type=float, default=None,
                        help="generator-check: use a constant rate instead of --case")
    parser.add_argument("--out", type=Path, default=Path("."))
    parser.add_argument("--svg", action="store_true", help="also render SVG figures")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def validate(args: argparse.Namespace) -> None:
    if args.command in ("sweep", "strategies") and args.channel is None:
        raise UsageError(f"{args.command} needs --channel")
    for name in ("p_grid", "q_grid"):
        grid = getattr(args, name)
        if np.any((grid < 0) | (grid > 1)):
            raise UsageError(f"--{name.replace('_', '-')} values must lie in [0, 1]")
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    if not args.dt > 0 or args.t_max < 0:
        raise UsageError("need --dt > 0 and --t-max >= 0")
    if not args.ratio > 1:
        raise UsageError("--ratio must exceed 1")


def write_csv(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    log.info("wrote %s", path)
    return path


def cmd_sweep(args) -> list[Path]:
    family = CHANNEL_FAMILIES[args.channel]
    cfg = SampleConfig(args.samples, args.seed)
    result = sweep_reference(family, args.p_grid, args.q_grid, cfg)
    for p, q in result.flagged():
        log.warning("p=%g q=%g: singular channel output, Petz map is trace non-increasing", p, q)
    rows = [
        [fmt(r.p), fmt(r.q), fmt(r.mean), fmt(r.variance), fmt(r.stderr), int(r.is_optimal)]
        for r in result.rows()
    ]
    path = write_csv(args.out / f"sweep_{args.channel}.csv",
                     ["p", "q", "mean", "variance", "stderr", "is_optimal"], rows)
    out = [path]
    if args.svg:
        from petz_lab.plotting import plot_sweep

        out.append(plot_sweep(result, path.with_suffix(".svg"), args.channel))
    return out


def cmd_strategies(args) -> list[Path]:
    family = CHANNEL_FAMILIES[args.channel]
    cfg = SampleConfig(args.samples, args.seed)
    rows = compare_strategies(family, args.p_grid, args.q_grid, cfg)
    for r in rows:
        if r.q_star is not None:
            log.info("p=%g: q* = %g", r.p, r.q_star)
    path = write_csv(
        args.out / f"strategies_{args.channel}.csv",
        ["p", "strategy", "mean", "variance", "stderr"],
        [[fmt(r.p), r.strategy, fmt(r.estimate.mean), fmt(r.estimate.variance),
          fmt(r.estimate.stderr)] for r in rows],
    )
    out = [path]
    if args.svg:
        from petz_lab.plotting import plot_strategies

        out.append(plot_strategies(rows, path.with_suffix(".svg"), args.channel))
    return out


def cmd_backflow(args) -> list[Path]:
    model = DynamicsModel.from_case(args.case)
    grid = time_grid(args.t_max, args.dt)
    curves = {}
    out = []
    for which in ("original", "approx"):
        pts = backflow_trajectory(model, which, grid, args.ratio)
        curves[which] = ([p.t for p in pts], [p.value for p in pts])
        out.append(write_csv(args.out / f"backflow_case{args.case}_{which}.csv",
                             ["t_omega", "value"], [[fmt(p.t), fmt(p.value)] for p in pts]))
    if args.svg:
        from petz_lab.plotting import plot_trajectories

        out.append(plot_trajectories(curves, args.out / f"backflow_case{args.case}.svg",
                                     "trace distance", f"case {args.case}"))
    return out


def cmd_choi_distance(args) -> list[Path]:
    model = DynamicsModel.from_case(args.case)
    pts = choi_distance_trajectory(model, time_grid(args.t_max, args.dt), args.ratio)
    path = write_csv(args.out / f"choi_distance_case{args.case}.csv", ["t_omega", "value"],
                     [[fmt(p.t), fmt(p.value)] for p in pts])
    out = [path]
    if args.svg:
        from petz_lab.plotting import plot_trajectories

        curves = {f"case {args.case}": ([p.t for p in pts], [p.value for p in pts])}
        out.append(plot_trajectories(curves, path.with_suffix(".svg"), "Choi trace distance"))
    return out


def generator_report(gen: GeneratorModel, reference, grid: np.ndarray, label: str) -> str:
    """Text report: negative-rate spans, then quadrature-vs-closed-form deviation."""
    lines = [f"generator: {label}", f"grid: omega*t in [{fmt(grid[0])}, {fmt(grid[-1])}], "
             f"{grid.size} points"]
    spans = markovianity_witness(gen, grid)
    if spans:
        lines.append(f"Non-Markovian: {len(spans)} negative-rate interval(s)")
        lines.extend(f"  [{fmt(a)}, {fmt(b)}]" for a, b in spans)
    else:
        lines.append("Markovian: no negative intervals")
    # Raises QuadratureError for rates with non-integrable singularities.
    dev = max(abs(gamma_to_probability(gen, t) - reference(t)) for t in grid)
    lines.append(f"max |quadrature p - closed form p| = {dev:.3e}")
    return "\n".join(lines)


def cmd_generator_check(args) -> list[Path]:
    grid = time_grid(args.t_max, args.dt)
    if args.gamma_const is not None:
        c = args.gamma_const
        gen = GeneratorModel.single(lambda t: c)
        reference = lambda t: 0.5 * (1 - math.exp(-2 * c * t))  # noqa: E731
        label = f"constant rate {c:g}"
    elif args.case == 1:
        gen = generator_for_case(1)
        reference = lambda t: 0.5 * (1 - math.exp(-2 * (1 - math.cos(t))))  # noqa: E731
        label = "case 1, rate sin(t)"
    else:
        gen = generator_for_case(2)
        reference = lambda t: float(p_case2(t))  # noqa: E731
        label = "case 2, oscillating rate"
    try:
        report = generator_report(gen, reference, grid, label)
    except NumericalError:
        # Still show the witness part before failing.
        spans = markovianity_witness(gen, grid)
        print(f"generator: {label}")
        print(f"negative-rate intervals: {[(fmt(a), fmt(b)) for a, b in spans]}")
        raise
    print(report)
    return []


HANDLERS = {
    "sweep": cmd_sweep,
    "strategies": cmd_strategies,
    "backflow": cmd_backflow,
    "choi-distance": cmd_choi_distance,
    "generator-check": cmd_generator_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        validate(args)
        HANDLERS[args.command](args)
    except (UsageError, PreconditionError) as exc:
        print(f"petz-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"petz-lab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"petz-lab: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
