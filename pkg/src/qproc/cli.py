"""Command-line entry point ``qproc``.

Exit codes: 0 success, 1 check failure, 2 I/O failure, 3 usage or domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analytics as an
from . import checks, plotting, sorter, stats, wbp
from .rng import sample_seeds

EXIT_OK, EXIT_CHECK, EXIT_IO, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# helpers


def worker_count() -> int:
    env = os.environ.get("QPROC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"QPROC_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def pool_map(fn, seeds: np.ndarray, *args) -> np.ndarray:
    """Apply a batch function to contiguous seed chunks and stack the results in seed order."""
    workers = min(worker_count(), max(1, len(seeds)))
    if workers == 1:
        return fn(seeds, *args)
    chunks = np.array_split(seeds, workers)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(lambda c: fn(c, *args), chunks))
    return np.concatenate(parts, axis=0)


def _parse_grid(text: str | None, default: np.ndarray) -> np.ndarray:
    if not text:
        return default
    try:
        g = np.array(sorted(float(v) for v in text.split(",") if v.strip()), dtype=np.float64)
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}")
    if g.size == 0 or np.any(g < 0.0) or np.any(g > 1.0):
        raise UsageError("grid points must lie in [0, 1]")
    return g


def _parse_ns(text: str) -> list[int]:
    try:
        ns = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse --n {text!r}")
    if not ns or any(n < 0 for n in ns):
        raise UsageError("--n must be nonnegative")
    return ns


def _sidecar(out: Path | None, suffix: str) -> Path | None:
    if out is None:
        return None
    return out.with_name(out.stem + suffix)


def _write_text(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def read_csv(path) -> list[dict[str, str]]:
    """Read any CSV report written by this tool."""
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _emit(args, command: str, header: list[str], rows: list[list], config: dict, figure=None) -> None:
    """Write the main report in the requested format; ``figure(path)`` renders the SVG."""
    out = Path(args.out) if args.out else None
    text_rows = [[_fmt(v) for v in r] for r in rows]
    if args.format == "csv":
        _write_text(out, _csv_text(header, text_rows))
    elif args.format == "json":
        doc = {"command": command, "config": config, "rows": [dict(zip(header, r)) for r in rows]}
        _write_text(out, json.dumps(doc, indent=2, default=_json_default) + "\n")
    else:
        if out is None:
            raise UsageError("--format svg needs --out")
        if figure is None:
            raise UsageError(f"no figure for command {command}")
        figure(out)
        _sidecar(out, ".csv").write_text(_csv_text(header, text_rows))


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Fraction):
        return f"{o.numerator}/{o.denominator}"
    raise TypeError(type(o))


def _summary_rows(grid, values) -> list[list]:
    rows = []
    for k, t in enumerate(grid):
        s = stats.summarize(values[:, k])
        rows.append([float(t), s.count, s.mean, s.variance, s.std_error])
    return rows


SUMMARY_HEADER = ["t", "count", "mean", "variance", "std_error"]


# ---------------------------------------------------------------------------
# commands


def cmd_expectation(args) -> int:
    n = _parse_ns(args.n)[0]
    if n > an.FLOAT_HARMONIC_MAX:
        raise UsageError("n exceeds table capacity")
    if n >= 2:
        table = an.expected_cost_oracle(n)
        oracle = table.a
    else:
        oracle = lambda m, l: Fraction(0)
    rows = []
    all_match = True
    for m in range(1, n + 1):
        for l in range(1, m + 1):
            a = an.expected_cost(m, l)
            o = oracle(m, l)
            match = a == o
            all_match &= match
            rows.append([m, l, a.numerator, a.denominator, float(a), o.numerator, o.denominator, str(match).lower()])
    header = ["n", "l", "a_exact_num", "a_exact_den", "a_float", "oracle_num", "oracle_den", "match"]

    def figure(path):
        ls = [r[1] for r in rows if r[0] == n]
        vals = np.array([[r[4] for r in rows if r[0] == n]])
        plotting.step_paths(path, np.array(ls, dtype=float) / n, vals / n, f"a({n}, l) / n against l / n", mean=False)

    _emit(args, "expectation", header, rows, {"n": n}, figure)
    return EXIT_OK if all_match else EXIT_CHECK


def cmd_simulate(args) -> int:
    n = _parse_ns(args.n)[0]
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    grid = _parse_grid(args.grid, wbp.default_grid())
    seeds = sample_seeds(args.seed, args.samples)
    xs = pool_map(lambda s: sorter.run_batch(n, s), seeds)
    values = sorter.normalize_batch(n, xs, grid)
    out = Path(args.out) if args.out else None
    raw = _sidecar(out, ".samples.csv")
    if raw is not None:
        with open(raw, "w", newline="") as fh:
            sorter.write_batch_csv(fh, seeds, xs)
    _emit(
        args,
        "simulate",
        SUMMARY_HEADER,
        _summary_rows(grid, values),
        {"n": n, "samples": args.samples, "seed": args.seed, "grid": grid},
        lambda p: plotting.step_paths(p, grid, values, f"Y_{n} sample paths"),
    )
    return EXIT_OK


def _limit_grid(args) -> np.ndarray:
    grid = _parse_grid(args.grid, wbp.default_grid())
    if np.any(grid <= 0.0):
        raise UsageError("limit process evaluated on (0,1] only")
    return grid


def cmd_limit(args) -> int:
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    grid = _limit_grid(args)
    cfg = wbp.EvalConfig(depth_m=args.depth, n_star=args.n_star, grid=grid)
    seeds = sample_seeds(args.seed, args.samples)
    values = pool_map(lambda s: wbp.batch_limit_process(s, grid, cfg), seeds)
    out = Path(args.out) if args.out else None
    raw = _sidecar(out, ".samples.csv")
    if raw is not None:
        with open(raw, "w", newline="") as fh:
            wbp.write_samples_csv(fh, seeds, grid, None, values)
    _emit(
        args,
        "limit",
        SUMMARY_HEADER,
        _summary_rows(grid, values),
        {"depth": args.depth, "n_star": args.n_star, "samples": args.samples, "seed": args.seed, "grid": grid},
        lambda p: plotting.step_paths(p, grid, values, f"limit process, depth {args.depth}"),
    )
    return EXIT_OK


def cmd_couple(args) -> int:
    ns = _parse_ns(args.n)
    if any(n < 2 for n in ns):
        raise UsageError("couple needs n >= 2")
    grid = _limit_grid(args) if args.grid else np.array([0.5])
    cfg = wbp.EvalConfig(depth_m=args.depth, n_star=args.n_star, grid=grid)
    seeds = sample_seeds(args.seed, args.samples)
    y = pool_map(lambda s: wbp.batch_limit_process(s, grid, cfg), seeds)
    rows = []
    dist: dict[float, dict[int, float]] = {float(t): {} for t in grid}
    raw_parts = []
    for n in ns:
        yn = pool_map(lambda s: wbp.batch_discrete_process(s, grid, n), seeds)
        d = np.sqrt(np.mean((yn - y) ** 2, axis=0))
        for k, t in enumerate(grid):
            rows.append([n, float(t), float(d[k]), len(seeds)])
            dist[float(t)][n] = float(d[k])
        raw_parts.append((n, yn))
    out = Path(args.out) if args.out else None
    raw = _sidecar(out, ".samples.csv")
    if raw is not None:
        with open(raw, "w", newline="") as fh:
            for j, (n, yn) in enumerate(raw_parts):
                buf = io.StringIO()
                wbp.write_coupled_csv(buf, seeds, grid, n, yn, y)
                text = buf.getvalue()
                fh.write(text if j == 0 else text.split("\n", 1)[1])
    _emit(
        args,
        "couple",
        ["n", "t", "D", "count"],
        rows,
        {"n": ns, "depth": args.depth, "n_star": args.n_star, "samples": args.samples, "seed": args.seed},
        lambda p: plotting.coupled_distance(p, dist),
    )
    return EXIT_OK


def cmd_contraction(args) -> int:
    m_max = args.m_max if args.m_max is not None else min(8, args.depth - 1)
    if m_max < 0 or m_max > args.depth - 1:
        raise UsageError("need 0 <= m-max < depth")
    grid = _limit_grid(args)
    cfg = wbp.EvalConfig(depth_m=args.depth, n_star=args.n_star, grid=grid)
    sub = wbp.EvalConfig(depth_m=m_max + 1, n_star=args.n_star, grid=grid)
    seeds = sample_seeds(args.seed, args.samples)
    gen = pool_map(lambda s: wbp.batch_limit_generations(s, grid, sub), seeds)
    b2 = np.mean(np.max(gen**2, axis=1), axis=0)
    rows = []
    for m, v in enumerate(b2):
        rows.append([m, float(v), float(v / b2[m - 1]) if m > 0 and b2[m - 1] > 0 else ""])
    _emit(
        args,
        "contraction",
        ["m", "b2", "ratio"],
        rows,
        {"depth": cfg.depth_m, "n_star": args.n_star, "samples": args.samples, "seed": args.seed, "m_max": m_max},
        lambda p: plotting.contraction(p, b2),
    )
    return EXIT_OK


def cmd_validate(args) -> int:
    results = checks.run_checks("quick" if args.quick else "full", corrupt_table=args.corrupt_table)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.check_id}: {r.description}", file=sys.stderr)
    text = json.dumps([r.to_dict() for r in results], indent=2, default=_json_default) + "\n"
    _write_text(Path(args.out) if args.out else None, text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


COMMANDS = {
    "expectation": cmd_expectation,
    "simulate": cmd_simulate,
    "limit": cmd_limit,
    "couple": cmd_couple,
    "contraction": cmd_contraction,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qproc", description="Quicksort-on-the-fly process laboratory")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--n", default="128", help="input size (comma list for couple)")
        s.add_argument("--samples", type=int, default=1000)
        s.add_argument("--grid", default=None, help="comma-separated times in [0,1]")
        s.add_argument("--depth", type=int, default=wbp.DEFAULT_DEPTH)
        s.add_argument("--n-star", type=int, default=wbp.DEFAULT_N_STAR)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--out", default=None)
        s.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
        s.add_argument("--quick", action="store_true")
        if name == "contraction":
            s.add_argument("--m-max", type=int, default=None)
        if name == "validate":
            s.add_argument("--corrupt-table", action="store_true", help=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.samples < 1 or args.depth < 0 or args.n_star < 1:
            raise UsageError("numeric options must be positive")
        return COMMANDS[args.command](args)
    except (UsageError, an.DomainError) as exc:
        print(f"qproc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qproc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
