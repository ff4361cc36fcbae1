"""Command-line front end.

Every command is deterministic given ``--seed``.  Tables go out as CSV
(default) or as JSON with a config echo.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Iterable, Optional, Sequence

from . import analytics, branching, estimator, mdp
from .errors import DomainError, NonRecurrenceError, ResourceError, TieError, UnsupportedConfiguration
from .game import GameParams
from .seeding import child_sequences
from .strategies import STRATEGIES

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_NON_RECURRENT = 4

SIG_DIGITS = 10
TAIL_KS = range(1, 7)

FIGURE_COLUMNS = [
    "alpha",
    "honest",
    "lookahead_analytic",
    "lookahead_mc",
    "mc_ci_halfwidth",
    "upper_bound",
    "lookahead_rel_improvement",
    "bound_rel_improvement",
]


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` with ``stop`` included when it lands on the grid."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise DomainError(f"alpha grid must be start:stop:step, got {text!r}") from None
    if not step > 0 or stop < start:
        raise DomainError(f"empty or ill-formed alpha grid {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def alphas_from(args: argparse.Namespace) -> list[float]:
    if args.alpha_grid is not None:
        grid = parse_grid(args.alpha_grid)
    elif args.alpha is not None:
        grid = [args.alpha]
    else:
        raise DomainError("give --alpha or --alpha-grid")
    for a in grid:
        if not 0.0 < a < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {a}")
    return sorted(set(grid))


def rounded(x: Any) -> Any:
    """Round floats to the emitted precision so the table equals its CSV image."""
    if isinstance(x, float) and math.isfinite(x):
        return float(f"{x:.{SIG_DIGITS}g}")
    return x


def _cell(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.{SIG_DIGITS}g}"
    return str(x)


def _parse_cell(text: str) -> Any:
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def write_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return [dict(zip(header, map(_parse_cell, rec))) for rec in reader]


def _optional(fn, *a) -> Optional[float]:
    try:
        return fn(*a)
    except DomainError:
        return None


# ---------------------------------------------------------------------------
# commands; each returns (columns, rows)


def cmd_simulate(args: argparse.Namespace) -> tuple[list[str], list[dict]]:
    alphas = alphas_from(args)
    seeds = child_sequences(args.seed, len(alphas))
    rows = []
    for a, s in zip(alphas, seeds):
        est = estimator.estimate_revenue(
            GameParams(a, args.beta), args.strategy, args.cycles, s, workers=args.workers
        )
        rows.append(
            {
                "alpha": a,
                "beta": args.beta,
                "strategy": args.strategy,
                "point": est.point,
                "ci_low": est.ci_low,
                "ci_high": est.ci_high,
                "std_error": est.std_error,
                "cycles": est.cycles_used,
                "rounds": est.rounds,
                "wins": est.wins,
                "mean_cycle_length": est.mean_cycle_length,
            }
        )
    return list(rows[0]), rows


def cmd_analyze(args: argparse.Namespace) -> tuple[list[str], list[dict]]:
    rows = []
    for a in alphas_from(args):
        la = analytics.lookahead_revenue(a)
        rows.append(
            {
                "alpha": a,
                "honest": analytics.honest_revenue(a),
                "lookahead": la.value,
                "lookahead_terms": la.truncation_index,
                "offspring_mean": analytics.offspring_mean(a),
                "upper_bound": _optional(analytics.revenue_upper_bound, a),
                "expected_stop_bound": _optional(analytics.expected_stop_bound, a),
            }
        )
    return list(rows[0]), rows


def figure_rows(alphas: Iterable[float], cycles: int, seed: int, workers: int = 1) -> list[dict]:
    alphas = sorted(alphas)
    seeds = child_sequences(seed, len(alphas))
    rows = []
    for a, s in zip(alphas, seeds):
        la = analytics.lookahead_revenue(a).value
        mc = half = None
        if cycles > 0:
            est = estimator.estimate_revenue(GameParams(a, 1.0), "lookahead1", cycles, s, workers=workers)
            mc, half = est.point, est.halfwidth
        ub = analytics.revenue_upper_bound(a) if a < analytics.RECURRENCE_THRESHOLD else None
        rows.append(
            {
                "alpha": a,
                "honest": analytics.honest_revenue(a),
                "lookahead_analytic": la,
                "lookahead_mc": mc,
                "mc_ci_halfwidth": half,
                "upper_bound": ub,
                "lookahead_rel_improvement": la / a - 1.0,
                "bound_rel_improvement": None if ub is None else ub / a - 1.0,
            }
        )
    return rows


def cmd_figures(args: argparse.Namespace) -> tuple[list[str], list[dict]]:
    return FIGURE_COLUMNS, figure_rows(alphas_from(args), args.cycles, args.seed, args.workers)


def cmd_tree_stats(args: argparse.Namespace) -> tuple[list[str], list[dict]]:
    alphas = alphas_from(args)
    seeds = child_sequences(args.seed, len(alphas))
    rows = []
    for a, s in zip(alphas, seeds):
        st = branching.forced_stop_stats(a, args.samples, s, depth_cap=args.depth_cap)
        row = {
            "alpha": a,
            "trees": st.trials,
            "mean_height_plus_one": st.mean_height_plus_one,
            "std_error": st.std_error,
            "stop_bound": st.bound,
            "diverges": st.diverges,
            "truncated_trees": st.truncated_trees,
        }
        for k in TAIL_KS:
            row[f"tail_{k}"] = st.tail_frequencies.get(k, 0.0)
            row[f"tail_bound_{k}"] = analytics.tail_bound(a, k)
        rows.append(row)
    return list(rows[0]), rows


def cmd_mdp_solve(args: argparse.Namespace) -> tuple[list[str], list[dict]]:
    alphas = alphas_from(args)
    seeds = child_sequences(args.seed, len(alphas))
    rows = []
    for a, s in zip(alphas, seeds):
        br = mdp.solve_optimal_rho(a, args.depth, args.samples, args.rho_tol, s)
        rows.append(
            {
                "alpha": a,
                "depth": args.depth,
                "samples": args.samples,
                "low": br.low,
                "high": br.high,
                "midpoint": br.midpoint,
                "probes": len(br.history),
                "inconclusive_probes": br.inconclusive_steps,
                "lookahead_analytic": analytics.lookahead_revenue(a).value,
                "upper_bound": analytics.revenue_upper_bound(a),
                "history": [
                    {
                        "rho": h.rho,
                        "value": h.value,
                        "std_error": h.std_error,
                        "sign": h.sign,
                        "inconclusive": h.inconclusive,
                    }
                    for h in br.history
                ],
            }
        )
    columns = [c for c in rows[0] if c != "history"]
    return columns, rows


COMMANDS = {
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "figures": cmd_figures,
    "tree-stats": cmd_tree_stats,
    "mdp-solve": cmd_mdp_solve,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="csspa", description="Leader-election manipulation simulator and analysis.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--alpha", type=float, help="adversary stake fraction")
        g.add_argument("--alpha-grid", metavar="START:STOP:STEP", help="inclusive grid of stakes")
        sp.add_argument("--seed", type=int, required=True, help="master seed")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("simulate", help="Monte Carlo revenue of a strategy")
    common(sp)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--strategy", choices=sorted(STRATEGIES), default="honest")
    sp.add_argument("--cycles", type=int, default=100_000)
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("analyze", help="closed-form revenues and bounds")
    common(sp)

    sp = sub.add_parser("figures", help="figure data: analytic and measured 1-Lookahead against the bound")
    common(sp)
    sp.add_argument("--cycles", type=int, default=100_000, help="0 skips the Monte Carlo columns")
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("tree-stats", help="option-tree height statistics")
    common(sp)
    sp.add_argument("--samples", type=int, default=100_000, help="number of trees")
    sp.add_argument("--depth-cap", type=int, default=branching.DEFAULT_DEPTH_CAP)

    sp = sub.add_parser("mdp-solve", help="bracket the optimal revenue of the truncated game")
    common(sp)
    sp.add_argument("--depth", type=int, default=2)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--rho-tol", type=float, default=0.01)
    return p


def render(args: argparse.Namespace, columns: list[str], rows: list[dict]) -> str:
    def clean(v):
        if isinstance(v, list):
            return [{k: clean(x) for k, x in d.items()} for d in v]
        return rounded(v)

    rows = [{k: clean(v) for k, v in r.items()} for r in rows]
    if args.format == "csv":
        return write_csv(rows, columns)
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "func")}
    meta = {}
    if args.command == "mdp-solve":
        meta = {"horizon_continuation": 0.0, "note": "truncation biases values downward; the bracket is conservative"}
    doc = {"config": config, "results": rows, **({"metadata": meta} if meta else {})}
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        columns, rows = COMMANDS[args.command](args)
        text = render(args, columns, rows)
    except (DomainError, UnsupportedConfiguration, TieError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NonRecurrenceError as exc:
        print(f"possible non-recurrence: {exc}", file=sys.stderr)
        return EXIT_NON_RECURRENT
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK
