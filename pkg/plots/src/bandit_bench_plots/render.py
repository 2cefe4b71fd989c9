"""Render benchmark result CSVs into the two standard figures.

Input is the long-form schema written by the bandit-bench harness:

    policy,alpha,beta,T,n,m,replication,t,cum_regret

Two figure kinds are supported.  ``vs_alpha`` plots each policy's final mean
regret across hardness levels; ``vs_time`` plots the mean cumulative regret
curve at a single hardness level.  Both draw the mean line per policy plus a
shaded band of half a standard deviation, on linear axes.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

BAND_STD_FACTOR = 0.5

_COLUMNS = {
    "vs_alpha": ("policy", "alpha", "replication", "t", "cum_regret"),
    "vs_time": ("policy", "alpha", "replication", "t", "cum_regret"),
}


@dataclass(frozen=True)
class FigureSpec:
    csv_path: str
    kind: str  # "vs_alpha" | "vs_time"
    out_path: str
    policies: tuple[str, ...] | None = None  # None = every policy in the file
    alpha: float | None = None  # vs_time only: pick one hardness level

    def __post_init__(self):
        if self.kind not in _COLUMNS:
            raise ValueError(f"unknown figure kind {self.kind!r}; use vs_alpha or vs_time")


def load_rows(csv_path, kind: str) -> list[dict]:
    required = _COLUMNS[kind]
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise ValueError(f"{csv_path}: missing required column {column!r}")
        rows = []
        for raw in reader:
            rows.append(
                {
                    "policy": raw["policy"],
                    "alpha": float(raw["alpha"]),
                    "replication": int(raw["replication"]),
                    "t": int(raw["t"]),
                    "cum_regret": float(raw["cum_regret"]),
                }
            )
    if not rows:
        raise ValueError(f"{csv_path}: no data rows")
    return rows


def _select_policies(rows, policies):
    available = sorted({r["policy"] for r in rows})
    if policies is None:
        return available
    missing = sorted(set(policies) - set(available))
    if missing:
        raise ValueError(f"policies not present in the CSV: {missing}")
    return list(policies)


def series_vs_alpha(rows, policies=None):
    """Per policy: (alphas, mean of final regret, std across replications)."""
    chosen = _select_policies(rows, policies)
    series = {}
    for policy in chosen:
        mine = [r for r in rows if r["policy"] == policy]
        out_alpha, out_mean, out_std = [], [], []
        for alpha in sorted({r["alpha"] for r in mine}):
            cell = [r for r in mine if r["alpha"] == alpha]
            final_t = max(r["t"] for r in cell)
            finals = [r["cum_regret"] for r in cell if r["t"] == final_t]
            out_alpha.append(alpha)
            out_mean.append(float(np.mean(finals)))
            out_std.append(float(np.std(finals)))
        series[policy] = (np.array(out_alpha), np.array(out_mean), np.array(out_std))
    return series


def series_vs_time(rows, policies=None, alpha=None):
    """Per policy: (steps, mean regret curve, std across replications)."""
    alphas = sorted({r["alpha"] for r in rows})
    if alpha is None:
        if len(alphas) > 1:
            raise ValueError(
                f"CSV holds several hardness levels {alphas}; pass --alpha to pick one"
            )
        alpha = alphas[0]
    rows = [r for r in rows if r["alpha"] == alpha]
    if not rows:
        raise ValueError(f"no rows at alpha={alpha}")
    chosen = _select_policies(rows, policies)
    series = {}
    for policy in chosen:
        mine = [r for r in rows if r["policy"] == policy]
        steps = sorted({r["t"] for r in mine})
        by_step = {t: [] for t in steps}
        for r in mine:
            by_step[r["t"]].append(r["cum_regret"])
        mean = np.array([float(np.mean(by_step[t])) for t in steps])
        std = np.array([float(np.std(by_step[t])) for t in steps])
        # cumulative pseudo-regret can never decrease; catch corrupt input
        if np.any(np.diff(mean) < -1e-9):
            raise ValueError(f"policy {policy!r}: mean regret curve is not non-decreasing")
        series[policy] = (np.array(steps), mean, std)
    return series


def render(spec: FigureSpec) -> str:
    """Write the figure for ``spec`` and return the output path."""
    rows = load_rows(spec.csv_path, spec.kind)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if spec.kind == "vs_alpha":
        series = series_vs_alpha(rows, spec.policies)
        for policy, (alphas, mean, std) in series.items():
            ax.plot(alphas, mean, marker="o", label=policy)
            ax.fill_between(
                alphas,
                mean - BAND_STD_FACTOR * std,
                mean + BAND_STD_FACTOR * std,
                alpha=0.25,
            )
        ax.set_xlabel("hardness level")
        ax.set_ylabel("final cumulative regret")
    else:
        series = series_vs_time(rows, spec.policies, spec.alpha)
        for policy, (steps, mean, std) in series.items():
            ax.plot(steps, mean, label=policy)
            ax.fill_between(
                steps,
                mean - BAND_STD_FACTOR * std,
                mean + BAND_STD_FACTOR * std,
                alpha=0.25,
            )
        ax.set_xlabel("time step")
        ax.set_ylabel("cumulative regret")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=150)
    plt.close(fig)
    return spec.out_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bandit-bench-render", description=__doc__
    )
    parser.add_argument("--csv", required=True, help="results CSV from the harness")
    parser.add_argument(
        "--kind", required=True, choices=("vs_alpha", "vs_time"), help="figure kind"
    )
    parser.add_argument("--out", required=True, help="output image path (png/pdf/svg)")
    parser.add_argument(
        "--policy",
        action="append",
        default=None,
        help="restrict to one policy (repeatable; default: all)",
    )
    parser.add_argument(
        "--alpha", type=float, default=None, help="vs_time: hardness level to plot"
    )
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(
            csv_path=args.csv,
            kind=args.kind,
            out_path=args.out,
            policies=tuple(args.policy) if args.policy else None,
            alpha=args.alpha,
        )
        out = render(spec)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
