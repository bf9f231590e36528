"""Shared helpers: run a shipped preset through the CLI, read its table, save a plot."""
import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path

from tfedno.cli import PRESETS, main


def parse_args(preset, doc):
    p = argparse.ArgumentParser(description=doc)
    p.add_argument("--out", type=Path, default=Path("results") / preset, help="output directory")
    p.add_argument("--no-plot", action="store_true", help="write the tables only")
    p.add_argument("--reuse", action="store_true", help="plot existing tables without rerunning")
    return p.parse_args()


def run(preset, args):
    table = args.out / f"{PRESETS[preset]}.csv"
    if not (args.reuse and table.exists()):
        code = main(["--preset", preset, "--out", str(args.out)])
        if code == 2:
            sys.exit(code)
    return read_table(table)


def read_table(path):
    def num(v):
        try:
            return float(v)
        except ValueError:
            return v

    with open(path, newline="") as fh:
        return [{k: num(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def series(rows, key, x, y):
    """{key value: (xs, ys)} sorted by x."""
    out = defaultdict(list)
    for r in rows:
        k = tuple(r[c] for c in key) if isinstance(key, tuple) else r[key]
        out[k].append((r[x], r[y]))
    return {k: tuple(zip(*sorted(v))) for k, v in out.items()}


def figure(args, ncols=1):
    if args.no_plot:
        return None, None
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, ncols, figsize=(5 * ncols, 4), squeeze=False)
    return fig, axes[0]


def save(fig, args, name):
    if fig is None:
        return
    fig.tight_layout()
    path = args.out / f"{name}.png"
    fig.savefig(path, dpi=120)
    print(f"wrote {path}")
