"""Free-surface run from a localized bump: eta along the x-axis at each snapshot."""
import csv

import numpy as np

from _common import figure, parse_args, run, save
from tfedno.disc_basis import eval_field

args = parse_args("fig5", __doc__)
run("fig5", args)
snaps = {}
with open(args.out / "waterwave-sim.trajectory.csv", newline="") as fh:
    lines = [line for line in fh if not line.startswith("#")]
for r in csv.DictReader(lines):
    if r["field"] == "eta":
        snaps.setdefault(float(r["t"]), []).append((int(r["m"]), int(r["n"]), complex(float(r["re"]), float(r["im"]))))
x = np.linspace(-1, 1, 201)
profiles = {}
for t, entries in sorted(snaps.items()):
    M = max(abs(m) for m, _, _ in entries)
    N = max(n for _, n, _ in entries)
    c = np.zeros((2 * M + 1, N + 1), dtype=complex)
    for m, n, v in entries:
        c[m + M, n] = v
    profiles[t] = eval_field(c, np.abs(x), np.where(x < 0, np.pi, 0.0)).real
    print(f"t={t:.4f}  max|eta|={np.abs(profiles[t]).max():.3e}")
fig, (ax,) = figure(args)
if ax is not None:
    for i, (t, eta) in enumerate(profiles.items()):
        ax.plot(x, eta + 0.01 * i, lw=1)
        ax.text(1.02, 0.01 * i, f"t={t:.3f}", fontsize=7, va="center")
    ax.set(xlabel="x (theta = 0 and pi)", ylabel="eta, offset by snapshot")
save(fig, args, "fig5")
