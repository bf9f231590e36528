"""L-infinity error of Zernike projections of smooth functions against N."""
from _common import figure, parse_args, run, save, series

args = parse_args("fig1a", __doc__)
rows = run("fig1a", args)
fig, (ax,) = figure(args)
if ax is not None:
    for (k, alpha), (n, e) in series(rows, ("k", "alpha"), "N", "linf_error").items():
        ax.semilogy(n, e, "o-", ms=3, label=f"k={k:g}, alpha={alpha:g}")
    ax.set(xlabel="N", ylabel="max error")
    ax.legend()
save(fig, args, "fig1a")
