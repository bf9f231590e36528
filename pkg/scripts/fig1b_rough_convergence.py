"""L2 error of Zernike projections of profiles with limited smoothness against N."""
from _common import figure, parse_args, run, save, series

args = parse_args("fig1b", __doc__)
rows = run("fig1b", args)
fig, (ax,) = figure(args)
if ax is not None:
    for s, (n, e) in series(rows, "s", "N", "l2_error").items():
        ax.loglog(n, e, "o-", ms=3, label=f"s={s:g}")
    ax.set(xlabel="N", ylabel="L2 error")
    ax.legend()
save(fig, args, "fig1b")
