"""TFE convergence in K for increasing surface amplitude eps."""
from _common import figure, parse_args, run, save, series

args = parse_args("fig4", __doc__)
rows = run("fig4", args)
fig, (ax,) = figure(args)
if ax is not None:
    for eps, (k, e) in series(rows, "eps", "K", "l2_error").items():
        ax.semilogy(k, e, "o-", ms=3, label=f"eps={eps:g}")
    ax.set(xlabel="K", ylabel="L2 error")
    ax.legend()
save(fig, args, "fig4")
