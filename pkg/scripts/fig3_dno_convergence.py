"""Error of TFE partial sums of the DNO against exact Neumann data, as K grows."""
from _common import figure, parse_args, run, save, series

args = parse_args("fig3", __doc__)
rows = run("fig3", args)
fig, (ax,) = figure(args)
if ax is not None:
    for (mp, npr), (k, e) in series(rows, ("mprime", "nprime"), "K", "l2_error").items():
        ax.semilogy(k, e, "o-", ms=3, label=f"(m',n')=({mp:g},{npr:g})")
    ax.set(xlabel="K", ylabel="L2 error")
    ax.legend()
save(fig, args, "fig3")
