"""Bessel expansion of corrected Zernike functions and Zernike expansion of Bessel modes."""
from _common import figure, parse_args, run, save, series

args = parse_args("fig2", __doc__)
rows = run("fig2", args)
fig, axes = figure(args, ncols=2)
if axes is not None:
    for ax, kind in zip(axes, ("bessel", "zernike")):
        sub = [r for r in rows if r["expansion"] == kind]
        for (mp, npr), (n, e) in series(sub, ("mprime", "nprime"), "N", "linf_error").items():
            (ax.loglog if kind == "bessel" else ax.semilogy)(n, e, "o-", ms=3, label=f"({mp:g},{npr:g})")
        ax.set(xlabel="terms" if kind == "bessel" else "N", ylabel="max error", title=f"{kind} expansion")
        ax.legend()
save(fig, args, "fig2")
