"""Flat-cylinder Poisson solver against known solutions (table only)."""
from _common import parse_args, run

args = parse_args("poisson", __doc__)
for r in run("poisson", args):
    print(f"{r['case']:>16}  N={r['N']:>4g}  residual={r['residual']:.2e}  error={r['error']:.2e}")
