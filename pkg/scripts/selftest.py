"""Invariant suite (table only)."""
from _common import parse_args, run

args = parse_args("selftest", __doc__)
for r in run("selftest", args):
    print(f"{r['check']:>28}  {r['value']:.2e} <= {r['tolerance']:g}  {'ok' if r['passed'] else 'FAILED'}")
