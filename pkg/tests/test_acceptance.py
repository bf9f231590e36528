"""End-to-end acceptance runs on the shipped presets.

Each criterion prints one PASS/FAIL line (repeated in the pytest terminal
summary).  Also runnable directly:  python3 tests/test_acceptance.py
"""
import dataclasses
import math
import time

import numpy as np

from tfedno.cli import build_config, preset_text, read_config_text
from tfedno.experiments import EXPERIMENTS, plateau_start

RESULTS = []


def run_preset(preset, **overrides):
    name, cfg = build_config(read_config_text(preset_text(preset)))
    cfg = dataclasses.replace(cfg, **overrides)
    start = time.perf_counter()
    result = EXPERIMENTS[name][1](cfg)
    return cfg, result, time.perf_counter() - start


def report(num, title, checks, elapsed, budget):
    checks = dict(checks)
    checks[f"runtime {elapsed:.1f} s < {budget} s"] = elapsed < budget
    failed = [k for k, ok in checks.items() if not ok]
    status = "PASS" if not failed else "FAIL"
    detail = "; ".join(failed) if failed else f"{len(checks)} checks, {elapsed:.1f} s"
    line = f"criterion {num} ({title}): {status} [{detail}]"
    RESULTS.append(line)
    print(line)
    assert not failed, line


def table(result, *keys):
    cols = [result.columns.index(k) for k in keys]
    return [tuple(row[c] for c in cols) for row in result.rows]


def fit_residual(x, y):
    coef = np.polyfit(x, y, 1)
    return float(np.sqrt(np.mean((np.polyval(coef, x) - y) ** 2))), float(coef[0])


def test_zernike_spectral_convergence():
    cfg, res, elapsed = run_preset("fig1a")
    checks = {"M = 16, N up to 30": (cfg.M, cfg.N) == (16, 30)}
    for k, alpha in sorted({(int(r[0]), float(r[1])) for r in res.rows}):
        rows = [(n, e) for kk, a, n, e in table(res, "k", "alpha", "N", "linf_error") if kk == k and a == alpha]
        rows.sort()
        errs = dict(rows)
        checks[f"k={k}: error at N=30 {errs[30]:.1e} < 1e-10"] = errs[30] < 1e-10
        # exponential decay: straight in log-error vs N, curved in log-log
        pre = [(n, e) for n, e in rows if n >= 2 and e > 1e-13]
        n, e = np.array(pre, dtype=float).T
        semi, slope = fit_residual(n, np.log(e))
        loglog, _ = fit_residual(np.log(n), np.log(e))
        checks[f"k={k}: log-error slope {slope:.2f} < 0"] = slope < 0
        checks[f"k={k}: semilog fit ({semi:.2f}) beats log-log ({loglog:.2f})"] = semi < loglog
    report(1, "Zernike spectral convergence", checks, elapsed, 10)


def test_rough_function_rates():
    cfg, res, elapsed = run_preset("fig1b")
    checks = {}
    for s in (0, 1, 2):
        slope = res.summary[f"s={s}"]["loglog_slope"]
        checks[f"s={s}: slope {slope:.2f} <= {-s + 0.5}"] = slope <= -s + 0.5
    report(2, "rough-function rates", checks, elapsed, 30)


def test_bessel_vs_zernike():
    cfg, res, elapsed = run_preset("fig2")
    checks = {}
    rows = table(res, "expansion", "mprime", "nprime", "N", "linf_error")
    for mp, npr in cfg.pairs:
        slope = res.summary[f"{mp},{npr}"]["bessel_loglog_slope"]
        checks[f"({mp},{npr}) Bessel rate {slope:.2f} in [-3, -2]"] = -3.0 <= slope <= -2.0
        z40 = [e for ex, a, b, n, e in rows if ex == "zernike" and (a, b) == (mp, npr) and n == 40]
        checks[f"({mp},{npr}) Zernike error at N=40 below 1e-10"] = bool(z40) and z40[0] < 1e-10
    report(3, "Bessel vs Zernike", checks, elapsed, 30)


def test_poisson_solver():
    cfg, res, elapsed = run_preset("poisson")
    s = res.summary
    checks = {
        "(M, N, J) = (32, 42, 20)": (cfg.M, cfg.N, cfg.J) == (32, 42, 20),
        f"max residual {s['max_residual']:.1e} <= 1e-11": s["max_residual"] <= 1e-11,
        f"constant error {s['constant_error']:.1e} <= 1e-12": s["constant_error"] <= 1e-12,
        f"manufactured error {s['manufactured_error']:.1e} <= 1e-11": s["manufactured_error"] <= 1e-11,
        f"separable error {s['separable_error']:.1e} <= 1e-8 at N=42": s["separable_error"] <= 1e-8,
        f"decoupling leak {s['decoupling_leak']:.1e} <= 1e-13": s["decoupling_leak"] <= 1e-13,
    }
    report(4, "Poisson solver", checks, elapsed, 60)


def test_dno_convergence():
    cfg, res, elapsed = run_preset("fig3")
    checks = {
        "M=32 N=42 J=20 h=1 eps=0.2": (cfg.M, cfg.N, cfg.J, cfg.h, cfg.eps) == (32, 42, 20, 1.0, 0.2),
    }
    rows = table(res, "mprime", "nprime", "K", "l2_error")
    for mp, npr in ((2, 1), (3, 2), (5, 1)):
        errs = [e for a, b, k, e in sorted(rows) if (a, b) == (mp, npr)]
        k0 = plateau_start(errs)
        ratios = [errs[k + 1] / errs[k] for k in range(k0)]
        worst = max(ratios) if ratios else 0.0
        checks[f"({mp},{npr}) plateau {min(errs):.1e} <= 1e-6"] = min(errs) <= 1e-6
        checks[f"({mp},{npr}) ratio {worst:.2f} < 0.9 before K={k0}"] = worst < 0.9
    report(5, "DNO convergence", checks, elapsed, 600)


def test_epsilon_study():
    cfg, res, elapsed = run_preset("fig4")
    by = res.summary["by_eps"]
    slopes = [by[str(e)]["log_error_slope_per_K"] for e in (0.2, 0.4, 0.8)]
    checks = {
        "eps includes 0.2, 0.4, 0.8, 1.4": set(cfg.eps) >= {0.2, 0.4, 0.8, 1.4},
        "rates degrade: " + ", ".join(f"{s:.2f}" for s in slopes): slopes[0] < slopes[1] < slopes[2],
    }
    errs = [e for eps, k, e in sorted(table(res, "eps", "K", "l2_error")) if eps == 1.4]
    k_min = int(np.argmin(errs))
    # the partial sums alternate between even and odd orders, so growth is judged two orders apart
    tail = errs[k_min:]
    rising = len(tail) > 3 and all(b > a for a, b in zip(tail, tail[2:]))
    _, slope = fit_residual(np.arange(len(tail)), np.log(tail))
    checks[f"eps=1.4 grows past K={k_min}: {errs[k_min]:.1e} -> {errs[-1]:.1e}, log-slope {slope:.2f}"] = (
        rising and slope > 0 and errs[-1] > 10 * errs[k_min]
    )
    report(6, "epsilon study", checks, elapsed, 900)


def test_selftest():
    cfg, res, elapsed = run_preset("selftest")
    checks = {}
    for name, value, tol, passed in table(res, "check", "value", "tolerance", "passed"):
        checks[f"{name} {value:.1e} <= {tol:g}"] = bool(passed) and value <= tol
    expected = {"orthonormality", "eigenvalue_identities", "product_kernels_vs_oracle", "sylvester_residual",
                "zero_flux", "g0_symmetry", "eps_bookkeeping", "linear_dispersion"}
    checks["all invariants present"] = expected <= {r[0] for r in res.rows}
    report(7, "invariant suite", checks, elapsed, 300)


def test_waterwave_smoke_run():
    cfg, res, elapsed = run_preset("fig5", steps=168)
    s = res.summary
    checks = {
        "dt = 1/1200": math.isclose(cfg.dt, 1 / 1200, rel_tol=1e-12),
        f"completed {s['steps']} steps": s["completed"] and s["steps"] == 168,
        f"mean-eta drift {s['mean_elevation_drift']:.1e} <= 1e-8": s["mean_elevation_drift"] <= 1e-8,
        f"divergence flags {s['divergence_flags']}": s["divergence_flags"] == 0,
    }
    report(8, "water-wave smoke run", checks, elapsed, 1200)


if __name__ == "__main__":
    import sys

    code = 0
    for fn in [v for k, v in list(globals().items()) if k.startswith("test_")]:
        try:
            fn()
        except AssertionError:
            code = 1
    sys.exit(code)
