"""Free-surface evolution of (eta, q) with the TFE Dirichlet-Neumann operator.

    eta_t = G[eta] q
    q_t   = -(g - F) eta - |grad q|^2 / 2 + (G[eta] q + grad eta . grad q)^2 / (2 (1 + |grad eta|^2))

eta is passed to the expansion as the surface shape with eps = 1.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .disc_algebra import ProductWorkspace
from .disc_basis import build_quadrature, reflect_conj, resize
from .poisson import BoundaryData, build_plan, dz_top, solve
from .tfe import divergence_flag, dno_sum, tfe_expand


class DepthError(ValueError):
    pass


@dataclass(frozen=True)
class DnoConfig:
    M: int = 4
    N: int = 40
    J: int = 20
    K: int = 2
    h: float = 0.5
    linear: bool = False
    oversample: bool = False


@dataclass(eq=False)
class SurfaceState:
    eta: np.ndarray
    q: np.ndarray
    t: float = 0.0

    def copy(self):
        return SurfaceState(self.eta.copy(), self.q.copy(), self.t)


def realify(c):
    return 0.5 * (c + reflect_conj(c))


class WaterWaveModel:
    """Plan, workspace and quadratures shared by every right-hand-side evaluation."""

    def __init__(self, config: DnoConfig, g=1.0, forcing: Callable[[float], float] | float = 0.0):
        self.config = config
        self.g = g
        self.forcing = forcing if callable(forcing) else (lambda t, F=float(forcing): F)
        c = config
        self.plan = build_plan(c.M, c.N, c.J, c.h)
        self.ws = ProductWorkspace(c.M, c.N)
        if c.oversample:
            base = self.ws.quad
            self.node_quad = build_quadrature(c.M, c.N, Ng=2 * base.Ng, n_theta=2 * base.n_theta)
        else:
            self.node_quad = self.ws.quad
        self.flags = []

    def check_depth(self, eta):
        low = float(np.min(self.ws.quad.to_grid(eta).real))
        if not self.config.h > max(-low, 0.0):
            raise DepthError(f"surface dips to {low:.3g}, below the depth h={self.config.h}")

    def dno(self, eta, q, t=0.0):
        c = self.config
        if c.linear:
            zero = np.zeros(self.plan.W.shape[:2] + (c.J + 1,), dtype=complex)
            return dz_top(self.plan, solve(self.plan, zero, BoundaryData(q)))
        exp = tfe_expand(eta, q, c.K, self.plan, self.ws, check_residual=False)
        if divergence_flag(exp, 1.0):
            self.flags.append(t)
        return dno_sum(exp, 1.0)


def surface_rhs(state: SurfaceState, model: WaterWaveModel, F=None):
    """Time derivatives (eta_t, q_t) as disc coefficient arrays."""
    eta, q = state.eta, state.q
    model.check_depth(eta)
    F = model.forcing(state.t) if F is None else F
    Gq = model.dno(eta, q, state.t)
    eta_t = Gq
    q_t = -(model.g - F) * eta
    if not model.config.linear:
        ws = model.ws
        q_t = q_t - 0.5 * ws.grad_dot(q, q)
        quad = model.node_quad

        def to_grid(c, table="val"):
            return quad.to_grid(resize(c, quad.M, quad.N), table)

        er, et = to_grid(eta, "drho"), to_grid(eta, "over_rho")
        qr, qt = to_grid(q, "drho"), to_grid(q, "over_rho")
        num = to_grid(Gq) + er * qr + et * qt
        den = 2.0 * (1.0 + er * er + et * et)
        quot = resize(quad.project((num * num / den).real), ws.M, ws.N)
        q_t = q_t + quot
    return realify(eta_t), realify(q_t)


def rk4_step(state: SurfaceState, dt, model: WaterWaveModel) -> SurfaceState:
    """Classical four-stage Runge-Kutta step; negative dt integrates backwards."""
    if dt == 0 or not math.isfinite(dt):
        raise ValueError("dt must be finite and nonzero")

    def shifted(k, c):
        return SurfaceState(state.eta + c * k[0], state.q + c * k[1], state.t + c)

    k1 = surface_rhs(state, model)
    k2 = surface_rhs(shifted(k1, dt / 2), model)
    k3 = surface_rhs(shifted(k2, dt / 2), model)
    k4 = surface_rhs(shifted(k3, dt), model)
    eta = state.eta + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    q = state.q + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return SurfaceState(eta, q, state.t + dt)


def mean_elevation(eta):
    """(1/pi) * integral of eta over the disc, the zeta_00 coefficient."""
    eta = np.asarray(eta)
    return float(eta[..., (eta.shape[-2] - 1) // 2, 0].real)


def linear_energy(state: SurfaceState, model: WaterWaveModel):
    """g <eta, eta> / 2 + <q, G_0 q> / 2, conserved by the linearised flow."""
    zero = np.zeros(model.plan.W.shape[:2] + (model.config.J + 1,), dtype=complex)
    G0q = dz_top(model.plan, solve(model.plan, zero, BoundaryData(state.q)))
    pot = np.vdot(state.eta, state.eta).real
    kin = np.vdot(state.q, G0q).real
    return 0.5 * model.g * pot + 0.5 * kin


@dataclass
class SimulationConfig:
    dno: DnoConfig = field(default_factory=DnoConfig)
    dt: float = 1.0 / 1200
    steps: int = 210
    snapshot_every: int = 15
    g: float = 1.0
    forcing: float = 0.0
    output: str | None = None


@dataclass
class Trajectory:
    states: list
    flags: list
    completed: bool = True
    error: str | None = None


def _write_rows(writer, state: SurfaceState):
    M = (state.eta.shape[0] - 1) // 2
    for name, c in (("eta", state.eta), ("q", state.q)):
        for i in range(c.shape[0]):
            for n in range(c.shape[1]):
                v = c[i, n]
                writer.writerow([f"{state.t:.17g}", name, i - M, n, f"{v.real:.17g}", f"{v.imag:.17g}"])


def simulate(config: SimulationConfig, initial: SurfaceState, model: WaterWaveModel | None = None) -> Trajectory:
    """RK4 run recording every ``snapshot_every``-th state; streams CSV when ``output`` is set."""
    model = model or WaterWaveModel(config.dno, g=config.g, forcing=config.forcing)
    states = [initial.copy()]
    handle = None
    writer = None
    if config.output:
        path = Path(config.output)
        path.parent.mkdir(parents=True, exist_ok=True)
        handle = path.open("w", newline="")
        meta = asdict(config)
        meta.pop("output")
        handle.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        writer = csv.writer(handle)
        writer.writerow(["t", "field", "m", "n", "re", "im"])
        _write_rows(writer, initial)
    traj = Trajectory(states, model.flags)
    state = initial
    try:
        for step in range(1, config.steps + 1):
            state = rk4_step(state, config.dt, model)
            if step % config.snapshot_every == 0 or step == config.steps:
                states.append(state.copy())
                if writer:
                    _write_rows(writer, state)
                    handle.flush()
    except (DepthError, FloatingPointError, ValueError) as exc:
        traj.completed = False
        traj.error = str(exc)
    finally:
        if handle:
            handle.close()
    return traj
