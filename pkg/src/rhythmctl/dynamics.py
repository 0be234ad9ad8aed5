"""Right-hand sides of the network ODEs and a fixed-step RK4 integrator."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .control import (
    ControllerConfig,
    NodeMapping,
    cancellation_terms,
    coupling_rhs,
    lowpass_rhs,
    sliding_target,
)
from .errors import ConfigError, IntegrationBlowup
from .model import (
    ClosedLoopState,
    FloatArray,
    NetworkConfig,
    StateLayout,
    TimeVaryingNetwork,
    Trajectory,
)

logger = logging.getLogger(__name__)

DEFAULT_DT = 1e-3

_LAW_CODES = {None: _kernels.LAW_NONE, "two-harmonic": _kernels.LAW_TWO_HARMONIC}


def sigmoid(u):
    """Odd sigmoid S(u) = tanh(u)."""
    return np.tanh(u)


def open_loop_rhs(t: float, x, y, cfg: NetworkConfig | TimeVaryingNetwork):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != (cfg.n,) or y.shape != (cfg.n,):
        raise ConfigError(f"expected states of length {cfg.n}, got {x.shape} and {y.shape}")
    drive = cfg.alpha * x + cfg.beta * (cfg.adjacency_at(t) @ x)
    return -x - y + sigmoid(drive), cfg.epsilon * (x - y)


@dataclass(frozen=True)
class ClosedLoopSystem:
    """Plant, reference and control node wired together.

    ``plant_model`` / ``ref_model`` are the matrices the controller believes
    in when it computes the cancellation term; they default to the true
    ones and differ only in robustness experiments.
    """

    plant: NetworkConfig
    ref: NetworkConfig | TimeVaryingNetwork
    ctrl: ControllerConfig
    mapping: NodeMapping
    plant_model: NetworkConfig | None = None
    ref_model: NetworkConfig | TimeVaryingNetwork | None = None

    def __post_init__(self) -> None:
        self.mapping.validate(self.plant.n, self.ref.n)
        if self.plant_model is not None and self.plant_model.n != self.plant.n:
            raise ConfigError("plant_model size differs from plant", "plant_model")
        if self.ref_model is not None and self.ref_model.n != self.ref.n:
            raise ConfigError("ref_model size differs from reference", "ref_model")
        if self.ref_model is not None and self.ref_model.law != self.ref.law:
            raise ConfigError("reference model must share the reference time law", "ref_model")
        self.ctrl.gains(self.plant.n)

    @property
    def layout(self) -> StateLayout:
        return StateLayout(self.plant.n, self.ref.n, closed_loop=True, filtered=self.ctrl.filtered)

    def rhs(self, t: float, vec) -> FloatArray:
        state = ClosedLoopState.from_vector(vec, self.layout)
        return closed_loop_rhs(t, state, self.plant, self.ref, self.ctrl, self.mapping,
                               self.plant_model, self.ref_model)


def closed_loop_rhs(t: float, state: ClosedLoopState, plant: NetworkConfig, ref, ctrl: ControllerConfig,
                    mapping: NodeMapping, plant_model: NetworkConfig | None = None,
                    ref_model=None) -> FloatArray:
    """Derivative of the closed-loop state, flattened in the standard layout.

    The plant and the controller both use ``ctrl.alpha_c``; the reference
    uses ``ctrl.alpha_r``.  ``beta`` and ``epsilon`` come from ``plant``.
    """
    n, m = state.x.size, state.X.size
    if n != plant.n or m != ref.n:
        raise ConfigError(f"state sizes ({n}, {m}) do not match plant/reference ({plant.n}, {ref.n})")
    if ctrl.filtered != (state.a_hat is not None):
        raise ConfigError("filtered couplings present iff k_hat is configured")
    mapping.validate(n, m)
    beta, eps = plant.beta, plant.epsilon
    x, y, X, Y = state.x, state.y, state.X, state.Y
    xc, yc = state.xc, state.yc

    a_drive = state.a_hat if ctrl.filtered_feedback else state.a
    dx = -x - y + sigmoid(ctrl.alpha_c * x + beta * (plant.adjacency @ x) + beta * a_drive * xc)
    dy = eps * (x - y)
    dxc = -xc - yc + sigmoid(ctrl.alpha_c * xc + beta * ctrl.gamma * xc)
    dyc = eps * (xc - yc)
    dX = -X - Y + sigmoid(ctrl.alpha_r * X + beta * (ref.adjacency_at(t) @ X))
    dY = eps * (X - Y)

    F = cancellation_terms(state, plant_model or plant, ref_model or ref, ctrl, mapping, t)
    a_star = sliding_target(F, xc, beta, ctrl.delta)
    da = coupling_rhs(state.a, a_star, ctrl.gains(n))
    parts = [dx, dy, [dxc, dyc], da, dX, dY]
    if ctrl.filtered:
        parts.append(lowpass_rhs(state.a_hat, state.a, ctrl.k_hat))
    return np.concatenate(parts)


def rk4_step(rhs: Callable, state, t: float, dt: float) -> FloatArray:
    """One classical Runge-Kutta step of ``ds/dt = rhs(t, s)``."""
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}", "dt")
    s = np.asarray(state, dtype=np.float64)

    def stage(tt, ss):
        d = np.asarray(rhs(tt, ss), dtype=np.float64)
        bad = np.flatnonzero(~np.isfinite(d))
        if bad.size:
            raise IntegrationBlowup(t, int(bad[0]))
        return d

    k1 = stage(t, s)
    k2 = stage(t + 0.5 * dt, s + 0.5 * dt * k1)
    k3 = stage(t + 0.5 * dt, s + 0.5 * dt * k2)
    k4 = stage(t + dt, s + dt * k3)
    return s + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _step_count(dt: float, t_end: float, stride: int) -> int:
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}", "dt")
    if t_end < 0:
        raise ConfigError(f"t_end must be non-negative, got {t_end}", "t_end")
    if int(stride) != stride or stride < 1:
        raise ConfigError(f"sample_stride must be a positive integer, got {stride}", "sample_stride")
    return int(round(t_end / dt))


def ce2_series(samples: FloatArray, layout: StateLayout, mapping: NodeMapping) -> FloatArray:
    """Cumulative square error sum_i (X_m(i) - x_i)^2 for every sample."""
    x = samples[:, layout.x]
    X = samples[:, layout.X][:, mapping.as_array()]
    return np.sum((X - x) ** 2, axis=1)


def simulate(system, initial, dt: float = DEFAULT_DT, t_end: float = 100.0, sample_stride: int = 1,
             t0: float = 0.0, backend: str = "auto") -> Trajectory:
    """Integrate ``system`` from ``initial`` with fixed-step RK4.

    ``system`` is a :class:`ClosedLoopSystem`, a (possibly time-varying)
    network for open-loop runs, or any callable ``rhs(t, s)``.  Every
    ``sample_stride``-th step is recorded, so the trajectory holds
    ``round(t_end/dt) // sample_stride + 1`` samples.  ``backend`` selects
    the compiled loop (``"compiled"``), the pure-numpy path (``"python"``),
    or compiled whenever available (``"auto"``).
    """
    nsteps = _step_count(dt, t_end, sample_stride)
    stride = int(sample_stride)
    if backend not in ("auto", "compiled", "python"):
        raise ConfigError(f"unknown backend {backend!r}", "backend")

    if isinstance(system, ClosedLoopSystem):
        layout = system.layout
        s0 = initial.to_vector() if isinstance(initial, ClosedLoopState) else np.asarray(initial, np.float64)
        if s0.size != layout.size:
            raise ConfigError(f"initial state has {s0.size} entries, layout expects {layout.size}")
        kmax = float(np.max(system.ctrl.gains(system.plant.n), initial=0.0))
        if kmax > 0 and dt > 1.0 / (10.0 * kmax):
            logger.warning("dt=%g exceeds the guidance 1/(10 max k)=%g", dt, 1.0 / (10.0 * kmax))
        if backend == "python":
            samples = _python_loop(system.rhs, s0, t0, dt, nsteps, stride)
        else:
            samples = _compiled_closed(system, s0, t0, dt, nsteps, stride)
        traj = Trajectory(_times(t0, dt, nsteps, stride), samples, layout, dt)
        traj.ce2 = ce2_series(samples, layout, system.mapping)
        return traj

    if isinstance(system, (NetworkConfig, TimeVaryingNetwork)):
        n = system.n
        s0 = np.asarray(initial, dtype=np.float64).ravel()
        if s0.size != 2 * n:
            raise ConfigError(f"open-loop initial state needs {2 * n} entries, got {s0.size}")
        layout = StateLayout(n)
        if backend == "python":
            def rhs(t, s):
                return np.concatenate(open_loop_rhs(t, s[:n], s[n:], system))
            samples = _python_loop(rhs, s0, t0, dt, nsteps, stride)
        else:
            out, status, step, idx = _kernels.integrate_open(
                s0, float(t0), float(dt), nsteps, stride, np.ascontiguousarray(system.adjacency),
                system.alpha, system.beta, system.epsilon, _LAW_CODES[system.law])
            if status:
                raise IntegrationBlowup(t0 + step * dt, idx)
            samples = out
        return Trajectory(_times(t0, dt, nsteps, stride), samples, layout, dt)

    if callable(system):
        s0 = np.atleast_1d(np.asarray(initial, dtype=np.float64))
        samples = _python_loop(system, s0, t0, dt, nsteps, stride)
        return Trajectory(_times(t0, dt, nsteps, stride), samples, StateLayout(s0.size), dt)

    raise ConfigError(f"cannot simulate object of type {type(system).__name__}")


def _times(t0: float, dt: float, nsteps: int, stride: int) -> FloatArray:
    return t0 + dt * stride * np.arange(nsteps // stride + 1, dtype=np.float64)


def _python_loop(rhs, s0, t0, dt, nsteps, stride) -> FloatArray:
    out = np.empty((nsteps // stride + 1, s0.size))
    s = s0.copy()
    out[0] = s
    for step in range(nsteps):
        s = rk4_step(rhs, s, t0 + step * dt, dt)
        if (step + 1) % stride == 0:
            out[(step + 1) // stride] = s
    return out


def _compiled_closed(system: ClosedLoopSystem, s0, t0, dt, nsteps, stride) -> FloatArray:
    plant, ref, ctrl = system.plant, system.ref, system.ctrl
    pm = system.plant_model or plant
    rm = system.ref_model or ref
    out, status, step, idx = _kernels.integrate_closed(
        s0, float(t0), float(dt), nsteps, stride, plant.n, ref.n,
        np.ascontiguousarray(plant.adjacency), np.ascontiguousarray(ref.adjacency),
        np.ascontiguousarray(pm.adjacency), np.ascontiguousarray(rm.adjacency),
        ctrl.alpha_c, ctrl.alpha_r, plant.beta, ctrl.gamma, plant.epsilon,
        ctrl.gains(plant.n), ctrl.delta, ctrl.k_hat or 0.0, ctrl.filtered, ctrl.filtered_feedback,
        system.mapping.as_array(), _LAW_CODES[ref.law],
        system.plant_model is None and system.ref_model is None)
    if status:
        raise IntegrationBlowup(t0 + step * dt, idx)
    return out
