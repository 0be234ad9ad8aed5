"""Reproducible experiment definitions and their end-to-end execution."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import ScenarioResult, extract_profile, tail_metrics, tail_start
from .control import ControllerConfig, NodeMapping
from .design import (
    RhythmicProfile,
    controller_gamma,
    design_complex_leading,
    design_real_leading,
    random_plant,
    random_profile,
    random_tail,
)
from .dynamics import DEFAULT_DT, ClosedLoopSystem, simulate
from .errors import ConfigError, IntegrationBlowup, NotRhythmicError, PreconditionError
from .model import ClosedLoopState, NetworkConfig, StateLayout, TimeVaryingNetwork, Trajectory, harmonic_factor

logger = logging.getLogger(__name__)

KINDS = (
    "same-topology",
    "different-topology",
    "complete-sync",
    "time-varying",
    "perturbed",
    "lowpass",
    "open-loop-baseline",
)
IDENTITY_KINDS = ("same-topology", "different-topology", "time-varying", "perturbed", "lowpass",
                  "open-loop-baseline")

# baseline parameter set
BASE_DEFAULTS = dict(n=5, k=100.0, alpha_p=0.52, alpha_r=0.52, alpha_c=0.02, beta=0.5,
                     delta=1e-3, epsilon=0.01)
COMPLETE_SYNC_DEFAULTS = dict(n=5, m=1, alpha_r=0.572653, alpha_c=0.47)
LOWPASS_K_HAT = 0.5

# numerical and construction choices
EXTRA_DEFAULTS = dict(
    t_end=400.0,
    dt=DEFAULT_DT,
    sample_stride=None,
    gamma=None,
    gamma_margin=0.05,
    ref_mu1=1.0,
    ref_mu1_imag=None,
    ref_margin=0.01,
    plant_floor=0.05,
    zeta=None,
    k_hat=None,
    filtered_feedback=False,
    mapping=None,
    m=None,
)
MAX_SAMPLES = 10_000
OVERRIDE_KEYS = frozenset(BASE_DEFAULTS) | frozenset(COMPLETE_SYNC_DEFAULTS) | frozenset(EXTRA_DEFAULTS)


def time_varying_B(B0, t: float):
    """Reference adjacency scaled by ``1 + sin(5t)/3 + cos(3t)/3``."""
    return np.asarray(B0, dtype=np.float64) * harmonic_factor(t)


def perturb_matrices(A, B, zeta_lo: float, zeta_hi: float, seed):
    """Add independent uniform draws from [zeta_lo, zeta_hi] to every non-zero entry."""
    if zeta_lo > zeta_hi:
        raise ConfigError(f"zeta range [{zeta_lo}, {zeta_hi}] is empty", "zeta")
    rng = np.random.default_rng(seed)
    out = []
    for M in (A, B):
        M = np.array(M, dtype=np.float64)
        mask = M != 0
        M[mask] += rng.uniform(zeta_lo, zeta_hi, size=int(mask.sum()))
        out.append(M)
    return out[0], out[1]


@dataclass
class Scenario:
    kind: str
    seed: int
    plant: NetworkConfig
    reference: NetworkConfig | TimeVaryingNetwork
    ctrl: ControllerConfig
    mapping: NodeMapping
    initial: ClosedLoopState
    dt: float
    t_end: float
    sample_stride: int
    params: dict
    reference_profile: RhythmicProfile | None = None
    perturbation: tuple[float, float] | None = None
    perturbation_seed: int | None = None
    time_varying: str | None = None
    overrides: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.plant.n

    @property
    def m(self) -> int:
        return self.reference.n

    @property
    def identity(self) -> str:
        extra = ",".join(f"{k}={self.overrides[k]}" for k in sorted(self.overrides))
        return f"{self.kind}[seed={self.seed}{',' + extra if extra else ''}]"

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}", "kind")
        if self.kind == "complete-sync":
            if self.m != 1:
                raise ConfigError(f"complete-sync needs a one-node reference, got m={self.m}", "m")
            if self.mapping != NodeMapping.constant(self.n):
                raise ConfigError("complete-sync needs the constant mapping", "mapping")
        elif self.kind in IDENTITY_KINDS:
            if self.n != self.m:
                raise ConfigError(f"{self.kind} needs n == m, got n={self.n}, m={self.m}", "m")
            if not self.mapping.is_identity():
                raise ConfigError(f"{self.kind} needs the identity mapping", "mapping")
        self.mapping.validate(self.n, self.m)

    def system(self) -> ClosedLoopSystem:
        return ClosedLoopSystem(self.plant, self.reference, self.ctrl, self.mapping)

    def to_dict(self) -> dict:
        """Fully resolved, JSON-ready description (node indices 1-based)."""
        overrides = dict(self.overrides)
        if overrides.get("mapping") is not None:
            overrides["mapping"] = [int(v) + 1 for v in overrides["mapping"]]
        return {
            "kind": self.kind,
            "seed": self.seed,
            "n": self.n,
            "m": self.m,
            "parameters": dict(self.params),
            "overrides": overrides,
            "plant_adjacency": self.plant.adjacency.tolist(),
            "reference_adjacency": self.reference.adjacency.tolist(),
            "reference_profile": self.reference_profile.to_dict() if self.reference_profile else None,
            "mapping": [int(v) + 1 for v in self.mapping.targets],
            "initial_state": self.initial.to_vector().tolist(),
            "perturbation": list(self.perturbation) if self.perturbation else None,
            "time_varying": self.time_varying,
        }


def _resolve(kind: str, overrides: dict) -> dict:
    unknown = sorted(set(overrides) - OVERRIDE_KEYS)
    if unknown:
        raise ConfigError("unknown override", unknown[0])
    p = dict(BASE_DEFAULTS)
    p.update(EXTRA_DEFAULTS)
    if kind == "complete-sync":
        p.update(COMPLETE_SYNC_DEFAULTS)
    if kind == "lowpass":
        p["k_hat"] = LOWPASS_K_HAT
    if kind == "perturbed":
        p["zeta"] = (-1e-3, 1e-3)
    p.update(overrides)
    if p["m"] is None:
        p["m"] = 1 if kind == "complete-sync" else p["n"]
    if p["zeta"] is not None and kind != "perturbed":
        raise ConfigError("zeta applies to the perturbed kind only", "zeta")
    for key in ("n", "m"):
        if int(p[key]) != p[key] or p[key] < 1:
            raise ConfigError(f"must be a positive integer, got {p[key]!r}", key)
        p[key] = int(p[key])
    if not p["t_end"] > 0:
        raise ConfigError("t_end must be positive", "t_end")
    if not p["dt"] > 0:
        raise ConfigError("dt must be positive", "dt")
    if not p["beta"] > 0:
        raise ConfigError("beta must be positive", "beta")
    return p


def build_scenario(kind: str, overrides: dict | None = None, seed: int = 0) -> Scenario:
    """Assemble a fully populated scenario of the given kind.

    The baseline parameter set supplies the defaults; ``overrides`` may replace any of
    them (see ``OVERRIDE_KEYS``).  Every random draw comes from ``seed``.
    """
    if kind not in KINDS:
        raise ConfigError(f"unknown scenario kind {kind!r}", "kind")
    overrides = dict(overrides or {})
    p = _resolve(kind, overrides)
    n, m = p["n"], p["m"]
    beta, eps = float(p["beta"]), float(p["epsilon"])
    ref_rng, plant_ss, ic_rng, pert_ss = (
        np.random.default_rng(s) for s in np.random.SeedSequence(int(seed)).spawn(4))

    profile = None
    mu1 = float(p["ref_mu1"])
    if kind == "complete-sync":
        # one self-coupled node placed ref_margin past its Hopf point
        b = (1.0 + eps + p["ref_margin"] - p["alpha_r"]) / beta
        B = np.full((m, m), b) if m == 1 else None
        if B is None:
            raise ConfigError(f"complete-sync needs m = 1, got m={m}", "m")
        A = random_plant(n, plant_ss, p["plant_floor"])
    elif kind in ("different-topology", "time-varying"):
        if m < 2:
            raise ConfigError("complex-leading references need m >= 2", "m")
        profile = random_profile(m, ref_rng, phases=True)
        v = p["ref_mu1_imag"] if p["ref_mu1_imag"] is not None else float(ref_rng.uniform(0.1, 0.5))
        p["ref_mu1_imag"] = v
        B = design_complex_leading(profile, complex(mu1, v), random_tail(mu1, m - 2, ref_rng))
        A = random_plant(n, plant_ss, p["plant_floor"])
    else:
        profile = random_profile(m, ref_rng)
        mu = np.concatenate([[mu1], random_tail(mu1, m - 1, ref_rng)])
        B = design_real_leading(profile, mu)
        if n != m:
            raise ConfigError(f"{kind} reuses the reference topology and needs n == m", "n")
        A = B.copy()

    gamma = p["gamma"]
    if gamma is None:
        gamma = controller_gamma(p["alpha_c"], beta, eps, p["gamma_margin"])
        p["gamma"] = gamma
    ctrl = ControllerConfig(alpha_c=p["alpha_c"], alpha_r=p["alpha_r"], gamma=gamma, k=p["k"],
                            delta=p["delta"], k_hat=p["k_hat"], filtered_feedback=bool(p["filtered_feedback"]))
    if p["mapping"] is not None:
        mapping = NodeMapping(tuple(p["mapping"]))
    elif m == 1:
        mapping = NodeMapping.constant(n)
    else:
        mapping = NodeMapping.identity(n)

    plant = NetworkConfig(A, p["alpha_p"], beta, eps)
    ref_static = NetworkConfig(B, p["alpha_r"], beta, eps)
    law = "two-harmonic" if kind == "time-varying" else None
    reference = TimeVaryingNetwork(ref_static, law) if law else ref_static

    a0 = ic_rng.uniform(0.0, 1.0, n)
    initial = ClosedLoopState(
        x=ic_rng.uniform(-1, 1, n), y=ic_rng.uniform(-1, 1, n),
        xc=ic_rng.uniform(-1, 1), yc=ic_rng.uniform(-1, 1), a=a0,
        X=ic_rng.uniform(-1, 1, m), Y=ic_rng.uniform(-1, 1, m),
        a_hat=a0.copy() if ctrl.filtered else None,
    )

    nsteps = int(round(p["t_end"] / p["dt"]))
    stride = p["sample_stride"] or max(1, math.ceil(nsteps / MAX_SAMPLES))
    p["sample_stride"] = int(stride)
    zeta = tuple(float(z) for z in p["zeta"]) if p["zeta"] is not None else None
    p["zeta"] = list(zeta) if zeta else None
    p["mapping"] = list(mapping.targets)
    params = {k: (float(v) if isinstance(v, (int, float, np.floating)) and not isinstance(v, bool)
                  and k not in ("n", "m", "sample_stride") else v) for k, v in p.items()}

    scenario = Scenario(
        kind=kind, seed=int(seed), plant=plant, reference=reference, ctrl=ctrl, mapping=mapping,
        initial=initial, dt=float(p["dt"]), t_end=float(p["t_end"]), sample_stride=int(stride),
        params=params, reference_profile=profile, perturbation=zeta,
        perturbation_seed=int(pert_ss.integers(2**63)) if zeta else None,
        time_varying=law, overrides=overrides,
    )
    scenario.validate()
    return scenario


def f_bound(traj: Trajectory, system: ClosedLoopSystem) -> float:
    """max_i sup_t |F_i| over the recorded samples, as seen by the controller."""
    plant = system.plant_model or system.plant
    ref = system.ref_model or system.ref
    ctrl = system.ctrl
    x = traj.x
    X = traj.channel("X")
    factor = harmonic_factor(traj.times)[:, None] if ref.law else 1.0
    R = ctrl.alpha_r * X + plant.beta * factor * (X @ ref.adjacency.T)
    P = ctrl.alpha_c * x + plant.beta * (x @ plant.adjacency.T)
    F = R[:, system.mapping.as_array()] - P
    return float(np.max(np.abs(F)))


def _baseline_metrics(times, x, X, mapping: NodeMapping, tail_fraction: float) -> ScenarioResult:
    n, m = x.shape[1], X.shape[1]
    layout = StateLayout(n, m, closed_loop=True)
    samples = np.zeros((times.size, layout.size))
    samples[:, layout.x] = x
    samples[:, layout.X] = X
    pseudo = Trajectory(times, samples, layout, float(times[1] - times[0]) if times.size > 1 else 0.0)
    pseudo.ce2 = np.sum((X[:, mapping.as_array()] - x) ** 2, axis=1)
    return ScenarioResult(**tail_metrics(pseudo, tail_fraction, mapping))


def run_scenario(s: Scenario, tail_fraction: float = 0.2, backend: str = "auto"):
    """Run open-loop baseline, standalone reference and closed loop.

    Returns ``(trajectories, result)``; ``trajectories`` has keys
    ``open_loop``, ``reference`` and (except for the baseline kind)
    ``closed_loop``; perturbed runs add ``nominal``, the matched run with an
    exact controller model.
    """
    s.validate()
    init = s.initial
    kw = dict(dt=s.dt, t_end=s.t_end, sample_stride=s.sample_stride, backend=backend)
    try:
        trajs = {
            "open_loop": simulate(s.plant, np.concatenate([init.x, init.y]), **kw),
            "reference": simulate(s.reference, np.concatenate([init.X, init.Y]), **kw),
        }
        if s.kind == "open-loop-baseline":
            ref = trajs["reference"]
            result = _baseline_metrics(ref.times, trajs["open_loop"].x, ref.x, s.mapping, tail_fraction)
            return trajs, result

        system = s.system()
        closed = simulate(system, init, **kw)
        deviation = None
        if s.perturbation is not None:
            A_p, B_p = perturb_matrices(s.plant.adjacency, s.reference.adjacency, *s.perturbation,
                                        seed=s.perturbation_seed)
            ref_model = s.reference
            if isinstance(ref_model, TimeVaryingNetwork):
                ref_model = TimeVaryingNetwork(ref_model.base.replace(adjacency=B_p), ref_model.law)
            else:
                ref_model = ref_model.replace(adjacency=B_p)
            perturbed_system = ClosedLoopSystem(s.plant, s.reference, s.ctrl, s.mapping,
                                                plant_model=s.plant.replace(adjacency=A_p), ref_model=ref_model)
            trajs["nominal"] = closed
            closed = simulate(perturbed_system, init, **kw)
            system = perturbed_system
            start = tail_start(len(closed), tail_fraction)
            deviation = float(np.mean(np.abs(closed.ce2[start:] - trajs["nominal"].ce2[start:])))
        trajs["closed_loop"] = closed
    except IntegrationBlowup as exc:
        raise IntegrationBlowup(exc.t, exc.index, context=s.identity) from exc

    metrics = tail_metrics(closed, tail_fraction, s.mapping)
    try:
        profile = extract_profile(closed, transient_fraction=0.5, min_periods=2)
    except (NotRhythmicError, PreconditionError) as exc:
        logger.info("%s: no profile extracted (%s)", s.identity, exc)
        profile = None
    result = ScenarioResult(**metrics, f_bound=f_bound(closed, system), extracted_profile=profile,
                            ce2_deviation=deviation)
    return trajs, result
