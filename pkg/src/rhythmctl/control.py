"""Coevolutionary control law for the external control node.

The control node drives plant node ``i`` through a directed coupling
``a_i`` whose target is chosen so that the plant drive ``P_i + beta*a_i*xc``
equals the drive of the mapped reference node ``R_i``.  Near zero crossings
of ``xc`` the target is clipped to a band of half-width ``delta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import ClosedLoopState, FloatArray, NetworkConfig


@dataclass(frozen=True)
class ControllerConfig:
    """Parameters of the control node and of the adaptation law.

    ``k`` may be a scalar (same gain on every node) or one gain per plant
    node.  A zero gain freezes the coupling at its initial value.
    ``k_hat`` enables the low-pass filtered couplings; with
    ``filtered_feedback`` the filtered value drives the plant instead of
    the raw one.
    """

    alpha_c: float
    alpha_r: float
    gamma: float
    k: float | tuple = 100.0
    delta: float = 1e-3
    k_hat: float | None = None
    filtered_feedback: bool = False

    def __post_init__(self) -> None:
        k = np.atleast_1d(np.asarray(self.k, dtype=np.float64))
        if k.ndim != 1 or np.any(k < 0) or not np.all(np.isfinite(k)):
            raise ConfigError("adaptation gains must be finite and non-negative", "k")
        object.__setattr__(self, "k", float(k[0]) if k.size == 1 else tuple(float(v) for v in k))
        if not self.delta > 0:
            raise ConfigError(f"delta must be positive, got {self.delta}", "delta")
        if self.k_hat is not None and not self.k_hat > 0:
            raise ConfigError(f"k_hat must be positive, got {self.k_hat}", "k_hat")
        if self.filtered_feedback and self.k_hat is None:
            raise ConfigError("filtered_feedback requires k_hat", "filtered_feedback")

    def gains(self, n: int) -> FloatArray:
        if isinstance(self.k, tuple):
            if len(self.k) != n:
                raise ConfigError(f"{len(self.k)} gains given for {n} plant nodes", "k")
            return np.array(self.k, dtype=np.float64)
        return np.full(n, self.k, dtype=np.float64)

    @property
    def filtered(self) -> bool:
        return self.k_hat is not None


@dataclass(frozen=True)
class NodeMapping:
    """Map from plant node index to reference node index (0-based)."""

    targets: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "targets", tuple(int(v) for v in self.targets))

    @classmethod
    def identity(cls, n: int) -> "NodeMapping":
        return cls(tuple(range(n)))

    @classmethod
    def constant(cls, n: int, target: int = 0) -> "NodeMapping":
        return cls((target,) * n)

    @property
    def n(self) -> int:
        return len(self.targets)

    def as_array(self) -> np.ndarray:
        return np.array(self.targets, dtype=np.int64)

    def validate(self, n: int, m: int) -> None:
        if len(self.targets) != n:
            raise ConfigError(f"mapping covers {len(self.targets)} nodes, plant has {n}", "mapping")
        bad = [t for t in self.targets if not 0 <= t < m]
        if bad:
            raise ConfigError(f"mapping image {bad[0]} outside reference range [0, {m})", "mapping")

    def is_identity(self) -> bool:
        return self.targets == tuple(range(len(self.targets)))


def reference_drive(X, ref, alpha_r: float, beta: float, t: float = 0.0) -> FloatArray:
    """Argument of S for every reference node: ``alpha_r X + beta B(t) X``."""
    X = np.asarray(X, dtype=np.float64)
    return alpha_r * X + beta * (ref.adjacency_at(t) @ X)


def plant_drive(x, plant: NetworkConfig, alpha_c: float) -> FloatArray:
    """Uncontrolled plant drive ``alpha_c x + beta A x``."""
    x = np.asarray(x, dtype=np.float64)
    return alpha_c * x + plant.beta * (plant.adjacency @ x)


def cancellation_terms(state: ClosedLoopState, plant: NetworkConfig, ref, ctrl: ControllerConfig,
                       mapping: NodeMapping, t: float = 0.0) -> FloatArray:
    """All ``F_i = R_{m(i)} - P_i`` at once."""
    mapping.validate(state.x.size, state.X.size)
    R = reference_drive(state.X, ref, ctrl.alpha_r, plant.beta, t)
    return R[mapping.as_array()] - plant_drive(state.x, plant, ctrl.alpha_c)


def cancellation_term(i: int, state: ClosedLoopState, plant: NetworkConfig, ref, ctrl: ControllerConfig,
                      mapping: NodeMapping, t: float = 0.0) -> float:
    """Mismatch between the mapped reference drive and the plant drive of node ``i``.

    With identity mapping this is
    ``alpha_r eX_i + (alpha_r - alpha_c) x_i + beta sum_j (B_ij eX_j + (B_ij - A_ij) x_j)``.
    """
    return float(cancellation_terms(state, plant, ref, ctrl, mapping, t)[i])


def sliding_target(F, xc: float, beta: float, delta: float):
    """Desingularized coupling target.

    ``F/(beta xc)`` outside the band ``|xc| < delta``; inside the band the
    divisor is frozen at ``+delta`` for ``xc >= 0`` and ``-delta`` otherwise.
    Points ``xc = +-delta`` belong to the outer branch.
    """
    if abs(xc) >= delta:
        denom = beta * xc
    elif xc >= 0.0:
        denom = beta * delta
    else:
        denom = -beta * delta
    out = np.asarray(F, dtype=np.float64) / denom
    return float(out) if out.ndim == 0 else out


def coupling_rhs(a, a_star, k):
    return k * (a_star - a)


def lowpass_rhs(a_hat, a, k_hat):
    return k_hat * (a - a_hat)


def exact_cancellation_rhs(eX, eY, epsilon: float):
    """Error dynamics once the nonlinear terms cancel exactly."""
    eX = np.asarray(eX, dtype=np.float64)
    eY = np.asarray(eY, dtype=np.float64)
    if eX.shape != eY.shape:
        raise ConfigError("eX and eY must have equal length")
    return -eX - eY, epsilon * (eX - eY)


def exact_cancellation_rates(epsilon: float) -> tuple[float, float]:
    """Eigenvalues (slow, fast) of [[-1, -1], [eps, -eps]], both real and negative."""
    tr = -(1.0 + epsilon)
    det = 2.0 * epsilon
    disc = tr * tr - 4.0 * det
    if disc < 0:
        re = tr / 2.0
        return re, re
    root = np.sqrt(disc)
    # stable form for the small root
    fast = (tr - root) / 2.0
    slow = det / fast
    return float(slow), float(fast)
