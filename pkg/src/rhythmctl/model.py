"""Shared data types: network configurations, state layout, trajectories.

Closed-loop state vectors are flat and always laid out as::

    [ x (N) | y (N) | xc | yc | a (N) | X (M) | Y (M) | a_hat (N, optional) ]

Open-loop state vectors are ``[ x (N) | y (N) ]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError

FloatArray = NDArray[np.float64]

TIME_LAWS = ("two-harmonic",)


def _frozen_array(values, name: str, ndim: int) -> FloatArray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise ConfigError(f"expected {ndim}-d array, got shape {arr.shape}", name)
    arr.setflags(write=False)
    return arr


def harmonic_factor(t):
    """Scalar modulation ``1 + sin(5t)/3 + cos(3t)/3``; lies in [1/3, 5/3]."""
    return 1.0 + np.sin(5.0 * t) / 3.0 + np.cos(3.0 * t) / 3.0


@dataclass(frozen=True)
class NetworkConfig:
    """Oscillator network: adjacency matrix plus global gains."""

    adjacency: FloatArray
    alpha: float
    beta: float
    epsilon: float

    def __post_init__(self) -> None:
        adj = _frozen_array(self.adjacency, "adjacency", 2)
        if adj.shape[0] != adj.shape[1] or adj.shape[0] < 1:
            raise ConfigError(f"adjacency must be square, got {adj.shape}", "adjacency")
        if not np.all(np.isfinite(adj)):
            raise ConfigError("adjacency entries must be finite", "adjacency")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}", "epsilon")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("alpha and beta must be non-negative")
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    law = None

    def adjacency_at(self, t: float) -> FloatArray:
        return self.adjacency

    def replace(self, **changes) -> "NetworkConfig":
        fields = dict(adjacency=self.adjacency, alpha=self.alpha, beta=self.beta, epsilon=self.epsilon)
        fields.update(changes)
        return NetworkConfig(**fields)


@dataclass(frozen=True)
class TimeVaryingNetwork:
    """A network whose adjacency is ``base.adjacency`` scaled by a time law."""

    base: NetworkConfig
    law: str = "two-harmonic"

    def __post_init__(self) -> None:
        if self.law not in TIME_LAWS:
            raise ConfigError(f"unknown time law {self.law!r}", "time_varying")

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def adjacency(self) -> FloatArray:
        return self.base.adjacency

    @property
    def alpha(self) -> float:
        return self.base.alpha

    @property
    def beta(self) -> float:
        return self.base.beta

    @property
    def epsilon(self) -> float:
        return self.base.epsilon

    def adjacency_at(self, t: float) -> FloatArray:
        return self.base.adjacency * harmonic_factor(t)


@dataclass(frozen=True)
class StateLayout:
    """Index bookkeeping for flat state vectors."""

    n: int
    m: int = 0
    closed_loop: bool = False
    filtered: bool = False

    @property
    def size(self) -> int:
        if not self.closed_loop:
            return 2 * self.n
        return 3 * self.n + 2 + 2 * self.m + (self.n if self.filtered else 0)

    # slices into a state vector (or the last axis of a sample matrix)
    @property
    def x(self) -> slice:
        return slice(0, self.n)

    @property
    def y(self) -> slice:
        return slice(self.n, 2 * self.n)

    @property
    def xc(self) -> int:
        self._need_closed()
        return 2 * self.n

    @property
    def yc(self) -> int:
        self._need_closed()
        return 2 * self.n + 1

    @property
    def a(self) -> slice:
        self._need_closed()
        return slice(2 * self.n + 2, 3 * self.n + 2)

    @property
    def X(self) -> slice:
        self._need_closed()
        s = 3 * self.n + 2
        return slice(s, s + self.m)

    @property
    def Y(self) -> slice:
        self._need_closed()
        s = 3 * self.n + 2 + self.m
        return slice(s, s + self.m)

    @property
    def a_hat(self) -> slice:
        if not (self.closed_loop and self.filtered):
            raise ConfigError("layout has no filtered couplings")
        s = 3 * self.n + 2 + 2 * self.m
        return slice(s, s + self.n)

    def _need_closed(self) -> None:
        if not self.closed_loop:
            raise ConfigError("open-loop layout has no controller/reference block")

    def column_names(self) -> list[str]:
        n, m = self.n, self.m
        names = [f"x_{i + 1}" for i in range(n)] + [f"y_{i + 1}" for i in range(n)]
        if self.closed_loop:
            names += ["xc", "yc"] + [f"a_{i + 1}" for i in range(n)]
            names += [f"X_{j + 1}" for j in range(m)] + [f"Y_{j + 1}" for j in range(m)]
            if self.filtered:
                names += [f"ahat_{i + 1}" for i in range(n)]
        return names


@dataclass
class ClosedLoopState:
    """Structured view of a closed-loop state vector."""

    x: FloatArray
    y: FloatArray
    xc: float
    yc: float
    a: FloatArray
    X: FloatArray
    Y: FloatArray
    a_hat: FloatArray | None = None

    def __post_init__(self) -> None:
        for name in ("x", "y", "a", "X", "Y"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if self.a_hat is not None:
            self.a_hat = np.asarray(self.a_hat, dtype=np.float64)
        n, m = self.x.size, self.X.size
        if self.y.size != n or self.a.size != n:
            raise ConfigError("x, y and a must share length N")
        if self.Y.size != m:
            raise ConfigError("X and Y must share length M")
        if self.a_hat is not None and self.a_hat.size != n:
            raise ConfigError("a_hat must have length N")
        self.xc = float(self.xc)
        self.yc = float(self.yc)

    @property
    def layout(self) -> StateLayout:
        return StateLayout(self.x.size, self.X.size, closed_loop=True, filtered=self.a_hat is not None)

    def to_vector(self) -> FloatArray:
        parts = [self.x, self.y, [self.xc, self.yc], self.a, self.X, self.Y]
        if self.a_hat is not None:
            parts.append(self.a_hat)
        return np.concatenate(parts).astype(np.float64)

    @classmethod
    def from_vector(cls, vec, layout: StateLayout) -> "ClosedLoopState":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.size != layout.size:
            raise ConfigError(f"state vector has {vec.size} entries, layout expects {layout.size}")
        return cls(
            x=vec[layout.x].copy(), y=vec[layout.y].copy(),
            xc=vec[layout.xc], yc=vec[layout.yc], a=vec[layout.a].copy(),
            X=vec[layout.X].copy(), Y=vec[layout.Y].copy(),
            a_hat=vec[layout.a_hat].copy() if layout.filtered else None,
        )


@dataclass
class Trajectory:
    """Sampled solution: ``samples[k]`` is the state at ``times[k]``."""

    times: FloatArray
    samples: FloatArray
    layout: StateLayout
    dt: float
    ce2: FloatArray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=np.float64)
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 2 or self.samples.shape[0] != self.times.size:
            raise ConfigError("times and samples must have equal length")

    def __len__(self) -> int:
        return self.times.size

    def channel(self, name: str) -> FloatArray:
        idx = getattr(self.layout, name)
        return self.samples[:, idx]

    @property
    def x(self) -> FloatArray:
        return self.samples[:, self.layout.x]
