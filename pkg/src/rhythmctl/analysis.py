"""Post-processing of trajectories: tracking error, rhythm extraction, tail metrics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .design import RhythmicProfile, TWO_PI
from .errors import ConfigError, NotRhythmicError, PreconditionError
from .model import FloatArray, Trajectory

FLAT_PTP = 1e-6


@dataclass
class ScenarioResult:
    """Summary metrics of one scenario run.

    ``steady_error_level`` is max over nodes of the time-averaged ``|e_X|``
    in the tail window; ``steady_error_peak`` is the largest ``|e_X|`` seen
    there.  ``decay_rate`` is the fitted exponential rate of CE^2 (twice the
    rate of the error amplitude).
    """

    steady_ce2_mean: float
    steady_ce2_max: float
    sync_spread: float
    steady_error_level: float
    steady_error_peak: float
    decay_rate: float | None = None
    f_bound: float | None = None
    extracted_profile: RhythmicProfile | None = None
    ce2_deviation: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["extracted_profile"] = self.extracted_profile.to_dict() if self.extracted_profile else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioResult":
        d = dict(d)
        prof = d.get("extracted_profile")
        d["extracted_profile"] = RhythmicProfile.from_dict(prof) if prof else None
        return cls(**d)


def cumulative_square_error(X, x, mapping=None):
    """sum_i (X_m(i) - x_i)^2 over the last axis; ``mapping`` indexes ``X``."""
    X = np.asarray(X, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if mapping is not None:
        X = X[..., np.asarray(getattr(mapping, "targets", mapping), dtype=np.int64)]
    if X.shape != x.shape:
        raise ConfigError(f"mapped reference shape {X.shape} differs from plant shape {x.shape}")
    out = np.sum((X - x) ** 2, axis=-1)
    return float(out) if out.ndim == 0 else out


def tail_start(count: int, fraction: float) -> int:
    """Index of the first sample in the final ``fraction`` of a sampled horizon."""
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"fraction must lie in (0, 1), got {fraction}")
    return int(math.floor((1.0 - fraction) * (count - 1) + 1e-9))


def sync_spread(x) -> float:
    """Largest RMS difference over all node pairs (columns of ``x``)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[1]
    best = 0.0
    for i in range(n):
        diff = x[:, i + 1:] - x[:, [i]]
        if diff.size:
            best = max(best, float(np.sqrt(np.mean(diff ** 2, axis=0)).max()))
    return best


def fit_decay_rate(t, values) -> float:
    """Least-squares exponential rate: ``values ~ C exp(-rate t)``."""
    t = np.asarray(t, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if np.any(values <= 0):
        raise ConfigError("decay fit needs strictly positive values")
    slope = np.polyfit(t, np.log(values), 1)[0]
    return float(-slope)


def tail_metrics(traj: Trajectory, tail_fraction: float = 0.2, mapping=None) -> dict:
    """Steady-state metrics over the final ``tail_fraction`` of a closed-loop run."""
    if traj.ce2 is None:
        raise ConfigError("tail metrics need a closed-loop trajectory with CE^2")
    start = tail_start(len(traj), tail_fraction)
    ce2 = traj.ce2
    tail = ce2[start:]
    x = traj.x
    X = traj.channel("X")
    if mapping is not None:
        X = X[:, mapping.as_array()]
    err = np.abs(X[start:] - x[start:])

    decay = None
    seg = ce2[:start]
    if seg.size >= 2 and np.all(seg > 0):
        first = int(np.argmax(seg))
        seg_t = traj.times[first:start]
        seg = seg[first:]
        if seg.size >= 2 and np.all(np.diff(seg) <= 1e-12 * seg[0]):
            decay = fit_decay_rate(seg_t, seg)

    return {
        "steady_ce2_mean": float(tail.mean()),
        "steady_ce2_max": float(tail.max()),
        "sync_spread": sync_spread(x[start:]),
        "steady_error_level": float(err.mean(axis=0).max()),
        "steady_error_peak": float(err.max()),
        "decay_rate": decay,
    }


def _upward_crossings(t, s) -> FloatArray:
    idx = np.flatnonzero((s[:-1] < 0) & (s[1:] >= 0))
    frac = s[idx] / (s[idx] - s[idx + 1])
    return idx, t[idx] + frac * (t[idx + 1] - t[idx])


def _circular_lag(ref, sig) -> float:
    """Lag L (in samples, sub-sample refined) maximizing sum_t sig[t] ref[t + L]."""
    corr = np.fft.irfft(np.conj(np.fft.rfft(sig)) * np.fft.rfft(ref), n=ref.size)
    k = int(np.argmax(corr))
    c0, c1, c2 = corr[k - 1], corr[k], corr[(k + 1) % corr.size]
    denom = c0 - 2.0 * c1 + c2
    shift = 0.5 * (c0 - c2) / denom if denom != 0 else 0.0
    return k + shift


def extract_profile(traj, transient_fraction: float = 0.5, channels=None,
                    min_periods: int = 5) -> RhythmicProfile:
    """Rhythmic profile of the fast states after discarding a transient.

    The period comes from upward zero crossings of the dominant (largest
    peak-to-peak) node, amplitudes from peak-to-peak ratios and phases from
    circular cross-correlation against the dominant node over a whole
    number of periods.  When the dominant node is not node 0 the result is
    permuted so it comes first and ``permutation`` records the order.
    """
    if isinstance(traj, Trajectory):
        times = traj.times
        data = traj.x if channels is None else traj.samples[:, channels]
    else:
        times, data = traj
        times = np.asarray(times, dtype=np.float64)
        data = np.asarray(data, dtype=np.float64)
        if channels is not None:
            data = data[:, channels]
    if data.ndim == 1:
        data = data[:, None]
    if not 0.0 <= transient_fraction < 1.0:
        raise ConfigError("transient_fraction must lie in [0, 1)")
    start = int(math.floor(transient_fraction * (times.size - 1)))
    t = times[start:]
    seg = data[start:]

    ptp = np.ptp(seg, axis=0)
    for node, p in enumerate(ptp):
        if p < FLAT_PTP:
            raise NotRhythmicError(node, f"node {node} peak-to-peak {p:.3g} is below {FLAT_PTP}")
    dom = int(np.argmax(ptp))
    centered = seg - seg.mean(axis=0)
    idx, crossings = _upward_crossings(t, centered[:, dom])
    if crossings.size < min_periods + 1:
        raise PreconditionError(
            f"only {max(crossings.size - 1, 0)} periods after the transient, need {min_periods}")
    period = float(np.mean(np.diff(crossings)))

    whole = seg[idx[0] + 1:idx[-1] + 1]
    whole = whole - whole.mean(axis=0)
    dt = float(t[1] - t[0])
    theta = np.empty(data.shape[1])
    for i in range(data.shape[1]):
        lag = _circular_lag(whole[:, dom], whole[:, i])
        theta[i] = TWO_PI * lag * dt / period
    amp = np.ptp(whole, axis=0)
    # amplitudes over whole periods decide the final dominant node
    dom = int(np.argmax(amp))
    rho = amp / amp[dom]
    theta = np.mod(theta - theta[dom], TWO_PI)

    perm = [dom] + [i for i in range(data.shape[1]) if i != dom]
    return RhythmicProfile(rho[perm], theta[perm], period, tuple(perm) if dom != 0 else None)


def profile_error(measured: RhythmicProfile, expected: RhythmicProfile) -> tuple[float, float]:
    """Largest relative amplitude error and largest wrapped phase error per node.

    Both profiles are first put back into original node order and
    referenced to node 0, so a different choice of dominant node does not
    count as an error.
    """
    def unpermuted(p: RhythmicProfile) -> np.ndarray:
        w = p.rho * np.exp(1j * p.theta)
        out = np.empty_like(w)
        out[list(p.permutation or range(p.n))] = w
        return out / out[0]

    a, b = unpermuted(measured), unpermuted(expected)
    if a.shape != b.shape:
        raise ConfigError("profiles have different node counts")
    amp = np.abs(b)
    mask = amp > 0
    rho_err = float(np.max(np.abs(np.abs(a[mask]) - amp[mask]) / amp[mask])) if mask.any() else 0.0
    theta_err = float(np.max(np.abs(np.angle(a[mask] / b[mask])))) if mask.any() else 0.0
    return rho_err, theta_err
