"""Adjacency design for prescribed rhythmic profiles and spectral checks."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DesignError, NumericalError, PreconditionError
from .model import FloatArray

TWO_PI = 2.0 * np.pi
TIE_RTOL = 1e-9
RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class RhythmicProfile:
    """Relative amplitudes and phases against the dominant node (index 0).

    ``theta`` is the phase lead of each node: node i behaves like
    ``rho_i * sin(w t + theta_i)`` when node 0 behaves like ``sin(w t)``.
    ``permutation[k]`` is the original index of node k when the profile was
    re-ordered to put the dominant node first.
    """

    rho: FloatArray
    theta: FloatArray
    period: float | None = None
    permutation: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        rho = np.array(self.rho, dtype=np.float64).ravel()
        theta = np.mod(np.array(self.theta, dtype=np.float64).ravel(), TWO_PI)
        theta[np.isclose(theta, TWO_PI, rtol=0, atol=1e-12)] = 0.0
        if rho.size == 0 or rho.shape != theta.shape:
            raise ConfigError("rho and theta must be non-empty and of equal length", "profile")
        if abs(rho[0] - 1.0) > 1e-12 or theta[0] > 1e-12:
            raise ConfigError("node 0 must be the reference: rho_0 = 1, theta_0 = 0", "profile")
        if np.any(np.abs(rho) > 1.0 + 1e-12):
            raise ConfigError("relative amplitudes must satisfy |rho_i| <= 1", "profile.rho")
        if self.period is not None and not self.period > 0:
            raise ConfigError("period must be positive", "profile.period")
        rho.setflags(write=False)
        theta.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "theta", theta)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RhythmicProfile):
            return NotImplemented
        return (np.array_equal(self.rho, other.rho) and np.array_equal(self.theta, other.theta)
                and self.period == other.period and self.permutation == other.permutation)

    __hash__ = None

    @property
    def n(self) -> int:
        return self.rho.size

    @property
    def eigenvector(self) -> np.ndarray:
        return self.rho * np.exp(1j * self.theta)

    def to_dict(self) -> dict:
        return {
            "rho": [float(v) for v in self.rho],
            "theta": [float(v) for v in self.theta],
            "period": self.period,
            "permutation": list(self.permutation) if self.permutation is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RhythmicProfile":
        perm = d.get("permutation")
        return cls(d["rho"], d["theta"], d.get("period"), tuple(perm) if perm is not None else None)


def normalize_profile(rho, theta=None, period: float | None = None) -> RhythmicProfile:
    """Rescale by the largest-amplitude node and move it to index 0."""
    rho = np.asarray(rho, dtype=np.float64).ravel()
    theta = np.zeros_like(rho) if theta is None else np.asarray(theta, dtype=np.float64).ravel()
    if rho.size == 0 or rho.shape != theta.shape:
        raise ConfigError("rho and theta must be non-empty and of equal length", "profile")
    w = rho * np.exp(1j * theta)
    lead = int(np.argmax(np.abs(w)))
    if abs(w[lead]) == 0:
        raise ConfigError("profile has no non-zero amplitude", "profile.rho")
    perm = [lead] + [i for i in range(rho.size) if i != lead]
    if np.all(theta == 0):
        # in-phase profile: keep signed amplitudes
        rel_rho, rel_theta = rho[perm] / rho[lead], np.zeros_like(rho)
    else:
        w = w[perm] / w[lead]
        rel_rho, rel_theta = np.abs(w), np.angle(w)
    return RhythmicProfile(rel_rho, rel_theta, period, tuple(perm) if lead != 0 else None)


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    leading_kind: str
    dominance_gap: float
    leading_vector: np.ndarray

    @property
    def leading(self) -> complex:
        return complex(self.eigenvalues[0])

    @property
    def dominant(self) -> bool:
        return self.dominance_gap > TIE_RTOL * max(1.0, abs(self.eigenvalues[0].real))


def eigen_spectrum(A) -> SpectrumReport:
    """Eigenvalues sorted by descending real part, with leading-mode classification."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ConfigError(f"matrix must be square, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ConfigError("matrix entries must be finite")
    try:
        vals, vecs = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigen solver failed: {exc}") from exc
    order = np.lexsort((-vals.imag, -vals.real))
    vals = vals[order].astype(np.complex128)
    vecs = vecs[:, order]
    scale = max(1.0, float(np.max(np.abs(vals))))
    lead = vals[0]
    kind = "real-simple"
    nxt = 1
    if abs(lead.imag) > TIE_RTOL * scale and vals.size > 1 and abs(vals[1].real - lead.real) <= TIE_RTOL * scale \
            and abs(vals[1].imag + lead.imag) <= TIE_RTOL * scale:
        kind = "complex-conjugate-pair"
        nxt = 2
    gap = float(lead.real - vals[nxt].real) if vals.size > nxt else float("inf")
    v = vecs[:, 0]
    k = int(np.argmax(np.abs(v)))
    v = v / v[k]
    return SpectrumReport(vals, kind, gap, v)


def _solve_design(Q: np.ndarray, QD: np.ndarray) -> np.ndarray:
    if np.linalg.cond(Q) > 1e12:
        raise DesignError("change-of-basis matrix is singular for this profile")
    # A = QD Q^{-1}  <=>  Q^T A^T = (QD)^T
    return np.linalg.solve(Q.T, QD.T).T


def _check_residual(A, w, mu) -> None:
    res = np.linalg.norm(A @ w - mu * w)
    if res > RESIDUAL_RTOL * max(1.0, abs(mu)) * np.linalg.norm(w):
        raise DesignError(f"eigenpair residual {res:.3g} exceeds tolerance")


def design_real_leading(profile: RhythmicProfile, mu) -> FloatArray:
    """Matrix with eigenpair (mu[0], rho) and eigenvalues mu[i] on canonical vectors e_i."""
    if np.any(profile.theta != 0):
        raise PreconditionError("real-leading design needs an in-phase profile (theta = 0)")
    mu = np.asarray(mu, dtype=np.float64).ravel()
    n = profile.n
    if mu.size != n:
        raise ConfigError(f"need {n} eigenvalues, got {mu.size}", "mu")
    if n > 1 and not mu[0] > np.max(mu[1:]):
        raise PreconditionError("leading eigenvalue must strictly exceed all others")
    Q = np.eye(n)
    Q[:, 0] = profile.rho
    A = _solve_design(Q, Q * mu)
    _check_residual(A, profile.rho, mu[0])
    return A


def design_complex_leading(profile: RhythmicProfile, mu1: complex, tail) -> FloatArray:
    """Real matrix whose leading pair mu1, conj(mu1) has eigenvector rho*exp(i theta).

    Built on the real basis {Re w, Im w, e_3, ..., e_n} with the 2x2 block
    [[u, v], [-v, u]], so no complex arithmetic is involved.
    """
    mu1 = complex(mu1)
    u, v = mu1.real, mu1.imag
    n = profile.n
    tail = np.asarray(tail, dtype=np.float64).ravel()
    if n < 2:
        raise PreconditionError("a conjugate pair needs at least two nodes")
    if tail.size != n - 2:
        raise ConfigError(f"need {n - 2} tail eigenvalues, got {tail.size}", "tail")
    if not (u > 0 and v > 0):
        raise PreconditionError("leading eigenvalue needs positive real and imaginary parts")
    if tail.size and not u > np.max(tail):
        raise PreconditionError("Re(mu1) must strictly exceed every tail eigenvalue")
    w = profile.eigenvector
    Q = np.eye(n)
    Q[:, 0] = w.real
    Q[:, 1] = w.imag
    J = np.zeros((n, n))
    J[0, 0] = J[1, 1] = u
    J[0, 1] = v
    J[1, 0] = -v
    J[np.arange(2, n), np.arange(2, n)] = tail
    A = _solve_design(Q, Q @ J)
    _check_residual(A, w, mu1)
    return A


def random_profile(n: int, rng: np.random.Generator, phases: bool = False,
                   rho_range: tuple[float, float] = (0.2, 1.0), min_sin: float = 0.3) -> RhythmicProfile:
    """Random profile with node 0 dominant.

    With ``phases`` the phase of node 1 is kept away from 0 and pi
    (``|sin theta_1| >= min_sin``) so the complex design stays well conditioned.
    """
    rho = np.concatenate([[1.0], rng.uniform(*rho_range, size=n - 1)])
    theta = np.zeros(n)
    if phases and n > 1:
        theta[1:] = rng.uniform(0.0, TWO_PI, size=n - 1)
        while abs(np.sin(theta[1])) < min_sin:
            theta[1] = rng.uniform(0.0, TWO_PI)
    return RhythmicProfile(rho, theta)


def random_tail(lead_real: float, count: int, rng: np.random.Generator) -> FloatArray:
    """Non-leading eigenvalues, uniform on [0.1, 0.6] * Re(mu1)."""
    return rng.uniform(0.1 * lead_real, 0.6 * lead_real, size=count)


def random_plant(n: int, seed, spectral_floor: float = 0.05, return_shift: bool = False):
    """Random matrix with every eigenvalue's real part at least ``spectral_floor``.

    Entries are uniform on [0, 1); if needed the matrix is shifted by a
    multiple of the identity, which moves the spectrum rigidly.
    """
    if n < 1:
        raise ConfigError("n must be at least 1", "n")
    if not spectral_floor > 0:
        raise ConfigError("spectral_floor must be positive", "spectral_floor")
    rng = np.random.default_rng(seed)
    G = rng.uniform(0.0, 1.0, size=(n, n))
    lowest = float(np.min(np.linalg.eigvals(G).real))
    shift = 0.0
    if lowest < spectral_floor:
        # small pad covers eigenvalue round-off
        shift = spectral_floor - lowest + 1e-9 * max(1.0, float(np.abs(G).sum(axis=1).max()))
        G = G + shift * np.eye(n)
    return (G, shift) if return_shift else G


class HopfPoint(NamedTuple):
    alpha: float
    determinant: float
    mu1: complex


def hopf_critical_alpha(A, beta: float, epsilon: float) -> HopfPoint:
    """Self-gain at which the leading mode block [[a-1+beta mu, -1], [eps, -eps]] has zero trace."""
    report = eigen_spectrum(A)
    if not report.dominant:
        raise PreconditionError("adjacency has no strictly dominant eigenvalue")
    mu = report.leading
    alpha = 1.0 + epsilon - beta * mu.real
    c = alpha - 1.0 + beta * mu.real
    det = -c * epsilon + epsilon
    return HopfPoint(float(alpha), float(det), mu)


def origin_jacobian(A, alpha: float, beta: float, epsilon: float) -> FloatArray:
    """Jacobian of the open-loop network at the origin (S'(0) = 1)."""
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    eye = np.eye(n)
    return np.block([[(alpha - 1.0) * eye + beta * A, -eye], [epsilon * eye, -epsilon * eye]])


def controller_gamma(alpha_c: float, beta: float, epsilon: float, margin: float = 0.05) -> float:
    """Self-loop weight putting the one-node controller ``margin`` past its Hopf point."""
    if beta == 0:
        raise ConfigError("beta must be non-zero to place the controller", "beta")
    return (1.0 + epsilon - alpha_c + margin) / beta


def write_matrix_csv(path, A) -> None:
    A = np.asarray(A, dtype=np.float64)
    np.savetxt(Path(path), A, delimiter=",", fmt="%.17g", header=f"n={A.shape[0]}", comments="# ")


def read_matrix_csv(path) -> FloatArray:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
    if not header.startswith("# n="):
        raise ConfigError("matrix CSV must start with '# n=<n>'", str(path))
    n = int(header[4:])
    A = np.atleast_2d(np.loadtxt(path, delimiter=",", comments="#", dtype=np.float64))
    if A.shape != (n, n):
        raise ConfigError(f"header says n={n}, body has shape {A.shape}", str(path))
    return A
