"""Exception hierarchy shared by every module."""

from __future__ import annotations


class RhythmError(Exception):
    """Base class for all package errors."""


class ConfigError(RhythmError, ValueError):
    """Invalid configuration or inconsistent dimensions.

    ``path`` names the offending key (dotted) when the error comes from a
    parsed document.
    """

    def __init__(self, message: str, path: str | None = None) -> None:
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class DesignError(RhythmError):
    """Adjacency construction failed (e.g. singular change of basis)."""


class PreconditionError(RhythmError, ValueError):
    """A documented precondition does not hold."""


class NumericalError(RhythmError):
    """Eigen solver or other numerical kernel failure."""


class IntegrationBlowup(NumericalError):
    """A non-finite value appeared during integration."""

    def __init__(self, t: float, index: int, context: str | None = None) -> None:
        self.t = float(t)
        self.index = int(index)
        self.context = context
        msg = f"non-finite state at t={self.t:.6g}, component {self.index}"
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)


class NotRhythmicError(RhythmError):
    """A channel does not oscillate, so no rhythmic profile exists."""

    def __init__(self, node: int, message: str | None = None) -> None:
        self.node = int(node)
        super().__init__(message or f"node {node} is not rhythmic")
