"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class ParetoAnnealError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(ParetoAnnealError, ValueError):
    """Two objects that must agree in size (spins, objectives, weights) do not."""


class InstanceFormatError(ParetoAnnealError, ValueError):
    """An instance, front or samples file could not be parsed."""


class CapacityError(ParetoAnnealError, ValueError):
    """A problem exceeds the hard cap of an exact method (N or cyclomatic number)."""


class MixedGraphError(ParetoAnnealError, ValueError):
    """Problems handed to one batch do not share a graph."""


class BackendError(ParetoAnnealError):
    """A sampling backend failed."""


class TransportError(BackendError):
    """The remote sampling service could not be reached."""


class MalformedResponseError(BackendError):
    """The remote sampling service answered with an ill-formed payload."""


class EnergyValidationError(BackendError):
    """Reported energies disagree with local re-evaluation; backend is untrusted."""


class InconsistentReferenceError(ParetoAnnealError, ValueError):
    """A hypervolume exceeds the reference maximum beyond round-off."""


class ReferenceFrontImproved(ParetoAnnealError):
    """A run found a front with larger hypervolume than the reference front.

    Carries the improved front so callers can persist it and re-baseline.
    """

    def __init__(self, message: str, improved_front=None, hypervolume: float | None = None):
        super().__init__(message)
        self.improved_front = improved_front
        self.hypervolume = hypervolume
