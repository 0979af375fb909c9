"""Exception hierarchy shared by all kmlab modules."""


class KMLabError(Exception):
    """Base class for every error raised by kmlab."""


class ScaleMismatch(KMLabError):
    pass


class UnsupportedScale(KMLabError):
    pass


class NonIntegrable(KMLabError):
    pass


class ZeroScale(KMLabError):
    pass


class NotUnitary(KMLabError):
    pass


class ResourceLimit(KMLabError):
    pass


class DomainError(KMLabError):
    pass


class DecompositionUnsupported(KMLabError):
    pass


class SingularTraceForm(KMLabError):
    pass


class IndefiniteLattice(KMLabError):
    pass


class CapExceeded(KMLabError):
    pass


class NonFreeAction(KMLabError):
    pass


class InputError(KMLabError):
    """Malformed user input (JSON files, CLI arguments)."""
