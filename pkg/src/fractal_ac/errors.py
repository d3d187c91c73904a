"""Exception hierarchy shared by all modules."""


class CircuitError(Exception):
    """Base class for every error raised by this package."""


class ParamError(CircuitError, ValueError):
    pass


class TopologyError(CircuitError):
    pass


class SingularSystem(CircuitError):
    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class InfiniteImpedance(CircuitError):
    pass


class DegenerateTransform(CircuitError):
    pass


class DegenerateMap(CircuitError):
    pass


class PoleHit(CircuitError):
    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class SizeError(CircuitError, ValueError):
    pass


class RegimeError(CircuitError):
    pass


class AddressError(CircuitError, ValueError):
    pass


class NoSolution(CircuitError):
    pass


class DegenerateCase(CircuitError):
    pass


class DegenerateEigenbasis(CircuitError):
    pass
