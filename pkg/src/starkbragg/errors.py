"""Exception hierarchy. Each leaf maps to a distinct CLI exit code."""


class StarkBraggError(Exception):
    exit_code = 1


class ParameterError(StarkBraggError, ValueError):
    """A physical parameter is outside its allowed domain."""

    exit_code = 8


class SingularDetuningError(ParameterError):
    """A detuning that appears in a denominator is zero."""


class InfeasibleMatchError(StarkBraggError):
    """The matching equations have no physical solution for the given rates."""

    exit_code = 3


class GridError(StarkBraggError):
    exit_code = 4


class AmplificationOverflowError(StarkBraggError):
    """Transfer-matrix product became non-finite (runaway gain)."""

    exit_code = 5

    def __init__(self, message, z=None):
        super().__init__(message)
        self.z = z


class DegenerateSteadyStateError(StarkBraggError):
    exit_code = 6


class ConfigError(StarkBraggError):
    exit_code = 7
