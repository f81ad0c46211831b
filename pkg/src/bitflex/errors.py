"""Exception types shared across the simulator."""


class SimulatorError(Exception):
    """Base class for every error raised by this package."""


class OutOfRange(SimulatorError):
    """A value is not representable at the declared precision/signedness."""


class UnsupportedPrecision(SimulatorError):
    """Precision outside the supported 2..8-bit range."""


class MalformedChunkVector(SimulatorError):
    """A chunk vector violates the decomposition invariants."""


class ArityMismatch(SimulatorError):
    """Wrong number of operands for a fixed-arity unit."""


class LengthMismatch(SimulatorError):
    """Sequences that must be equally long are not."""


class ConfigMismatch(SimulatorError):
    """A group configuration does not match the supplied operands."""


class CapacityExceeded(SimulatorError):
    """More weights than the array can hold at this precision."""


class ShapeMismatch(SimulatorError):
    """Array or matrix dimensions do not match the expected shape."""


class PrecisionMismatch(SimulatorError):
    """Operands configured at different precisions within one tile."""


class ParseError(SimulatorError):
    """A workload file is not syntactically valid."""


class ValidationError(SimulatorError):
    """A workload file is well-formed but semantically invalid."""


class VerificationFailed(SimulatorError):
    """Simulator output disagrees with the golden reference."""
