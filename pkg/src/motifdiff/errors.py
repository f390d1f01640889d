"""Exception types shared across the package."""


class MotifdiffError(Exception):
    """Base class for all package-specific errors."""


class CyclicGraphError(MotifdiffError):
    """Raised when an operation requiring a DAG meets a directed cycle."""


class ParseError(MotifdiffError):
    """Malformed record in a graph-set file; carries the 1-based line number."""

    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ValidationError(MotifdiffError):
    """Record is syntactically fine but violates the declared alphabet."""


class StallError(MotifdiffError):
    """A sampler exhausted its attempt budget without producing output."""


class NumericalInstabilityError(MotifdiffError):
    """Too many Monte Carlo trials aborted on non-finite intermediates."""


class EmptyBeamError(MotifdiffError):
    """Beam initialization found no connected seed subgraphs."""


class CheckpointError(MotifdiffError):
    """Checkpoint file is unreadable, truncated, or inconsistent."""


class DivergenceError(MotifdiffError):
    """Training loss became non-finite; carries the epoch index."""

    def __init__(self, epoch, message="training loss diverged"):
        super().__init__(f"{message} at epoch {epoch}")
        self.epoch = epoch
