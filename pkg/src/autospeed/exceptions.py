"""Exception hierarchy. Validation problems derive from ValueError (CLI exit 1),
runtime failures from RuntimeError (CLI exit 2)."""


class ShapeMismatchError(ValueError):
    """Operands have incompatible shapes; message names both."""


class ConfigurationError(ValueError):
    """A config value violates a precondition."""


class AssemblyError(ValueError):
    """Checkpoints cannot be joined into an inference model."""


class GenerationError(ValueError):
    """Phantom generation could not satisfy the configured constraints."""


class FormatError(ValueError):
    """A file does not follow the expected binary/JSON layout."""


class GraphError(RuntimeError):
    """backward() called without a recorded computation graph."""


class SimulationError(RuntimeError):
    """Wave simulation became unstable or blew up."""


class TrainingDivergedError(RuntimeError):
    """Training loss became non-finite; last good checkpoint is retained."""

    def __init__(self, message, checkpoint_path=None):
        super().__init__(message)
        self.checkpoint_path = checkpoint_path
