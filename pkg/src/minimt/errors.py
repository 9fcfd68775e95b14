"""Exception types shared across the toolkit."""


class MinimtError(Exception):
    """Base class for toolkit errors."""


class AlignmentError(MinimtError):
    """Source and target files disagree on line counts."""


class ConfigError(MinimtError):
    """A rule file, config file, or CLI argument set is malformed."""


class FormatError(MinimtError):
    """An input file does not match its declared format."""


class NumericalError(MinimtError):
    """A forward or backward pass produced non-finite values."""


class TrainingDiverged(MinimtError):
    """Training loss went non-finite; carries the last good checkpoint."""

    def __init__(self, message: str, checkpoint_path=None):
        super().__init__(message)
        self.checkpoint_path = checkpoint_path


class IntegrityError(MinimtError):
    """A pipeline stage input no longer matches its recorded digest."""
