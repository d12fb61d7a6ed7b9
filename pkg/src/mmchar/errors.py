"""Exception hierarchy shared by all mmchar modules."""


class ToolkitError(Exception):
    """Base class for all mmchar errors."""


class InvalidInputError(ToolkitError):
    """Input violates a structural precondition (non-finite, wrong shape, ...)."""


class DegenerateInputError(ToolkitError):
    """Input is structurally valid but degenerate (all-zero, too short, ...)."""


class ConvergenceError(ToolkitError):
    """An iterative numerical routine failed to converge."""


class InsufficientRankError(ToolkitError):
    """A spectrum has fewer strictly positive eigenvalues than requested."""


class InsufficientDataError(ToolkitError):
    """A source cannot supply enough windows/positions for an experiment."""


class ConfigError(ToolkitError):
    """Invalid run configuration or model parameters."""


class DatasetError(ToolkitError):
    """Base class for dataset container errors; carries the offending position."""

    def __init__(self, message, position_id=None):
        super().__init__(message)
        self.position_id = position_id


class ManifestError(DatasetError):
    """Manifest fails to parse or violates its invariants."""


class VersionMismatchError(DatasetError):
    """Manifest declares an unsupported container format version."""


class MissingFileError(DatasetError):
    """A binary file referenced by the manifest does not exist."""


class SizeMismatchError(DatasetError):
    """A binary file's byte length disagrees with the declared tensor shape."""


class NonFiniteSampleError(DatasetError):
    """A decoded tensor contains NaN or Inf samples."""
