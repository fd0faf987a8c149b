"""Exception hierarchy for the sysforecast toolkit.

Every data/validation failure raises a subclass of :class:`SysforecastError`
so the CLI can map them uniformly to exit code 2.
"""


class SysforecastError(Exception):
    """Base class for all toolkit errors."""


class MalformedStatError(SysforecastError):
    """A /proc/<pid>/stat record does not follow the documented layout."""


class MixedGroupError(SysforecastError):
    """Stat records passed to a group aggregation belong to different pgrps."""


class UnsupportedPlatformError(SysforecastError):
    """The host does not expose a procfs-style process table."""


class SpawnFailureError(SysforecastError):
    """The traced command could not be started."""


class TracerMissingError(SysforecastError):
    """strace is not available on this host."""


class InsufficientTelemetryError(SysforecastError):
    """Fewer than two telemetry samples; windows cannot be formed."""


class EmptyCorpusError(SysforecastError):
    """The embedding corpus contains no tokens."""


class EmptyDatasetError(SysforecastError):
    """A training call received no samples."""


class EmptyInputError(SysforecastError):
    """An aggregate metric was requested over zero values."""


class DimensionMismatchError(SysforecastError):
    """Input dimensions do not match the model parameters."""


class DegenerateSplitError(SysforecastError):
    """A chronological split leaves a segment with zero usable samples."""

    def __init__(self, history, horizon, segment):
        self.history = history
        self.horizon = horizon
        self.segment = segment
        super().__init__(
            f"{segment} segment yields no samples for history={history}, "
            f"horizon={horizon}"
        )
