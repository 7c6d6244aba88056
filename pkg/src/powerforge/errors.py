"""Exception types shared across the package.

Every error carries a stable machine-readable ``code`` so the HTTP service
and the CLI can surface failures without string matching.
"""


class PowerforgeError(Exception):
    code = "INTERNAL"


class InvalidMetadata(PowerforgeError):
    """Bad variable/design metadata (ranges, level counts, bounds)."""

    code = "INVALID_METADATA"


class InvalidUpdate(PowerforgeError):
    """A session update that fails validation before touching any state."""

    code = "INVALID_UPDATE"


class RejectedMove(PowerforgeError):
    """A mean move that cannot be propagated because of lock constraints."""

    code = "REJECTED_MOVE"


class MissingCellMean(PowerforgeError):
    """A trial-table condition has no mean in the population model."""

    code = "MISSING_CELL_MEAN"


class UnknownNode(PowerforgeError):
    """A history-tree node id that does not exist."""

    code = "UNKNOWN_NODE"


class CancelledByNewerRequest(PowerforgeError):
    """An in-flight computation superseded by fresher parameters."""

    code = "CANCELLED_BY_NEWER_REQUEST"
