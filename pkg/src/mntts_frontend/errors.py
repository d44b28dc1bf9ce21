"""Shared exception base classes.

Every data/processing failure raised by this package derives from
:class:`ToolkitError` so callers (and the CLI exit-code mapping) can catch
one type. Configuration and usage mistakes raise :class:`UsageError`.
"""


class ToolkitError(Exception):
    """Base class for data and processing errors."""


class UsageError(ToolkitError):
    """Bad configuration or invocation: missing paths, invalid settings."""
