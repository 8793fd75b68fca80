# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

"""Error types raised by the library and translated to exit codes by the CLI."""


class LbdError(Exception):
    """Base class of every error raised on purpose by lbd_changepoint."""


class InvalidArgumentError(LbdError, ValueError):
    """A parameter or configuration value is outside its valid range."""


class InvalidTripletError(InvalidArgumentError):
    """A triplet cannot be used with the requested statistic."""


class InvalidDataError(LbdError, ValueError):
    """
    The series does not fit the selected model.

    :param index: 0-based position of the first offending value, if known
    """

    def __init__(self, message, index=None):  # noqa: D107
        super().__init__(message)
        self.index = index


class NotDetectableError(LbdError):
    """The changepoint geometry does not satisfy the detection condition."""


class UnboundedPrecisionError(LbdError):
    """The localization bound has no finite value for this geometry."""
