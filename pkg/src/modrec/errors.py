"""Exception types that map onto the CLI exit codes."""

from __future__ import annotations


class ModrecError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(ModrecError):
    """Invalid configuration file contents or option combination.

    Carries the offending line number when the problem is tied to a
    specific line of a config file.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DataFileError(ModrecError):
    """Malformed binary or CSV data file.

    byte_offset points at the first offending byte when known.
    """

    def __init__(self, message: str, byte_offset: int | None = None):
        if byte_offset is not None:
            message = f"{message} (byte offset {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


class CalibrationError(ModrecError):
    """Threshold calibration could not separate two adjacent classes."""
