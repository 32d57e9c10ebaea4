"""Exception types shared across the package; the CLI maps them to exit codes."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class Diagnostic:
    check: str
    message: str
    witness: object = None

    def __str__(self):
        w = "" if self.witness is None else f" (witness: {self.witness})"
        return f"{self.check}: {self.message}{w}"


class FanMirrorError(Exception):
    exit_code = 1


class ValidationError(FanMirrorError):
    """Input does not describe a valid fan, setup or document."""

    exit_code = 2

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class SupportError(ValidationError):
    """A lattice point lies outside the support of the fan."""


class ProfileError(FanMirrorError):
    """Truncation profile or ample class is unusable."""

    exit_code = 3


class InvariantError(FanMirrorError):
    """An internal consistency check failed."""

    exit_code = 4

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
