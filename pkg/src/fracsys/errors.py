"""Exception hierarchy shared by the numerical modules and the CLI."""

from __future__ import annotations


class ResourceLimitError(RuntimeError):
    """A requested construction would exceed a configured size cap."""


class NumericError(ArithmeticError):
    """A numerical procedure produced an inconsistent result."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConvergenceError(NumericError):
    """An iterative refinement did not reach its tolerance."""


class DegeneratePointError(NumericError):
    """Every candidate staircase increment vanished at the requested point."""


class DefectStructureError(NumericError):
    """A Jordan-chain equation has no solution for the chosen eigenvector."""


class FundamentalSetError(NumericError):
    """A candidate fundamental matrix is (numerically) singular."""


class ConfigError(ValueError):
    """Invalid run configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
