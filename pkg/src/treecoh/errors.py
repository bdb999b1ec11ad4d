"""Exception hierarchy shared by every treecoh module."""

from __future__ import annotations


class TreecohError(Exception):
    """Base class for all library errors."""


class InputError(TreecohError, ValueError):
    """Malformed or out-of-range input."""


class ContractViolation(TreecohError, ArithmeticError):
    """A documented algebraic precondition does not hold (e.g. d∘d != 0)."""


class BoundaryError(TreecohError, LookupError):
    """A tree walk left the stored truncation."""


class TruncationDepthError(TreecohError):
    """The truncation is too shallow for the requested quantity; deepen it."""


class ConsistencyError(TreecohError, AssertionError):
    """Two independent computations that must agree did not."""


class ConfigError(TreecohError, ValueError):
    """Invalid CLI configuration."""
