"""
Exception types raised across the reconstruction packages.
복원 파이프라인 예외 정의

Invalid arguments raise plain ``ValueError``; the classes below mark the
failure kinds callers need to tell apart (CLI exit codes depend on them).
"""
from typing import Any, Dict, Optional


class DegenerateGeometryError(ValueError):
    """Point set too degenerate for the requested construction (rank < 2)."""


class SceneSpecError(ValueError):
    """Scene specification violates its invariants."""


class PresetNotFoundError(KeyError):
    """Unknown scene preset name."""

    def __init__(self, name: str, known: Optional[list] = None):
        self.name = name
        self.known = sorted(known or [])
        super().__init__(name)

    def __str__(self) -> str:
        return f"Unknown preset '{self.name}'. Known presets: {', '.join(self.known)}"


class ConfigError(ValueError):
    """Configuration file or value is invalid."""


class OptimizationError(RuntimeError):
    """
    Optimization cannot continue (non-finite loss, broken invariant).

    Attributes:
        diagnostics: JSON-serializable snapshot of the failing state
    """

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
