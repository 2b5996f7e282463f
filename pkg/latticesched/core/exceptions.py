"""
Exceptions for latticesched.

Provides the exception hierarchy shared by the compiler passes, the
executors and the command-line harness. Every error carries the process
exit code the CLI should terminate with.
"""

from typing import Any, Dict, List, Optional


class LatticeSchedError(Exception):
    """Base compilation error."""

    def __init__(self, exit_code: int, detail: str, context: Optional[Dict[str, Any]] = None):
        """
        Initialize compilation error.

        Args:
            exit_code: Process exit code for the CLI
            detail: Error detail message
            context: Optional structured context (coords, ids, paths)
        """
        self.exit_code = exit_code
        self.detail = detail
        self.context = context or {}
        super().__init__(detail)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON diagnostics."""
        result: Dict[str, Any] = {"error": type(self).__name__, "detail": self.detail}
        if self.context:
            result["context"] = self.context
        return result


class ConfigError(LatticeSchedError):
    """Invalid configuration (exit code 1)."""

    def __init__(self, detail: str, errors: Optional[Dict[str, List[str]]] = None):
        """
        Initialize configuration error.

        Args:
            detail: Error message
            errors: Dictionary of field errors {field: [errors]}
        """
        self.errors = errors or {}
        super().__init__(1, detail, {"errors": self.errors} if self.errors else None)


class LayoutError(LatticeSchedError):
    """Layout cannot host the requested operation, even on an empty grid."""

    def __init__(self, detail: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(1, detail, context)


class RoutingError(LatticeSchedError):
    """Malformed route (non-routable cell, disconnected path)."""

    def __init__(self, detail: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(1, detail, context)


class SynthesisLookupError(LatticeSchedError, KeyError):
    """Pre-synthesized Rz sequence missing from the table."""

    def __init__(self, angle: float, epsilon: int):
        self.angle = angle
        self.epsilon = epsilon
        super().__init__(1, f"No synthesized sequence for angle={angle!r} epsilon={epsilon}",
                         {"angle": angle, "epsilon": epsilon})

    def __str__(self) -> str:
        return self.detail


class OracleError(LatticeSchedError):
    """Oracle input out of range (too many qubits, unknown gate)."""

    def __init__(self, detail: str):
        super().__init__(1, detail)


class DeadlockError(LatticeSchedError):
    """Event loop ran dry with work still pending."""

    def __init__(self, detail: str, dump: Optional[Dict[str, Any]] = None):
        self.dump = dump or {}
        super().__init__(2, detail, self.dump)


class ScheduleValidationError(LatticeSchedError):
    """A produced schedule violates its invariants (exit code 2)."""

    def __init__(self, detail: str, violations: Optional[List[str]] = None):
        self.violations = violations or []
        super().__init__(2, detail, {"violations": self.violations[:50]})


class OutputError(LatticeSchedError):
    """Writing a result file failed."""

    def __init__(self, detail: str, path: str):
        self.path = path
        super().__init__(1, detail, {"path": path})
