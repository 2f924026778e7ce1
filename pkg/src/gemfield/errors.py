"""Exception types raised by gemfield."""

from __future__ import annotations


class ScenarioError(ValueError):
    """Base class for problems with a scenario description."""


class ScenarioSyntaxError(ScenarioError):
    """Malformed scenario text. Carries 1-based ``line`` and ``column``."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ScenarioSemanticError(ScenarioError):
    """Well-formed scenario that violates a physical or geometric constraint."""


class DivergenceError(ArithmeticError):
    """A field value became non-finite or exceeded the divergence limit.

    ``step`` is the 0-based time step at which the blow-up was detected and
    ``node`` the offending flat index (cell index for the stencil backend,
    graph node id for the message-passing backend). A run that aborts attaches
    its partial, invalid-flagged record as ``record``.
    """

    def __init__(self, step: int, node: int | None = None, record=None):
        where = f" at node {node}" if node is not None else ""
        super().__init__(f"numerical divergence at step {step}{where}")
        self.step = step
        self.node = node
        self.record = record
