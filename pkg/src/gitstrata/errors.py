"""Error taxonomy shared by the engines, the CLI, and the service layer.

The CLI maps these onto its documented exit codes: ``ProblemFormatError``
is exit 2, ``SemanticError`` (and subclasses) exit 3, ``UnsupportedBlowupError``
exit 4.  Check failures (closure order, theorem contracts) are not exceptions;
they are reported and mapped to exit 1 by the caller.
"""

from __future__ import annotations


class GitstrataError(Exception):
    """Base class for all package errors."""


class ProblemFormatError(GitstrataError):
    """The problem file (or inline payload) could not be parsed."""


class SemanticError(GitstrataError):
    """Well-formed input that violates a precondition (dimension mismatch,
    index out of range, invalid partition, ...)."""


class DimensionMismatchError(SemanticError):
    pass


class CapExceededError(SemanticError):
    """Enumeration cap exceeded (see GITSTRATA_CAP / --max-supports)."""


class OracleLimitError(SemanticError):
    """Size limits of an exhaustive verification oracle exceeded."""


class LambdaTrivialError(SemanticError):
    """The grading one-parameter subgroup acts with a single weight, so the
    requested locus is degenerate (the whole space)."""


class SupportNotClosedError(SemanticError):
    """allowed_supports is not closed under a limit retraction that the
    computation needed (diagnostic SUPPORT_NOT_CLOSED)."""


class UnsupportedBlowupError(GitstrataError):
    """The refinement recursion needs a blow-up that is not representable
    for this problem; carries the description of the unresolved locus."""

    def __init__(self, description: str, case_trace: tuple = ()):  # type: ignore[type-arg]
        super().__init__(f"blow-up required but not representable: {description}")
        self.description = description
        self.case_trace = tuple(case_trace)


class RecursionLimitError(GitstrataError):
    """Defensive: the recursion measure failed to decrease or the depth cap
    was hit; indicates an oracle bug rather than a user error."""
