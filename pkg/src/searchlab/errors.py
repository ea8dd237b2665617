"""Exception hierarchy.

Two outcomes matter to callers and to the CLI exit-code convention:
bad input (ValidationError and friends) versus a structural guarantee
failing on real data (TheoryViolation and friends). The CLI maps the
former to exit 1 and the latter to exit 2.
"""


class SearchLabError(Exception):
    pass


class ValidationError(SearchLabError):
    """Malformed or invalid input (files, specs, arguments)."""


class InfeasibleInstanceError(ValidationError):
    """The goal is unreachable from the start vertex."""


class GenerationError(ValidationError):
    """A generator exhausted its retry budget without a feasible instance."""


class TheoryViolation(SearchLabError):
    """A checked structural guarantee failed; indicates a bug, never bad input."""


class CertificateViolation(TheoryViolation):
    """The suboptimality certificate Cost <= Opt + Delta came out negative-slack."""


class LedgerViolation(TheoryViolation):
    """A per-iteration bookkeeping inequality failed during an instrumented run."""


class ConstructionViolation(TheoryViolation):
    """A constructed family or catalog did not behave as its design guarantees."""
