"""Exception hierarchy for exactvc.

The CLI maps these onto exit codes, so library code should raise the most
specific class that applies rather than bare ValueError.
"""


class ExactVCError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ExactVCError):
    """Malformed user input: bad CSV/JSON, bad flag values, empty data."""


class ModelAssumptionError(ExactVCError):
    """Data violates a standing model assumption (e.g. fewer than 2 groups)."""


class DegenerateDataError(ModelAssumptionError):
    """Nongeneric data that makes the profile equation undefined (e.g. W = 0)."""


class DegenerateDesignError(ModelAssumptionError):
    """Covariate design whose profiled residual sum of squares is constant."""


class RankDeficiencyError(ModelAssumptionError):
    """Design matrix without full column rank."""


class UndefinedInputError(ExactVCError):
    """Operation called outside its mathematical domain (e.g. gcd(0, 0))."""


class DivisibilityError(ExactVCError):
    """Exact division requested but the divisor does not divide the dividend."""


class ContractViolationError(ExactVCError):
    """An internal certificate failed; indicates a bug, not bad user data."""


class NongenericDataError(ExactVCError):
    """Elimination or back-substitution degenerated beyond what the generic
    theory predicts and no sound fallback exists for this input."""
