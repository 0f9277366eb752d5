"""Exception types raised across the package."""


class LstRegError(Exception):
    """Base class for all package errors."""


class ContractViolation(LstRegError, ValueError):
    """An operation was called with arguments that break its preconditions."""


class ConfigurationError(LstRegError, ValueError):
    """A scenario or estimator configuration is invalid."""


class DegenerateScaleError(LstRegError, ArithmeticError):
    """MAD evaluated to zero without the majority-identical rule applying."""

    def __init__(self, message, beta=None):
        super().__init__(message)
        self.beta = beta


class UnsampleableDesignError(LstRegError):
    """No pair of rows differs in any predictor coordinate."""


class AllCandidatesSkippedError(LstRegError):
    """Every LST candidate was skipped because of ties or a degenerate scale."""


class DegenerateDesignError(LstRegError):
    """Random elemental subsets stayed rank deficient after the retry budget."""


class FormatError(LstRegError, ValueError):
    """A delimited input file is empty, ragged or otherwise malformed."""


class ParseError(FormatError):
    """A referenced cell could not be parsed as a number."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column
