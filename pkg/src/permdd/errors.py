"""Exception hierarchy shared by every module of the package."""


class PermddError(Exception):
    """Base class for all package errors."""


class ParseError(PermddError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class GenerationError(PermddError):
    """Random generation could not produce a feasible matrix."""


class LimitExceeded(PermddError):
    """Input is larger than an algorithm's configured size limit."""


class ResourceError(PermddError):
    """Base for cooperative resource aborts (budget, deadline)."""


class NodeBudgetExceeded(ResourceError):
    pass


class Timeout(ResourceError):
    pass


class InternalAssertion(PermddError):
    """An algorithmic postcondition failed; indicates a bug."""
