"""Exception hierarchy.

Every error carries a short machine-readable ``code`` that the command line
prints as the prefix of its single-line error message.
"""


class PortfolioError(Exception):
    code = "error"


class ParseError(PortfolioError):
    code = "parse-error"

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidSpecError(PortfolioError, ValueError):
    code = "invalid-spec"


class InvalidSymbolError(PortfolioError, ValueError):
    code = "invalid-symbol"


class UnknownClassError(PortfolioError, KeyError):
    code = "unknown-class"

    def __init__(self, symbol):
        self.symbol = symbol
        super().__init__(symbol)

    def __str__(self):
        return f"class {self.symbol!r} is not in the canonical class list"


class FormatError(PortfolioError, ValueError):
    code = "format-error"


class RangeError(PortfolioError, ValueError):
    code = "range-error"


class ShapeError(PortfolioError, ValueError):
    code = "shape-error"


class DomainError(PortfolioError, ValueError):
    code = "domain-error"


class NameConflictError(PortfolioError):
    code = "name-conflict"


class LevelConflictError(PortfolioError):
    code = "level-conflict"


class InvalidNameError(PortfolioError, ValueError):
    code = "invalid-name"


class EmptyPortfolioError(PortfolioError, ValueError):
    code = "empty-portfolio"


class UndefinedCorrelationError(PortfolioError, ValueError):
    code = "undefined-correlation"


class UndefinedCosineError(PortfolioError, ValueError):
    code = "undefined-cosine"


class UnknownNameError(PortfolioError, KeyError):
    code = "unknown-name"

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class DegenerateGraphError(PortfolioError):
    code = "degenerate-graph"


class StoreLockedError(PortfolioError):
    code = "store-locked"
