"""Exception types shared across the package."""


class StepmathError(Exception):
    """Base class for all package errors."""


class MathError(StepmathError):
    """Arithmetic failure while evaluating an expression."""


class DivByZero(MathError):
    def __init__(self, detail: str = "division by zero"):
        super().__init__(detail)
        self.detail = detail


class UnsupportedExponent(MathError):
    """Exponentiation outside the supported domain (non-negative integer powers)."""


class Dec64RangeError(MathError):
    """A binary64 operation produced NaN or infinity."""


class RenderOverflow(MathError):
    """A binary64 value too large to print in plain positional notation (|x| >= 1e21)."""


class ExprSyntaxError(StepmathError):
    """Malformed expression text; carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class DepthExceeded(ExprSyntaxError):
    def __init__(self, offset: int, limit: int):
        super().__init__(f"bracket nesting deeper than {limit}", offset)
        self.limit = limit


class NonTerminating(StepmathError):
    """The rewrite engine exceeded its step bound; indicates a rule bug."""


class UnknownSymbol(StepmathError):
    def __init__(self, symbol: str, offset: int):
        super().__init__(f"symbol {symbol!r} at offset {offset} is not in the vocabulary")
        self.symbol = symbol
        self.offset = offset


class UnknownId(StepmathError):
    def __init__(self, token_id: int):
        super().__init__(f"token id {token_id} is not in the vocabulary")
        self.token_id = token_id


class RecordTooLong(StepmathError):
    def __init__(self, line_no: int, length: int, block_length: int):
        super().__init__(
            f"record on line {line_no} tokenizes to {length} ids, "
            f"longer than block length {block_length}"
        )
        self.line_no = line_no
        self.length = length
        self.block_length = block_length


class EquationParseError(StepmathError):
    """A word-problem equation did not parse."""


class AnswerMismatch(StepmathError):
    """A word-problem equation does not evaluate to its stored answer."""
