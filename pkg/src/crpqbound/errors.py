"""Exception types shared across the package."""


class ParseError(ValueError):
    """Raised on malformed query, automaton, or formula text.

    Carries 1-based ``line`` and ``col`` when the lexer or parser can
    point at the offending token.
    """

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, col {col})"
        super().__init__(message)


class UnsupportedFragment(ValueError):
    """Raised when input falls outside the fragment an algorithm handles."""


class CapExceeded(RuntimeError):
    """Raised when a computation would exceed a configured resource cap.

    Callers that can degrade gracefully catch this and report an
    inconclusive result instead of a wrong one.
    """

    def __init__(self, limit: int, detail: str):
        self.limit = limit
        self.detail = detail
        super().__init__(f"cap exceeded ({detail}, limit {limit})")
