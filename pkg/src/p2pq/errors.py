"""Exception hierarchy shared across the package."""


class P2pqError(Exception):
    """Base class for every error raised by this library."""


class ParseError(P2pqError):
    """Syntax error in query text, carrying line/column of the offence."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class NetworkSyntaxError(P2pqError):
    """The network document is not well-formed JSON."""


class ValidationError(P2pqError):
    """A well-formed document or object violates a network invariant."""


class QueryError(P2pqError):
    """Invalid query construction or use: head collapse, unsafe
    constraints, incomparable queries, query/schema mismatch."""


class UnknownViewError(QueryError):
    """A view expression mentions a view the target peer does not define."""


class CeilingError(P2pqError):
    """A defensive iteration ceiling was exceeded."""
