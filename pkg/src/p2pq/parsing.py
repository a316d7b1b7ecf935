"""Text grammar for queries and facts.

    name(v1, ..., vk) :- atom1, ..., atomm [, builtin1, ...]

Atoms are ``pred(t1, ..., tn)``; builtins are ``t1 OP t2`` with OP one
of ``=  !=  <  <=  >  >=``.  Variables are lowercase identifiers,
string constants are double-quoted, integers are bare; whitespace is
insignificant.  Head positions must be variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError
from .queries import Atom, BuiltinAtom, ConjunctiveQuery, Const, Term, Var

__all__ = ["parse_query", "parse_atom", "tokenize"]

_TOKEN_RE = re.compile(
    r"""
      (?P<WS>\s+)
    | (?P<ARROW>:-)
    | (?P<OP><=|>=|!=|=|<|>)
    | (?P<LPAR>\()
    | (?P<RPAR>\))
    | (?P<COMMA>,)
    | (?P<INT>-?\d+)
    | (?P<STRING>"(?:[^"\\]|\\.)*")
    | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

_UNTERMINATED_STRING_RE = re.compile(r'"(?:[^"\\]|\\.)*$')


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    last_nl = text.rfind("\n", 0, offset)
    return line, offset - last_nl


def tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            line, col = _position(text, pos)
            if _UNTERMINATED_STRING_RE.match(text, pos):
                raise ParseError("unterminated string constant", line, col)
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind != "WS":
            line, col = _position(text, pos)
            tokens.append(_Token(kind, m.group(), line, col))
        pos = m.end()
    line, col = _position(text, len(text))
    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            got = tok.text or "end of input"
            raise ParseError(f"expected {what}, got {got!r}", tok.line, tok.column)
        return self.advance()

    def fail(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.column)

    # -- grammar ------------------------------------------------------

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "INT":
            self.advance()
            return Const(int(tok.text))
        if tok.kind == "STRING":
            self.advance()
            raw = tok.text[1:-1]
            return Const(raw.replace('\\"', '"').replace("\\\\", "\\"))
        if tok.kind == "IDENT":
            if not (tok.text[0].islower() or tok.text[0] == "_"):
                self.fail(
                    f"{tok.text!r} is not a term: variables are lowercase, "
                    "string constants are double-quoted"
                )
            self.advance()
            return Var(tok.text)
        self.fail("expected a term (variable, integer, or string)")

    def atom(self) -> Atom:
        name = self.expect("IDENT", "a predicate name")
        self.expect("LPAR", "'('")
        args: list[Term] = []
        if self.peek().kind != "RPAR":
            args.append(self.term())
            while self.peek().kind == "COMMA":
                self.advance()
                args.append(self.term())
        self.expect("RPAR", "')'")
        return Atom(name.text, tuple(args))

    def body_item(self):
        if self.peek().kind == "IDENT" and self.peek(1).kind == "LPAR":
            return self.atom()
        lhs = self.term()
        op = self.expect("OP", "a comparison operator")
        rhs = self.term()
        return BuiltinAtom(op.text, lhs, rhs)

    def query(self) -> ConjunctiveQuery:
        name = self.expect("IDENT", "a query name")
        self.expect("LPAR", "'('")
        head: list[Var] = []
        if self.peek().kind != "RPAR":
            head.append(self.head_var())
            while self.peek().kind == "COMMA":
                self.advance()
                head.append(self.head_var())
        self.expect("RPAR", "')'")
        self.expect("ARROW", "':-'")
        atoms: list[Atom] = []
        builtins: list[BuiltinAtom] = []
        item = self.body_item()
        (atoms if isinstance(item, Atom) else builtins).append(item)
        while self.peek().kind == "COMMA":
            self.advance()
            item = self.body_item()
            (atoms if isinstance(item, Atom) else builtins).append(item)
        self.expect("EOF", "end of query")
        return ConjunctiveQuery(name.text, tuple(head), tuple(atoms), tuple(builtins))

    def head_var(self) -> Var:
        tok = self.peek()
        t = self.term()
        if not isinstance(t, Var):
            raise ParseError("head positions must be variables", tok.line, tok.column)
        return t


def parse_query(text: str) -> ConjunctiveQuery:
    """Parse query text; raises ParseError with line/column on bad input
    and QueryError when the parsed query violates a query invariant."""
    return _Parser(text).query()


def parse_atom(text: str) -> Atom:
    """Parse a single atom such as a fact ``A(1, "x")``."""
    parser = _Parser(text)
    atom = parser.atom()
    parser.expect("EOF", "end of atom")
    return atom
