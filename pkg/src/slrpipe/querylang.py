"""Boolean search-query language: AST, parser, canonical printer, normalizer
and provider-dialect translation.

Grammar (EBNF)::

    query   := or
    or      := and ("OR" and)*
    and     := not ("AND" not)*
    not     := "NOT" not | primary
    primary := PHRASE | TERM+ | "(" query ")"

Operator keywords are case-insensitive. Double-quoted strings are phrases;
consecutive bare words between operators fold into a single phrase (a single
bare word is a term). Precedence: NOT > AND > OR.
"""

from __future__ import annotations

import re
import urllib.parse
from dataclasses import dataclass

from .errors import DialectUnsupported, QuerySyntaxError

# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Term:
    text: str


@dataclass(frozen=True)
class Phrase:
    text: str


@dataclass(frozen=True)
class Not:
    child: "QueryAst"


@dataclass(frozen=True)
class And:
    children: tuple["QueryAst", ...]

    def __init__(self, children):
        object.__setattr__(self, "children", tuple(children))


@dataclass(frozen=True)
class Or:
    children: tuple["QueryAst", ...]

    def __init__(self, children):
        object.__setattr__(self, "children", tuple(children))


QueryAst = Term | Phrase | Not | And | Or

_KEYWORDS = {"AND", "OR", "NOT"}


# ---------------------------------------------------------------------------
# Tokenizer

_WORD_RE = re.compile(r'[^\s()"]+')


class _Token:
    __slots__ = ("kind", "value", "pos")

    def __init__(self, kind, value, pos):
        self.kind = kind  # WORD | PHRASE | LPAREN | RPAREN | EOF
        self.value = value
        self.pos = pos  # character offset


def _byte_offset(text: str, char_pos: int) -> int:
    return len(text[:char_pos].encode("utf-8"))


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch == "(":
            tokens.append(_Token("LPAREN", "(", i))
            i += 1
        elif ch == ")":
            tokens.append(_Token("RPAREN", ")", i))
            i += 1
        elif ch == '"':
            end = text.find('"', i + 1)
            if end < 0:
                raise QuerySyntaxError(
                    "unterminated phrase", _byte_offset(text, i), {"PHRASE"}
                )
            tokens.append(_Token("PHRASE", text[i + 1 : end], i))
            i = end + 1
        else:
            m = _WORD_RE.match(text, i)
            tokens.append(_Token("WORD", m.group(), i))
            i = m.end()
    tokens.append(_Token("EOF", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Parser

_PRIMARY_EXPECTED = {"TERM", "PHRASE", "(", "NOT"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def fail(self, expected):
        tok = self.peek()
        raise QuerySyntaxError(
            f"unexpected {tok.kind} {tok.value!r}" if tok.kind != "EOF" else "unexpected end of input",
            _byte_offset(self.text, tok.pos),
            expected,
        )

    def at_keyword(self, kw: str) -> bool:
        tok = self.peek()
        return tok.kind == "WORD" and tok.value.upper() == kw

    def parse(self) -> QueryAst:
        node = self.parse_or()
        if self.peek().kind != "EOF":
            self.fail({"AND", "OR", "EOF"})
        return node

    def parse_or(self) -> QueryAst:
        children = [self.parse_and()]
        while self.at_keyword("OR"):
            self.i += 1
            children.append(self.parse_and())
        return children[0] if len(children) == 1 else Or(children)

    def parse_and(self) -> QueryAst:
        children = [self.parse_not()]
        while self.at_keyword("AND"):
            self.i += 1
            children.append(self.parse_not())
        return children[0] if len(children) == 1 else And(children)

    def parse_not(self) -> QueryAst:
        if self.at_keyword("NOT"):
            self.i += 1
            return Not(self.parse_not())
        return self.parse_primary()

    def parse_primary(self) -> QueryAst:
        tok = self.peek()
        if tok.kind == "PHRASE":
            self.i += 1
            if not tok.value.strip():
                raise QuerySyntaxError(
                    "empty phrase", _byte_offset(self.text, tok.pos), {"PHRASE"}
                )
            return Phrase(tok.value)
        if tok.kind == "LPAREN":
            self.i += 1
            node = self.parse_or()
            if self.peek().kind != "RPAREN":
                self.fail({")", "AND", "OR"})
            self.i += 1
            return node
        if tok.kind == "WORD" and tok.value.upper() not in _KEYWORDS:
            words = []
            while (
                self.peek().kind == "WORD"
                and self.peek().value.upper() not in _KEYWORDS
            ):
                words.append(self.peek().value)
                self.i += 1
            if len(words) == 1:
                return Term(words[0])
            return Phrase(" ".join(words))
        self.fail(_PRIMARY_EXPECTED)


def parse_query(text: str) -> QueryAst:
    """Parse a search string into a normalized AST."""
    return normalize_query(_Parser(text).parse())


# ---------------------------------------------------------------------------
# Normalizer


def normalize_query(ast: QueryAst) -> QueryAst:
    """Flatten nested same-operator nodes, drop duplicate siblings
    (order-preserving), lowercase text, collapse single-child And/Or,
    and demote single-word phrases to terms. Idempotent."""
    if isinstance(ast, Term):
        return Term(ast.text.lower())
    if isinstance(ast, Phrase):
        text = " ".join(ast.text.lower().split())
        return Term(text) if " " not in text else Phrase(text)
    if isinstance(ast, Not):
        return Not(normalize_query(ast.child))
    kind = type(ast)
    flat: list[QueryAst] = []
    for child in ast.children:
        child = normalize_query(child)
        if isinstance(child, kind):
            flat.extend(child.children)
        else:
            flat.append(child)
    seen: list[QueryAst] = []
    for child in flat:
        if child not in seen:
            seen.append(child)
    if len(seen) == 1:
        return seen[0]
    return kind(seen)


# ---------------------------------------------------------------------------
# Canonical printer


def _print_node(ast: QueryAst, parent: str) -> str:
    if isinstance(ast, Term):
        return ast.text
    if isinstance(ast, Phrase):
        return f'"{ast.text}"' if " " in ast.text else ast.text
    if isinstance(ast, Not):
        inner = _print_node(ast.child, "not")
        if isinstance(ast.child, (And, Or)):
            inner = f"({inner})"
        return f"NOT {inner}"
    if isinstance(ast, And):
        parts = []
        for child in ast.children:
            text = _print_node(child, "and")
            if isinstance(child, Or):
                text = f"({text})"
            parts.append(text)
        joined = " AND ".join(parts)
        return joined
    parts = [_print_node(child, "or") for child in ast.children]
    return " OR ".join(parts)


def print_query(ast: QueryAst) -> str:
    """Canonical text form: uppercase operators, multi-word phrases quoted,
    parentheses only where precedence requires them."""
    return _print_node(ast, "top")


# ---------------------------------------------------------------------------
# Dialect translation

DIALECTS = ("canonical", "plus_minus", "url_keywords")


def _leaf_text(node: QueryAst) -> str:
    if isinstance(node, Term):
        return node.text
    if isinstance(node, Phrase):
        return f'"{node.text}"' if " " in node.text else node.text
    raise DialectUnsupported(type(node).__name__)


def _plus_minus(ast: QueryAst) -> str:
    if isinstance(ast, (Term, Phrase)):
        return _leaf_text(ast)
    if isinstance(ast, Not):
        return "-" + _leaf_text(ast.child)
    # And/Or of leaves (or negated leaves) flattens to a keyword list; any
    # deeper structure has no expression in this dialect.
    parts = []
    for child in ast.children:
        if isinstance(child, (Term, Phrase)):
            parts.append(_leaf_text(child))
        elif isinstance(child, Not):
            parts.append("-" + _leaf_text(child.child))
        else:
            raise DialectUnsupported(type(child).__name__)
    return " ".join(parts)


def translate_query(ast: QueryAst, dialect: str) -> str:
    """Render a normalized AST in a provider dialect."""
    if dialect == "canonical":
        return print_query(ast)
    if dialect == "plus_minus":
        return _plus_minus(ast)
    if dialect == "url_keywords":
        return urllib.parse.quote(print_query(ast), safe="")
    raise ValueError(f"unknown dialect: {dialect}")


# ---------------------------------------------------------------------------
# JSON serialization (run-store / API wire format)


def ast_to_dict(ast: QueryAst) -> dict:
    if isinstance(ast, Term):
        return {"kind": "term", "text": ast.text}
    if isinstance(ast, Phrase):
        return {"kind": "phrase", "text": ast.text}
    if isinstance(ast, Not):
        return {"kind": "not", "child": ast_to_dict(ast.child)}
    kind = "and" if isinstance(ast, And) else "or"
    return {"kind": kind, "children": [ast_to_dict(c) for c in ast.children]}


def ast_from_dict(data: dict) -> QueryAst:
    kind = data["kind"]
    if kind == "term":
        return Term(data["text"])
    if kind == "phrase":
        return Phrase(data["text"])
    if kind == "not":
        return Not(ast_from_dict(data["child"]))
    children = [ast_from_dict(c) for c in data["children"]]
    return And(children) if kind == "and" else Or(children)


def evaluate_query(ast: QueryAst, document: str) -> bool:
    """Set-membership predicate: does a document's text match the query?

    Terms and phrases match by substring on the lowercased document; this is
    the same convention the screening criteria use.
    """
    doc = document.lower()
    if isinstance(ast, Term):
        return ast.text.lower() in doc
    if isinstance(ast, Phrase):
        return ast.text.lower() in doc
    if isinstance(ast, Not):
        return not evaluate_query(ast.child, document)
    if isinstance(ast, And):
        return all(evaluate_query(c, document) for c in ast.children)
    return any(evaluate_query(c, document) for c in ast.children)
