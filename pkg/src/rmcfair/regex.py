"""Regular expressions over interned alphabets.

Syntax: ``|`` union, juxtaposition for concatenation, postfix ``*``, ``+``
and ``?``, parentheses, ``()`` for the empty word and ``{}`` for the empty
language.  A letter is a symbol name, or a tuple letter such as ``a/b`` or
``a/110`` when compiling against a product alphabet.  Bare names that are
not symbols are looked up in the macro table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

from . import automata as fa
from .automata import Alphabet, Nfa

_TOKEN = re.compile(
    r"\s*(?:(?P<letter>[A-Za-z0-9_#'][A-Za-z0-9_#']*(?:/[A-Za-z0-9_#']+)*)"
    r"|(?P<op>[|*+?()])|(?P<empty>\{\}))"
)


class RegexError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Letter:
    name: str
    pos: tuple[int, int]


@dataclass(frozen=True)
class Union_:
    parts: tuple


@dataclass(frozen=True)
class Concat:
    parts: tuple


@dataclass(frozen=True)
class Repeat:
    inner: object
    op: str


@dataclass(frozen=True)
class EmptySet:
    pass


Ast = Union[Letter, Union_, Concat, Repeat, EmptySet]


def _position(text: str, offset: int, line: int, column: int) -> tuple[int, int]:
    before = text[:offset]
    nl = before.count("\n")
    if nl:
        return line + nl, offset - before.rfind("\n")
    return line, column + offset


def tokenize(text: str, line: int = 1, column: int = 1):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            skip = len(text[pos:]) - len(text[pos:].lstrip())
            raise RegexError(f"unexpected character {text[pos + skip]!r}", *_position(text, pos + skip, line, column))
        start = m.start(m.lastgroup)
        out.append((m.lastgroup, m.group(m.lastgroup), _position(text, start, line, column)))
        pos = m.end()
    out.append(("end", "", _position(text, len(text), line, column)))
    return out


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Ast:
        node = self.union()
        kind, value, pos = self.peek()
        if kind != "end":
            raise RegexError(f"unexpected {value!r}", *pos)
        return node

    def union(self) -> Ast:
        parts = [self.concat()]
        while self.peek()[1] == "|" and self.peek()[0] == "op":
            self.take()
            parts.append(self.concat())
        return parts[0] if len(parts) == 1 else Union_(tuple(parts))

    def concat(self) -> Ast:
        parts = []
        while True:
            kind, value, _ = self.peek()
            if kind == "letter" or kind == "empty" or (kind == "op" and value == "("):
                parts.append(self.postfix())
            else:
                break
        return parts[0] if len(parts) == 1 else Concat(tuple(parts))

    def postfix(self) -> Ast:
        node = self.atom()
        while self.peek()[0] == "op" and self.peek()[1] in "*+?":
            node = Repeat(node, self.take()[1])
        return node

    def atom(self) -> Ast:
        kind, value, pos = self.take()
        if kind == "letter":
            return Letter(value, pos)
        if kind == "empty":
            return EmptySet()
        if value == "(":
            node = self.union()
            kind, value, pos = self.take()
            if value != ")":
                raise RegexError("expected ')'", *pos)
            return node
        raise RegexError(f"unexpected {value or 'end of input'!r}", *pos)


def parse_regex(text: str, line: int = 1, column: int = 1) -> Ast:
    return _Parser(tokenize(text, line, column)).parse()


def compile_ast(node: Ast, alphabet: Alphabet, macros: Mapping[str, Ast] | None = None,
                _active: tuple = ()) -> Nfa:
    macros = macros or {}
    if isinstance(node, Letter):
        if node.name in alphabet:
            return fa.symbols(alphabet, [alphabet.index(node.name)])
        if node.name in macros:
            if node.name in _active:
                raise RegexError(f"recursive macro {node.name!r}", *node.pos)
            return compile_ast(macros[node.name], alphabet, macros, _active + (node.name,))
        if "/" in node.name or node.name.startswith("#"):
            raise RegexError(f"unknown symbol {node.name!r}", *node.pos)
        raise RegexError(f"undefined macro or unknown symbol {node.name!r}", *node.pos)
    if isinstance(node, EmptySet):
        return fa.empty(alphabet)
    if isinstance(node, Concat):
        if not node.parts:
            return fa.epsilon(alphabet)
        return fa.concat(*(compile_ast(p, alphabet, macros, _active) for p in node.parts))
    if isinstance(node, Union_):
        result = compile_ast(node.parts[0], alphabet, macros, _active)
        for p in node.parts[1:]:
            result = fa.union(result, compile_ast(p, alphabet, macros, _active))
        return fa.trim(result)
    if isinstance(node, Repeat):
        inner = compile_ast(node.inner, alphabet, macros, _active)
        if node.op == "*":
            return fa.star(inner)
        if node.op == "+":
            return fa.star(inner, plus=True)
        return fa.trim(fa.union(inner, fa.epsilon(alphabet)))
    raise TypeError(node)


def compile_regex(text: str, alphabet: Alphabet, macros: Mapping[str, Ast] | None = None,
                  line: int = 1, column: int = 1) -> Nfa:
    """Compile ``text`` to an automaton accepting exactly its language."""
    return compile_ast(parse_regex(text, line, column), alphabet, macros)


def letters(node: Ast) -> set[str]:
    if isinstance(node, Letter):
        return {node.name}
    if isinstance(node, (Union_, Concat)):
        out = set()
        for p in node.parts:
            out |= letters(p)
        return out
    if isinstance(node, Repeat):
        return letters(node.inner)
    return set()
