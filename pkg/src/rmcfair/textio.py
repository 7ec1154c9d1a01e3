"""The ``automaton <name> { ... }`` block format used for export and import."""

from __future__ import annotations

import re

from .automata import Alphabet, Nfa

_TRANSITION = re.compile(r"^(\d+)\s*-(\S+?)->\s*(\d+)$")


class BlockError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


def format_block(nfa: Nfa, name: str = "A") -> str:
    alph = nfa.alphabet
    used = sorted({a for _, a, _ in nfa.transitions()})
    lines = [f"automaton {name} {{"]
    lines.append(f"  alphabet {', '.join(alph.name(a) for a in used)};")
    lines.append(f"  states {nfa.n};")
    lines.append(f"  initial {', '.join(map(str, sorted(nfa.initial)))};")
    lines.append(f"  final {', '.join(map(str, sorted(nfa.finals)))};")
    for p, a, q in nfa.transitions():
        lines.append(f"  {p} -{alph.name(a)}-> {q};")
    lines.append("}")
    return "\n".join(lines)


def _ints(text: str, line: int) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise BlockError(f"expected state numbers, got {text!r}", line) from None


def parse_block(text: str, alphabet: Alphabet, line: int = 1) -> tuple[str, Nfa]:
    """Parse one block; symbols are resolved by name against ``alphabet``."""
    m = re.match(r"\s*automaton\s+([^\s{]+)\s*\{(.*)\}\s*$", text, re.S)
    if not m:
        raise BlockError("malformed automaton block", line)
    name, body = m.group(1), m.group(2)
    n = None
    initial: list[int] = []
    finals: list[int] = []
    transitions = []
    declared: set[str] | None = None
    offset = line + text[: m.start(2)].count("\n")
    for stmt in body.split(";"):
        stmt_line = offset + stmt[: len(stmt) - len(stmt.lstrip())].count("\n")
        offset += stmt.count("\n")
        stmt = " ".join(stmt.split())
        if not stmt:
            continue
        head, _, rest = stmt.partition(" ")
        if head == "alphabet":
            declared = {s.strip() for s in rest.split(",") if s.strip()}
            for s in declared:
                if s not in alphabet:
                    raise BlockError(f"unknown symbol {s!r}", stmt_line)
        elif head == "states":
            (n,) = _ints(rest, stmt_line) or [None]
        elif head == "initial":
            initial = _ints(rest, stmt_line)
        elif head == "final":
            finals = _ints(rest, stmt_line)
        else:
            t = _TRANSITION.match(stmt)
            if not t:
                raise BlockError(f"cannot parse {stmt!r}", stmt_line)
            sym = t.group(2)
            if sym not in alphabet or (declared is not None and sym not in declared):
                raise BlockError(f"unknown symbol {sym!r}", stmt_line)
            transitions.append((int(t.group(1)), alphabet.index(sym), int(t.group(3))))
    if n is None:
        raise BlockError("missing 'states' declaration", line)
    try:
        return name, Nfa(alphabet, n, transitions, initial, finals)
    except ValueError as exc:
        raise BlockError(str(exc), line) from None
