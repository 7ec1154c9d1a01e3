"""Finite word automata over interned alphabets.

Symbols are small integers indexing into an :class:`Alphabet`; words are
tuples of such integers.  Automata are immutable once built and every
operation returns a fresh value.
"""

from __future__ import annotations

import itertools
from collections import deque
from typing import Iterable, Iterator, Sequence

Word = tuple[int, ...]

MAX_PRODUCT_LETTERS = 10_000
RESERVED_PREFIX = "#"


class AlphabetError(ValueError):
    pass


class Alphabet:
    """An ordered, duplicate-free list of symbol names.

    Product alphabets keep a reference to their component ``tracks``; a
    tuple letter ``(s0, ..., sk)`` gets the mixed-radix id with the first
    track most significant, and its display name is ``"s0/s1/.../sk"``.
    """

    __slots__ = ("names", "tracks", "_index", "_components")

    def __init__(self, names: Iterable[str], tracks: Sequence["Alphabet"] | None = None):
        names = tuple(names)
        if not names:
            raise AlphabetError("alphabet must not be empty")
        index = {}
        for i, name in enumerate(names):
            if not name:
                raise AlphabetError("empty symbol name")
            if name in index:
                raise AlphabetError(f"duplicate symbol {name!r}")
            index[name] = i
        self.names = names
        self.tracks = tuple(tracks) if tracks is not None else None
        self._index = index
        self._components = None
        if self.tracks is not None:
            self._components = tuple(itertools.product(*(range(len(t)) for t in self.tracks)))

    @classmethod
    def product(cls, *alphabets: "Alphabet") -> "Alphabet":
        size = 1
        for a in alphabets:
            size *= len(a)
        if size > MAX_PRODUCT_LETTERS:
            raise AlphabetError(
                f"product alphabet would have {size} letters (limit {MAX_PRODUCT_LETTERS})"
            )
        names = ("/".join(parts) for parts in itertools.product(*(a.names for a in alphabets)))
        return cls(names, tracks=alphabets)

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[int]:
        return iter(range(len(self.names)))

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Alphabet):
            return NotImplemented
        return self.names == other.names and self.tracks == other.tracks

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"Alphabet({', '.join(self.names)})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise AlphabetError(f"unknown symbol {name!r}") from None

    def name(self, sym: int) -> str:
        return self.names[sym]

    def decode(self, sym: int) -> tuple[int, ...]:
        """Component ids of a tuple letter."""
        return self._components[sym]

    def encode(self, components: Sequence[int]) -> int:
        sym = 0
        for track, c in zip(self.tracks, components):
            sym = sym * len(track) + c
        return sym

    def render(self, word: Sequence[int]) -> str:
        return " ".join(self.names[s] for s in word)

    def parse_word(self, text: str) -> Word:
        return tuple(self.index(tok) for tok in text.split())

    def words(self, max_len: int, min_len: int = 0) -> Iterator[Word]:
        """All words in shortlex order with ``min_len <= |w| <= max_len``."""
        for n in range(min_len, max_len + 1):
            yield from itertools.product(range(len(self.names)), repeat=n)


class Nfa:
    """Nondeterministic automaton without epsilon moves.

    ``delta[p]`` maps a symbol to the tuple of successor states.  States are
    ``0 .. n-1``.
    """

    __slots__ = ("alphabet", "n", "delta", "initial", "finals")

    def __init__(
        self,
        alphabet: Alphabet,
        n: int,
        transitions: Iterable[tuple[int, int, int]],
        initial: Iterable[int],
        finals: Iterable[int],
    ):
        table: list[dict[int, set[int]]] = [dict() for _ in range(n)]
        size = len(alphabet)
        for p, a, q in transitions:
            if not (0 <= p < n and 0 <= q < n):
                raise ValueError(f"transition ({p}, {a}, {q}) out of range for {n} states")
            if not 0 <= a < size:
                raise ValueError(f"symbol {a} not in alphabet")
            table[p].setdefault(a, set()).add(q)
        self.alphabet = alphabet
        self.n = n
        self.delta = tuple({a: tuple(sorted(qs)) for a, qs in sorted(row.items())} for row in table)
        self.initial = frozenset(initial)
        self.finals = frozenset(finals)
        if any(not 0 <= q < n for q in self.initial | self.finals):
            raise ValueError("initial/final state out of range")

    def __repr__(self) -> str:
        return (
            f"Nfa(states={self.n}, transitions={self.num_transitions()}, "
            f"initial={sorted(self.initial)}, finals={sorted(self.finals)})"
        )

    def transitions(self) -> Iterator[tuple[int, int, int]]:
        for p, row in enumerate(self.delta):
            for a, qs in row.items():
                for q in qs:
                    yield p, a, q

    def num_transitions(self) -> int:
        return sum(len(qs) for row in self.delta for qs in row.values())

    def step(self, states: Iterable[int], sym: int) -> frozenset[int]:
        out: set[int] = set()
        for p in states:
            out.update(self.delta[p].get(sym, ()))
        return frozenset(out)

    def accepts(self, word: Sequence[int]) -> bool:
        current = self.initial
        for sym in word:
            current = self.step(current, sym)
            if not current:
                return False
        return not current.isdisjoint(self.finals)

    def is_deterministic(self) -> bool:
        return len(self.initial) <= 1 and all(
            len(qs) <= 1 for row in self.delta for qs in row.values()
        )

    def is_complete(self) -> bool:
        size = len(self.alphabet)
        return len(self.initial) == 1 and all(len(row) == size for row in self.delta)


class Builder:
    """Mutable scratchpad with epsilon moves; ``build`` removes them."""

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet
        self.n = 0
        self.edges: list[tuple[int, int, int]] = []
        self.eps: dict[int, set[int]] = {}

    def state(self) -> int:
        self.n += 1
        return self.n - 1

    def add(self, p: int, sym: int, q: int) -> None:
        self.edges.append((p, sym, q))

    def add_eps(self, p: int, q: int) -> None:
        self.eps.setdefault(p, set()).add(q)

    def embed(self, nfa: Nfa, relabel=None) -> list[int]:
        """Copy ``nfa`` in with fresh states; returns the state map."""
        base = [self.state() for _ in range(nfa.n)]
        for p, a, q in nfa.transitions():
            self.add(base[p], a if relabel is None else relabel(a), base[q])
        return base

    def build(self, initial: Iterable[int], finals: Iterable[int]) -> Nfa:
        closure = [self._closure(p) for p in range(self.n)]
        finals = set(finals)
        out_edges: dict[int, list[tuple[int, int]]] = {}
        for p, a, q in self.edges:
            out_edges.setdefault(p, []).append((a, q))
        transitions = []
        new_finals = set()
        for p in range(self.n):
            for r in closure[p]:
                if r in finals:
                    new_finals.add(p)
                for a, q in out_edges.get(r, ()):
                    transitions.append((p, a, q))
        return trim(Nfa(self.alphabet, self.n, transitions, initial, new_finals))

    def _closure(self, p: int) -> set[int]:
        seen = {p}
        stack = [p]
        while stack:
            r = stack.pop()
            for q in self.eps.get(r, ()):
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        return seen


# --- constructors ---------------------------------------------------------


def empty(alphabet: Alphabet) -> Nfa:
    return Nfa(alphabet, 1, (), [0], ())


def epsilon(alphabet: Alphabet) -> Nfa:
    return Nfa(alphabet, 1, (), [0], [0])


def universal(alphabet: Alphabet) -> Nfa:
    return Nfa(alphabet, 1, ((0, a, 0) for a in alphabet), [0], [0])


def from_words(alphabet: Alphabet, words: Iterable[Sequence[int]]) -> Nfa:
    """Trie automaton for a finite language."""
    trie: list[dict[int, int]] = [{}]
    finals = set()
    for word in words:
        node = 0
        for sym in word:
            nxt = trie[node].get(sym)
            if nxt is None:
                trie.append({})
                nxt = trie[node][sym] = len(trie) - 1
            node = nxt
        finals.add(node)
    transitions = [(p, a, q) for p, row in enumerate(trie) for a, q in row.items()]
    return Nfa(alphabet, len(trie), transitions, [0], finals)


def symbols(alphabet: Alphabet, syms: Iterable[int]) -> Nfa:
    """One-letter words drawn from ``syms``."""
    return Nfa(alphabet, 2, ((0, a, 1) for a in syms), [0], [1])


def relabel(nfa: Nfa, alphabet: Alphabet, mapping) -> Nfa:
    """Apply a letter homomorphism; ``mapping(a)`` returns an iterable of letters."""
    transitions = [(p, b, q) for p, a, q in nfa.transitions() for b in mapping(a)]
    return Nfa(alphabet, nfa.n, transitions, nfa.initial, nfa.finals)


def concat(*parts: Nfa) -> Nfa:
    b = Builder(parts[0].alphabet)
    prev_finals = None
    initial = None
    for part in parts:
        _check_same(parts[0], part)
        m = b.embed(part)
        starts = [m[q] for q in part.initial]
        if prev_finals is None:
            initial = starts
        else:
            for f in prev_finals:
                for s in starts:
                    b.add_eps(f, s)
        prev_finals = [m[q] for q in part.finals]
    return b.build(initial, prev_finals)


def star(nfa: Nfa, plus: bool = False) -> Nfa:
    b = Builder(nfa.alphabet)
    hub = b.state()
    m = b.embed(nfa)
    for q in nfa.initial:
        b.add_eps(hub, m[q])
    for f in nfa.finals:
        b.add_eps(m[f], hub)
    if plus:
        done = b.state()
        for f in nfa.finals:
            b.add_eps(m[f], done)
        return b.build([m[q] for q in nfa.initial], [done])
    return b.build([hub], [hub])


# --- algebra ---------------------------------------------------------------


def _check_same(a: Nfa, b: Nfa) -> None:
    if a.alphabet != b.alphabet:
        raise AlphabetError(f"alphabet mismatch: {a.alphabet!r} vs {b.alphabet!r}")


def trim(a: Nfa) -> Nfa:
    """Drop states that are unreachable or cannot reach a final state."""
    reach = set(a.initial)
    stack = list(a.initial)
    while stack:
        p = stack.pop()
        for qs in a.delta[p].values():
            for q in qs:
                if q not in reach:
                    reach.add(q)
                    stack.append(q)
    back: dict[int, set[int]] = {}
    for p, _, q in a.transitions():
        back.setdefault(q, set()).add(p)
    live = set(a.finals & reach)
    stack = list(live)
    while stack:
        q = stack.pop()
        for p in back.get(q, ()):
            if p in reach and p not in live:
                live.add(p)
                stack.append(p)
    if not live:
        return empty(a.alphabet)
    keep = sorted(live)
    idx = {q: i for i, q in enumerate(keep)}
    transitions = [
        (idx[p], s, idx[q]) for p, s, q in a.transitions() if p in idx and q in idx
    ]
    return Nfa(
        a.alphabet, len(keep), transitions,
        [idx[q] for q in a.initial if q in idx], [idx[q] for q in a.finals if q in idx],
    )


def determinize(a: Nfa) -> Nfa:
    """Subset construction; the result is deterministic and complete."""
    start = frozenset(a.initial)
    ids = {start: 0}
    order = [start]
    transitions = []
    i = 0
    while i < len(order):
        current = order[i]
        for sym in a.alphabet:
            nxt = a.step(current, sym)
            j = ids.get(nxt)
            if j is None:
                j = ids[nxt] = len(order)
                order.append(nxt)
            transitions.append((i, sym, j))
        i += 1
    finals = [k for k, s in enumerate(order) if not s.isdisjoint(a.finals)]
    return Nfa(a.alphabet, len(order), transitions, [0], finals)


def complement(a: Nfa) -> Nfa:
    d = a if a.is_deterministic() and a.is_complete() else determinize(a)
    return Nfa(d.alphabet, d.n, d.transitions(), d.initial, set(range(d.n)) - d.finals)


def intersect(a: Nfa, b: Nfa) -> Nfa:
    _check_same(a, b)
    ids: dict[tuple[int, int], int] = {}
    queue = deque()
    for p in sorted(a.initial):
        for q in sorted(b.initial):
            ids[(p, q)] = len(ids)
            queue.append((p, q))
    transitions = []
    while queue:
        p, q = queue.popleft()
        i = ids[(p, q)]
        row_b = b.delta[q]
        for sym, ps in a.delta[p].items():
            qs = row_b.get(sym)
            if not qs:
                continue
            for p2 in ps:
                for q2 in qs:
                    j = ids.get((p2, q2))
                    if j is None:
                        j = ids[(p2, q2)] = len(ids)
                        queue.append((p2, q2))
                    transitions.append((i, sym, j))
    initial = range(len(a.initial) * len(b.initial))
    finals = [i for (p, q), i in ids.items() if p in a.finals and q in b.finals]
    return Nfa(a.alphabet, len(ids), transitions, initial, finals)


def union(a: Nfa, b: Nfa) -> Nfa:
    _check_same(a, b)
    off = a.n
    transitions = list(a.transitions())
    transitions.extend((p + off, s, q + off) for p, s, q in b.transitions())
    return Nfa(
        a.alphabet, a.n + b.n, transitions,
        list(a.initial) + [q + off for q in b.initial],
        list(a.finals) + [q + off for q in b.finals],
    )


def product(a: Nfa, b: Nfa, mode: str = "and") -> Nfa:
    if mode == "and":
        return intersect(a, b)
    if mode == "or":
        return union(a, b)
    raise ValueError(f"unknown product mode {mode!r}")


def difference(a: Nfa, b: Nfa) -> Nfa:
    return intersect(a, complement(b))


def is_empty(a: Nfa) -> Word | None:
    """``None`` if L(a) is empty, else its shortlex-least word."""
    return _least_word(sorted(a.initial), lambda p: a.delta[p].items(), lambda p: p in a.finals)


def _least_word(starts, moves, final) -> Word | None:
    """Shortlex-least label of a path from ``starts`` to a final node.

    Plain BFS only yields a shortest word: two start nodes share the empty
    access word, so queue order is not shortlex order.  Instead record the
    reachable graph, compute each node's distance to a final node, then
    build the word greedily, keeping every node that stays on a shortest
    path.
    """
    succ: dict = {}
    queue = deque(starts)
    for node in starts:
        succ.setdefault(node, None)
    while queue:
        node = queue.popleft()
        out = [(sym, q) for sym, qs in moves(node) for q in qs]
        succ[node] = out
        for _, q in out:
            if q not in succ:
                succ[q] = None
                queue.append(q)
    pred: dict = {}
    for node, out in succ.items():
        for _, q in out:
            pred.setdefault(q, []).append(node)
    dist = {node: 0 for node in succ if final(node)}
    queue = deque(dist)
    while queue:
        q = queue.popleft()
        for p in pred.get(q, ()):
            if p not in dist:
                dist[p] = dist[q] + 1
                queue.append(p)
    rest = min((dist[s] for s in starts if s in dist), default=None)
    if rest is None:
        return None
    current = {s for s in starts if dist.get(s) == rest}
    word = []
    while rest:
        rest -= 1
        step: dict = {}
        for p in current:
            for sym, q in succ[p]:
                if dist.get(q) == rest:
                    step.setdefault(sym, set()).add(q)
        sym = min(step)
        word.append(sym)
        current = step[sym]
    return tuple(word)


def includes(a: Nfa, b: Nfa) -> Word | None:
    """``None`` iff L(a) ⊆ L(b); otherwise the shortlex-least word of L(a) \\ L(b).

    Explores the product of ``a`` with the lazily determinized ``b``, which
    is the complement/product construction without materializing either.
    """
    _check_same(a, b)
    start = frozenset(b.initial)

    def moves(node):
        p, s = node
        return [(sym, [(p2, b.step(s, sym)) for p2 in ps]) for sym, ps in a.delta[p].items()]

    return _least_word([(p, start) for p in sorted(a.initial)], moves,
                       lambda node: node[0] in a.finals and node[1].isdisjoint(b.finals))


def includes_antichain(a: Nfa, b: Nfa) -> bool:
    """Inclusion check pruning macro-states subsumed by a smaller visited one."""
    _check_same(a, b)
    start = frozenset(b.initial)
    visited: dict[int, list[frozenset]] = {}
    queue = deque()

    def subsumed(p: int, s: frozenset) -> bool:
        return any(t <= s for t in visited.get(p, ()))

    def add(p: int, s: frozenset) -> None:
        kept = [t for t in visited.get(p, ()) if not s <= t]
        kept.append(s)
        visited[p] = kept
        queue.append((p, s))

    for p in a.initial:
        if not subsumed(p, start):
            add(p, start)
    while queue:
        p, s = queue.popleft()
        if s not in visited.get(p, ()):
            continue
        if p in a.finals and s.isdisjoint(b.finals):
            return False
        for sym, ps in a.delta[p].items():
            s2 = b.step(s, sym)
            for p2 in ps:
                if not subsumed(p2, s2):
                    add(p2, s2)
    return True


def equivalent(a: Nfa, b: Nfa) -> bool:
    return includes(a, b) is None and includes(b, a) is None


def minimize(a: Nfa) -> Nfa:
    """Moore partition refinement on the trimmed determinization."""
    d = determinize(a)
    block = [1 if q in d.finals else 0 for q in range(d.n)]
    while True:
        sig = {}
        new_block = []
        for q in range(d.n):
            key = (block[q],) + tuple(block[d.delta[q][s][0]] for s in d.alphabet)
            new_block.append(sig.setdefault(key, len(sig)))
        if len(sig) == len(set(block)):
            break
        block = new_block
    block = new_block
    transitions = {(block[p], s, block[q]) for p, s, q in d.transitions()}
    finals = {block[q] for q in d.finals}
    return trim(Nfa(d.alphabet, len(set(block)), transitions, [block[0]], finals))


def language(a: Nfa, max_len: int) -> set[Word]:
    """Accepted words up to ``max_len`` (testing aid)."""
    out = set()
    frontier = {(): frozenset(a.initial)}
    for _ in range(max_len + 1):
        nxt = {}
        for word, states in frontier.items():
            if not states.isdisjoint(a.finals):
                out.add(word)
            for sym in a.alphabet:
                s2 = a.step(states, sym)
                if s2:
                    nxt[word + (sym,)] = s2
        frontier = nxt
    return out


def words_of_length(a: Nfa, length: int) -> Iterator[Word]:
    """Accepted words of exactly ``length`` letters, in lexicographic order."""
    alive: dict[tuple[frozenset, int], bool] = {}

    def live(states: frozenset, rest: int) -> bool:
        key = (states, rest)
        hit = alive.get(key)
        if hit is None:
            if rest == 0:
                hit = not states.isdisjoint(a.finals)
            else:
                hit = any(live(s2, rest - 1) for s2 in _moves(states).values())
            alive[key] = hit
        return hit

    def _moves(states: frozenset) -> dict[int, frozenset]:
        out: dict[int, set[int]] = {}
        for p in states:
            for sym, qs in a.delta[p].items():
                out.setdefault(sym, set()).update(qs)
        return {s: frozenset(qs) for s, qs in sorted(out.items())}

    def rec(states: frozenset, prefix: list[int]) -> Iterator[Word]:
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for sym, s2 in _moves(states).items():
            if live(s2, length - len(prefix) - 1):
                prefix.append(sym)
                yield from rec(s2, prefix)
                prefix.pop()

    start = frozenset(a.initial)
    if live(start, length):
        yield from rec(start, [])


def to_dot(a: Nfa, name: str = "A") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  __start [shape=point];']
    for q in range(a.n):
        shape = "doublecircle" if q in a.finals else "circle"
        lines.append(f"  {q} [shape={shape}];")
    for q in sorted(a.initial):
        lines.append(f"  __start -> {q};")
    edges: dict[tuple[int, int], list[str]] = {}
    for p, s, q in a.transitions():
        edges.setdefault((p, q), []).append(a.alphabet.name(s))
    for (p, q), labels in sorted(edges.items()):
        label = ", ".join(labels).replace('"', '\\"')
        lines.append(f'  {p} -> {q} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
