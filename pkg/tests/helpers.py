"""Shared strategies and independent oracles for the test suite."""

from __future__ import annotations

import itertools
from functools import lru_cache

from hypothesis import strategies as st

from rmcfair.automata import Alphabet, Nfa

ALPHABETS = [Alphabet(["a"]), Alphabet(["a", "b"]), Alphabet(["a", "b", "c"])]


@st.composite
def nfas(draw, alphabet: Alphabet | None = None, max_states: int = 5):
    if alphabet is None:
        alphabet = draw(st.sampled_from(ALPHABETS))
    n = draw(st.integers(1, max_states))
    edge = st.tuples(st.integers(0, n - 1), st.integers(0, len(alphabet) - 1), st.integers(0, n - 1))
    trans = draw(st.lists(edge, max_size=3 * n * len(alphabet)))
    initial = draw(st.sets(st.integers(0, n - 1), max_size=n))
    finals = draw(st.sets(st.integers(0, n - 1), max_size=n))
    return Nfa(alphabet, n, trans, sorted(initial), sorted(finals))


@st.composite
def nfa_pairs(draw, max_states: int = 5):
    alphabet = draw(st.sampled_from(ALPHABETS))
    return draw(nfas(alphabet, max_states)), draw(nfas(alphabet, max_states))


def words(alphabet: Alphabet, max_len: int):
    return list(alphabet.words(max_len))


def lang(nfa: Nfa, max_len: int) -> set:
    return {w for w in nfa.alphabet.words(max_len) if nfa.accepts(w)}


def shortlex(ws):
    return min(ws, key=lambda w: (len(w), w)) if ws else None


# --- regex trees with a direct matcher -------------------------------------


@st.composite
def regex_trees(draw, names=("a", "b", "c"), depth: int = 3):
    if depth == 0 or draw(st.integers(0, 3)) == 0:
        return ("sym", draw(st.sampled_from(names)))
    kind = draw(st.sampled_from(["cat", "alt", "*", "+", "?"]))
    if kind in ("cat", "alt"):
        return (kind, draw(regex_trees(names, depth - 1)), draw(regex_trees(names, depth - 1)))
    return (kind, draw(regex_trees(names, depth - 1)))


def render_tree(t) -> str:
    if t[0] == "sym":
        return t[1]
    if t[0] == "cat":
        return f"({render_tree(t[1])} {render_tree(t[2])})"
    if t[0] == "alt":
        return f"({render_tree(t[1])} | {render_tree(t[2])})"
    return f"({render_tree(t[1])}){t[0]}"


def matches(t, word: tuple[str, ...]) -> bool:
    """Membership by structural recursion over all splits."""

    @lru_cache(maxsize=None)
    def m(node, i, j) -> bool:
        kind = node[0]
        if kind == "sym":
            return j == i + 1 and word[i] == node[1]
        if kind == "cat":
            return any(m(node[1], i, s) and m(node[2], s, j) for s in range(i, j + 1))
        if kind == "alt":
            return m(node[1], i, j) or m(node[2], i, j)
        if kind == "?":
            return i == j or m(node[1], i, j)
        if kind == "*" and i == j:
            return True
        # one nonempty first iteration, then the rest under star
        rest = ("*", node[1])
        return any(m(node[1], i, s) and m(rest, s, j) for s in range(i + 1, j + 1)) or (
            kind == "+" and i == j and m(node[1], i, j)
        )

    return m(t, 0, len(word))


# --- memoryless schedulers -------------------------------------------------


def memoryless_fails(mdp) -> bool:
    """True iff some memoryless scheduler avoids the final set with positive probability.

    Under a fixed memoryless choice the MDP is a finite Markov chain on
    supports; almost-sure reachability fails iff some state reachable from an
    initial state without touching F cannot reach F (or is a dead end).
    """
    v1 = [v for v in range(mdp.size) if mdp.owner[v] == 1 and mdp.successors(v)]
    for choice in itertools.product(*(mdp.successors(v) for v in v1)):
        pick = dict(zip(v1, choice))

        def succ(v):
            if mdp.owner[v] == 1:
                return (pick[v],) if v in pick else ()
            return mdp.successors(v)

        can_reach = set(mdp.final)
        changed = True
        while changed:
            changed = False
            for v in range(mdp.size):
                if v not in can_reach and any(w in can_reach for w in succ(v)):
                    can_reach.add(v)
                    changed = True
        seen = set()
        stack = [v for v in mdp.init if v not in mdp.final]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            if v not in can_reach or not succ(v):
                return True
            stack.extend(w for w in succ(v) if w not in mdp.final)
    return False
