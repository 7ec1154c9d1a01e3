"""Length-preserving multi-track relations.

A k-track relation is an automaton over the product of its track
alphabets; a tuple-word ``(v1,w1,..)(v2,w2,..)...`` stands for the k-tuple
of equal-length words it convolves.  Track order is fixed by convention as
(source, destination, auxiliary...).
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator, Sequence, Union

from . import automata as fa
from .automata import Alphabet, AlphabetError, Nfa, Word


@lru_cache(maxsize=None)
def product_alphabet(tracks: tuple[Alphabet, ...]) -> Alphabet:
    return Alphabet.product(*tracks)


class Relation:
    __slots__ = ("tracks", "carrier")

    def __init__(self, tracks: Sequence[Alphabet], carrier: Nfa):
        tracks = tuple(tracks)
        if len(tracks) < 2:
            raise ValueError("a relation needs at least two tracks")
        if carrier.alphabet != product_alphabet(tracks):
            raise AlphabetError("carrier alphabet is not the tuple alphabet of the tracks")
        self.tracks = tracks
        self.carrier = carrier

    @property
    def arity(self) -> int:
        return len(self.tracks)

    @property
    def alphabet(self) -> Alphabet:
        return self.carrier.alphabet

    def __repr__(self) -> str:
        return f"Relation(tracks={self.arity}, {self.carrier!r})"

    def accepts(self, *words: Sequence[int]) -> bool:
        return self.carrier.accepts(convolve(self.alphabet, words))

    def successors(self, word: Sequence[int]) -> list[Word]:
        """All ``y`` with ``(word, y)`` in a binary relation, in shortlex order."""
        return list(iter_successors(self, word))


RelOrNfa = Union[Relation, Nfa]


def _tracks(x: RelOrNfa) -> tuple[tuple[Alphabet, ...], Nfa]:
    if isinstance(x, Relation):
        return x.tracks, x.carrier
    return (x.alphabet,), x


def _make(tracks: Sequence[Alphabet], carrier: Nfa) -> RelOrNfa:
    if len(tracks) == 1:
        return carrier
    return Relation(tracks, carrier)


def _remap(x: RelOrNfa, new_tracks: Sequence[Alphabet], mapping) -> RelOrNfa:
    """Relabel every tuple letter; ``mapping`` gets old components and yields new ones."""
    tracks, carrier = _tracks(x)
    new_tracks = tuple(new_tracks)
    target = product_alphabet(new_tracks) if len(new_tracks) > 1 else new_tracks[0]
    if len(tracks) > 1:
        decode = carrier.alphabet.decode
    else:
        decode = lambda s: (s,)  # noqa: E731
    if len(new_tracks) > 1:
        encode = target.encode
    else:
        encode = lambda c: c[0]  # noqa: E731
    cache: dict[int, list[int]] = {}

    def letters(sym: int) -> list[int]:
        out = cache.get(sym)
        if out is None:
            out = cache[sym] = sorted({encode(c) for c in mapping(decode(sym))})
        return out

    return _make(new_tracks, fa.relabel(carrier, target, letters))


def convolve(alphabet: Alphabet, words: Sequence[Sequence[int]]) -> Word:
    """Interleave equal-length words into a tuple-word over ``alphabet``."""
    if len({len(w) for w in words}) > 1:
        raise ValueError("convolution needs words of equal length")
    if len(words) != len(alphabet.tracks):
        raise ValueError("number of words does not match number of tracks")
    return tuple(alphabet.encode(letter) for letter in zip(*words))


def deconvolve(alphabet: Alphabet, word: Sequence[int]) -> tuple[Word, ...]:
    k = len(alphabet.tracks)
    if not word:
        return tuple(() for _ in range(k))
    return tuple(zip(*(alphabet.decode(s) for s in word)))


def identity_relation(alphabet: Alphabet) -> Relation:
    tracks = (alphabet, alphabet)
    prod = product_alphabet(tracks)
    carrier = fa.Nfa(prod, 1, ((0, prod.encode((a, a)), 0) for a in alphabet), [0], [0])
    return Relation(tracks, carrier)


def from_nfa(nfa: Nfa, tracks: Sequence[Alphabet]) -> Relation:
    """Wrap an automaton already over a tuple alphabet as a relation."""
    return Relation(tracks, nfa)


def intersect(r1: Relation, r2: Relation) -> Relation:
    _same_tracks(r1, r2)
    return Relation(r1.tracks, fa.intersect(r1.carrier, r2.carrier))


def union(r1: Relation, r2: Relation) -> Relation:
    _same_tracks(r1, r2)
    return Relation(r1.tracks, fa.union(r1.carrier, r2.carrier))


def complement(r: Relation) -> Relation:
    return Relation(r.tracks, fa.complement(r.carrier))


def trim(r: Relation) -> Relation:
    return Relation(r.tracks, fa.trim(r.carrier))


def is_empty(r: Relation) -> tuple[Word, ...] | None:
    w = fa.is_empty(r.carrier)
    return None if w is None else deconvolve(r.alphabet, w)


def includes(r1: Relation, r2: Relation) -> tuple[Word, ...] | None:
    _same_tracks(r1, r2)
    w = fa.includes(r1.carrier, r2.carrier)
    return None if w is None else deconvolve(r1.alphabet, w)


def _same_tracks(r1: Relation, r2: Relation) -> None:
    if r1.tracks != r2.tracks:
        raise AlphabetError("relations have different track alphabets")


def cylindrify(r: RelOrNfa, at: int, alphabet: Alphabet) -> Relation:
    """Insert a free track at position ``at``."""
    tracks, _ = _tracks(r)
    if not 0 <= at <= len(tracks):
        raise IndexError(f"track index {at} out of range")
    new_tracks = tracks[:at] + (alphabet,) + tracks[at:]
    free = range(len(alphabet))
    return _remap(r, new_tracks, lambda c: (c[:at] + (x,) + c[at:] for x in free))


def embed(nfa: Nfa, tracks: Sequence[Alphabet], at: int) -> Relation:
    """Cylindrify a language into track ``at`` of a relation with ``tracks``."""
    tracks = tuple(tracks)
    if tracks[at] != nfa.alphabet:
        raise AlphabetError(f"track {at} alphabet does not match the language")
    result: RelOrNfa = nfa
    for i, alph in enumerate(tracks):
        if i != at:
            result = cylindrify(result, i, alph)
    return result


def project(r: Relation, t: int) -> RelOrNfa:
    """Existentially quantify track ``t``; two tracks project to an automaton."""
    if not 0 <= t < r.arity:
        raise IndexError(f"track index {t} out of range")
    new_tracks = r.tracks[:t] + r.tracks[t + 1:]
    return _remap(r, new_tracks, lambda c: (c[:t] + c[t + 1:],))


def permute(r: Relation, perm: Sequence[int]) -> Relation:
    """New track ``i`` is old track ``perm[i]``."""
    perm = tuple(perm)
    if sorted(perm) != list(range(r.arity)):
        raise ValueError(f"{perm} is not a permutation of the tracks")
    new_tracks = tuple(r.tracks[i] for i in perm)
    return _remap(r, new_tracks, lambda c: (tuple(c[i] for i in perm),))


def inverse(r: Relation) -> Relation:
    if r.arity != 2:
        raise ValueError("inverse needs a binary relation")
    return permute(r, (1, 0))


def domain(r: Relation) -> Nfa:
    return project(r, 1)


def image(r: Relation) -> Nfa:
    return project(r, 0)


def restrict(r: Relation, at: int, nfa: Nfa) -> Relation:
    """Keep the tuples whose track ``at`` lies in L(nfa)."""
    return intersect(r, embed(nfa, r.tracks, at))


def compose(r1: Relation, r2: Relation) -> Relation:
    """``{(x, z) : (x, y) in r1 and (y, z) in r2}`` via a 3-track product."""
    if r1.arity != 2 or r2.arity != 2:
        raise ValueError("compose needs binary relations")
    if r1.tracks[1] != r2.tracks[0]:
        raise AlphabetError("middle alphabets differ")
    left = cylindrify(r1, 2, r2.tracks[1])
    right = cylindrify(r2, 0, r1.tracks[0])
    return trim(project(intersect(left, right), 1))


def post_image(r: Relation, s: Nfa) -> Nfa:
    """``{y : exists x in L(s), (x, y) in r}`` by a direct product."""
    if r.arity != 2:
        raise ValueError("post_image needs a binary relation")
    if s.alphabet != r.tracks[0]:
        raise AlphabetError("language alphabet does not match the source track")
    decode = r.alphabet.decode
    ids: dict[tuple[int, int], int] = {}
    stack = []
    for p in sorted(r.carrier.initial):
        for q in sorted(s.initial):
            ids[(p, q)] = len(ids)
            stack.append((p, q))
    transitions = []
    while stack:
        p, q = stack.pop()
        i = ids[(p, q)]
        row_s = s.delta[q]
        for sym, ps in r.carrier.delta[p].items():
            a, b = decode(sym)
            qs = row_s.get(a)
            if not qs:
                continue
            for p2 in ps:
                for q2 in qs:
                    j = ids.get((p2, q2))
                    if j is None:
                        j = ids[(p2, q2)] = len(ids)
                        stack.append((p2, q2))
                    transitions.append((i, b, j))
    initial = range(len(r.carrier.initial) * len(s.initial))
    finals = [i for (p, q), i in ids.items() if p in r.carrier.finals and q in s.finals]
    return fa.trim(Nfa(r.tracks[1], len(ids), transitions, initial, finals))


def pre_image(r: Relation, s: Nfa) -> Nfa:
    return post_image(inverse(r), s)


def iter_successors(r: Relation, word: Sequence[int]) -> Iterator[Word]:
    """Enumerate ``{y : (word, y) in r}`` by depth-first search on state sets."""
    carrier = r.carrier
    n = len(word)
    # index carrier rows by the source letter
    index = _source_index(r)

    def rec(pos: int, states: frozenset, prefix: list[int]):
        if pos == n:
            if not states.isdisjoint(carrier.finals):
                yield tuple(prefix)
            return
        a = word[pos]
        nexts: dict[int, set[int]] = {}
        for p in states:
            for b, qs in index[p].get(a, ()):
                nexts.setdefault(b, set()).update(qs)
        for b in sorted(nexts):
            prefix.append(b)
            yield from rec(pos + 1, frozenset(nexts[b]), prefix)
            prefix.pop()

    yield from rec(0, frozenset(carrier.initial), [])


def _source_index(r: Relation) -> list[dict[int, list[tuple[int, tuple[int, ...]]]]]:
    cached = _INDEX_CACHE.get(id(r))
    if cached is not None and cached[0] is r:
        return cached[1]
    decode = r.alphabet.decode
    index = []
    for row in r.carrier.delta:
        by_src: dict[int, list[tuple[int, tuple[int, ...]]]] = {}
        for sym, qs in row.items():
            a, b = decode(sym)
            by_src.setdefault(a, []).append((b, qs))
        index.append(by_src)
    if len(_INDEX_CACHE) > 256:
        _INDEX_CACHE.clear()
    _INDEX_CACHE[id(r)] = (r, index)
    return index


_INDEX_CACHE: dict[int, tuple[Relation, list]] = {}
