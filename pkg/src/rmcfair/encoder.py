"""Compile a fairness annotator into unary counters carried by the system itself.

Every configuration letter is followed by a counter block ``#1^v #0^(n-v)``.
A move reads the annotation of its source configuration and rewrites each
block by one of three gadgets (keep, decrement, refill); a block of gaps
only is an alarm and ends the run.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping

from . import automata as fa
from . import relations as rel
from .automata import Alphabet, Builder, Nfa, Word
from .regex import compile_regex
from .relations import Relation, product_alphabet
from .spec import COUNTER_SYMBOLS, GAMMA, GAP, PEBBLE, SystemSpec, gamma_bits
from .textio import format_block

COUNTERS = Alphabet(COUNTER_SYMBOLS)

GADGET_REGEX = {
    "ID": "(#1/#1)+ (#0/#0)*",
    "DEC": "(#1/#1)* #1/#0 (#0/#0)*",
    "RESET": "(#1/#1)+ (#0/#1)*",
}


def default_sigma() -> dict[str, str]:
    """Gadget chosen for each annotation letter ``pck``."""
    table = {}
    for sym in GAMMA:
        premise, consequence, kind = gamma_bits(sym)
        if consequence or (not premise and not kind):
            table[GAMMA.name(sym)] = "RESET"
        elif premise:
            table[GAMMA.name(sym)] = "DEC"
        else:
            table[GAMMA.name(sym)] = "ID"
    return table


SIGMA = default_sigma()


class AnnotatorError(ValueError):
    def __init__(self, message: str, witness: tuple[Word, Word, int] | None = None):
        super().__init__(message)
        self.witness = witness


def counter_gadgets() -> tuple[Relation, Relation, Relation]:
    """(ID, DEC, RESET) as binary relations over ``{#1, #0}``."""
    pairs = product_alphabet((COUNTERS, COUNTERS))
    return tuple(
        Relation((COUNTERS, COUNTERS), compile_regex(GADGET_REGEX[g], pairs))
        for g in ("ID", "DEC", "RESET")
    )


def counter_value(block: Word) -> int | None:
    """Pebble count of a well-formed block ``#1* #0*``, else None."""
    names = [COUNTERS.name(s) for s in block]
    v = 0
    while v < len(names) and names[v] == PEBBLE:
        v += 1
    if any(n != GAP for n in names[v:]):
        return None
    return v


# --- annotator well-formedness --------------------------------------------


def check_annotator(spec: SystemSpec) -> tuple[Word, Word, int] | None:
    """None if every position has one fairness kind, else ``(s, s', i)``.

    The two configurations may differ in length; they share a common prefix
    of runs up to ``i`` only in the sense of reading ``i`` letters each.
    """
    if spec.fairness is None:
        raise AnnotatorError("system has no fairness annotator")
    ann = rel.restrict(spec.fairness, 0, spec.configurations).carrier
    ann = fa.trim(ann)
    decode = ann.alphabet.decode
    kind = [gamma_bits(g)[2] for g in GAMMA]
    suffix = _shortest_suffixes(ann)

    start = [(p, q) for p in sorted(ann.initial) for q in sorted(ann.initial)]
    parent: dict[tuple[int, int], tuple | None] = {s: None for s in start}
    frontier = start
    while frontier:
        best = None
        nxt = []
        for p, q in frontier:
            rows = sorted(ann.delta[p].items()), sorted(ann.delta[q].items())
            for sa, ps in rows[0]:
                a, g = decode(sa)
                for sb, qs in rows[1]:
                    b, h = decode(sb)
                    if kind[g] != kind[h]:
                        for p2 in ps:
                            for q2 in qs:
                                if p2 in suffix and q2 in suffix:
                                    prefix = _unwind_pairs(parent, (p, q))
                                    w1 = prefix[0] + (a,) + suffix[p2]
                                    w2 = prefix[1] + (b,) + suffix[q2]
                                    cand = (len(w1) + len(w2), w1, w2, len(prefix[0]))
                                    if best is None or cand < best:
                                        best = cand
                        continue
                    for p2 in ps:
                        for q2 in qs:
                            if (p2, q2) not in parent:
                                parent[(p2, q2)] = ((p, q), a, b)
                                nxt.append((p2, q2))
        if best is not None:
            return best[1], best[2], best[3]
        frontier = nxt
    return None


def _unwind_pairs(parent, node) -> tuple[Word, Word]:
    w1, w2 = [], []
    while parent[node] is not None:
        node, a, b = parent[node]
        w1.append(a)
        w2.append(b)
    return tuple(reversed(w1)), tuple(reversed(w2))


def _shortest_suffixes(ann: Nfa) -> dict[int, Word]:
    """For each state, the shortlex-least input word leading to acceptance."""
    decode = ann.alphabet.decode
    back: dict[int, list[tuple[int, int]]] = {}
    for p, s, q in ann.transitions():
        back.setdefault(q, []).append((decode(s)[0], p))
    best: dict[int, Word] = {q: () for q in ann.finals}
    queue = deque(sorted(ann.finals))
    while queue:
        q = queue.popleft()
        for a, p in sorted(back.get(q, ())):
            cand = (a,) + best[q]
            if p not in best or (len(cand), cand) < (len(best[p]), best[p]):
                if p not in best:
                    queue.append(p)
                best[p] = cand
    return best


# --- stage 1: interleave moves with annotations -----------------------------


def intermediate_alphabet(sigma: Alphabet) -> Alphabet:
    pairs = product_alphabet((sigma, sigma))
    return Alphabet(list(pairs.names) + list(GAMMA.names))


def stage1(relation: Relation, annotator: Relation) -> Nfa:
    """Words ``(a1,b1) c1 (a2,b2) c2 ...`` with ``a``->``b`` in the relation and ``c`` an annotation of ``a``."""
    sigma = relation.tracks[0]
    if relation.tracks != (sigma, sigma) or annotator.tracks != (sigma, GAMMA):
        raise rel.AlphabetError("relation and annotator must share the configuration alphabet")
    out = intermediate_alphabet(sigma)
    npairs = len(relation.alphabet)
    r, f = relation.carrier, annotator.carrier
    rdec, fdec = relation.alphabet.decode, annotator.alphabet.decode
    by_src: list[dict[int, list[tuple[int, tuple[int, ...]]]]] = []
    for row in f.delta:
        d: dict[int, list] = {}
        for s, qs in row.items():
            a, c = fdec(s)
            d.setdefault(a, []).append((c, qs))
        by_src.append(d)

    HOLE = -1
    ids: dict[tuple[int, int, int], int] = {}
    queue: deque = deque()

    def node(key) -> int:
        i = ids.get(key)
        if i is None:
            i = ids[key] = len(ids)
            queue.append(key)
        return i

    for q in sorted(r.initial):
        for qf in sorted(f.initial):
            node((q, qf, HOLE))
    transitions = []
    while queue:
        key = queue.popleft()
        q, qf, c = key
        i = ids[key]
        if c == HOLE:
            for s, q2s in sorted(r.delta[q].items()):
                a, _ = rdec(s)
                for c2, qf2s in by_src[qf].get(a, ()):
                    for q2 in q2s:
                        for qf2 in qf2s:
                            transitions.append((i, s, node((q2, qf2, c2))))
        else:
            transitions.append((i, npairs + c, node((q, qf, HOLE))))
    initial = [ids[(q, qf, HOLE)] for q in r.initial for qf in f.initial]
    finals = [i for (q, qf, c), i in ids.items() if c == HOLE and q in r.finals and qf in f.finals]
    return fa.trim(Nfa(out, len(ids), transitions, initial, finals))


# --- stage 2: substitute counter gadgets ------------------------------------


def encoded_alphabet(sigma: Alphabet) -> Alphabet:
    if any(n in sigma for n in COUNTER_SYMBOLS):
        raise rel.AlphabetError("alphabet already contains counter symbols")
    return Alphabet(list(sigma.names) + list(COUNTER_SYMBOLS))


def _gadget_automata(sigma2: Alphabet) -> dict[str, Nfa]:
    pairs = product_alphabet((sigma2, sigma2))
    return {g: compile_regex(text, pairs) for g, text in GADGET_REGEX.items()}


def stage2(intermediate: Nfa, sigma: Alphabet, table: Mapping[str, str] | None = None) -> Relation:
    """Replace each annotation-letter transition by a fresh copy of its gadget."""
    table = dict(SIGMA if table is None else table)
    sigma2 = encoded_alphabet(sigma)
    pairs1 = product_alphabet((sigma, sigma))
    pairs2 = product_alphabet((sigma2, sigma2))
    npairs = len(pairs1)
    if intermediate.alphabet != intermediate_alphabet(sigma):
        raise rel.AlphabetError("not an intermediate automaton over this alphabet")
    lift_pair = [pairs2.encode(pairs1.decode(s)) for s in range(npairs)]
    gadgets = _gadget_automata(sigma2)
    b = Builder(pairs2)
    base = [b.state() for _ in range(intermediate.n)]
    for p, s, q in intermediate.transitions():
        if s < npairs:
            b.add(base[p], lift_pair[s], base[q])
            continue
        g = gadgets[table[GAMMA.name(s - npairs)]]
        copy = b.embed(g)
        for i in g.initial:
            b.add_eps(base[p], copy[i])
        for f in g.finals:
            b.add_eps(copy[f], base[q])
    nfa = b.build([base[i] for i in intermediate.initial], [base[f] for f in intermediate.finals])
    return Relation((sigma2, sigma2), nfa)


# --- lifting languages -------------------------------------------------------


def block_language(sigma2: Alphabet, kind: str) -> Nfa:
    """``full``: #1+;  ``any``: nonempty #1*#0*;  ``alarm``: #0+."""
    text = {"full": "#1+", "any": "#1+ #0* | #0+", "alarm": "#0+"}[kind]
    return compile_regex(text, sigma2)


def lift(nfa: Nfa, sigma2: Alphabet, block: Nfa) -> Nfa:
    """Follow every letter of each accepted word by a word of ``block``."""
    b = Builder(sigma2)
    enter = [b.state() for _ in range(nfa.n)]
    ready = [b.state() for _ in range(nfa.n)]
    sigma = nfa.alphabet
    for q in range(nfa.n):
        copy = b.embed(block)
        for i in block.initial:
            b.add_eps(enter[q], copy[i])
        for f in block.finals:
            b.add_eps(copy[f], ready[q])
    for p, s, q in nfa.transitions():
        b.add(ready[p], sigma2.index(sigma.name(s)), enter[q])
    return b.build([ready[i] for i in nfa.initial], [ready[f] for f in nfa.finals])


def _has_alarm(sigma: Alphabet, sigma2: Alphabet) -> Nfa:
    """Words with some configuration letter followed by a gaps-only block."""
    gap = sigma2.index(GAP)
    letters = [sigma2.index(n) for n in sigma.names]
    t = []
    for s in sigma2:
        t += [(0, s, 0), (3, s, 3)]
    for a in letters:
        t += [(0, a, 1), (2, a, 3)]
    t += [(1, gap, 2), (2, gap, 2)]
    return Nfa(sigma2, 4, t, [0], [2, 3])


def encode_init(init: Nfa, sigma2: Alphabet) -> Nfa:
    return lift(init, sigma2, block_language(sigma2, "full"))


def encode_final(final: Nfa, configurations: Nfa, sigma2: Alphabet) -> Nfa:
    """Final configurations with live counters, or any configuration with an alarm."""
    anyblock = block_language(sigma2, "any")
    alarm = fa.intersect(lift(configurations, sigma2, anyblock), _has_alarm(configurations.alphabet, sigma2))
    return fa.trim(fa.union(lift(final, sigma2, anyblock), alarm))


# --- whole-system encoding ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class EncodedSpec:
    spec: SystemSpec
    source: SystemSpec
    sigma_table: dict[str, str] = field(default_factory=lambda: dict(SIGMA))

    @property
    def config_symbols(self) -> frozenset[int]:
        a = self.spec.alphabet
        return frozenset(a.index(n) for n in self.source.alphabet.names)

    def decode(self, word: Word) -> tuple[Word, tuple[Word, ...]]:
        """Split an encoded word into its configuration and its counter blocks."""
        a = self.spec.alphabet
        src = self.source.alphabet
        config: list[int] = []
        blocks: list[list[int]] = []
        for s in word:
            name = a.name(s)
            if name in COUNTER_SYMBOLS:
                if not blocks:
                    raise ValueError("encoded word starts with a counter symbol")
                blocks[-1].append(COUNTERS.index(name))
            else:
                config.append(src.index(name))
                blocks.append([])
        return tuple(config), tuple(tuple(bl) for bl in blocks)

    def encode_word(self, config: Word, values: Word, n: int) -> Word:
        """Encoded word with uniform block length ``n``."""
        a = self.spec.alphabet
        pebble, gap = a.index(PEBBLE), a.index(GAP)
        out: list[int] = []
        for s, v in zip(config, values):
            out.append(a.index(self.source.alphabet.name(s)))
            out += [pebble] * v + [gap] * (n - v)
        return tuple(out)


def encode_relation(relation: Relation, annotator: Relation, table: Mapping[str, str] | None = None) -> Relation:
    return stage2(stage1(relation, annotator), relation.tracks[0], table)


def encode_system(spec: SystemSpec, table: Mapping[str, str] | None = None) -> EncodedSpec:
    """Plain system whose almost-sure termination matches finitary-fair termination of ``spec``."""
    if spec.fairness is None:
        raise AnnotatorError("system has no fairness annotator")
    if spec.counters:
        raise AnnotatorError("system is already encoded")
    witness = check_annotator(spec)
    if witness is not None:
        w1, w2, i = witness
        raise AnnotatorError(
            f"annotator assigns two fairness kinds to position {i} "
            f"({spec.alphabet.render(w1)!r} vs {spec.alphabet.render(w2)!r})", witness)
    sigma2 = encoded_alphabet(spec.alphabet)
    anyblock = block_language(sigma2, "any")
    parts = {
        "v1": lift(spec.v1, sigma2, anyblock),
        "v2": lift(spec.v2, sigma2, anyblock),
        "init": encode_init(spec.init, sigma2),
        "final": encode_final(spec.final, spec.configurations, sigma2),
        "p1": encode_relation(spec.p1, spec.fairness, table),
        "p2": encode_relation(spec.p2, spec.fairness, table),
    }
    sources = {}
    for comp, value in parts.items():
        carrier = value.carrier if isinstance(value, Relation) else value
        sources[comp] = format_block(carrier, comp)
    header = "\n".join(
        [f"// Counter encoding of {spec.name}; every letter carries a unary block #1* #0*."]
    )
    encoded = SystemSpec(
        name=f"{spec.name}_counters",
        alphabet=sigma2,
        v1=parts["v1"], v2=parts["v2"], init=parts["init"], final=parts["final"],
        p1=parts["p1"], p2=parts["p2"],
        sources=sources, counters=True, header=header,
    )
    return EncodedSpec(encoded, spec, dict(SIGMA if table is None else table))
