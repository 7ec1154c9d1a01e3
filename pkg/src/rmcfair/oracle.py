"""Explicit finite instances and qualitative almost-sure reachability.

Only the support of the random moves is stored: whether the final set is
reached with probability one does not depend on the actual probabilities.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Hashable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import automata as fa
from .automata import Alphabet, Nfa, Word
from .encoder import COUNTERS, EncodedSpec, counter_value, encode_system
from .relations import iter_successors
from .spec import COUNTER_SYMBOLS, GAP, PEBBLE, SystemSpec, gamma_bits

DEFAULT_STATE_BOUND = 2_000_000


class StateBoundError(RuntimeError):
    pass


def state_bound() -> int:
    raw = os.environ.get("RMCFAIR_STATE_BOUND")
    return int(raw) if raw else DEFAULT_STATE_BOUND


@dataclass
class ExplicitMdp:
    labels: list[Hashable]
    owner: list[int]  # 1 = scheduler, 2 = random
    edges1: list[tuple[int, ...]]
    edges2: list[tuple[int, ...]]
    init: frozenset[int]
    final: frozenset[int]
    index: dict[Hashable, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {lab: i for i, lab in enumerate(self.labels)}

    @property
    def size(self) -> int:
        return len(self.labels)

    def successors(self, i: int) -> tuple[int, ...]:
        return self.edges1[i] if self.owner[i] == 1 else self.edges2[i]

    def check_alternation(self) -> list[tuple[int, int]]:
        """Edges that break strict alternation (empty when well formed)."""
        bad = []
        for i in range(self.size):
            for j in self.edges1[i]:
                if self.owner[i] != 1 or self.owner[j] != 2:
                    bad.append((i, j))
            for j in self.edges2[i]:
                if self.owner[i] != 2 or self.owner[j] != 1:
                    bad.append((i, j))
        return bad


def _shape(alphabet: Alphabet, n: int, block: int | None) -> Nfa:
    """Words of ``n`` configuration letters, each followed by a uniform block if requested."""
    if block is None:
        t = [(i, a, i + 1) for i in range(n) for a in alphabet]
        return fa.Nfa(alphabet, n + 1, t, [0], [n])
    letters = [s for s in alphabet if alphabet.name(s) not in COUNTER_SYMBOLS]
    pebble, gap = alphabet.index(PEBBLE), alphabet.index(GAP)
    b = fa.Builder(alphabet)
    cur = b.state()
    start = cur
    for _ in range(n):
        nxt = b.state()
        head = b.state()
        for a in letters:
            b.add(cur, a, head)
        for v in range(block + 1):
            prev = head
            word = [pebble] * v + [gap] * (block - v)
            for i, s in enumerate(word):
                q = nxt if i == len(word) - 1 else b.state()
                b.add(prev, s, q)
                prev = q
        cur = nxt
    return b.build([start], [cur])


def _enumerate(nfa: Nfa, length: int, budget: list[int]) -> list[Word]:
    out = []
    for w in fa.words_of_length(nfa, length):
        budget[0] -= 1
        if budget[0] < 0:
            raise StateBoundError("state bound exceeded; raise RMCFAIR_STATE_BOUND or shrink the instance")
        out.append(w)
    return out


def expand(spec: SystemSpec, n: int, block: int | None = None, bound: int | None = None) -> ExplicitMdp:
    """All configurations of ``n`` letters (each followed by a uniform counter block when ``block`` is set)."""
    if n < 1:
        raise ValueError("instance size must be at least 1")
    if block is not None and not spec.counters:
        raise ValueError("block shape needs an encoded system")
    shape = _shape(spec.alphabet, n, block)
    length = n if block is None else n * (1 + block)
    budget = [bound if bound is not None else state_bound()]
    v1 = _enumerate(fa.intersect(spec.v1, shape), length, budget)
    v2 = _enumerate(fa.intersect(spec.v2, shape), length, budget)
    labels: list[Hashable] = v1 + v2
    owner = [1] * len(v1) + [2] * len(v2)
    index = {w: i for i, w in enumerate(labels)}
    edges1: list[tuple[int, ...]] = []
    edges2: list[tuple[int, ...]] = []
    for i, w in enumerate(labels):
        rel = spec.p1 if owner[i] == 1 else spec.p2
        succ = tuple(sorted(index[y] for y in iter_successors(rel, w) if y in index))
        (edges1 if owner[i] == 1 else edges2).append(succ)
        (edges2 if owner[i] == 1 else edges1).append(())
    init = frozenset(i for i, w in enumerate(labels) if spec.init.accepts(w))
    final = frozenset(i for i, w in enumerate(labels) if spec.final.accepts(w))
    return ExplicitMdp(labels, owner, edges1, edges2, init, final, index)


def counter_update(value: int, bits: tuple[int, int, int], k: int) -> int:
    """One counter after a move, given the annotation bits of the source position."""
    premise, consequence, kind = bits
    if premise and not consequence:
        return value - 1
    if kind == 1 and not premise and not consequence:
        return value
    return k


def kfair_expand(spec: SystemSpec, n: int, k: int, bound: int | None = None) -> ExplicitMdp:
    """Product of the ``n``-letter instance with one counter in ``[0, k]`` per position."""
    if spec.fairness is None:
        raise ValueError("system has no fairness annotator")
    if k < 1:
        raise ValueError("k must be at least 1")
    base = expand(spec, n, bound=bound)
    limit = bound if bound is not None else state_bound()
    valuations = list(product(range(k + 1), repeat=n))
    if base.size * len(valuations) > limit:
        raise StateBoundError("state bound exceeded; raise RMCFAIR_STATE_BOUND or shrink the instance")
    nv = len(valuations)
    vindex = {v: i for i, v in enumerate(valuations)}
    annotations = [
        [tuple(gamma_bits(g) for g in c) for c in iter_successors(spec.fairness, w)]
        for w in base.labels
    ]
    labels: list[Hashable] = []
    owner: list[int] = []
    edges1: list[tuple[int, ...]] = []
    edges2: list[tuple[int, ...]] = []
    init, final = set(), set()
    for i, w in enumerate(base.labels):
        succ = base.successors(i)
        for f in valuations:
            sid = len(labels)
            labels.append((w, f))
            owner.append(base.owner[i])
            alive = min(f) > 0
            out = set()
            if alive:
                for bits in annotations[i]:
                    f2 = tuple(counter_update(v, b, k) for v, b in zip(f, bits))
                    for j in succ:
                        out.add(j * nv + vindex[f2])
            moves = tuple(sorted(out))
            (edges1 if base.owner[i] == 1 else edges2).append(moves)
            (edges2 if base.owner[i] == 1 else edges1).append(())
            if i in base.init and min(f) == k:
                init.add(sid)
            if (i in base.final and alive) or not alive:
                final.add(sid)
    return ExplicitMdp(labels, owner, edges1, edges2, frozenset(init), frozenset(final))


# --- qualitative reachability -------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    holds: bool
    strategy: Mapping[int, int] | None = None  # scheduler state -> chosen successor
    trap: frozenset[int] = frozenset()  # where the avoiding strategy ends up

    def render(self, mdp: ExplicitMdp, fmt=str) -> str:
        if self.holds:
            return "holds"
        lines = ["fails"]
        for s in sorted(self.strategy, key=lambda i: (fmt(mdp.labels[i]), i)):
            mark = " *" if s in self.trap else ""
            lines.append(f"  {fmt(mdp.labels[s])} -> {fmt(mdp.labels[self.strategy[s]])}{mark}")
        dead = sorted(i for i in self.trap if not mdp.successors(i))
        for s in dead:
            lines.append(f"  {fmt(mdp.labels[s])} is a dead end")
        return "\n".join(lines)


def _scc(nodes: list[int], succ: Mapping[int, Sequence[int]]) -> dict[int, int]:
    pos = {v: i for i, v in enumerate(nodes)}
    rows, cols = [], []
    for v in nodes:
        for w in succ[v]:
            if w in pos:
                rows.append(pos[v])
                cols.append(pos[w])
    m = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(len(nodes), len(nodes)))
    _, comp = connected_components(m, directed=True, connection="strong")
    return {v: int(comp[pos[v]]) for v in nodes}


def end_components(mdp: ExplicitMdp, region: set[int]) -> tuple[set[int], dict[int, tuple[int, ...]]]:
    """Union of the maximal end components inside ``region`` and their internal moves."""
    live = set(region)
    succ = {v: tuple(w for w in mdp.successors(v)) for v in live}
    while True:
        changed = True
        while changed:
            changed = False
            for v in list(live):
                inside = [w for w in succ[v] if w in live]
                if mdp.owner[v] == 2:
                    ok = bool(succ[v]) and len(inside) == len(succ[v])
                else:
                    ok = bool(inside)
                if not ok:
                    live.discard(v)
                    changed = True
                else:
                    succ[v] = tuple(inside) if mdp.owner[v] == 1 else succ[v]
        if not live:
            return set(), {}
        nodes = sorted(live)
        comp = _scc(nodes, {v: [w for w in succ[v] if w in live] for v in nodes})
        removed = False
        for v in nodes:
            same = tuple(w for w in succ[v] if w in live and comp[w] == comp[v])
            if mdp.owner[v] == 2:
                if len(same) != len(succ[v]):
                    live.discard(v)
                    removed = True
            else:
                if not same:
                    live.discard(v)
                    removed = True
                elif len(same) != len(succ[v]):
                    succ[v] = same
                    removed = True
        if not removed:
            return live, {v: succ[v] for v in live}


def as_reach(mdp: ExplicitMdp) -> Verdict:
    """Does every scheduler reach the final set with probability one from every initial state?

    Refuted exactly when, avoiding final states, some initial state can reach
    an end component or a configuration without moves.
    """
    region = {v for v in range(mdp.size) if v not in mdp.final}
    ecs, inner = end_components(mdp, region)
    dead = {v for v in region if not mdp.successors(v)}
    targets = ecs | dead
    # breadth-first search from the initial states through non-final states
    parent: dict[int, int | None] = {}
    queue = deque()
    for v in sorted(mdp.init):
        if v in region:
            parent[v] = None
            queue.append(v)
    hit = None
    while queue:
        v = queue.popleft()
        if v in targets:
            hit = v
            break
        for w in mdp.successors(v):
            if w in region and w not in parent:
                parent[w] = v
                queue.append(w)
    if hit is None:
        return Verdict(True)
    strategy: dict[int, int] = {}
    # stay inside the end component containing the hit state
    trap = _component_of(hit, inner) if hit in ecs else {hit}
    for v in trap:
        if mdp.owner[v] == 1 and v in inner:
            strategy[v] = min(w for w in inner[v] if w in trap)
    v = hit
    while parent[v] is not None:
        u = parent[v]
        if mdp.owner[u] == 1:
            strategy.setdefault(u, v)
        v = u
    return Verdict(False, strategy, frozenset(trap))


def _component_of(v: int, inner: Mapping[int, tuple[int, ...]]) -> set[int]:
    """States of the end component containing ``v`` (mutually reachable within it)."""
    fwd = _reach(v, inner)
    back: dict[int, list[int]] = {}
    for u, ws in inner.items():
        for w in ws:
            back.setdefault(w, []).append(u)
    bwd = _reach(v, back)
    return fwd & bwd


def _reach(v: int, succ) -> set[int]:
    seen = {v}
    stack = [v]
    while stack:
        u = stack.pop()
        for w in succ.get(u, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def kfair_verdict(spec: SystemSpec, n: int, k: int, bound: int | None = None) -> Verdict:
    return as_reach(kfair_expand(spec, n, k, bound))


def plain_verdict(spec: SystemSpec, n: int, bound: int | None = None) -> Verdict:
    return as_reach(expand(spec, n, bound=bound))


# --- symbolic vs explicit cross-check ----------------------------------------


@dataclass
class Comparison:
    ok: bool
    problems: list[str]
    states: int = 0
    verdict: bool | None = None

    def render(self) -> str:
        if self.ok:
            return f"ok ({self.states} states, verdict {'holds' if self.verdict else 'fails'})"
        return "mismatch\n" + "\n".join(f"  {p}" for p in self.problems)


def decode_state(encoded: EncodedSpec, word: Word) -> tuple[Word, tuple[int, ...]]:
    config, blocks = encoded.decode(word)
    values = []
    for bl in blocks:
        v = counter_value(bl)
        if v is None:
            raise ValueError(f"malformed counter block in {encoded.spec.alphabet.render(word)!r}")
        values.append(v)
    return config, tuple(values)


def compare_encodings(spec: SystemSpec, n: int, k: int, table: Mapping[str, str] | None = None,
                      bound: int | None = None, limit: int = 10) -> Comparison:
    """Expand the counter encoding at uniform block length ``k`` and match it with the counter product."""
    encoded = encode_system(spec, table)
    sym = expand(encoded.spec, n, block=k, bound=bound)
    ref = kfair_expand(spec, n, k, bound)
    problems: list[str] = []
    alph = spec.alphabet

    def show(label) -> str:
        w, f = label
        return f"{alph.render(w)} {list(f)}"

    decoded = [decode_state(encoded, w) for w in sym.labels]
    to_ref = {}
    for i, lab in enumerate(decoded):
        j = ref.index.get(lab)
        if j is None:
            problems.append(f"encoded state {show(lab)} has no counterpart")
        else:
            to_ref[i] = j
    missing = set(range(ref.size)) - set(to_ref.values())
    for j in sorted(missing)[:limit]:
        problems.append(f"state {show(ref.labels[j])} missing from the encoding")
    if len(set(to_ref.values())) != len(to_ref):
        problems.append("decoding is not injective")
    for i, j in sorted(to_ref.items()):
        if len(problems) >= limit:
            break
        if sym.owner[i] != ref.owner[j]:
            problems.append(f"owner differs at {show(ref.labels[j])}")
        if (i in sym.init) != (j in ref.init):
            problems.append(f"initial status differs at {show(ref.labels[j])}")
        if (i in sym.final) != (j in ref.final):
            problems.append(f"final status differs at {show(ref.labels[j])}")
        for name, es, er in (("p1", sym.edges1, ref.edges1), ("p2", sym.edges2, ref.edges2)):
            got = {to_ref[t] for t in es[i] if t in to_ref}
            want = set(er[j])
            for t in sorted(got - want)[:1]:
                problems.append(f"{name} edge {show(ref.labels[j])} -> {show(ref.labels[t])} only in the encoding")
            for t in sorted(want - got)[:1]:
                problems.append(f"{name} edge {show(ref.labels[j])} -> {show(ref.labels[t])} missing from the encoding")
    v_sym, v_ref = as_reach(sym).holds, as_reach(ref).holds
    if v_sym != v_ref:
        problems.append(f"verdicts differ: encoding {'holds' if v_sym else 'fails'}, counters {'holds' if v_ref else 'fails'}")
    return Comparison(not problems, problems[:limit], ref.size, v_ref)


def render_label(spec: SystemSpec, label) -> str:
    if isinstance(label, tuple) and len(label) == 2 and isinstance(label[1], tuple) and label and isinstance(label[0], tuple):
        return f"{spec.alphabet.render(label[0])} {list(label[1])}"
    return spec.alphabet.render(label)


__all__ = [
    "ExplicitMdp", "Verdict", "Comparison", "StateBoundError", "expand", "kfair_expand",
    "as_reach", "kfair_verdict", "plain_verdict", "compare_encodings", "end_components",
    "counter_update", "state_bound", "COUNTERS",
]
