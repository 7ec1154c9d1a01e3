"""Bounded enumeration of regular proofs with counterexample screening.

Candidates are partial deterministic automata: an undefined transition
rejects, so the implicit sink state is not counted.  States are numbered in
breadth-first order of first use, which leaves one representative per
isomorphism class.  Tables are filled by depth-first search; every partial
table is screened against constraints harvested from earlier failed checks,
evaluated three-valued (a run that reaches an unfilled entry is unknown).
"""

from __future__ import annotations

import time
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .automata import Alphabet, Nfa, Word
from .proof import Failure, RegularProof, check_proof, check_vc1, check_vc2, check_vc3
from .relations import Relation, convolve, product_alphabet
from .spec import SystemSpec

UNSET = -2
UNDEF = -1
TRUE, FALSE, UNKNOWN = 1, 0, 2


@dataclass(frozen=True)
class SearchBudget:
    max_inv_states: int = 2
    max_ord_states: int = 2
    timeout: float = 60.0
    cache_capacity: int = 4096

    def __post_init__(self):
        if min(self.max_inv_states, self.max_ord_states, self.cache_capacity) < 1 or self.timeout <= 0:
            raise ValueError("search bounds must be positive")


@dataclass
class SearchOutcome:
    status: str  # "proved" or "unknown"
    proof: RegularProof | None = None
    checked: int = 0
    screened: int = 0
    elapsed: float = 0.0
    reason: str = ""

    @property
    def proved(self) -> bool:
        return self.status == "proved"


class _Timeout(Exception):
    pass


@dataclass
class Table:
    """A partial automaton under construction.

    Variables are numbered finals first (state ``q`` is variable ``q``),
    then transition entries in row-major order.
    """

    n: int
    k: int
    finals: list[int]
    delta: list[int]  # row-major, UNSET / UNDEF / target

    def member(self, word: Sequence[int], touched: set[int] | None = None) -> int:
        q = 0
        k, n = self.k, self.n
        for a in word:
            i = q * k + a
            t = self.delta[i]
            if t == UNSET:
                return UNKNOWN
            if touched is not None:
                touched.add(n + i)
            if t == UNDEF:
                return FALSE
            q = t
        f = self.finals[q]
        if f == UNSET:
            return UNKNOWN
        if touched is not None:
            touched.add(q)
        return f

    def to_nfa(self, alphabet: Alphabet) -> Nfa:
        t = [(i // self.k, i % self.k, d) for i, d in enumerate(self.delta) if d >= 0]
        return Nfa(alphabet, self.n, t, [0], [q for q in range(self.n) if self.finals[q] == TRUE])


# --- constraints -------------------------------------------------------------
# Each constraint is a tuple whose first item names its shape; words are
# already over the candidate's alphabet (tuple letters for the ranking).


def _eval(c: tuple, member) -> int:
    kind = c[0]
    if kind == "pos":
        return member(c[1])
    if kind == "neg":
        v = member(c[1])
        return UNKNOWN if v == UNKNOWN else 1 - v
    if kind == "imp":
        a = member(c[1])
        if a == FALSE:
            return TRUE
        b = member(c[2])
        if b == TRUE:
            return TRUE
        return FALSE if (a == TRUE and b == FALSE) else UNKNOWN
    if kind == "trans":
        a, b = member(c[1]), member(c[2])
        if a == FALSE or b == FALSE:
            return TRUE
        v = member(c[3])
        if v == TRUE:
            return TRUE
        return FALSE if (a == TRUE and b == TRUE and v == FALSE) else UNKNOWN
    if kind == "some":
        seen = FALSE
        for w in c[1]:
            v = member(w)
            if v == TRUE:
                return TRUE
            if v == UNKNOWN:
                seen = UNKNOWN
        return seen
    raise ValueError(kind)


def _conflict(c: tuple, tab: Table) -> set[int]:
    """Variables read while refuting ``c`` on ``tab``."""
    touched: set[int] = set()
    for w in c[1:] if c[0] != "some" else c[1]:
        tab.member(w, touched)
    return touched


class ConstraintCache:
    """Bounded LRU store of counterexamples; eviction only costs speed."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.items: OrderedDict[tuple, None] = OrderedDict()

    def add(self, c: tuple) -> None:
        self.items[c] = None
        self.items.move_to_end(c)
        while len(self.items) > self.capacity:
            self.items.popitem(last=False)

    def touch(self, c: tuple) -> None:
        self.items.move_to_end(c)

    def __iter__(self):
        return iter(list(self.items))

    def __len__(self):
        return len(self.items)


def replay_counterexample(cex: tuple, candidate: Nfa) -> bool:
    """Membership-only evaluation of one cached constraint on a finished candidate."""
    member = lambda w: TRUE if candidate.accepts(w) else FALSE  # noqa: E731
    return _eval(cex, member) == TRUE


# --- table enumeration -------------------------------------------------------


def _tables(n: int, k: int, prefer_accept: bool, screen, deadline: float) -> Iterator[Table]:
    """Canonical partial tables with exactly ``n`` used states, in search order.

    ``screen(tab)`` returns None or the variables behind a violated
    constraint.  Dead ends report such conflict sets upward so whole levels
    that cannot repair the conflict are skipped (conflict-directed
    backjumping); a yielded table is re-screened when the caller resumes.
    """
    tab = Table(n, k, [UNSET] * n, [UNSET] * (n * k))
    fin_order = (TRUE, FALSE) if prefer_accept else (FALSE, TRUE)
    total = n + n * k
    counter = [0]
    ALL = None

    def tick():
        counter[0] += 1
        if counter[0] & 255 == 0 and time.monotonic() > deadline:
            raise _Timeout

    def assign(var: int, value: int) -> None:
        if var < n:
            tab.finals[var] = value
        else:
            tab.delta[var - n] = value

    def options(var: int, seen: int) -> list[int]:
        if var < n:
            return list(fin_order)
        targets = list(range(min(seen + 1, n - 1) + 1))
        return targets + [UNDEF] if prefer_accept else [UNDEF] + targets

    def dfs(var: int, seen: int):
        tick()
        if var == total:
            if seen != n - 1:
                return set(range(n, total))
            yield tab
            c = screen(tab)
            return ALL if c is None else c
        structural = set(range(n, var))  # earlier entries fix the numbering
        if var >= n:
            i = var - n
            if i // k > seen or n - 1 - seen > n * k - i:
                return structural
        conflict: set[int] = set()
        limited = var >= n and seen + 1 < n - 1
        for value in options(var, seen):
            assign(var, value)
            c = screen(tab)
            if c is None:
                sub = yield from dfs(var + 1, max(seen, value) if var >= n else seen)
            else:
                sub = c
            if sub is ALL:
                conflict = ALL
                continue
            if conflict is not ALL:
                if var not in sub:
                    assign(var, UNSET)
                    return sub
                conflict |= sub - {var}
        assign(var, UNSET)
        if conflict is not ALL and limited:
            conflict |= structural
        return conflict

    yield from dfs(0, 0)


# --- the search loop ---------------------------------------------------------


def _pair(alph: Alphabet, a: Word, b: Word) -> Word:
    return convolve(alph, (a, b))


def search(spec: SystemSpec, budget: SearchBudget = SearchBudget()) -> SearchOutcome:
    """First proof in canonical order within the budget, re-verified before it is returned."""
    start = time.monotonic()
    deadline = start + budget.timeout
    sigma = spec.alphabet
    pairs = product_alphabet((sigma, sigma))
    inv_cache = ConstraintCache(budget.cache_capacity)
    ord_cache = ConstraintCache(budget.cache_capacity)
    rank_cex: OrderedDict[tuple[Word, Word], tuple[Word, ...]] = OrderedDict()
    stats = {"checked": 0, "screened": 0}

    def screener(cache: ConstraintCache, extra=()):
        def screen(tab: Table) -> set[int] | None:
            for c in extra:
                if _eval(c, tab.member) == FALSE:
                    stats["screened"] += 1
                    return _conflict(c, tab)
            for c in cache:
                if _eval(c, tab.member) == FALSE:
                    cache.touch(c)
                    stats["screened"] += 1
                    return _conflict(c, tab)
            return None
        return screen

    def outcome(status, proof=None, reason=""):
        return SearchOutcome(status, proof, stats["checked"], stats["screened"], time.monotonic() - start, reason)

    try:
        for n_inv in range(1, budget.max_inv_states + 1):
            for inv_tab in _tables(n_inv, len(sigma), True, screener(inv_cache), deadline):
                inv = inv_tab.to_nfa(sigma)
                stats["checked"] += 1
                empty_ord = Relation((sigma, sigma), Nfa(pairs, 1, (), [0], ()))
                fails = check_vc1(spec, RegularProof(inv, empty_ord))
                if fails:
                    for f in fails:
                        inv_cache.add(_inv_constraint(f))
                    continue
                found = _search_order(spec, inv, budget, deadline, ord_cache, rank_cex, screener, stats)
                if found is not None:
                    proof = RegularProof(inv, found, spec.name)
                    report = check_proof(spec, proof)
                    if not report.ok:  # screening or search bookkeeping went wrong
                        raise AssertionError("search produced a proof that does not check")
                    return outcome("proved", proof)
    except _Timeout:
        return outcome("unknown", reason=f"timeout after {budget.timeout:g}s")
    return outcome("unknown", reason="candidate space exhausted within the state bounds")


def _inv_constraint(f: Failure) -> tuple:
    if f.clause == "init":
        return ("pos", f.witness[0])
    return ("imp", f.witness[0], f.witness[1])


def _search_order(spec, inv: Nfa, budget, deadline, ord_cache, rank_cex, screener, stats) -> Relation | None:
    sigma = spec.alphabet
    pairs = product_alphabet((sigma, sigma))

    def rank_constraints():
        out = []
        for (x, _y), zs in rank_cex.items():
            if not inv.accepts(x):
                continue
            ok = tuple(_pair(pairs, z, x) for z in zs if inv.accepts(z))
            out.append(("some", ok))
        return out

    for n_ord in range(1, budget.max_ord_states + 1):
        extra = rank_constraints()
        screen = screener(ord_cache, extra)
        for tab in _tables(n_ord, len(pairs), False, screen, deadline):
            order = Relation((sigma, sigma), tab.to_nfa(pairs))
            stats["checked"] += 1
            proof = RegularProof(inv, order)
            fails = check_vc2(proof) + check_vc3(spec, proof)
            if not fails:
                return order
            for f in fails:
                if f.clause == "irreflexive":
                    ord_cache.add(("neg", _pair(pairs, f.witness[0], f.witness[0])))
                elif f.clause == "transitive":
                    x, y, z = f.witness
                    ord_cache.add(("trans", _pair(pairs, x, y), _pair(pairs, y, z), _pair(pairs, x, z)))
                else:
                    x, y = f.witness
                    rank_cex[(x, y)] = tuple(spec.p2.successors(y))
                    while len(rank_cex) > budget.cache_capacity:
                        rank_cex.popitem(last=False)
                    # rank constraints depend on the invariant, so they are
                    # rebuilt in place for the screener
                    extra[:] = rank_constraints()
    return None
