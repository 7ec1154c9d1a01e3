"""Acceptance criteria, one test each, with their time limits.

Each test records a PASS/FAIL line that the terminal summary prints.
"""

import itertools
import random
import time

import numpy as np
import pytest

from rmcfair import automata as fa
from rmcfair.automata import Alphabet, Nfa
from rmcfair.encoder import SIGMA, check_annotator, counter_gadgets, counter_value, encode_system
from rmcfair.oracle import as_reach, compare_encodings, expand, kfair_verdict
from rmcfair.proof import check_proof, parse_proof, replay
from rmcfair.search import SearchBudget, search
from rmcfair.spec import BENCHMARKS, EXTRAS, SpecError, benchmark, load_resource, parse_system

from conftest import ACCEPTANCE

PROOFS = [
    "token-death.proof",
    "token-death-counters.proof",
    "token-death-counters-noninductive.proof",
    "token-death-counters-reflexive.proof",
    "token-death-counters-intransitive.proof",
]


class Criterion:
    def __init__(self, num: int, title: str, limit: float):
        self.num, self.title, self.limit = num, title, limit

    def __enter__(self):
        self.start = time.monotonic()
        ACCEPTANCE[self.num] = (False, f"criterion {self.num} FAIL  {self.title} (did not finish)")
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.monotonic() - self.start
        ok = exc_type is None and elapsed < self.limit
        tag = "PASS" if ok else "FAIL"
        ACCEPTANCE[self.num] = (ok, f"criterion {self.num} {tag}  {self.title}  [{elapsed:.1f}s, limit {self.limit:g}s]")
        if exc_type is None:
            assert elapsed < self.limit, f"took {elapsed:.1f}s, limit {self.limit:g}s"
        return False


# --- 1 ------------------------------------------------------------------------


def test_criterion_1_counter_gadgets():
    with Criterion(1, "counter gadget semantics vs arithmetic", 5):
        arithmetic = {"ID": lambda v, n: v, "DEC": lambda v, n: v - 1, "RESET": lambda v, n: n}
        checked = 0
        for name, r in zip(("ID", "DEC", "RESET"), counter_gadgets()):
            for n in range(0, 7):
                blocks = list(itertools.product(range(2), repeat=n))
                for x in blocks:
                    for y in blocks:
                        vx, vy = counter_value(x), counter_value(y)
                        want = vx is not None and vy is not None and vx >= 1 and arithmetic[name](vx, n) == vy
                        assert r.accepts(x, y) == want, (name, x, y)
                        checked += 1
        assert checked == 3 * sum(4 ** n for n in range(7))


# --- 2 ------------------------------------------------------------------------


def sigma_mutations():
    for letter, gadget in sorted(SIGMA.items()):
        for other in ("ID", "DEC", "RESET"):
            if other != gadget:
                yield letter, dict(SIGMA, **{letter: other})


def test_criterion_2_encoding_correctness():
    with Criterion(2, "counter encoding matches the counter product; sigma mutations detected", 120):
        for name in ("herman-ring-merge", "herman-line-merge", "token-death"):
            spec = benchmark(name)
            for n in (2, 3):
                for k in (1, 2, 3):
                    c = compare_encodings(spec, n, k)
                    assert c.ok, f"{name} N={n} k={k}: {c.render()}"
        probes = [("herman-ring-merge", 2, 2), ("token-death", 2, 2), ("token-death-mixed", 2, 2),
                  ("token-death-mixed", 3, 2)]
        specs = {name: benchmark(name) for name, _, _ in probes}
        missed = []
        for letter, table in sigma_mutations():
            if not any(not compare_encodings(specs[name], n, k, table=table).ok for name, n, k in probes):
                missed.append(f"{letter}->{table[letter]}")
        assert not missed, f"undetected sigma mutations: {missed}"
        assert len(list(sigma_mutations())) == 16


# --- 3 ------------------------------------------------------------------------


def test_criterion_3_fairness_matters():
    with Criterion(3, "herman-ring-merge N=3: plain fails, k-fair holds for k=2,4,8", 60):
        spec = benchmark("herman-ring-merge")
        m = expand(spec, 3)
        v = as_reach(m)
        assert not v.holds and v.strategy and v.trap
        for s, t in v.strategy.items():
            assert t in m.successors(s)
        for k in (2, 4, 8):
            assert kfair_verdict(spec, 3, k).holds


# --- 4 ------------------------------------------------------------------------


def test_criterion_4_benchmark_sweep():
    with Criterion(4, "k-fair verdict holds on every benchmark for N<=4, k in {2,4}", 900):
        assert len(BENCHMARKS) == 8
        failures = []
        for name in BENCHMARKS:
            spec = benchmark(name)
            for n in (1, 2, 3, 4):
                for k in (2, 4):
                    if not kfair_verdict(spec, n, k).holds:
                        failures.append((name, n, k))
        assert not failures, failures


# --- 5 ------------------------------------------------------------------------


def test_criterion_5_proof_checking():
    with Criterion(5, "hand proof passes; five mutations fail with replayable witnesses", 30):
        hand = benchmark("token-death-counters")
        generic = encode_system(benchmark("token-death")).spec
        good = load_resource("token-death-counters.proof")
        for spec in (hand, generic):
            assert check_proof(spec, parse_proof(good, spec)).ok
        mutations = [
            (hand, "token-death-counters-noninductive.proof", "VC1"),
            (hand, "token-death-counters-reflexive.proof", "VC2"),
            (hand, "token-death-counters-intransitive.proof", "VC2"),
            (benchmark("token-death-counters-idle"), "token-death-counters.proof", "VC3"),
            (benchmark("token-death-counters-shrunk"), "token-death-counters.proof", "VC3"),
        ]
        for spec, name, vc in mutations:
            proof = parse_proof(load_resource(name), spec)
            report = check_proof(spec, proof)
            assert not report.passed(vc), name
            for f in report.failures:
                assert f.witness and replay(spec, proof, f), (name, f)


# --- 6 ------------------------------------------------------------------------


def test_criterion_6_checker_oracle_concordance():
    with Criterion(6, "every accepted proof agrees with the plain oracle for N<=4", 300):
        specs = {name: benchmark(name) for name in list(BENCHMARKS) + list(EXTRAS)}
        specs["token-death (generic encoding)"] = encode_system(benchmark("token-death")).spec
        proofs = []
        for name, spec in specs.items():
            for file in PROOFS:
                try:
                    proofs.append((name, file, parse_proof(load_resource(file), spec)))
                except (SpecError, ValueError):
                    continue  # written over another alphabet
            found = search(spec, SearchBudget(2, 2, 10))
            if found.proved:
                proofs.append((name, "search", found.proof))
        accepted = 0
        discrepancies = []
        for name, file, proof in proofs:
            spec = specs[name]
            if not check_proof(spec, proof).ok:
                continue
            accepted += 1
            for n in (1, 2, 3, 4):
                if not as_reach(expand(spec, n)).holds:
                    discrepancies.append((name, file, n))
            if spec.counters:
                for n in (1, 2, 3):
                    for block in (1, 2):
                        if not as_reach(expand(spec, n, block=block)).holds:
                            discrepancies.append((name, file, n, block))
        assert accepted >= 4, accepted
        assert not discrepancies, discrepancies


# --- 7 ------------------------------------------------------------------------

CASES = 1000
MAX_LEN = 8


def random_nfa(rng: random.Random, alphabet: Alphabet) -> Nfa:
    n = rng.randint(1, 5)
    density = rng.random()
    trans = [(p, a, q) for p in range(n) for a in alphabet for q in range(n) if rng.random() < density * 0.5]
    initial = [q for q in range(n) if rng.random() < 0.4] or [0]
    finals = [q for q in range(n) if rng.random() < 0.4]
    return Nfa(alphabet, n, trans, initial, finals)


def membership(a: Nfa) -> np.ndarray:
    """Acceptance of every word up to MAX_LEN, in shortlex order."""
    k = len(a.alphabet)
    mats = []
    for s in range(k):
        m = np.zeros((a.n, a.n), dtype=np.int32)
        for p, sym, q in a.transitions():
            if sym == s:
                m[p, q] = 1
        mats.append(m)
    fin = np.zeros(a.n, dtype=bool)
    fin[list(a.finals)] = True
    level = np.zeros((1, a.n), dtype=np.int32)
    level[0, list(a.initial)] = 1
    out = [(level > 0) @ fin]
    for _ in range(MAX_LEN):
        level = np.stack([(level @ m > 0).astype(np.int32) for m in mats], axis=1).reshape(-1, a.n)
        out.append(((level > 0) & fin).any(axis=1))
    return np.concatenate(out)


def shortlex_words(alphabet: Alphabet) -> list:
    return list(alphabet.words(MAX_LEN))


def test_criterion_7_automata_algebra():
    with Criterion(7, f"{CASES} random cases per operation agree with enumeration; antichain = classical", 120):
        rng = random.Random(20240611)
        alphabets = [Alphabet(["a"]), Alphabet(["a", "b"]), Alphabet(["a", "b", "c"])]
        words = {len(al): shortlex_words(al) for al in alphabets}
        counts = dict.fromkeys(["determinize", "complement", "and", "or", "is_empty", "includes", "antichain"], 0)
        for _ in range(CASES):
            alph = rng.choice(alphabets)
            ws = words[len(alph)]
            a, b = random_nfa(rng, alph), random_nfa(rng, alph)
            ma, mb = membership(a), membership(b)
            d = fa.determinize(a)
            assert len(d.initial) == 1 and d.is_deterministic() and d.is_complete()
            assert np.array_equal(membership(d), ma)
            counts["determinize"] += 1
            assert np.array_equal(membership(fa.complement(a)), ~ma)
            counts["complement"] += 1
            assert np.array_equal(membership(fa.product(a, b, "and")), ma & mb)
            counts["and"] += 1
            assert np.array_equal(membership(fa.product(a, b, "or")), ma | mb)
            counts["or"] += 1
            # a shortest accepted word of a 5-state automaton has length < 5
            hits = np.flatnonzero(ma)
            assert fa.is_empty(a) == (ws[hits[0]] if hits.size else None)
            counts["is_empty"] += 1
            diff = np.flatnonzero(ma & ~mb)
            got = fa.includes(a, b)
            if diff.size:
                assert got == ws[diff[0]]
            elif got is not None:
                assert len(got) > MAX_LEN and a.accepts(got) and not b.accepts(got)
            classical = fa.is_empty(fa.product(a, fa.complement(fa.determinize(b)), "and"))
            assert (got is None) == (classical is None)
            counts["includes"] += 1
            assert fa.includes_antichain(a, b) == (classical is None)
            counts["antichain"] += 1
        assert all(c == CASES for c in counts.values()), counts


# --- 8 ------------------------------------------------------------------------


def test_criterion_8_annotator_kinds():
    with Criterion(8, "kind-bit check accepts shipped annotators, rejects a mixed one", 5):
        shipped = [benchmark(n) for n in list(BENCHMARKS) + list(EXTRAS)]
        annotated = [s for s in shipped if s.fairness is not None]
        assert len(annotated) >= 10
        for spec in annotated:
            assert check_annotator(spec) is None, spec.name
        mixed = parse_system("system m\nalphabet a\nv1 = a+\nv2 = a a+\ninit = a+\nfinal = a+\n"
                             "p1 = a/a\np2 = a/a\nfair = a/001 | a/000\n")
        w1, w2, i = check_annotator(mixed)
        assert (mixed.alphabet.render(w1), mixed.alphabet.render(w2), i) == ("a", "a", 0)
        kinds = {mixed.fairness.successors(w1)[j][i] % 2 for j in range(2)}
        assert kinds == {0, 1}


# --- 9 ------------------------------------------------------------------------


def test_criterion_9_synthesis(capsys):
    with Criterion(9, "search proves the encoded token-death toy within 2/2 states and 60 s", 60):
        spec = encode_system(benchmark("token-death")).spec
        out = search(spec, SearchBudget(2, 2, 60))
        assert out.proved and check_proof(spec, out.proof).ok
        assert out.proof.inv.n <= 2 and out.proof.ord.carrier.n <= 2
    # not gated: record the herman attempt and its budget
    herman = encode_system(benchmark("herman-ring-merge")).spec
    budget = SearchBudget(2, 2, 20)
    h = search(herman, budget)
    with capsys.disabled():
        print(f"\n[search log] token-death encoded: {out.status} in {out.elapsed:.2f}s "
              f"({out.checked} checks, {out.screened} screened)")
        print(f"[search log] herman-ring-merge encoded, budget {budget.max_inv_states}/{budget.max_ord_states} "
              f"states {budget.timeout:g}s: {h.status} {h.reason} ({h.checked} checks)")
