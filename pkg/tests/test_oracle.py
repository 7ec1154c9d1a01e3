import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmcfair import automata as fa
from rmcfair.oracle import (
    ExplicitMdp, StateBoundError, as_reach, compare_encodings, counter_update, end_components, expand,
    kfair_expand, kfair_verdict, plain_verdict,
)
from rmcfair.encoder import SIGMA
from rmcfair.relations import Relation
from rmcfair.spec import BENCHMARKS, benchmark, gamma_bits

from helpers import memoryless_fails


def mdp(owner, edges, init, final):
    n = len(owner)
    e1 = [tuple(edges.get(i, ())) if owner[i] == 1 else () for i in range(n)]
    e2 = [tuple(edges.get(i, ())) if owner[i] == 2 else () for i in range(n)]
    return ExplicitMdp(list(range(n)), list(owner), e1, e2, frozenset(init), frozenset(final))


@st.composite
def random_mdps(draw):
    n = draw(st.integers(1, 12))
    owner = [draw(st.sampled_from([1, 2])) for _ in range(n)]
    edges = {}
    for i in range(n):
        other = [j for j in range(n) if owner[j] != owner[i]]
        if other:
            edges[i] = tuple(sorted(draw(st.sets(st.sampled_from(other), max_size=3))))
    v1 = [i for i in range(n) if owner[i] == 1] or [0]
    init = draw(st.sets(st.sampled_from(v1), min_size=1, max_size=2))
    final = draw(st.sets(st.integers(0, n - 1), max_size=3))
    return mdp(owner, edges, init, final)


# --- expansion ---------------------------------------------------------------


@pytest.fixture(scope="module")
def herman():
    return benchmark("herman-ring-merge")


def test_herman_ttt_has_three_scheduler_moves(herman):
    m = expand(herman, 3)
    ttt = m.index[herman.alphabet.parse_word("T T T")]
    assert len(m.edges1[ttt]) == 3 and m.owner[ttt] == 1


def test_empty_scheduler_relation(herman):
    empty = Relation(herman.p1.tracks, fa.empty(herman.pairs))
    m = expand(herman.replace(p1=empty), 1)
    assert all(not e for e in m.edges1)


def test_edges_match_pairwise_membership(herman):
    m = expand(herman, 3)
    assert m.check_alternation() == []
    for i, x in enumerate(m.labels):
        for j, y in enumerate(m.labels):
            assert (j in m.edges1[i]) == (m.owner[i] == 1 and herman.p1.accepts(x, y))
            assert (j in m.edges2[i]) == (m.owner[i] == 2 and herman.p2.accepts(x, y))


def test_state_bound(herman):
    with pytest.raises(StateBoundError):
        expand(herman, 4, bound=10)
    with pytest.raises(StateBoundError):
        kfair_expand(herman, 3, 2, bound=100)


def test_state_bound_from_environment(herman, monkeypatch):
    monkeypatch.setenv("RMCFAIR_STATE_BOUND", "5")
    with pytest.raises(StateBoundError):
        expand(herman, 3)


# --- counter product ---------------------------------------------------------


def test_counter_update_table():
    for bits in itertools.product((0, 1), repeat=3):
        p, c, k = bits
        got = counter_update(2, bits, 5)
        gadget = SIGMA["".join(map(str, bits))]
        assert got == {"ID": 2, "DEC": 1, "RESET": 5}[gadget]


def test_k1_herman_unmarked_moves_hit_zero(herman):
    m = kfair_expand(herman, 3, 1)
    for i, (w, f) in enumerate(m.labels):
        if m.owner[i] == 1 and f == (1, 1, 1) and not herman.final.accepts(w):
            assert m.edges1[i]
            for j in m.edges1[i]:
                assert 0 in m.labels[j][1] and j in m.final


def test_guard_and_alarm_finals(herman):
    m = kfair_expand(herman, 3, 2)
    for i, (w, f) in enumerate(m.labels):
        if min(f) == 0:
            assert not m.successors(i)
            assert i in m.final


def test_consequence_resets_to_k(herman):
    k = 3
    m = kfair_expand(herman, 3, k)
    marks = {herman.alphabet.index("Tm"), herman.alphabet.index("Bm")}
    for i, (w, f) in enumerate(m.labels):
        if m.owner[i] != 2:
            continue
        pos = next(p for p, s in enumerate(w) if s in marks)
        for j in m.edges2[i]:
            g = m.labels[j][1]
            assert g[pos] == k
            assert all(g[p] == f[p] for p in range(3) if p != pos)


def test_initial_states_have_full_counters(herman):
    m = kfair_expand(herman, 3, 2)
    assert m.init and all(m.labels[i][1] == (2, 2, 2) for i in m.init)


# --- qualitative reachability ------------------------------------------------


def test_initial_final_holds():
    assert as_reach(mdp([1], {}, [0], [0])).holds


def test_avoiding_loop_is_reported():
    m = mdp([1, 2, 1, 2], {0: (1, 3), 1: (2,), 2: (1,), 3: (0,)}, [0], [3])
    v = as_reach(m)
    assert not v.holds
    assert v.strategy[0] == 1 and v.strategy[2] == 1
    assert {1, 2} <= v.trap


def test_dead_end_fails():
    assert not as_reach(mdp([1, 2], {0: (1,)}, [0], [])).holds


def test_probabilistic_escape_holds():
    # the random state can always return to the final set, so the loop is not an end component
    m = mdp([1, 2, 1], {0: (1,), 1: (0, 2)}, [0], [2])
    assert as_reach(m).holds


@settings(max_examples=300, deadline=None)
@given(random_mdps())
def test_as_reach_matches_memoryless_enumeration(m):
    v = as_reach(m)
    assert v.holds == (not memoryless_fails(m))
    if not v.holds:
        assert v.strategy is not None and v.trap


@settings(max_examples=100, deadline=None)
@given(random_mdps())
def test_end_components_are_closed(m):
    region = set(range(m.size)) - set(m.final)
    ecs, inner = end_components(m, region)
    for v in ecs:
        if m.owner[v] == 2:
            assert set(m.successors(v)) <= ecs
        else:
            assert inner[v] and set(inner[v]) <= ecs


def test_herman_plain_fails_with_witness(herman):
    m = expand(herman, 3)
    v = as_reach(m)
    assert not v.holds
    assert memoryless_fails(m)
    text = v.render(m, herman.alphabet.render)
    assert text.startswith("fails") and "->" in text
    # the chosen moves mark a process without a token
    bm = herman.alphabet.index("Bm")
    assert any(bm in m.labels[t] for s, t in v.strategy.items() if s in v.trap)


@pytest.mark.parametrize("k", [2, 4, 8])
def test_herman_kfair_holds(herman, k):
    assert kfair_verdict(herman, 3, k).holds


def test_moran_kfair_holds():
    assert kfair_verdict(benchmark("moran-line-2"), 3, 4).holds


@pytest.mark.parametrize("k", [1, 2, 3])
def test_all_final_holds(herman, k):
    spec = herman.replace(final=herman.v1)
    assert kfair_verdict(spec, 3, k).holds and plain_verdict(spec, 3).holds


@pytest.mark.parametrize("name", list(BENCHMARKS))
def test_monotone_in_k(name):
    spec = benchmark(name)
    for n in (2, 3):
        verdicts = [kfair_verdict(spec, n, k).holds for k in (1, 2, 3, 4)]
        # a larger bound admits more schedulers, so a verdict can only drop
        assert verdicts == sorted(verdicts, reverse=True)


def test_kfair_is_alternating(herman):
    assert kfair_expand(herman, 3, 2).check_alternation() == []


# --- symbolic vs explicit ------------------------------------------------------


@pytest.mark.parametrize("k", [1, 2, 3])
def test_compare_herman(herman, k):
    c = compare_encodings(herman, 2, k)
    assert c.ok, c.render()


def test_compare_token_death():
    c = compare_encodings(benchmark("token-death"), 3, 2)
    assert c.ok, c.render()


def test_compare_detects_swapped_sigma(herman):
    table = {g: {"DEC": "ID", "ID": "DEC"}.get(v, v) for g, v in SIGMA.items()}
    c = compare_encodings(herman, 2, 2, table=table)
    assert not c.ok
    assert any("edge" in p for p in c.problems)


def test_gamma_bits_layout():
    from rmcfair.spec import GAMMA
    assert gamma_bits(GAMMA.index("101")) == (1, 0, 1)
