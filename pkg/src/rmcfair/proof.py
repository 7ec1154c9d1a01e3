"""Regular termination proofs: an inductive invariant plus a ranking relation.

A pair ``(z, x)`` in the ranking relation reads ``z`` ranks strictly below
``x``.  Three conditions make the pair a certificate:

* VC1  init ⊆ Inv and post(Inv) ⊆ Inv under both move relations;
* VC2  the ranking relation is irreflexive and transitive;
* VC3  whenever ``x`` in Inv \\ F moves by the scheduler to ``y`` outside F,
  some random move ``y -> z`` lands in Inv with ``z`` ranked below ``x``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import automata as fa
from . import relations as rel
from .automata import AlphabetError, Nfa, Word
from .regex import RegexError, parse_regex
from .relations import Relation, product_alphabet
from .spec import SpecError, SystemSpec, _compile_rhs, _normalize, _statements
from .textio import format_block

PROOF_KEYWORDS = ("proof", "let", "inv", "ord")


@dataclass(frozen=True, eq=False)
class RegularProof:
    inv: Nfa
    ord: Relation
    system: str = ""
    sources: dict[str, str] = field(default_factory=dict)
    macros: tuple[tuple[str, str], ...] = ()


def parse_proof(text: str, spec: SystemSpec) -> RegularProof:
    """Parse a proof file against the alphabet of ``spec``."""
    system = None
    lets = []
    parts: dict[str, tuple[str, int, int]] = {}
    for keyword, rhs, line, col in _statements(text, PROOF_KEYWORDS, ("inv", "ord")):
        if keyword == "proof":
            m = re.fullmatch(r"\s*for\s+([A-Za-z_][A-Za-z0-9_']*)\s*", rhs)
            if not m:
                raise SpecError("expected 'proof for <system>'", line, col)
            system = m.group(1)
        elif keyword == "let":
            m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_']*)\s*=", rhs)
            if not m:
                raise SpecError("expected 'let <ident> = <regex>'", line, col)
            lets.append((m.group(1), rhs[m.end():], line, col + m.end()))
        else:
            if keyword in parts:
                raise SpecError(f"duplicate definition of {keyword}", line, col)
            parts[keyword] = (rhs, line, col)
    if system is None:
        raise SpecError("missing 'proof for <system>' line")
    for need in ("inv", "ord"):
        if need not in parts:
            raise SpecError(f"missing component {need!r}")
    macros = {}
    for ident, body, line, col in lets:
        if ident in spec.alphabet:
            raise SpecError(f"macro {ident!r} clashes with a symbol", line, col)
        try:
            macros[ident] = parse_regex(body, line, col)
        except RegexError as exc:
            raise SpecError(exc.message, exc.line, exc.column) from None
    pairs = product_alphabet((spec.alphabet, spec.alphabet))
    inv = _compile_rhs(parts["inv"][0], spec.alphabet, macros, *parts["inv"][1:])
    order = _compile_rhs(parts["ord"][0], pairs, macros, *parts["ord"][1:])
    return RegularProof(
        inv, Relation((spec.alphabet, spec.alphabet), order), system,
        {k: _normalize(v[0]) for k, v in parts.items()},
        tuple((ident, " ".join(body.split())) for ident, body, _, _ in lets),
    )


def format_proof(proof: RegularProof) -> str:
    out = [f"proof for {proof.system or 'system'}"]
    for ident, body in proof.macros:
        out.append(f"let {ident} = {body}")
    inv = proof.sources.get("inv") or format_block(proof.inv, "inv")
    order = proof.sources.get("ord") or format_block(proof.ord.carrier, "ord")
    out.append(f"inv = {inv}")
    out.append(f"ord = {order}")
    return "\n".join(out) + "\n"


def proof_from_automata(inv: Nfa, order: Relation, system: str = "") -> RegularProof:
    return RegularProof(inv, order, system)


# --- the three conditions --------------------------------------------------


@dataclass(frozen=True)
class Failure:
    """One violated clause; ``witness`` holds words in clause-specific roles."""

    condition: str  # VC1, VC2, VC3
    clause: str  # init, post, irreflexive, transitive, rank
    witness: tuple[Word, ...]

    def describe(self, spec: SystemSpec) -> str:
        r = spec.alphabet.render
        w = self.witness
        if self.clause == "init":
            return f"initial configuration {r(w[0])!r} is not in the invariant"
        if self.clause == "post":
            return f"{r(w[0])!r} in the invariant moves to {r(w[1])!r} outside it"
        if self.clause == "irreflexive":
            return f"{r(w[0])!r} is ranked below itself"
        if self.clause == "transitive":
            return f"{r(w[0])!r} < {r(w[1])!r} < {r(w[2])!r} but not {r(w[0])!r} < {r(w[2])!r}"
        return f"scheduler move {r(w[0])!r} -> {r(w[1])!r} has no random answer ranked below {r(w[0])!r}"


@dataclass(frozen=True)
class VcReport:
    failures: tuple[Failure, ...]

    @property
    def ok(self) -> bool:
        return not self.failures

    def passed(self, condition: str) -> bool:
        return all(f.condition != condition for f in self.failures)

    def render(self, spec: SystemSpec) -> str:
        lines = []
        for vc in ("VC1", "VC2", "VC3"):
            fails = [f for f in self.failures if f.condition == vc]
            lines.append(f"{vc} {'pass' if not fails else 'FAIL'}")
            for f in fails:
                lines.append(f"  {f.clause}: {f.describe(spec)}")
        lines.append("proof " + ("accepted" if self.ok else "rejected"))
        return "\n".join(lines)


def _check_alphabets(spec: SystemSpec, proof: RegularProof) -> None:
    if proof.inv.alphabet != spec.alphabet:
        raise AlphabetError("invariant alphabet differs from the system alphabet")
    if proof.ord.tracks != (spec.alphabet, spec.alphabet):
        raise AlphabetError("ranking relation alphabet differs from the system alphabet")


def _single(nfa_alphabet, word: Word) -> Nfa:
    return fa.from_words(nfa_alphabet, [word])


def check_vc1(spec: SystemSpec, proof: RegularProof) -> list[Failure]:
    _check_alphabets(spec, proof)
    out = []
    w = fa.includes(spec.init, proof.inv)
    if w is not None:
        out.append(Failure("VC1", "init", (w,)))
    moves = rel.union(spec.p1, spec.p2)
    post = rel.post_image(moves, proof.inv)
    y = fa.includes(post, proof.inv)
    if y is not None:
        pre = fa.intersect(rel.pre_image(moves, _single(spec.alphabet, y)), proof.inv)
        x = fa.is_empty(pre)
        out.append(Failure("VC1", "post", (x, y)))
    return out


def check_vc2(proof: RegularProof) -> list[Failure]:
    out = []
    order = proof.ord
    identity = rel.identity_relation(order.tracks[0])
    refl = rel.is_empty(rel.intersect(order, identity))
    if refl is not None:
        out.append(Failure("VC2", "irreflexive", (refl[0],)))
    bad = rel.includes(rel.compose(order, order), order)
    if bad is not None:
        x, z = bad
        a = order.tracks[0]
        middle = fa.intersect(rel.post_image(order, _single(a, x)), rel.pre_image(order, _single(a, z)))
        out.append(Failure("VC2", "transitive", (x, fa.is_empty(middle), z)))
    return out


def vc3_relations(spec: SystemSpec, proof: RegularProof) -> tuple[Relation, Relation]:
    """Left side {(x, y)} and right side {(x, y) : some answer z is ranked below x}."""
    sigma = spec.alphabet
    tracks = (sigma, sigma)
    not_final = fa.complement(spec.final)
    lhs = rel.restrict(spec.p1, 0, fa.intersect(proof.inv, not_final))
    lhs = rel.restrict(lhs, 1, fa.intersect(spec.configurations, not_final))
    # tracks (x, y, z)
    step = rel.cylindrify(spec.p2, 0, sigma)
    below = rel.cylindrify(rel.inverse(proof.ord), 1, sigma)
    three = rel.intersect(rel.restrict(step, 2, proof.inv), below)
    rhs = rel.project(three, 2)
    assert isinstance(rhs, Relation) and rhs.tracks == tracks
    return lhs, rhs


def check_vc3(spec: SystemSpec, proof: RegularProof) -> list[Failure]:
    _check_alphabets(spec, proof)
    lhs, rhs = vc3_relations(spec, proof)
    bad = rel.includes(lhs, rhs)
    return [] if bad is None else [Failure("VC3", "rank", bad)]


def check_proof(spec: SystemSpec, proof: RegularProof) -> VcReport:
    """All three conditions, each reported with its witnesses."""
    _check_alphabets(spec, proof)
    failures = check_vc1(spec, proof) + check_vc2(proof) + check_vc3(spec, proof)
    return VcReport(tuple(failures))


# --- concrete replay of witnesses --------------------------------------------


def replay(spec: SystemSpec, proof: RegularProof, failure: Failure) -> bool:
    """True if the witness violates its clause when checked by plain membership."""
    w = failure.witness
    inv = proof.inv.accepts
    order = proof.ord.accepts
    if failure.clause == "init":
        return spec.init.accepts(w[0]) and not inv(w[0])
    if failure.clause == "post":
        x, y = w
        moved = spec.p1.accepts(x, y) or spec.p2.accepts(x, y)
        return inv(x) and moved and not inv(y)
    if failure.clause == "irreflexive":
        return order(w[0], w[0])
    if failure.clause == "transitive":
        x, y, z = w
        return order(x, y) and order(y, z) and not order(x, z)
    if failure.clause == "rank":
        x, y = w
        if not (inv(x) and not spec.final.accepts(x) and spec.p1.accepts(x, y)):
            return False
        if not spec.configurations.accepts(y) or spec.final.accepts(y):
            return False
        return not any(inv(z) and order(z, x) for z in spec.p2.successors(y))
    raise ValueError(failure.clause)
