"""System specifications: regular MDPs with an optional fairness annotator.

Concrete syntax (one statement per line, ``//`` comments, a statement may
continue on following lines that do not start with a keyword)::

    system <ident>
    alphabet a, b, c
    counters #1, #0            // only in encoded systems
    let <ident> = <regex>
    v1 = <regex>     v2 = <regex>
    init = <regex>   final = <regex>
    p1 = <pair regex>    p2 = <pair regex>
    fair = <annotator regex>   // letters a/pck: premise, consequence, kind

Any right-hand side may instead be an ``automaton <name> { ... }`` block.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from . import automata as fa
from . import relations as rel
from .automata import Alphabet, AlphabetError, Nfa, Word
from .regex import RegexError, compile_ast, parse_regex
from .relations import Relation, product_alphabet
from .textio import BlockError, format_block, parse_block

GAMMA = Alphabet([f"{p}{c}{k}" for p in "01" for c in "01" for k in "01"])
PEBBLE = "#1"
GAP = "#0"
COUNTER_SYMBOLS = (PEBBLE, GAP)

LANGUAGES = ("v1", "v2", "init", "final")
RELATIONS = ("p1", "p2")
COMPONENTS = LANGUAGES + RELATIONS + ("fair",)
KEYWORDS = ("system", "alphabet", "counters", "let") + COMPONENTS

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*$")
_SYMBOL = re.compile(r"^[A-Za-z0-9_'][A-Za-z0-9_']*$")


class SpecError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f"{line}:{column}: " if line else ""
        super().__init__(where + message)
        self.message = message
        self.line = line
        self.column = column


def gamma_bits(sym: int) -> tuple[int, int, int]:
    """(premise, consequence, kind) of a Γ letter."""
    name = GAMMA.name(sym)
    return int(name[0]), int(name[1]), int(name[2])


@dataclass(frozen=True, eq=False)
class SystemSpec:
    name: str
    alphabet: Alphabet
    v1: Nfa
    v2: Nfa
    init: Nfa
    final: Nfa
    p1: Relation
    p2: Relation
    fairness: Relation | None = None
    macros: tuple[tuple[str, str], ...] = ()
    sources: dict[str, str] = field(default_factory=dict)
    counters: bool = False
    header: str = ""

    @property
    def pairs(self) -> Alphabet:
        return product_alphabet((self.alphabet, self.alphabet))

    @property
    def annotations(self) -> Alphabet:
        return product_alphabet((self.alphabet, GAMMA))

    @property
    def configurations(self) -> Nfa:
        return fa.union(self.v1, self.v2)

    def component(self, name: str):
        return {"fair": self.fairness}.get(name, getattr(self, name, None))

    def replace(self, **changes) -> "SystemSpec":
        """Copy with some components swapped; their printed sources become automaton blocks."""
        sources = dict(self.sources)
        for key, value in changes.items():
            if key in COMPONENTS or key == "fairness":
                comp = "fair" if key == "fairness" else key
                if value is None:
                    sources.pop(comp, None)
                else:
                    carrier = value.carrier if isinstance(value, Relation) else value
                    sources[comp] = format_block(carrier, comp)
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update(changes)
        data["sources"] = sources
        return SystemSpec(**data)


# --- parsing ---------------------------------------------------------------


def _strip_comments(text: str) -> list[str]:
    return [line.split("//", 1)[0].rstrip() for line in text.splitlines()]


def _statements(text: str, keywords=KEYWORDS, assigned=COMPONENTS):
    """Yield (keyword, rhs, line, column_of_rhs)."""
    lines = _strip_comments(text)
    head = re.compile(r"(" + "|".join(keywords) + r")\b")
    i = 0
    while i < len(lines):
        raw = lines[i]
        stripped = raw.strip()
        if not stripped:
            i += 1
            continue
        start_line = i + 1
        indent = len(raw) - len(raw.lstrip())
        m = head.match(stripped)
        if not m:
            raise SpecError(f"expected a statement, got {stripped.split()[0]!r}", start_line, indent + 1)
        keyword = m.group(1)
        rest = stripped[m.end():]
        col = indent + m.end() + 1
        if keyword in assigned:
            eq = re.match(r"\s*=", rest)
            if not eq:
                raise SpecError(f"expected '=' after {keyword}", start_line, col)
            col += eq.end()
            rest = rest[eq.end():]
        body = [rest]
        depth = rest.count("{") - rest.count("}")
        block = rest.strip().startswith("automaton")
        i += 1
        while i < len(lines):
            nxt = lines[i].strip()
            if block and depth <= 0 and any("{" in part for part in body):
                break
            if not block and nxt and head.match(nxt):
                break
            body.append(lines[i])
            depth += lines[i].count("{") - lines[i].count("}")
            i += 1
        yield keyword, "\n".join(body), start_line, col


def parse_system(text: str, allow_counters: bool = False) -> SystemSpec:
    """Parse a system file.  Components are compiled; invariants are not checked."""
    name = None
    alphabet_names: list[str] = []
    counter_names: list[str] = []
    lets: list[tuple[str, str, int, int]] = []
    comps: dict[str, tuple[str, int, int]] = {}
    for keyword, rhs, line, col in _statements(text):
        if keyword == "system":
            ident = rhs.strip()
            if not _IDENT.match(ident):
                raise SpecError(f"bad system name {ident!r}", line, col)
            name = ident
        elif keyword == "alphabet":
            for sym in (s.strip() for s in rhs.split(",")):
                if sym.startswith("#"):
                    raise SpecError(f"symbol {sym!r} is reserved for counters", line, col)
                if not _SYMBOL.match(sym):
                    raise SpecError(f"bad symbol name {sym!r}", line, col)
                alphabet_names.append(sym)
        elif keyword == "counters":
            counter_names = [s.strip() for s in rhs.split(",")]
            if tuple(counter_names) != COUNTER_SYMBOLS:
                raise SpecError("counters line must read 'counters #1, #0'", line, col)
        elif keyword == "let":
            m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_']*)\s*=", rhs)
            if not m:
                raise SpecError("expected 'let <ident> = <regex>'", line, col)
            lets.append((m.group(1), rhs[m.end():], line, col + m.end()))
        else:
            if keyword in comps:
                raise SpecError(f"duplicate definition of {keyword}", line, col)
            comps[keyword] = (rhs, line, col)
    if name is None:
        raise SpecError("missing 'system' line")
    if not alphabet_names:
        raise SpecError("missing 'alphabet' line")
    if counter_names and "fair" in comps:
        raise SpecError("an encoded system cannot carry a fairness annotator")
    try:
        alphabet = Alphabet(alphabet_names + counter_names)
    except AlphabetError as exc:
        raise SpecError(str(exc)) from None

    macros = {}
    for ident, body, line, col in lets:
        if ident in alphabet:
            raise SpecError(f"macro {ident!r} clashes with a symbol", line, col)
        if ident in macros:
            raise SpecError(f"duplicate macro {ident!r}", line, col)
        try:
            macros[ident] = parse_regex(body, line, col)
        except RegexError as exc:
            raise SpecError(exc.message, exc.line, exc.column) from None

    pairs = product_alphabet((alphabet, alphabet))
    annotations = product_alphabet((alphabet, GAMMA))
    targets = {c: alphabet for c in LANGUAGES}
    targets.update({c: pairs for c in RELATIONS})
    targets["fair"] = annotations

    built: dict[str, Nfa] = {}
    for comp in COMPONENTS:
        if comp not in comps:
            if comp == "fair":
                continue
            raise SpecError(f"missing component {comp!r}")
        rhs, line, col = comps[comp]
        built[comp] = _compile_rhs(rhs, targets[comp], macros, line, col)

    return SystemSpec(
        name=name,
        alphabet=alphabet,
        v1=built["v1"], v2=built["v2"], init=built["init"], final=built["final"],
        p1=Relation((alphabet, alphabet), built["p1"]),
        p2=Relation((alphabet, alphabet), built["p2"]),
        fairness=Relation((alphabet, GAMMA), built["fair"]) if "fair" in built else None,
        macros=tuple((ident, " ".join(body.split())) for ident, body, _, _ in lets),
        sources={c: _normalize(comps[c][0]) for c in comps},
        counters=bool(counter_names),
        header=_header(text),
    )


def _normalize(rhs: str) -> str:
    rhs = rhs.strip()
    if rhs.startswith("automaton"):
        return "\n".join(line.rstrip() for line in rhs.splitlines())
    return " ".join(rhs.split())


def _header(text: str) -> str:
    out = []
    for line in text.splitlines():
        if line.strip().startswith("//"):
            out.append(line.strip())
        elif line.strip():
            break
    return "\n".join(out)


def _compile_rhs(rhs: str, alphabet: Alphabet, macros, line: int, col: int) -> Nfa:
    stripped = rhs.strip()
    try:
        if stripped.startswith("automaton"):
            return parse_block(stripped, alphabet, line)[1]
        return compile_ast(parse_regex(rhs, line, col), alphabet, macros)
    except (RegexError, BlockError) as exc:
        raise SpecError(exc.message, exc.line, exc.column) from None


def format_system(spec: SystemSpec) -> str:
    """Print a spec in the concrete syntax; re-parsing gives equal components."""
    out = []
    if spec.header:
        out.append(spec.header)
    out.append(f"system {spec.name}")
    user = [n for n in spec.alphabet.names if n not in COUNTER_SYMBOLS] if spec.counters else list(spec.alphabet.names)
    out.append(f"alphabet {', '.join(user)}")
    if spec.counters:
        out.append(f"counters {', '.join(COUNTER_SYMBOLS)}")
    for ident, body in spec.macros:
        out.append(f"let {ident} = {body}")
    for comp in COMPONENTS:
        value = spec.component(comp)
        if value is None:
            continue
        source = spec.sources.get(comp)
        if source is None:
            carrier = value.carrier if isinstance(value, Relation) else value
            source = format_block(carrier, comp)
        out.append(f"{comp} = {source}")
    return "\n".join(out) + "\n"


# --- validation ------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    rule: str
    message: str
    witness: tuple

    def render(self, spec: SystemSpec) -> str:
        words = ", ".join(repr(spec.alphabet.render(w)) for w in self.witness)
        return f"{self.rule}: {self.message} (witness: {words})"


def validate(spec: SystemSpec) -> list[Violation]:
    """Check the arena conventions; an empty list means the spec is well formed.

    A0  p1 ⊆ v1 × v2 and p2 ⊆ v2 × v1, v1 ∩ v2 = ∅
    A1  init ⊆ v1 and final ⊆ v1; a final configuration outside v1 is
        tolerated only if it has no outgoing move (encoded alarm states)
    A2  every non-final configuration has a move
    """
    out: list[Violation] = []

    def check(rule: str, message: str, witness: Word | None) -> None:
        if witness is not None:
            out.append(Violation(rule, message, (witness,)))

    check("A0", "v1 and v2 overlap", fa.is_empty(fa.intersect(spec.v1, spec.v2)))
    dom1, dom2 = rel.domain(spec.p1), rel.domain(spec.p2)
    check("A0", "p1 moves from outside v1", fa.includes(dom1, spec.v1))
    check("A0", "p1 moves into outside v2", fa.includes(rel.image(spec.p1), spec.v2))
    check("A0", "p2 moves from outside v2", fa.includes(dom2, spec.v2))
    check("A0", "p2 moves into outside v1", fa.includes(rel.image(spec.p2), spec.v1))
    check("A1", "initial configuration outside v1", fa.includes(spec.init, spec.v1))
    movers = fa.union(dom1, dom2)
    check("A1", "final configuration outside v1 that can still move",
          fa.includes(fa.intersect(spec.final, movers), spec.v1))
    non_final = fa.difference(spec.configurations, spec.final)
    check("A2", "non-final configuration without a move", fa.includes(non_final, movers))
    if spec.fairness is not None:
        check("fair", "annotator has no output for a configuration",
              fa.includes(spec.configurations, rel.domain(spec.fairness)))
    return out


# --- benchmark corpus ------------------------------------------------------


def load_resource(name: str) -> str:
    from importlib import resources

    return resources.files("rmcfair.benchmarks").joinpath(name).read_text(encoding="utf-8")


BENCHMARKS: dict[str, str] = {
    "herman-ring-merge": "herman-ring-merge.spec",
    "herman-ring-annih": "herman-ring-annih.spec",
    "herman-line-merge": "herman-line-merge.spec",
    "herman-line-annih": "herman-line-annih.spec",
    "moran-line-2": "moran-line-2.spec",
    "cell-cycle-1": "cell-cycle-1.spec",
    "clustering-2": "clustering-2.spec",
    "coin-game-3": "coin-game-3.spec",
}

# Toys and variants shipped alongside the corpus (not part of the benchmark sweep).
EXTRAS: dict[str, str] = {
    "token-death": "token-death.spec",
    "token-death-mixed": "token-death-mixed.spec",
    "herman-ring-merge-hand": "herman-ring-merge-hand.spec",
    "token-death-counters": "token-death-counters.spec",
    "token-death-counters-idle": "token-death-counters-idle.spec",
    "token-death-counters-shrunk": "token-death-counters-shrunk.spec",
}


def benchmark(name: str) -> SystemSpec:
    files = {**BENCHMARKS, **EXTRAS}
    if name not in files:
        raise KeyError(f"unknown benchmark {name!r}; known: {', '.join(sorted(files))}")
    return parse_system(load_resource(files[name]))


def load_spec(path_or_name: str) -> SystemSpec:
    """A spec file path, or the name of a shipped system."""
    import os

    if os.path.exists(path_or_name):
        with open(path_or_name, encoding="utf-8") as fh:
            return parse_system(fh.read())
    if path_or_name in BENCHMARKS or path_or_name in EXTRAS:
        return benchmark(path_or_name)
    stem = os.path.basename(path_or_name)
    if stem.endswith(".spec") and (stem[:-5] in BENCHMARKS or stem[:-5] in EXTRAS):
        return benchmark(stem[:-5])
    raise FileNotFoundError(path_or_name)


def render_word(spec: SystemSpec, word: Word) -> str:
    return spec.alphabet.render(word)

