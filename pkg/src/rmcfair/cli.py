"""Command line entry point.

Exit codes: 0 holds / proved / ok, 1 refuted or a failed check (witness
printed), 2 unknown within the budget, 3 input error.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

from . import automata as fa
from .encoder import AnnotatorError, encode_system
from .oracle import StateBoundError, as_reach, compare_encodings, expand, kfair_expand
from .proof import check_proof, format_proof, parse_proof, replay
from .regex import RegexError
from .relations import Relation
from .search import SearchBudget, search
from .spec import BENCHMARKS, EXTRAS, SpecError, format_system, load_resource, load_spec, validate
from .textio import BlockError

OK, REFUTED, UNKNOWN, INPUT_ERROR = 0, 1, 2, 3


class _InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(INPUT_ERROR)


def write_atomic(path: str, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _ints(text: str) -> list[int]:
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("values must be positive")
    return values


def _load(path: str, encode: bool = False):
    try:
        spec = load_spec(path)
    except FileNotFoundError:
        raise _InputError(f"no such spec file or shipped system: {path}") from None
    if encode:
        spec = encode_system(spec).spec
    return spec


def _component_dot(spec, name: str) -> str:
    value = spec.component(name)
    if value is None:
        raise _InputError(f"system has no component {name!r}")
    carrier = value.carrier if isinstance(value, Relation) else value
    return fa.to_dot(carrier, name)


def cmd_validate(args) -> int:
    spec = _load(args.spec)
    if args.dot:
        print(_component_dot(spec, args.dot), end="")
        return OK
    problems = validate(spec)
    for v in problems:
        print(v.render(spec))
    print("ok" if not problems else f"{len(problems)} violation(s)")
    return OK if not problems else REFUTED


def cmd_encode(args) -> int:
    spec = _load(args.spec)
    try:
        encoded = encode_system(spec).spec
    except AnnotatorError as exc:
        print(f"annotator rejected: {exc}")
        return REFUTED
    if args.dot:
        print(_component_dot(encoded, args.dot), end="")
        return OK
    text = format_system(encoded)
    if args.emit:
        write_atomic(args.emit, text)
        print(f"wrote {args.emit}")
    else:
        print(text, end="")
    return OK


def cmd_check_proof(args) -> int:
    spec = _load(args.spec, args.encode)
    try:
        with open(args.proof, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        try:
            text = load_resource(os.path.basename(args.proof))
        except FileNotFoundError:
            raise _InputError(f"no such proof file: {args.proof}") from None
    proof = parse_proof(text, spec)
    if proof.system and proof.system != spec.name:
        print(f"note: proof names system {proof.system!r}, checking against {spec.name!r}", file=sys.stderr)
    report = check_proof(spec, proof)
    print(report.render(spec))
    for f in report.failures:
        if not replay(spec, proof, f):  # pragma: no cover - would be a checker bug
            print(f"warning: witness for {f.condition} {f.clause} did not replay", file=sys.stderr)
    return OK if report.ok else REFUTED


def _oracle_job(job):
    path, encode, n, k, block, compare = job
    spec = _load(path, encode)
    if compare:
        c = compare_encodings(spec, n, k)
        return ("compare", n, k, c.ok, c.render())
    if k is None:
        mdp = expand(spec, n, block=block)
    else:
        mdp = kfair_expand(spec, n, k)
    verdict = as_reach(mdp)
    render = (lambda lab: _label(spec, lab))
    return ("verdict", n, k, verdict.holds, verdict.render(mdp, render))


def _label(spec, lab) -> str:
    if lab and isinstance(lab[0], tuple):
        word, vals = lab
        return f"{spec.alphabet.render(word)} {list(vals)}"
    return spec.alphabet.render(lab)


def cmd_oracle(args) -> int:
    if args.compare and not args.kfair:
        raise _InputError("--compare needs --kfair")
    ks = args.kfair or [None]
    jobs = [(args.spec, args.encode, n, k, args.block, args.compare) for n in args.n for k in ks]
    _load(args.spec, args.encode)  # fail early on bad input
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_oracle_job, jobs))
    else:
        results = [_oracle_job(j) for j in jobs]
    code = OK
    for kind, n, k, good, text in results:
        tag = f"N={n}" + ("" if k is None else f" k={k}")
        head, _, rest = text.partition("\n")
        print(f"{tag} {'compare ' if kind == 'compare' else ''}{head}")
        if rest:
            print(rest)
        if not good:
            code = REFUTED
    return code


def cmd_search(args) -> int:
    spec = _load(args.spec, args.encode)
    budget = SearchBudget(args.max_inv, args.max_ord, args.timeout)
    outcome = search(spec, budget)
    print(f"{outcome.status} after {outcome.elapsed:.2f}s "
          f"({outcome.checked} full checks, {outcome.screened} screened)"
          + (f": {outcome.reason}" if outcome.reason else ""))
    if not outcome.proved:
        return UNKNOWN
    text = format_proof(outcome.proof)
    if args.dot:
        print(fa.to_dot(outcome.proof.inv, "inv"), end="")
        print(fa.to_dot(outcome.proof.ord.carrier, "ord"), end="")
    elif args.emit:
        write_atomic(args.emit, text)
        print(f"wrote {args.emit}")
    else:
        print(text, end="")
    return OK


def cmd_benchmarks(args) -> int:
    names = list(BENCHMARKS) + (list(EXTRAS) if args.all else [])
    if args.export:
        os.makedirs(args.export, exist_ok=True)
        for name in names:
            files = {**BENCHMARKS, **EXTRAS}
            write_atomic(os.path.join(args.export, files[name]), load_resource(files[name]))
        print(f"exported {len(names)} spec(s) to {args.export}")
        return OK
    for name in names:
        print(name)
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rmcfair", description="Finitary fairness for regular model checking.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check the arena conventions of a spec")
    v.add_argument("spec")
    v.add_argument("--dot", metavar="COMPONENT", help="print one component as a DOT graph instead")
    v.set_defaults(func=cmd_validate)

    e = sub.add_parser("encode", help="compile the fairness annotator into counters")
    e.add_argument("spec")
    e.add_argument("--emit", metavar="FILE", help="write the encoded spec to FILE")
    e.add_argument("--dot", metavar="COMPONENT", help="print one encoded component as a DOT graph")
    e.set_defaults(func=cmd_encode)

    c = sub.add_parser("check-proof", help="check a regular termination proof")
    c.add_argument("spec")
    c.add_argument("proof")
    c.add_argument("--encode", action="store_true", help="check against the counter encoding of SPEC")
    c.set_defaults(func=cmd_check_proof)

    o = sub.add_parser("oracle", help="explicit-state verdicts on fixed instance sizes")
    o.add_argument("spec")
    o.add_argument("--n", type=_ints, required=True, help="instance size(s), comma separated")
    o.add_argument("--kfair", type=_ints, help="fairness bound(s) k, comma separated")
    o.add_argument("--compare", action="store_true", help="match the counter encoding against the counter product")
    o.add_argument("--block", type=int, help="uniform counter block length for encoded specs")
    o.add_argument("--encode", action="store_true", help="run on the counter encoding of SPEC")
    o.add_argument("--jobs", type=int, default=1)
    o.set_defaults(func=cmd_oracle)

    s = sub.add_parser("search", help="search for a regular termination proof")
    s.add_argument("spec")
    s.add_argument("--max-inv", type=int, default=2)
    s.add_argument("--max-ord", type=int, default=2)
    s.add_argument("--timeout", type=float, default=60.0)
    s.add_argument("--emit", metavar="FILE", help="write the proof to FILE")
    s.add_argument("--dot", action="store_true", help="print the proof automata as DOT graphs")
    s.add_argument("--encode", action="store_true", help="search on the counter encoding of SPEC")
    s.add_argument("--jobs", type=int, default=1, help="accepted for symmetry; the search runs sequentially")
    s.set_defaults(func=cmd_search)

    b = sub.add_parser("benchmarks", help="list or export the shipped systems")
    b.add_argument("--all", action="store_true", help="include toys and variants")
    b.add_argument("--export", metavar="DIR")
    b.set_defaults(func=cmd_benchmarks)
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else INPUT_ERROR
    try:
        return args.func(args)
    except AnnotatorError as exc:
        print(f"annotator rejected: {exc}")
        return REFUTED
    except (_InputError, SpecError, RegexError, BlockError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except StateBoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
