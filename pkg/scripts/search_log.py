"""Run proof search on the encoded benchmarks and log each outcome.

    python3 scripts/search_log.py --budget 2/2/60 --budget 3/3/120
"""

import argparse

from rmcfair.encoder import encode_system
from rmcfair.proof import check_proof
from rmcfair.search import SearchBudget, search
from rmcfair.spec import benchmark

TARGETS = ["token-death", "herman-ring-merge", "herman-line-merge"]


def budget(text: str) -> SearchBudget:
    inv, order, timeout = text.split("/")
    return SearchBudget(int(inv), int(order), float(timeout))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--budget", type=budget, action="append")
    ap.add_argument("targets", nargs="*", default=TARGETS)
    args = ap.parse_args()
    for name in args.targets:
        spec = encode_system(benchmark(name)).spec
        for b in args.budget or [SearchBudget(2, 2, 60)]:
            out = search(spec, b)
            line = (f"{name} {b.max_inv_states}/{b.max_ord_states} {b.timeout:g}s: {out.status} "
                    f"in {out.elapsed:.2f}s, {out.checked} checked, {out.screened} screened")
            if out.proved:
                line += f", inv {out.proof.inv.n} states, ord {out.proof.ord.carrier.n} states"
                line += ", re-check ok" if check_proof(spec, out.proof).ok else ", RE-CHECK FAILED"
            else:
                line += f" ({out.reason})"
            print(line, flush=True)


if __name__ == "__main__":
    main()
