"""Check that every single-letter change of the gadget table is detected.

Each mutation maps one annotation letter to another gadget; it counts as
detected once compare_encodings reports a mismatch on some probe.
"""

from rmcfair.encoder import SIGMA
from rmcfair.oracle import compare_encodings
from rmcfair.spec import benchmark

PROBES = [("herman-ring-merge", 2, 2), ("token-death", 2, 2), ("token-death-mixed", 2, 2),
          ("token-death-mixed", 3, 2)]


def main() -> None:
    specs = {name: benchmark(name) for name, _, _ in PROBES}
    missed = 0
    for letter, gadget in sorted(SIGMA.items()):
        for other in ("ID", "DEC", "RESET"):
            if other == gadget:
                continue
            table = dict(SIGMA, **{letter: other})
            hit = next(((name, n, k) for name, n, k in PROBES
                        if not compare_encodings(specs[name], n, k, table=table).ok), None)
            where = "undetected" if hit is None else f"detected on {hit[0]} N={hit[1]} k={hit[2]}"
            missed += hit is None
            print(f"{letter} {gadget:>5} -> {other:<5} {where}")
    print(f"{missed} undetected")


if __name__ == "__main__":
    main()
