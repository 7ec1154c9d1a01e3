"""Sweep the k-fair and plain oracle over the benchmark corpus.

    python3 scripts/oracle_sweep.py --n 1,2,3,4 --kfair 2,4
"""

import argparse
import time

from rmcfair.oracle import kfair_verdict, plain_verdict
from rmcfair.spec import BENCHMARKS, benchmark


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", default="1,2,3,4")
    ap.add_argument("--kfair", default="2,4")
    args = ap.parse_args()
    sizes = [int(x) for x in args.n.split(",")]
    ks = [int(x) for x in args.kfair.split(",")]
    print(f"{'benchmark':<22} {'N':>2} {'k':>5} {'verdict':<7} {'time':>7}")
    start = time.monotonic()
    for name in BENCHMARKS:
        spec = benchmark(name)
        for n in sizes:
            for k in [None] + ks:
                t = time.monotonic()
                v = plain_verdict(spec, n) if k is None else kfair_verdict(spec, n, k)
                label = "plain" if k is None else str(k)
                verdict = "holds" if v.holds else "fails"
                print(f"{name:<22} {n:>2} {label:>5} {verdict:<7} {time.monotonic() - t:>6.2f}s")
    print(f"total {time.monotonic() - start:.1f}s")


if __name__ == "__main__":
    main()
