"""World counts and runtimes for the benchmark family (n = 1..N)."""

import argparse
import time

from pabduce import collect, derive, goal_probability, parse_goal, parse_program
from pabduce.engine import ResourceExceeded, SearchLimits
from pabduce.gen import BENCH_GOAL, gen_bench


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=8)
    ap.add_argument("--max-leaves", type=int, default=1_000_000)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    print(f"{'n':>3} {'worlds':>9} {'2*3^n-1':>9} {'P(G)':>9} {'seconds':>9}")
    for n in range(1, args.max_n + 1):
        program = parse_program(gen_bench(n))
        t0 = time.perf_counter()
        try:
            leaves = derive(program, parse_goal(BENCH_GOAL), SearchLimits(max_leaves=args.max_leaves),
                            workers=args.workers)
        except ResourceExceeded as exc:
            print(f"{n:>3} stopped: {exc}")
            break
        K, _ = collect(leaves)
        p = goal_probability(K, program.probabilities)
        print(f"{n:>3} {len(leaves):>9} {2 * 3 ** n - 1:>9} {p:>9.6f} {time.perf_counter() - t0:>9.2f}",
              flush=True)


if __name__ == "__main__":
    main()
