"""Power-grid example: probability that no village has power, and the top explanations."""

import argparse

from pabduce.cli import fmt_prob, load_program, run_query

GOAL = "hasnopower(v1), hasnopower(v2), hasnopower(v3), hasnopower(v4), hasnopower(v5)"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--top", type=int, default=5)
    ap.add_argument("--oracle", action="store_true", help="also enumerate all 2^10 worlds")
    args = ap.parse_args()
    program, _ = load_program("power")
    report, leaves, _ = run_query(program, GOAL)
    print(f"P(G) = {fmt_prob(report.total_probability)}   worlds found = {len(leaves)}"
          f"   answers = {len(report.answers)}   {report.wall_time:.2f}s")
    ranked = sorted(((e["probability"], a["delta"]) for a in report.answers for e in a["explanations"]),
                    key=lambda t: -t[0])
    for p, delta in ranked[:args.top]:
        print(f"  {fmt_prob(p)}  {{{', '.join(delta)}}}")
    if args.oracle:
        from pabduce.oracle import oracle_probability
        from pabduce.syntax import parse_goal
        print(f"oracle P(G) = {fmt_prob(oracle_probability(program, parse_goal(GOAL)))}")


if __name__ == "__main__":
    main()
