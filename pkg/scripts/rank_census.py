"""Rank traces for several automata over Z/2 and the share of n with rank above a threshold.

For 1 + s the rank at n is 2^popcount(n); the script prints the measured
density next to that digit-count census.
"""

import argparse

from lcahaar.analysis import density_above, rank_trace
from lcahaar.characters import CharacterSystem
from lcahaar.lca import LcaPolynomial
from lcahaar.oracles import digit_census

AUTOMATA = [
    ("1+s", "1@(0)+1@(1)", 1),
    ("s^-1+s", "1@(-1)+1@(1)", 1),
    ("1+s+s^2", "1@(0)+1@(1)+1@(2)", 1),
    ("1+s^(1,0)+s^(0,1)", "1@(0,0)+1@(1,0)+1@(0,1)", 2),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=4096)
    ap.add_argument("--R", type=float, default=8)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    census = sum(1 for n in range(1, args.horizon + 1) if 2 ** digit_census(n) > args.R) / args.horizon
    print(f"popcount census for 1+s: {census:.4f}")
    for label, text, dim in AUTOMATA:
        F = LcaPolynomial.parse(text, 2, dim)
        chi = CharacterSystem({(0,) * dim: 1}, 2, dim)
        trace = rank_trace(chi, F, args.horizon, jobs=args.jobs)
        print(f"{label:20s} density(rank > {args.R:g}) = {density_above(trace, args.R):.4f}"
              f"  max rank {int(trace.ranks.max())}")


if __name__ == "__main__":
    main()
