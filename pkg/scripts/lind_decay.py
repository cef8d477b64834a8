"""Fourier decay of a single-site character under Lind's automaton with a Bernoulli measure.

Prints the spikes at n = 2^k, the Cesaro average and the fraction of small
coefficients next to the closed form 0.8^(2^popcount(n)).
"""

import argparse
import math

from lcahaar.analysis import cesaro_average, fourier_decay, fraction_below
from lcahaar.characters import CharacterSystem
from lcahaar.lca import LcaPolynomial
from lcahaar.measures import BernoulliSpec
from lcahaar.oracles import digit_census


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=1024)
    ap.add_argument("--q", type=float, default=0.1, help="Bernoulli weight of the symbol 1")
    ap.add_argument("--eps", type=float, default=0.01)
    args = ap.parse_args()

    F = LcaPolynomial.parse("1@(-1)+1@(1)", 2)
    beta = BernoulliSpec(2, (1 - args.q, args.q))
    trace = fourier_decay(CharacterSystem.single_site(2), F, beta, args.horizon)
    c = abs(1 - 2 * args.q)
    closed = [c ** (2 ** digit_census(n)) for n in range(args.horizon + 1)]
    err = max(abs(a - b) for a, b in zip(trace.magnitudes, closed))
    k = 0
    while 2**k <= args.horizon:
        print(f"n = {2**k:6d}  |coef| = {trace.magnitudes[2**k]:.12f}")
        k += 1
    print(f"cesaro average      {cesaro_average(trace):.6f}")
    print(f"fraction < {args.eps:g}    {fraction_below(trace, args.eps):.6f}")
    print(f"closed form error   {err:.2e}")
    print(f"closed form cesaro  {math.fsum(closed[1:]) / args.horizon:.6f}")


if __name__ == "__main__":
    main()
