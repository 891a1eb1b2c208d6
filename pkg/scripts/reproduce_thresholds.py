#!/usr/bin/env python3
"""Reproduce the headline numbers: usefulness thresholds and the product
counterexample.

Prints the n_eff threshold 2*log(1/eps) over a grid of target failure
probabilities (10.5966 at eps = 0.005), the margin-fraction thresholds
log(1/eps) / (2 r^2) (264.92 at eps = 0.005, r = 0.1), and the product
family on [0,1]^n, whose range stays at 1 while its diameter sum grows
like n.
"""

import math

from margincert import (
    BoxDomain, builtin_function, effective_n, estimate_vertex,
    mcdiarmid_bound, required_neff, required_neff_fraction, system_diameter,
)

EPSILONS = (0.1, 0.05, 0.01, 0.005, 0.001)
FRACTIONS = (0.5, 0.25, 0.1, 0.05)


def main():
    print("n_eff required for the concentration bound to beat half the range")
    print(f"{'epsilon':>10} {'2*log(1/eps)':>14}")
    for eps in EPSILONS:
        print(f"{eps:>10g} {required_neff(eps):>14.4f}")

    print()
    print("n_eff required for a margin of r times the range (eps = 0.005)")
    print(f"{'r':>10} {'threshold':>14}")
    for r in FRACTIONS:
        print(f"{r:>10g} {required_neff_fraction(0.005, r):>14.2f}")

    print()
    print("product on [0,1]^n: range 1 but diameter sum n (eps = 0.005)")
    print(f"{'n':>4} {'sum D_i':>9} {'delta_F':>9} {'n_eff':>7} "
          f"{'B/delta_F':>10} {'abs/delta_F':>12}")
    for n in range(2, 9):
        domain = BoxDomain.from_bounds([(0.0, 1.0)] * n)
        est = estimate_vertex(builtin_function(domain, "product"), monotone=True)
        bound = mcdiarmid_bound(0.005, system_diameter(est.D))
        print(f"{n:>4} {math.fsum(est.D):>9.0f} {est.delta_F:>9.0f} "
              f"{effective_n(est.D):>7.0f} {bound / est.delta_F:>10.3f} "
              f"{0.5:>12.3f}")
    print()
    print("B always dwarfs the absolute bound here: interactions concentrate")
    print("the range while every input keeps a full-size diameter.")


if __name__ == "__main__":
    main()
