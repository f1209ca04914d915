"""Rearrangements, Lorentz norms and the B_p weight condition.

Prints the decreasing rearrangement of a two-level step function, then the
B_p constant of power weights ``t^alpha`` from the closed form and from
quadrature, including exponents outside the admissible window where both
routes report divergence.

    python demos/lorentz_weights.py
"""
import numpy as np

from sobolab.norms import lp_norm
from sobolab.rearrange import WeightProfile, bp_constant, lambda_norm, rearrangement
from sobolab.spectral import GridFunction, build_grid


def main():
    grid = build_grid(1, 16, 1.0)
    vals = np.zeros(16)
    vals[2:6] = 3.0
    vals[9:11] = -5.0
    f = GridFunction(grid, vals)
    prof = rearrangement(f)
    print("f*     :", " ".join(f"{v:g}" for v in prof.sorted_values))
    print("|f>2|  :", prof.distribution(2.0), "(six cells of width 1/16)")

    flat = WeightProfile.power()
    print(f"Lambda^2(1) = {lambda_norm(f, 2, flat):.6f}   L^2 = {lp_norm(f, 2):.6f}")

    print("\n  p    alpha   closed        quadrature")
    for p in (1.5, 2.0, 3.0):
        for alpha in (-1.2, -0.5, 0.0, 0.4, p - 1):
            w = WeightProfile.power(1.0, alpha)
            quad = bp_constant(w, p, method="quadrature")
            if -1 < alpha < p - 1:
                closed = f"{bp_constant(w, p, method='closed').value:.6f}"
            else:
                closed = "divergent"
            q = f"{quad.value:.6f}" if quad.finite else f"({quad.reason})"
            print(f"{p:4.1f}  {alpha:6.2f}   {closed:12s}  {q}")


if __name__ == "__main__":
    main()
