"""Measuring an interpolation constant and catching a broken exponent.

Runs the ``thm1`` case (L^q bounded by a product of W^{1,1} and a negative
Besov norm) over a small corpus, checks that the empirical constant barely
moves under dilation and grid refinement, and then shifts the Besov index
by 1/2.  The shifted case is no longer scale invariant, so its ratios drift
with the dilation factor and the harness flags it.

    python demos/inequality_harness.py
"""
from sobolab.harness import (
    CorpusSpec,
    derive_params,
    perturb_beta,
    refinement_study,
    run_corpus,
    scaling_check,
)
from sobolab.spectral import build_grid

CORPUS = CorpusSpec("dgauss", 4, 0, sigma=(0.0085, 0.0104))
FACTORS = (0.5, 2 ** -0.5, 1.0, 2 ** 0.5, 2.0)


def show(label, case, grid):
    rep = run_corpus(case, CORPUS, grid)
    dil = scaling_check(case, CORPUS, grid, factors=FACTORS)
    print(f"{label}: C_emp={rep.aggregate['max_ratio']:.4f} "
          f"dilation spread={dil.spread:.2%} flagged={dil.flagged}")
    for factor, ratio in zip(dil.factors, dil.ratios[0]):
        print(f"    lambda={factor:5.3f}  ratio={ratio:.5f}")


def main():
    grid = build_grid(1, 1024, 40.0)
    case = derive_params("thm1", q=3, s=0.1)
    print(f"thm1 q=3 s=0.1: theta={case.theta:.4f} beta={case.beta:.4f}")
    show("valid", case, grid)

    ref = refinement_study(case, CORPUS, (256, 512, 1024))
    print("refinement:", ", ".join(f"G={G}: {c:.4f}" for G, c in zip(ref.G_list, ref.constants)),
          f"growth={ref.growth:.3f}")

    show("beta+0.5", perturb_beta(case, 0.5), grid)


if __name__ == "__main__":
    main()
