"""sobolab: numerical checks of improved Sobolev inequalities on the torus.

The package samples functions on a periodic grid ``[0, L)^n`` and provides

* :mod:`sobolab.spectral` -- Fourier multipliers of the Laplacian, the heat
  semigroup, fractional powers computed two independent ways, gradients and
  smooth spectral cutoffs;
* :mod:`sobolab.rearrange` -- distribution functions, decreasing
  rearrangements, Lorentz norms and the weight classes that govern them;
* :mod:`sobolab.norms` -- Lebesgue, Sobolev, thermic Besov and Morrey norms,
  maximal functions and Muckenhoupt weights;
* :mod:`sobolab.harness` -- exponent algebra, test corpora and the ratio
  measurements that estimate inequality constants;
* :mod:`sobolab.cli` -- the ``sobolab`` command.

Example
-------
>>> from sobolab.spectral import build_grid, GridFunction
>>> from sobolab.norms import lp_norm
>>> grid = build_grid(1, 64, 1.0)
>>> lp_norm(GridFunction.constant(grid, 1.0), 2)
1.0
"""
__version__ = "0.1.0"
