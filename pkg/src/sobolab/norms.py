"""Function-space norms and maximal operators on the periodic grid."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import fft as sfft
from scipy.optimize import minimize_scalar

from .spectral import Grid, GridFunction, gradient_magnitude, laplacian_power
from .rearrange import rearrangement

__all__ = [
    "RadiusSet",
    "WeightField",
    "lp_norm",
    "weak_lp_norm",
    "sobolev_norm",
    "w11_seminorm",
    "besov_time_grid",
    "besov_norm",
    "besov_transport_ratio",
    "morrey_norm",
    "maximal_function",
    "maximal_phi",
    "ap_constant",
    "a1_constant",
    "weighted_lp_norm",
    "weighted_sobolev",
    "weighted_w11",
    "ball_counts",
]

MEAN_ZERO_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class RadiusSet:
    """Increasing ball radii used by every sup over balls.

    The default set halves the radius ``per_octave`` times per octave from
    ``L/2`` down to one cell width.  With ``covering=True`` one extra
    radius larger than the torus diameter is appended, so a single ball
    holds every cell.
    """

    grid: Grid
    radii: np.ndarray
    covering: bool = False

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        h = self.grid.spacing
        if r.ndim != 1 or r.size < 12:
            raise ValueError(f"need at least 12 radii, got {r.size}")
        if np.any(np.diff(r) <= 0):
            raise ValueError("radii must be strictly increasing")
        if not math.isclose(r[0], h, rel_tol=1e-12):
            raise ValueError(f"smallest radius must be one cell width {h}, got {r[0]}")
        limit = r[-2] if self.covering else r[-1]
        if limit > self.grid.L / 2 * (1 + 1e-12):
            raise ValueError("radii beyond L/2 need covering=True (last radius only)")
        r.flags.writeable = False
        object.__setattr__(self, "radii", r)

    @classmethod
    def default(cls, grid: Grid, per_octave: int = 4, covering: bool = False) -> "RadiusSet":
        octaves = math.log2(grid.G / 2)
        while int(round(octaves * per_octave)) + 1 < 12:
            per_octave += 1
        m = int(round(octaves * per_octave))
        radii = (grid.L / 2) * 2.0 ** (-np.arange(m, -1, -1) / per_octave)
        radii[0] = grid.spacing
        if covering:
            radii = np.append(radii, grid.L / 2 * math.sqrt(grid.n) + grid.spacing)
        return cls(grid, radii, covering)

    @classmethod
    def geometric(cls, grid: Grid, count: int, covering: bool = False) -> "RadiusSet":
        radii = np.geomspace(grid.spacing, grid.L / 2, count)
        if covering:
            radii = np.append(radii, grid.L / 2 * math.sqrt(grid.n) + grid.spacing)
        return cls(grid, radii, covering)

    def __len__(self):
        return self.radii.size

    def to_dict(self) -> dict:
        return {
            "count": int(self.radii.size),
            "min": float(self.radii[0]),
            "max": float(self.radii[-1]),
            "covering": self.covering,
        }


def _offset_norm2(grid: Grid) -> np.ndarray:
    """Squared periodic offset length, in cell units, from cell 0."""
    m = np.minimum(np.arange(grid.G), grid.G - np.arange(grid.G)).astype(np.int64)
    d2 = np.zeros(grid.shape, dtype=np.int64)
    for axis in range(grid.n):
        shape = [1] * grid.n
        shape[axis] = grid.G
        d2 = d2 + (m ** 2).reshape(shape)
    return d2


def _ball_kernels(radii: RadiusSet):
    """Yield ``(r, cell count, rfft of the ball indicator)`` per radius."""
    grid = radii.grid
    d2 = _offset_norm2(grid)
    h = grid.spacing
    for r in radii.radii:
        mask = d2 < (r / h) ** 2
        yield r, int(mask.sum()), sfft.rfftn(mask.astype(float))


def ball_counts(radii: RadiusSet) -> np.ndarray:
    """Number of cells in each discrete ball."""
    return np.array([count for _, count, _ in _ball_kernels(radii)])


def _ball_sums(values: np.ndarray, radii: RadiusSet):
    """Yield ``(r, count, S)`` with ``S[x] = Σ_{|y-x| < r} values[y]``."""
    grid = radii.grid
    vhat = sfft.rfftn(values)
    for r, count, khat in _ball_kernels(radii):
        yield r, count, sfft.irfftn(vhat * khat, s=grid.shape)


def _check_grid(f: GridFunction, radii: RadiusSet):
    if radii.grid != f.grid:
        raise ValueError("radius set belongs to another grid")


def lp_norm(f: GridFunction, p: float) -> float:
    a = np.abs(f.values)
    if p == math.inf:
        return float(a.max())
    if not p >= 1:
        raise ValueError(f"L^p needs p >= 1, got {p}")
    return float((f.grid.cell_volume * np.sum(a ** p)) ** (1.0 / p))


def weak_lp_norm(f: GridFunction, p: float) -> float:
    """``sup_α α |{|f| > α}|^{1/p}`` over the sorted sample levels."""
    if p == math.inf:
        return lp_norm(f, p)
    if not p > 1:
        raise ValueError(f"weak L^p needs p > 1, got {p}")
    prof = rearrangement(f)
    return float(np.max(prof.sorted_values * prof.breakpoints ** (1.0 / p)))


def sobolev_norm(f: GridFunction, s: float, p: float) -> float:
    if not s > 0:
        raise ValueError(f"order must be positive, got {s}")
    if not p > 1:
        raise ValueError(f"exponent must exceed 1, got {p}")
    return lp_norm(laplacian_power(f, s), p)


def w11_seminorm(f: GridFunction) -> float:
    """``‖∇f‖_{L¹}``."""
    return lp_norm(gradient_magnitude(f), 1)


def besov_time_grid(grid: Grid, count: int = 48) -> np.ndarray:
    """Default heat times: ``count`` log points on ``[0.1/λ_max, (L/8)²]``."""
    return np.geomspace(0.1 / grid.lambda_max, (grid.L / 8) ** 2, count)


def _is_mean_zero(f: GridFunction) -> bool:
    scale = f.max_abs()
    return abs(f.mean()) <= MEAN_ZERO_RTOL * scale


def besov_norm(
    f: GridFunction,
    beta: float,
    t_grid: Sequence[float] | None = None,
    strict: bool = True,
    refine: bool = True,
) -> float:
    """Thermic norm ``sup_t t^{β/2} ‖H_t f‖_∞`` of negative index ``-β``.

    The sup is taken over ``t_grid`` and then polished by golden-section
    search in ``log t``, bracketed by the neighbours of the best node.  On the
    torus the sup is infinite unless ``f`` has zero mean; ``strict=False``
    accepts the capped-time value instead of raising.
    """
    if not beta > 0:
        raise ValueError(f"Besov index must be positive, got {beta}")
    if strict and not _is_mean_zero(f):
        raise ValueError("Besov norm divergent on torus")
    grid = f.grid
    times = besov_time_grid(grid) if t_grid is None else np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size < 1 or np.any(times <= 0):
        raise ValueError("t_grid must be a nonempty list of positive times")
    coeffs = sfft.rfftn(f.values)
    lam = grid.half_eigenvalues

    def objective(log_t: float) -> float:
        t = math.exp(log_t)
        ht = sfft.irfftn(coeffs * np.exp(-t * lam), s=grid.shape)
        return t ** (beta / 2.0) * float(np.max(np.abs(ht)))

    logs = np.log(times)
    vals = np.array([objective(u) for u in logs])
    i = int(np.argmax(vals))
    best = float(vals[i])
    # the grid ends are the admissible range, so only interior maxima are polished
    if not refine or i == 0 or i == logs.size - 1 or vals[i + 1] >= best:
        return best
    res = minimize_scalar(lambda u: -objective(u), bracket=(logs[i - 1], logs[i], logs[i + 1]),
                          method="golden")
    return max(best, -float(res.fun))


def besov_transport_ratio(f: GridFunction, s: float, beta: float, t_grid=None) -> float:
    """``‖J^{s/2} f‖`` at index ``-β-s`` over ``‖f‖`` at index ``-β``.

    Diagnostic only: the two norms are comparable, with constants that
    nothing here pins down.
    """
    num = besov_norm(laplacian_power(f, s), beta + s, t_grid)
    den = besov_norm(f, beta, t_grid)
    return num / den if den > 0 else math.nan


def morrey_norm(f: GridFunction, p: float, a: float, radii: RadiusSet | None = None) -> float:
    """``sup_{x0, r} (r^{-a} ∫_{B(x0, r)} |f|^p)^{1/p}`` over all cells and radii."""
    if not p > 1:
        raise ValueError(f"Morrey norm needs p > 1, got {p}")
    n = f.grid.n
    if not 0 <= a < n:
        raise ValueError(f"Morrey index must satisfy 0 <= a < n={n}, got {a}")
    radii = radii or RadiusSet.default(f.grid)
    _check_grid(f, radii)
    power = np.abs(f.values) ** p
    dv = f.grid.cell_volume
    best = 0.0
    for r, count, sums in _ball_sums(power, radii):
        if count == f.grid.size:
            # one ball holds everything; skip the transform round-off
            local = float(power.sum())
        else:
            local = float(np.max(sums))
        best = max(best, r ** (-a) * dv * max(local, 0.0))
    return float(best ** (1.0 / p))


def maximal_function(f: GridFunction, radii: RadiusSet | None = None) -> GridFunction:
    """Centred Hardy-Littlewood maximal function over the discrete balls.

    Starts from ``|f|`` (the single-cell ball), so ``M f >= |f|`` holds
    exactly.
    """
    radii = radii or RadiusSet.default(f.grid)
    _check_grid(f, radii)
    a = np.abs(f.values)
    out = a.copy()
    for _, count, sums in _ball_sums(a, radii):
        np.maximum(out, sums / count, out=out)
    return GridFunction(f.grid, out)


def maximal_phi(f: GridFunction, t_grid: Sequence[float] | None = None) -> GridFunction:
    """``max_t |H_t f|`` over ``t_grid`` (heat kernels as the φ family)."""
    grid = f.grid
    times = besov_time_grid(grid) if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(times <= 0) or not np.all(np.isfinite(times)):
        raise ValueError("t_grid must hold finite positive times")
    coeffs = sfft.rfftn(f.values)
    lam = grid.half_eigenvalues
    out = np.zeros(grid.shape)
    for t in times:
        np.maximum(out, np.abs(sfft.irfftn(coeffs * np.exp(-t * lam), s=grid.shape)), out=out)
    return GridFunction(grid, out)


@dataclass(frozen=True, eq=False)
class WeightField:
    """Positive weight ``ω`` sampled on a grid."""

    grid: Grid
    values: np.ndarray
    p: float | None = None

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} samples, got {arr.size}")
        arr = arr.reshape(self.grid.shape)
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise ValueError("weight samples must be finite and positive")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def ones(cls, grid: Grid) -> "WeightField":
        return cls(grid, np.ones(grid.shape))

    @classmethod
    def power_distance(
        cls,
        grid: Grid,
        exponent: float,
        center: Sequence[float] | float | None = None,
        sampling: str = "cell",
        p: float | None = None,
    ) -> "WeightField":
        """``|x - x0|^exponent`` in the periodic metric.

        ``sampling="cell"`` stores the cell average (finite for
        ``exponent > -n``); ``"clip"`` evaluates at the cell centre with the
        distance clipped below at one cell width.
        """
        c = np.broadcast_to(
            np.asarray(grid.L / 2 if center is None else center, dtype=float), (grid.n,)
        )
        h = grid.spacing
        if sampling == "clip":
            d = np.maximum(grid.periodic_distance(c), h)
            return cls(grid, d ** exponent, p)
        if sampling != "cell":
            raise ValueError(f"unknown sampling {sampling!r}")
        if not exponent > -grid.n:
            raise ValueError("cell averages need exponent > -n")
        if grid.n == 1:
            e1 = exponent + 1.0
            y = grid.axis_coordinates() - c[0]
            y = (y + grid.L / 2) % grid.L - grid.L / 2
            a, b = y - h / 2, y + h / 2

            def F(z):
                return np.sign(z) * np.abs(z) ** e1 / e1

            return cls(grid, (F(b) - F(a)) / h, p)
        # midpoint subcell rule; 16 points per axis
        sub = (np.arange(16) + 0.5) / 16 - 0.5
        acc = np.zeros(grid.shape)
        mesh = grid.mesh()
        offsets = np.meshgrid(*([sub * h] * grid.n), indexing="ij")
        for shift in zip(*(o.ravel() for o in offsets)):
            d2 = np.zeros(grid.shape)
            for axis in range(grid.n):
                y = (mesh[axis] + shift[axis] - c[axis] + grid.L / 2) % grid.L - grid.L / 2
                d2 += y ** 2
            acc += d2 ** (exponent / 2.0)
        return cls(grid, acc / sub.size ** grid.n, p)


def ap_constant(omega: WeightField, p: float, radii: RadiusSet | None = None) -> float:
    """``sup_B avg_B(ω) · avg_B(ω^{-1/(p-1)})^{p-1}``."""
    if not p > 1:
        raise ValueError(f"A_p needs p > 1, got {p}")
    radii = radii or RadiusSet.default(omega.grid)
    if radii.grid != omega.grid:
        raise ValueError("radius set belongs to another grid")
    dual = omega.values ** (-1.0 / (p - 1.0))
    best = 1.0  # single-cell balls
    ones = _ball_sums(omega.values, radii)
    duals = _ball_sums(dual, radii)
    for (_, count, s1), (_, _, s2) in zip(ones, duals):
        prod = (np.maximum(s1, 0) / count) * (np.maximum(s2, 0) / count) ** (p - 1.0)
        best = max(best, float(prod.max()))
    return best


def a1_constant(omega: WeightField, radii: RadiusSet | None = None) -> float:
    """``max_x M ω(x) / ω(x)`` with the same balls as :func:`maximal_function`."""
    mw = maximal_function(GridFunction(omega.grid, omega.values), radii)
    return float(np.max(mw.values / omega.values))


def weighted_lp_norm(f: GridFunction, omega: WeightField, p: float) -> float:
    if omega.grid != f.grid:
        raise ValueError("grid mismatch")
    if not p >= 1:
        raise ValueError(f"weighted L^p needs p >= 1, got {p}")
    return float((f.grid.cell_volume * np.sum(np.abs(f.values) ** p * omega.values)) ** (1.0 / p))


def weighted_sobolev(f: GridFunction, s: float, p: float, omega: WeightField) -> float:
    """``‖J^{s/2} f‖_{L^p(ω)}``; ``s = 0`` is the plain weighted norm."""
    if s < 0:
        raise ValueError("order must be nonnegative")
    return weighted_lp_norm(laplacian_power(f, s), omega, p)


def weighted_w11(f: GridFunction, omega: WeightField) -> float:
    return weighted_lp_norm(gradient_magnitude(f), omega, 1)
