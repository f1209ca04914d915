"""Fourier calculus on the periodic grid.

Every operator here is a spectral multiplier ``m(J)`` of the positive
Laplacian ``J = -Δ``: the Fourier coefficient at integer mode ``k`` is
multiplied by ``m(λ_k)`` with ``λ_k = |2πk/L|²``.  Transforms are real
(``rfftn``), so the Nyquist mode only carries a cosine.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import fft as sfft
from scipy.special import gamma as gamma_fn

__all__ = [
    "Grid",
    "GridFunction",
    "SpectralMultiplier",
    "HeatReprParams",
    "build_grid",
    "apply_multiplier",
    "heat",
    "laplacian_power",
    "fractional_laplacian",
    "fractional_laplacian_heat",
    "gradient",
    "gradient_magnitude",
    "cutoff_split",
    "dyadic_blocks",
    "convolve",
    "theta0",
    "theta1",
    "psi",
    "cutoff_kernel_norms",
    "high_band_energy",
    "boundary_energy_fraction",
]


@dataclass(frozen=True)
class Grid:
    """Periodic box ``[0, L)^n`` sampled with ``G`` points per axis."""

    n: int
    G: int
    L: float

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError(f"dimension n must be 1, 2 or 3, got {self.n}")
        G = int(self.G)
        if G != self.G or G < 8 or G & (G - 1):
            raise ValueError(f"points_per_axis G must be a power of two >= 8, got {self.G}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ValueError(f"period L must be positive, got {self.L}")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "L", float(self.L))

    @property
    def spacing(self) -> float:
        return self.L / self.G

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.G,) * self.n

    @property
    def size(self) -> int:
        return self.G ** self.n

    @property
    def lambda_min(self) -> float:
        """Smallest nonzero eigenvalue, ``(2π/L)²``."""
        return (2.0 * math.pi / self.L) ** 2

    @property
    def lambda_max(self) -> float:
        """Eigenvalue of the corner Nyquist mode."""
        return self.n * (math.pi * self.G / self.L) ** 2

    @property
    def homogeneous_dimension(self) -> int:
        return self.n

    def axis_coordinates(self) -> np.ndarray:
        return np.arange(self.G) * self.spacing

    def mesh(self) -> list[np.ndarray]:
        x = self.axis_coordinates()
        return np.meshgrid(*([x] * self.n), indexing="ij")

    def periodic_distance(self, center: Sequence[float] | float) -> np.ndarray:
        """Euclidean distance to ``center`` in the periodic metric, per cell."""
        c = np.broadcast_to(np.asarray(center, dtype=float), (self.n,))
        d2 = np.zeros(self.shape)
        for axis, xa in enumerate(self.mesh()):
            d = np.abs(xa - c[axis]) % self.L
            d2 += np.minimum(d, self.L - d) ** 2
        return np.sqrt(d2)

    def integer_modes(self) -> np.ndarray:
        """Integer frequencies in ``[-G/2, G/2)`` in FFT order."""
        return np.fft.fftfreq(self.G, d=1.0 / self.G)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """``λ_k`` over the full lattice of modes, FFT order, shape ``(G,)*n``."""
        xi = 2.0 * math.pi * self.integer_modes() / self.L
        lam = np.zeros(self.shape)
        for axis in range(self.n):
            shape = [1] * self.n
            shape[axis] = self.G
            lam = lam + (xi ** 2).reshape(shape)
        return lam

    @cached_property
    def _half_wavenumbers(self) -> tuple[np.ndarray, ...]:
        # rfftn layout: last axis keeps modes 0..G/2
        out = []
        for axis in range(self.n):
            if axis == self.n - 1:
                k = np.arange(self.G // 2 + 1, dtype=float)
                size = self.G // 2 + 1
            else:
                k = self.integer_modes()
                size = self.G
            shape = [1] * self.n
            shape[axis] = size
            out.append((2.0 * math.pi * k / self.L).reshape(shape))
        return tuple(out)

    @cached_property
    def half_eigenvalues(self) -> np.ndarray:
        """``λ`` on the ``rfftn`` half-lattice."""
        lam = 0.0
        for xi in self._half_wavenumbers:
            lam = lam + xi ** 2
        return np.asarray(lam, dtype=float)

    def derivative_symbol(self, axis: int) -> np.ndarray:
        """``i·ξ_axis`` on the half-lattice, Nyquist entry zeroed."""
        xi = self._half_wavenumbers[axis].copy()
        nyq = math.pi * self.G / self.L
        xi[np.isclose(np.abs(xi), nyq, rtol=0, atol=1e-12 * nyq)] = 0.0
        return 1j * xi

    def to_dict(self) -> dict:
        return {"n": self.n, "G": self.G, "L": self.L}


def build_grid(n: int, G: int, L: float) -> Grid:
    return Grid(n, G, L)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real samples of a function on a :class:`Grid`, immutable."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.size != self.grid.size:
            raise ValueError(
                f"expected {self.grid.size} samples for grid {self.grid.to_dict()}, got {arr.size}"
            )
        arr = arr.reshape(self.grid.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("grid function has non-finite samples")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_callable(cls, grid: Grid, func: Callable[..., np.ndarray]) -> "GridFunction":
        """Sample ``func(x_0, ..., x_{n-1})`` at the cell coordinates."""
        vals = np.broadcast_to(func(*grid.mesh()), grid.shape)
        return cls(grid, vals)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.shape, float(c)))

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def integral(self) -> float:
        return self.grid.cell_volume * float(np.sum(self.values))

    def mean(self) -> float:
        return float(np.mean(self.values))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def _check_same_grid(self, other: "GridFunction"):
        if other.grid != self.grid:
            raise ValueError("grid mismatch")

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + float(other))

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - float(other))

    def __mul__(self, c):
        if isinstance(c, GridFunction):
            self._check_same_grid(c)
            return self.with_values(self.values * c.values)
        return self.with_values(self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def __abs__(self):
        return self.with_values(np.abs(self.values))

    def __repr__(self):
        return f"GridFunction(grid={self.grid!r}, max_abs={self.max_abs():.6g})"


def _sigma(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def _smooth_step(u) -> np.ndarray:
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    a = _sigma(u)
    b = _sigma(1.0 - u)
    return a / (a + b)


def theta0(lam) -> np.ndarray:
    """Smooth low-pass cutoff: 1 on ``[0, 1/2)``, 0 on ``[1, ∞)``."""
    lam = np.asarray(lam, dtype=float)
    return _smooth_step((1.0 - lam) / 0.5)


def theta1(lam) -> np.ndarray:
    return 1.0 - theta0(lam)


def psi(lam) -> np.ndarray:
    """Dyadic annulus ``θ0(λ/2) - θ0(λ)``, supported in ``(1/2, 2)``."""
    lam = np.asarray(lam, dtype=float)
    return theta0(lam / 2.0) - theta0(lam)


_KINDS = ("identity", "power", "heat", "cutoff_low", "cutoff_high", "dyadic", "tabulated")


@dataclass(frozen=True, eq=False)
class SpectralMultiplier:
    """A real function ``m(λ)`` on ``λ >= 0``.

    Build instances through the classmethods; ``kind`` and ``param`` are
    kept for reporting.  For ``power`` the parameter is the order ``s`` and
    the multiplier is ``λ^{s/2}``.
    """

    kind: str
    param: float | None = None
    table: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown multiplier kind {self.kind!r}")

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def power(cls, s: float):
        if not s > 0:
            raise ValueError(f"power multiplier needs s > 0, got {s}")
        return cls("power", float(s))

    @classmethod
    def heat(cls, t: float):
        if not t > 0:
            raise ValueError(f"heat multiplier needs t > 0, got {t}")
        return cls("heat", float(t))

    @classmethod
    def cutoff_low(cls):
        return cls("cutoff_low")

    @classmethod
    def cutoff_high(cls):
        return cls("cutoff_high")

    @classmethod
    def dyadic(cls, j: int):
        if j < 0:
            raise ValueError("dyadic level must be >= 0")
        return cls("dyadic", int(j))

    @classmethod
    def tabulated(cls, lams, values):
        lams = np.asarray(lams, dtype=float)
        values = np.asarray(values, dtype=float)
        if lams.ndim != 1 or lams.shape != values.shape or lams.size < 1:
            raise ValueError("tabulated multiplier needs matching 1-D samples")
        if np.any(np.diff(lams) <= 0) or lams[0] < 0:
            raise ValueError("tabulated abscissae must be nonnegative and increasing")
        return cls("tabulated", None, (lams, values))

    def __call__(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        kind = self.kind
        if kind == "identity":
            return np.ones_like(lam)
        if kind == "power":
            return np.power(lam, self.param / 2.0)
        if kind == "heat":
            return np.exp(-self.param * lam)
        if kind == "cutoff_low":
            return theta0(lam)
        if kind == "cutoff_high":
            return theta1(lam)
        if kind == "dyadic":
            return psi(lam * 2.0 ** (-self.param))
        xs, ys = self.table
        return np.interp(lam, xs, ys)


def _forward(f: GridFunction) -> np.ndarray:
    return sfft.rfftn(f.values)


def _inverse(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    return sfft.irfftn(coeffs, s=grid.shape)


def _apply_symbol(f: GridFunction, symbol: np.ndarray) -> GridFunction:
    if not np.all(np.isfinite(symbol)):
        raise ValueError("multiplier is not finite at some grid eigenvalue")
    return GridFunction(f.grid, _inverse(_forward(f) * symbol, f.grid))


def apply_multiplier(f: GridFunction, m: SpectralMultiplier | Callable) -> GridFunction:
    """Return ``m(J) f``.

    ``m`` may also be any vectorised callable of ``λ``; it must be real and
    finite on the grid eigenvalues.
    """
    return _apply_symbol(f, np.asarray(m(f.grid.half_eigenvalues), dtype=float))


def heat(f: GridFunction, t: float) -> GridFunction:
    """Heat semigroup ``H_t f = e^{-tJ} f``."""
    if not t > 0:
        raise ValueError(f"heat time must be positive, got {t}")
    return _apply_symbol(f, np.exp(-t * f.grid.half_eigenvalues))


def laplacian_power(f: GridFunction, s: float) -> GridFunction:
    """``J^{s/2} f`` for any real ``s``.

    ``s = 0`` is the identity.  For ``s != 0`` the zero mode is removed, so
    negative orders act on the mean-zero part only.
    """
    if s == 0:
        return f
    lam = f.grid.half_eigenvalues
    symbol = np.zeros_like(lam)
    pos = lam > 0
    symbol[pos] = lam[pos] ** (s / 2.0)
    return _apply_symbol(f, symbol)


def fractional_laplacian(f: GridFunction, s: float) -> GridFunction:
    """``(-Δ)^{s/2} f`` with symbol ``|ξ|^s``."""
    if not s > 0:
        raise ValueError(f"fractional order must be positive, got {s}")
    return laplacian_power(f, s)


@dataclass(frozen=True)
class HeatReprParams:
    """Quadrature controls for the heat-semigroup route to ``J^{s2}``.

    ``t_max`` and ``t_min`` default to values derived from the grid spectrum
    (see :meth:`resolve`); ``steps`` is the node count per decade of ``t``.
    """

    k: int = 1
    t_max: float | None = None
    steps: int = 32
    t_min: float | None = None

    def resolve(self, grid: Grid, s2: float) -> tuple[float, float]:
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be an integer >= 1, got {self.k}")
        if not self.k > s2:
            raise ValueError(f"k must exceed s/2: k={self.k}, s/2={s2}")
        if self.steps < 16:
            raise ValueError(f"steps per decade must be >= 16, got {self.steps}")
        a = self.k - s2
        if self.t_max is None:
            # integrand at t_max is (λt)^a e^{-λt} / Γ(a), λ >= λ_min
            x = 40.0
            while x ** a * math.exp(-x) > 1e-17 * gamma_fn(a):
                x *= 1.25
            t_max = x / grid.lambda_min
        else:
            t_max = float(self.t_max)
        if t_max < 10.0 / grid.lambda_min:
            raise ValueError(
                f"t_max={t_max} is below the floor 10/lambda_min={10.0 / grid.lambda_min}"
            )
        if self.t_min is None:
            # omitted head ∫_0^{t_min} is at most (λ_max t_min)^a / Γ(a+1)
            t_min = min(0.1, (1e-15 * gamma_fn(a + 1.0)) ** (1.0 / a)) / grid.lambda_max
        else:
            t_min = float(self.t_min)
        if not 0 < t_min < t_max:
            raise ValueError("need 0 < t_min < t_max")
        return t_min, t_max


def high_band_energy(f: GridFunction, fraction: float = 0.25) -> float:
    """Share of spectral energy in the top ``fraction`` of frequency shells.

    Shells are indexed by ``max_j |k_j|``; the top shells are those with
    ``max |k| > (1 - fraction) * G/2``.
    """
    grid = f.grid
    coeffs = np.abs(sfft.fftn(f.values)) ** 2
    kmax = np.zeros(grid.shape)
    k = np.abs(grid.integer_modes())
    for axis in range(grid.n):
        shape = [1] * grid.n
        shape[axis] = grid.G
        kmax = np.maximum(kmax, k.reshape(shape))
    total = coeffs.sum()
    if total == 0:
        return 0.0
    return float(coeffs[kmax > (1.0 - fraction) * grid.G / 2].sum() / total)


def fractional_laplacian_heat(
    f: GridFunction, s2: float, params: HeatReprParams | None = None
) -> GridFunction:
    """``J^{s2} f`` through the heat representation

    ``J^{s2} f = Γ(k-s2)^{-1} ∫_0^∞ t^{k-s2-1} J^k H_t f dt``

    evaluated by the trapezoid rule in ``log t`` on ``[t_min, t_max]``.  The
    sum over nodes of ``t^{k-s2} J^k H_t f`` is accumulated on the Fourier
    side, which is the same linear combination as summing the images.
    """
    if not s2 > 0:
        raise ValueError(f"s/2 must be positive, got {s2}")
    params = params or HeatReprParams()
    grid = f.grid
    t_min, t_max = params.resolve(grid, s2)
    if high_band_energy(f) > 1e-8:
        warnings.warn("input is not band-limited; heat-route quadrature may be inaccurate")
    a = params.k - s2
    u0, u1 = math.log(t_min), math.log(t_max)
    decades = (u1 - u0) / math.log(10.0)
    nodes = int(math.ceil(decades * params.steps)) + 1
    u = np.linspace(u0, u1, nodes)
    h = u[1] - u[0]
    weights = np.full(nodes, h)
    weights[0] = weights[-1] = h / 2.0

    lam = grid.half_eigenvalues
    pos = lam > 0
    lp = lam[pos]
    log_lam_k = params.k * np.log(lp)
    acc = np.zeros_like(lp)
    for ui, wi in zip(u, weights):
        t = math.exp(ui)
        acc += wi * np.exp(a * ui + log_lam_k - lp * t)
    symbol = np.zeros_like(lam)
    symbol[pos] = acc / gamma_fn(a)
    return _apply_symbol(f, symbol)


def gradient(f: GridFunction) -> list[GridFunction]:
    """Spectral partial derivatives, one grid function per axis."""
    coeffs = _forward(f)
    return [
        GridFunction(f.grid, _inverse(coeffs * f.grid.derivative_symbol(axis), f.grid))
        for axis in range(f.grid.n)
    ]


def gradient_magnitude(f: GridFunction) -> GridFunction:
    comps = gradient(f)
    return GridFunction(f.grid, np.sqrt(sum(c.values ** 2 for c in comps)))


def cutoff_split(f: GridFunction) -> tuple[GridFunction, GridFunction]:
    """``(θ0(J) f, θ1(J) f)``; the two parts sum to ``f``."""
    coeffs = _forward(f)
    low_sym = theta0(f.grid.half_eigenvalues)
    low = GridFunction(f.grid, _inverse(coeffs * low_sym, f.grid))
    high = GridFunction(f.grid, _inverse(coeffs * (1.0 - low_sym), f.grid))
    return low, high


def dyadic_blocks(f: GridFunction, j_max: int) -> list[GridFunction]:
    """Blocks ``ψ(2^{-j} J) f`` for ``j = 0..j_max``.

    Together with ``θ0(J) f`` they reproduce ``f`` once ``2^{j_max}``
    exceeds ``λ_max``.
    """
    if j_max < 0:
        raise ValueError("j_max must be >= 0")
    coeffs = _forward(f)
    lam = f.grid.half_eigenvalues
    return [
        GridFunction(f.grid, _inverse(coeffs * psi(lam * 2.0 ** (-j)), f.grid))
        for j in range(j_max + 1)
    ]


def convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """Periodic convolution ``∫ f(x-y) g(y) dy`` with cell-volume weights."""
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    grid = f.grid
    return GridFunction(grid, grid.cell_volume * _inverse(_forward(f) * _forward(g), grid))


def cutoff_kernel_norms(grid: Grid) -> tuple[float, float]:
    """Measured ``L¹`` norms of the kernels of ``θ0(J)`` and ``θ1(J)`` on ``grid``."""
    lam = grid.half_eigenvalues
    k0 = _inverse(theta0(lam).astype(complex), grid)
    k1 = _inverse(theta1(lam).astype(complex), grid)
    # kernel = k / cell_volume, L¹ norm = cell_volume * Σ|kernel|
    return float(np.abs(k0).sum()), float(np.abs(k1).sum())


def boundary_energy_fraction(f: GridFunction) -> float:
    """Share of ``Σ f²`` carried by cells on the faces of the box."""
    vals = f.values ** 2
    total = vals.sum()
    if total == 0:
        return 0.0
    mask = np.zeros(f.grid.shape, dtype=bool)
    for axis in range(f.grid.n):
        idx = [slice(None)] * f.grid.n
        idx[axis] = 0
        mask[tuple(idx)] = True
        idx[axis] = -1
        mask[tuple(idx)] = True
    return float(vals[mask].sum() / total)
