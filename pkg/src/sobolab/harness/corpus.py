"""Seeded analytic test functions.

Members are stored as parameters, not samples, so any member can be
regenerated on another grid or at another dilation.  Dilation is about the
centre of the box: ``f_λ(x) = f(c + λ(x - c))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..spectral import Grid, GridFunction, boundary_energy_fraction

FAMILIES = ("gaussian", "dgauss", "bumps", "modulated", "bandrand", "zero")
LOCALIZED = ("gaussian", "dgauss", "bumps", "modulated")

WRAP_TOL = 1e-8


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusSpec:
    """A reproducible family of test functions.

    ``sigma`` is the range of Gaussian widths as a fraction of the period;
    ``band`` the integer mode range for ``bandrand``.
    """

    family: str = "dgauss"
    count: int = 24
    seed: int = 0
    mean_zero: bool = True
    sigma: tuple[float, float] = (0.0104, 0.0167)
    bumps: int = 3
    band: tuple[int, int] = (1, 8)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise CorpusError(f"unknown corpus family {self.family!r}")
        if self.count < 1:
            raise CorpusError("corpus must be nonempty")
        lo, hi = self.sigma
        if not 0 < lo <= hi:
            raise CorpusError("need 0 < sigma_lo <= sigma_hi")

    @classmethod
    def parse(cls, text: str, seed: int = 0, **kw) -> "CorpusSpec":
        """``family:count`` with an optional ``,mz`` / ``,raw`` suffix."""
        parts = text.split(",")
        head = parts[0]
        flags = parts[1:]
        if ":" in head:
            fam, cnt = head.split(":", 1)
            try:
                count = int(cnt)
            except ValueError:
                raise CorpusError(f"bad corpus count in {text!r}") from None
        else:
            fam, count = head, 24
        mean_zero = True
        for fl in flags:
            if fl == "mz":
                mean_zero = True
            elif fl == "raw":
                mean_zero = False
            else:
                raise CorpusError(f"unknown corpus flag {fl!r}")
        return cls(fam, count, seed, mean_zero, **kw)

    def to_dict(self) -> dict:
        out = {
            "family": self.family,
            "count": self.count,
            "seed": self.seed,
            "mean_zero": self.mean_zero,
        }
        if self.family == "bandrand":
            out["band"] = list(self.band)
        else:
            out["sigma"] = list(self.sigma)
        if self.family == "bumps":
            out["bumps"] = self.bumps
        return out


@dataclass(frozen=True)
class Member:
    family: str
    index: int
    seed: int
    params: dict = field(compare=False)

    def support_width(self, L: float, dilation: float = 1.0) -> float:
        """Width of the hull of ``±3σ`` around every bump, in length units."""
        if self.family == "bandrand":
            return math.inf
        if self.family == "zero":
            return 0.0
        lo = min(c - 3 * s for c, s in zip(self.params["centers"], self.params["sigmas"]))
        hi = max(c + 3 * s for c, s in zip(self.params["centers"], self.params["sigmas"]))
        return (hi - lo) * L / dilation


def _member_rng(spec: CorpusSpec, index: int) -> np.random.Generator:
    return np.random.default_rng([spec.seed, index, FAMILIES.index(spec.family)])


def make_member(spec: CorpusSpec, index: int) -> Member:
    rng = _member_rng(spec, index)
    fam = spec.family
    lo, hi = spec.sigma
    if fam == "bandrand":
        return Member(fam, index, spec.seed, {"band": tuple(spec.band), "seed": int(rng.integers(2**31))})
    if fam == "zero":
        return Member(fam, index, spec.seed, {})
    k = spec.bumps if fam == "bumps" else 1
    # positions and widths as fractions of L, measured from the box centre
    sigmas = list(rng.uniform(lo, hi, size=k))
    # keep the hull of all bumps inside L/8
    spread = 0.0 if k == 1 else max(0.0, 0.9 * (1 / 16 - 3 * hi - 0.25 * lo))
    centers = list(rng.uniform(-spread, spread, size=k) + rng.uniform(-0.25, 0.25) * lo)
    amps = rng.uniform(0.5, 2.0, size=k) * rng.choice([-1.0, 1.0], size=k)
    params = {"centers": centers, "sigmas": sigmas, "amps": list(amps)}
    if fam == "modulated":
        params["freq"] = float(rng.uniform(1.0, 3.0))
    return Member(fam, index, spec.seed, params)


def members(spec: CorpusSpec) -> list[Member]:
    return [make_member(spec, i) for i in range(spec.count)]


def _gauss(x2, s):
    return np.exp(-x2 / (2.0 * s * s))


def _eval_localized(m: Member, grid: Grid, dilation: float) -> np.ndarray:
    L = grid.L
    c = L / 2
    mesh = grid.mesh()
    # dilated coordinates about the box centre
    y = [c + dilation * (xa - c) for xa in mesh]
    out = np.zeros(grid.shape)
    P = m.params
    n = grid.n
    if m.family == "bumps":
        # zero total mass: the last amplitude balances the others
        amps = list(P["amps"])
        masses = [a * s ** n for a, s in zip(amps[:-1], P["sigmas"][:-1])]
        amps[-1] = -sum(masses) / P["sigmas"][-1] ** n
    else:
        amps = P["amps"]
    for cen, sig, amp in zip(P["centers"], P["sigmas"], amps):
        x0 = c + cen * L
        s = sig * L
        r2 = sum((ya - x0) ** 2 for ya in y)
        g = _gauss(r2, s)
        if m.family == "dgauss":
            g = g * (y[0] - x0) / s
        elif m.family == "modulated":
            g = g * np.cos(P["freq"] * (y[0] - x0) / s)
        out += amp * g
    return out


def _eval_bandrand(m: Member, grid: Grid, dilation: float) -> np.ndarray:
    if dilation != 1.0:
        raise CorpusError("band-limited random members cannot be dilated")
    kmin, kmax = m.params["band"]
    return bandrand_values(grid, m.params["seed"], kmin, kmax)


def bandrand_values(grid: Grid, seed: int, kmin: int, kmax: int) -> np.ndarray:
    """Random trigonometric polynomial with ``kmin <= max|k_j| <= kmax``.

    The draw order is fixed by the mode list, so values do not depend on
    the grid resolution.
    """
    if not 0 <= kmin <= kmax < grid.G // 2:
        raise CorpusError(f"band [{kmin}, {kmax}] must fit below G/2 = {grid.G // 2}")
    rng = np.random.default_rng(seed)
    n = grid.n
    axes = [np.arange(-kmax, kmax + 1)] * (n - 1) + [np.arange(0, kmax + 1)]
    modes = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)
    draws = rng.normal(size=(modes.shape[0], 2))
    out = np.zeros(grid.shape)
    mesh = grid.mesh()
    for k, (re, im) in zip(modes, draws):
        kk = int(np.max(np.abs(k)))
        if kk < kmin or kk > kmax:
            continue
        # keep one of each ±k pair
        nz = np.nonzero(k)[0]
        if nz.size and k[nz[0]] < 0:
            continue
        if kk == 0:
            out += re
            continue
        phase = sum(2 * math.pi * int(kj) * xa / grid.L for kj, xa in zip(k, mesh))
        out += re * np.cos(phase) + im * np.sin(phase)
    return out


def sample(
    m: Member,
    grid: Grid,
    dilation: float = 1.0,
    mean_zero: bool = True,
    check: bool = True,
) -> tuple[GridFunction, float]:
    """Sample a member; returns the function and the mean that was removed."""
    if m.family == "bandrand":
        vals = _eval_bandrand(m, grid, dilation)
    elif m.family == "zero":
        vals = np.zeros(grid.shape)
    else:
        if check and m.support_width(grid.L, dilation) > grid.L / 8 * (1 + 1e-12):
            raise CorpusError(
                f"member {m.index}: support {m.support_width(grid.L, dilation):.4g} exceeds L/8"
            )
        vals = _eval_localized(m, grid, dilation)
    removed = 0.0
    if mean_zero:
        removed = float(np.mean(vals))
        vals = vals - removed
    f = GridFunction(grid, vals)
    if check and m.family in LOCALIZED:
        frac = boundary_energy_fraction(GridFunction(grid, vals + removed))
        if frac > WRAP_TOL:
            raise CorpusError(f"member {m.index}: boundary energy {frac:.3g} above {WRAP_TOL}")
    return f, removed


# analytic descriptors -------------------------------------------------------

def parse_descriptor(text: str, grid: Grid) -> GridFunction:
    """Build a grid function from a short analytic descriptor.

    ``const:c``, ``gauss:A,x0,a`` (``A exp(-|x-x0|²/(4a))``),
    ``bumps:k,seed``, ``mode:k,A`` (``A cos(2πk x_0/L)``),
    ``bandrand:seed,kmin,kmax``; append ``,mz`` to subtract the mean.
    """
    if ":" not in text:
        raise CorpusError(f"bad descriptor {text!r}: expected kind:args")
    kind, rest = text.split(":", 1)
    args = [a for a in rest.split(",") if a != ""]
    mz = False
    if args and args[-1] == "mz":
        mz = True
        args = args[:-1]
    try:
        nums = [float(a) for a in args]
    except ValueError:
        raise CorpusError(f"bad numeric argument in {text!r}") from None

    def need(k):
        if len(nums) != k:
            raise CorpusError(f"descriptor {kind!r} takes {k} arguments, got {len(nums)}")

    if kind == "const":
        need(1)
        vals = np.full(grid.shape, nums[0])
    elif kind == "gauss":
        need(3)
        A, x0, a = nums
        if not a > 0:
            raise CorpusError("gauss width a must be positive")
        r2 = sum((xa - x0) ** 2 for xa in grid.mesh())
        vals = A * np.exp(-r2 / (4 * a))
    elif kind == "bumps":
        need(2)
        spec = CorpusSpec("bumps", 1, int(nums[1]), bumps=int(nums[0]))
        vals = _eval_localized(make_member(spec, 0), grid, 1.0)
    elif kind == "mode":
        need(2)
        k, A = nums
        vals = A * np.cos(2 * math.pi * k * grid.mesh()[0] / grid.L)
    elif kind == "bandrand":
        need(3)
        vals = bandrand_values(grid, int(nums[0]), int(nums[1]), int(nums[2]))
    else:
        raise CorpusError(f"unknown descriptor kind {kind!r}")
    if mz:
        vals = vals - np.mean(vals)
    return GridFunction(grid, vals)
