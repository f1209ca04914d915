"""Ratio evaluation, corpus runs and stability studies."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..norms import (
    RadiusSet,
    WeightField,
    besov_norm,
    besov_time_grid,
    lp_norm,
    maximal_function,
    morrey_norm,
    w11_seminorm,
    weighted_sobolev,
    weighted_w11,
)
from ..rearrange import lambda_norm, rearrangement, weak_lambda_norm
from ..spectral import Grid, GridFunction, laplacian_power
from .corpus import CorpusSpec, Member, members, sample
from .params import InequalityCase, ParameterError, derive_params
from .report import VerificationReport

SPREAD_FLAG = 0.05
GROWTH_FLAG = 2.0


@dataclass(frozen=True, eq=False)
class Resources:
    """Grid-level inputs shared by all members: balls, heat times, weight."""

    grid: Grid
    radii: RadiusSet
    t_grid: np.ndarray
    omega: WeightField | None = None

    @classmethod
    def build(cls, case: InequalityCase, grid: Grid, radii_per_octave: int = 4) -> "Resources":
        omega = None
        if case.omega_exponent is not None:
            omega = WeightField.power_distance(grid, case.omega_exponent)
        return cls(grid, RadiusSet.default(grid, radii_per_octave), besov_time_grid(grid), omega)

    def to_dict(self) -> dict:
        out = {
            "radii": self.radii.to_dict(),
            "t_grid": {
                "count": int(self.t_grid.size),
                "min": float(self.t_grid[0]),
                "max": float(self.t_grid[-1]),
                "refine": "golden-section",
            },
        }
        if self.omega is not None:
            out["omega"] = {"sampling": "cell-average", "center": self.grid.L / 2}
        return out


@dataclass
class Record:
    index: int
    seed: int
    lhs: float
    factor_A: float
    factor_B: float
    ratio: float
    flagged: bool = False
    note: str = ""
    mean_removed: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "index": self.index,
            "seed": self.seed,
            "lhs": self.lhs,
            "factor_A": self.factor_A,
            "factor_B": self.factor_B,
            "ratio": self.ratio,
            "flagged": self.flagged,
            "mean_removed": self.mean_removed,
        }
        if self.note:
            out["note"] = self.note
        out.update(self.extra)
        return out


def _ratio(lhs: float, A: float, B: float, theta: float) -> tuple[float, bool, str]:
    denom = A ** theta * B ** (1.0 - theta)
    if denom > 0:
        return lhs / denom, False, ""
    if lhs == 0:
        return math.nan, True, "undefined 0/0"
    return math.inf, True, "zero right-hand side with nonzero lhs"


def hedberg_check(
    f: GridFunction,
    s: float,
    s1: float,
    beta: float,
    radii: RadiusSet | None = None,
    t_grid=None,
) -> dict:
    """Pointwise constant ``max_x |J^{s1/2} f| / ((M J^{s/2} f)^θ B^{1-θ})``.

    ``θ = (s1+β)/(s+β)`` and ``B`` is the Besov norm of ``f`` at index
    ``-β``.  Cells where numerator and denominator both vanish count as 0.
    """
    if not (0 <= s1 < s):
        raise ParameterError("0 <= s1 < s violated")
    theta = (s1 + beta) / (s + beta)
    if not 0 < theta < 1:
        raise ParameterError("0 < theta < 1 violated")
    radii = radii or RadiusSet.default(f.grid)
    g = laplacian_power(f, s)
    h = laplacian_power(f, s1)
    B = besov_norm(f, beta, t_grid) if f.max_abs() > 0 else 0.0
    mg = maximal_function(g, radii)
    num = np.abs(h.values)
    den = mg.values ** theta * B ** (1.0 - theta)
    ratio = np.zeros_like(num)
    pos = den > 0
    ratio[pos] = num[pos] / den[pos]
    bad = (~pos) & (num > 0)
    if np.any(bad):
        if f.max_abs() > 0 and B == 0:
            raise RuntimeError("Besov norm vanished for a nonzero mean-zero function")
        ratio[bad] = np.inf
    flat = int(np.argmax(ratio))
    cell = tuple(int(i) for i in np.unravel_index(flat, f.grid.shape))
    return {
        "constant": float(ratio.ravel()[flat]),
        "argmax": list(cell),
        "theta": theta,
        "besov": B,
        "lhs": float(num.ravel()[flat]),
        "maximal": float(mg.values.ravel()[flat]),
        "h": h,
        "Mg": mg,
    }


def hedberg_chain(h: GridFunction, mg: GridFunction, B: float, theta: float, C: float, q: float,
                  rtol: float = 1e-12) -> tuple[bool, float]:
    """Check ``(h*)^q <= C^q ((Mg)*)^p B^{q-p}`` at every step, ``p = θq``.

    Returns whether it holds and the worst ratio of the two sides.
    """
    p = theta * q
    hs = rearrangement(h).sorted_values
    ms = rearrangement(mg).sorted_values
    left = hs ** q
    right = C ** q * ms ** p * B ** (q - p)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(right > 0, left / right, np.where(left > 0, np.inf, 0.0))
    worst = float(np.max(r))
    return worst <= 1.0 + rtol, worst


def evaluate_case(
    case: InequalityCase,
    f: GridFunction,
    resources: Resources | None = None,
) -> Record:
    """One member's ``lhs``, ``A``, ``B`` and ratio for ``case``."""
    res = resources or Resources.build(case, f.grid)
    if res.grid != f.grid:
        raise ValueError("resources belong to another grid")
    cid = case.id
    zero = f.max_abs() == 0
    B = 0.0 if zero else besov_norm(f, case.beta, res.t_grid)
    extra = {}
    if cid == "thm1":
        lhs = lp_norm(laplacian_power(f, case.s), case.q)
        A = w11_seminorm(f)
    elif cid == "thm4-weighted":
        lhs = weighted_sobolev(f, case.s, case.q, res.omega)
        A = weighted_w11(f, res.omega)
    elif cid == "hedberg-pointwise":
        if zero:
            lhs = A = 0.0
        else:
            hc = hedberg_check(f, case.s, case.s1, case.beta, res.radii, res.t_grid)
            lhs, A = hc["lhs"], hc["maximal"]
            extra["argmax"] = hc["argmax"]
    else:
        h = laplacian_power(f, case.s1)
        g = laplacian_power(f, case.s)
        if cid == "thm2-lorentz":
            lhs = lambda_norm(h, case.q, case.w)
            A = lambda_norm(g, case.p, case.w)
        elif cid == "cor-weak-lorentz":
            lhs = weak_lambda_norm(h, case.q, case.w)
            A = weak_lambda_norm(g, case.p, case.w)
        elif cid == "cor-two-weight":
            lhs = lambda_norm(h, case.q, case.w)
            A = lambda_norm(g, case.q0, case.v)
        elif cid == "thm3-morrey":
            lhs = morrey_norm(h, case.q, case.a, res.radii)
            A = morrey_norm(g, case.p, case.a, res.radii)
        else:
            raise ParameterError(f"unknown case id {cid!r}")
    ratio, flagged, note = _ratio(lhs, A, B, case.theta)
    return Record(-1, -1, float(lhs), float(A), float(B), ratio, flagged, note, extra=extra)


def _validate(case: InequalityCase, n: int):
    """Re-derive non-control cases so invalid algebra never reaches a report."""
    if case.control:
        return
    given = {"s": case.s}
    if case.id in ("thm1", "thm4-weighted"):
        given["q"] = case.q
        if case.omega_exponent is not None:
            given["omega_exponent"] = case.omega_exponent
    elif case.id == "hedberg-pointwise":
        given.update(s1=case.s1, beta=case.beta, q=case.q)
    else:
        given.update(beta=case.beta, p=case.p, q=case.q)
        for k in ("a", "w", "v", "q0"):
            if getattr(case, k) is not None:
                given[k] = getattr(case, k)
    ref = derive_params(case.id, n=n, **given)
    if not (math.isclose(ref.beta, case.beta, rel_tol=1e-12, abs_tol=1e-15)
            and math.isclose(ref.theta, case.theta, rel_tol=1e-12)
            and math.isclose(ref.s1, case.s1, rel_tol=1e-12, abs_tol=1e-15)):
        raise ParameterError("case fields disagree with the derived exponents")


def _member_task(args):
    case, spec_member, grid, dilation, mean_zero, amplitude, radii_per_octave = args
    res = Resources.build(case, grid, radii_per_octave)
    f, removed = sample(spec_member, grid, dilation, mean_zero)
    if amplitude != 1.0:
        f = f * amplitude
    rec = evaluate_case(case, f, res)
    rec.index = spec_member.index
    rec.seed = spec_member.seed
    rec.mean_removed = removed
    return rec


def _parallel_map(fn, items, jobs: int):
    if jobs is None:
        jobs = int(os.environ.get("SOBOLAB_JOBS", "1") or 1)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def aggregate(records: list[Record]) -> dict:
    """Order-independent summary of a list of records."""
    finite = sorted(r.ratio for r in records if math.isfinite(r.ratio))
    flagged = sum(1 for r in records if r.flagged)
    if finite:
        max_ratio = finite[-1]
        mean_ratio = math.fsum(finite) / len(finite)
        min_ratio = finite[0]
    else:
        max_ratio = mean_ratio = min_ratio = math.nan
    return {
        "max_ratio": max_ratio,
        "mean_ratio": mean_ratio,
        "min_ratio": min_ratio,
        "count": len(records),
        "finite": len(finite),
        "flagged": flagged,
    }


def run_corpus(
    case: InequalityCase,
    corpus: CorpusSpec | list[Member],
    grid: Grid,
    jobs: int | None = 1,
    radii_per_octave: int = 4,
    provenance: dict | None = None,
) -> VerificationReport:
    """Evaluate ``case`` on every corpus member; deterministic for fixed seeds."""
    _validate(case, grid.n)
    if isinstance(corpus, CorpusSpec):
        spec = corpus
        mems = members(corpus)
        mean_zero = corpus.mean_zero
    else:
        spec = None
        mems = list(corpus)
        mean_zero = True
    if not mems:
        raise ValueError("corpus must be nonempty")
    tasks = [(case, m, grid, 1.0, mean_zero, 1.0, radii_per_octave) for m in mems]
    try:
        records = _parallel_map(_member_task, tasks, jobs)
    except ValueError as exc:
        raise type(exc)(f"corpus member rejected: {exc}") from None
    records.sort(key=lambda r: r.index)
    res = Resources.build(case, grid, radii_per_octave)
    prov = dict(provenance or {})
    prov.setdefault("grid", grid.to_dict())
    prov["parameters"] = res.to_dict()
    return VerificationReport(
        case=case.to_dict(),
        grid=grid.to_dict(),
        corpus=spec.to_dict() if spec else {"members": len(mems)},
        records=records,
        aggregate=aggregate(records),
        provenance=prov,
    )


@dataclass
class ScalingResult:
    factors: list[float]
    ratios: list[list[float]]  # per member, per factor
    spreads: list[float]
    spread: float
    constant_spread: float
    flagged: bool
    threshold: float

    def to_dict(self) -> dict:
        return {
            "factors": self.factors,
            "ratios": self.ratios,
            "member_spreads": self.spreads,
            "spread": self.spread,
            "constant_spread": self.constant_spread,
            "flagged": self.flagged,
            "threshold": self.threshold,
        }


def _spread(vals) -> float:
    vals = [v for v in vals]
    if not vals or not all(math.isfinite(v) and v > 0 for v in vals):
        return math.inf
    return max(vals) / min(vals) - 1.0


def scaling_check(
    case: InequalityCase,
    corpus: CorpusSpec,
    grid: Grid,
    factors=(0.5, 2 ** -0.5, 1.0, 2 ** 0.5, 2.0),
    mode: str = "dilation",
    threshold: float = SPREAD_FLAG,
    jobs: int | None = 1,
    radii_per_octave: int = 4,
) -> ScalingResult:
    """Ratio stability under ``f -> f(c + λ(x - c))`` (or ``f -> λ f``).

    Members are regenerated at each factor, never resampled.  The spread of
    one member is ``max/min - 1`` over the factors; the reported spread is
    the largest member spread.
    """
    _validate(case, grid.n)
    if mode not in ("dilation", "amplitude"):
        raise ValueError(f"unknown scaling mode {mode!r}")
    mems = members(corpus)
    if mode == "dilation":
        for m in mems:
            for lam in factors:
                if m.support_width(grid.L, lam) > grid.L / 8 * (1 + 1e-12):
                    raise ParameterError(
                        f"member {m.index} at dilation {lam}: support exceeds L/8"
                    )
    tasks = []
    for m in mems:
        for lam in factors:
            if mode == "dilation":
                tasks.append((case, m, grid, float(lam), corpus.mean_zero, 1.0, radii_per_octave))
            else:
                tasks.append((case, m, grid, 1.0, corpus.mean_zero, float(lam), radii_per_octave))
    recs = _parallel_map(_member_task, tasks, jobs)
    k = len(factors)
    ratios = [[recs[i * k + j].ratio for j in range(k)] for i in range(len(mems))]
    spreads = [_spread(r) for r in ratios]
    consts = [max(ratios[i][j] for i in range(len(mems))) for j in range(k)]
    spread = max(spreads)
    return ScalingResult(
        [float(x) for x in factors], ratios, spreads, spread, _spread(consts),
        bool(spread > threshold), threshold,
    )


@dataclass
class RefinementResult:
    G_list: list[int]
    constants: list[float]
    growth: float
    flagged: bool

    def to_dict(self) -> dict:
        return {
            "G": self.G_list,
            "constants": self.constants,
            "growth": self.growth,
            "flagged": self.flagged,
        }


def refinement_study(
    case: InequalityCase,
    corpus: CorpusSpec,
    G_list,
    n: int = 1,
    L: float = 40.0,
    jobs: int | None = 1,
    radii_per_octave: int = 4,
) -> RefinementResult:
    """Empirical constants across grid sizes.

    ``growth`` is ``max/min`` of the constants; monotone growth beyond 2x
    is flagged.
    """
    G_list = [int(G) for G in G_list]
    if any(b <= a for a, b in zip(G_list, G_list[1:])):
        raise ValueError("G_list must be increasing")
    consts = []
    for G in G_list:
        rep = run_corpus(case, corpus, Grid(n, G, L), jobs, radii_per_octave)
        c = rep.aggregate["max_ratio"]
        consts.append(0.0 if rep.aggregate["finite"] == 0 and all(
            r.lhs == 0 for r in rep.records) else c)
    if all(c == 0 for c in consts):
        return RefinementResult(G_list, consts, 1.0, False)
    pos = [c for c in consts if c > 0 and math.isfinite(c)]
    growth = max(pos) / min(pos) if len(pos) == len(consts) else math.inf
    monotone = all(b >= a for a, b in zip(consts, consts[1:]))
    return RefinementResult(G_list, consts, growth, bool(monotone and growth > GROWTH_FLAG))
