"""Rearrangements, weights on the half line, and Lorentz norms.

A sampled function ``f`` on a grid is equimeasurable with the step function
whose levels are the sorted ``|f|`` samples, each level occupying one cell
volume.  Every Lorentz functional below is computed on that step function
exactly, step by step, using the closed-form primitive ``W`` of the weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from .spectral import GridFunction, laplacian_power

__all__ = [
    "RearrangedProfile",
    "WeightProfile",
    "BpResult",
    "ConditionValue",
    "TwoWeightResult",
    "distribution_function",
    "rearrangement",
    "bp_constant",
    "lambda_norm",
    "weak_lambda_norm",
    "lorentz_sobolev_norm",
    "two_weight_conditions",
    "log_grid",
]

PER_DECADE = 65
SPAN = (1e-6, 1e6)


def log_grid(scale: float = 1.0, per_decade: int = PER_DECADE, span=SPAN) -> np.ndarray:
    """Log-spaced points over ``span * scale``, endpoints included."""
    lo, hi = math.log10(span[0] * scale), math.log10(span[1] * scale)
    count = int(round((hi - lo) * per_decade)) + 1
    return np.logspace(lo, hi, count)


@dataclass(frozen=True, eq=False)
class RearrangedProfile:
    """Nonincreasing step function ``f*`` with uniform step width."""

    sorted_values: np.ndarray
    step: float

    def __post_init__(self):
        v = np.asarray(self.sorted_values, dtype=float)
        v.flags.writeable = False
        object.__setattr__(self, "sorted_values", v)

    @property
    def count(self) -> int:
        return self.sorted_values.size

    @property
    def measure(self) -> float:
        return self.count * self.step

    @property
    def breakpoints(self) -> np.ndarray:
        """Right endpoints ``t_i = i * step``, ``i = 1..M``."""
        return self.step * np.arange(1, self.count + 1)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        idx = np.floor(t / self.step).astype(np.int64)
        out = np.zeros(t.shape)
        inside = (idx >= 0) & (idx < self.count)
        out[inside] = self.sorted_values[idx[inside]]
        return out

    def distribution(self, alpha: float) -> float:
        """``|{f* > alpha}|`` read off the profile."""
        # values are descending; count those strictly above alpha
        asc = self.sorted_values[::-1]
        n_above = self.count - np.searchsorted(asc, alpha, side="right")
        return float(n_above * self.step)


def distribution_function(f: GridFunction, alpha: float) -> float:
    if alpha < 0:
        raise ValueError("level must be nonnegative")
    return f.grid.cell_volume * int(np.count_nonzero(np.abs(f.values) > alpha))


def rearrangement(f: GridFunction) -> RearrangedProfile:
    vals = np.abs(f.flat)
    # stable descending sort
    order = np.argsort(-vals, kind="stable")
    return RearrangedProfile(vals[order], f.grid.cell_volume)


@dataclass(frozen=True, eq=False)
class WeightProfile:
    """Weight ``w`` on ``(0, ∞)`` with primitive ``W``.

    ``power``: ``w(t) = c t^alpha``.  ``tabulated``: ``w = w_i`` on
    ``[t_{i-1}, t_i)`` (with ``t_{-1} = 0``), continued past the last
    breakpoint ``T`` by ``w_last (t/T)^tail_alpha``.

    A power weight with ``alpha <= -1`` can be constructed so that class
    checks can report it, but anything needing ``W`` raises.
    """

    kind: str
    c: float = 1.0
    alpha: float = 0.0
    t: np.ndarray | None = None
    w: np.ndarray | None = None
    tail_alpha: float = 0.0
    _cum: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def power(cls, c: float = 1.0, alpha: float = 0.0) -> "WeightProfile":
        if not (c > 0 and math.isfinite(c)):
            raise ValueError(f"power weight needs c > 0, got {c}")
        if not math.isfinite(alpha):
            raise ValueError("power weight exponent must be finite")
        return cls("power", float(c), float(alpha))

    @classmethod
    def tabulated(cls, t, w, tail_alpha: float = 0.0) -> "WeightProfile":
        t = np.asarray(t, dtype=float)
        w = np.asarray(w, dtype=float)
        if t.ndim != 1 or t.shape != w.shape or t.size < 1:
            raise ValueError("tabulated weight needs matching 1-D breakpoints and values")
        if t[0] <= 0 or np.any(np.diff(t) <= 0):
            raise ValueError("breakpoints must be positive and strictly increasing")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weight values must be finite and nonnegative")
        widths = np.diff(np.concatenate([[0.0], t]))
        cum = np.concatenate([[0.0], np.cumsum(w * widths)])
        return cls("tabulated", t=t, w=w, tail_alpha=float(tail_alpha), _cum=cum)

    @classmethod
    def from_dict(cls, d: dict) -> "WeightProfile":
        kind = d.get("kind")
        if kind == "power":
            return cls.power(float(d.get("c", 1.0)), float(d.get("alpha", 0.0)))
        if kind == "tabulated":
            return cls.tabulated(d["t"], d["w"], float(d.get("tail_alpha", 0.0)))
        raise ValueError(f"unknown weight kind {kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "c": self.c, "alpha": self.alpha}
        return {
            "kind": "tabulated",
            "t": [float(x) for x in self.t],
            "w": [float(x) for x in self.w],
            "tail_alpha": self.tail_alpha,
        }

    @property
    def head_exponent(self) -> float:
        """Exponent of the power law ``w`` follows as ``t -> 0``."""
        return self.alpha if self.kind == "power" else 0.0

    @property
    def tail_exponent(self) -> float:
        return self.alpha if self.kind == "power" else self.tail_alpha

    @property
    def locally_integrable(self) -> bool:
        return self.head_exponent > -1

    def _require_primitive(self):
        if not self.locally_integrable:
            raise ValueError(f"W diverges at 0 (alpha={self.alpha} <= -1)")

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            return self.c * np.power(t, self.alpha)
        T = self.t[-1]
        idx = np.searchsorted(self.t, t, side="right")
        out = np.empty(t.shape)
        inside = idx < self.t.size
        out[inside] = self.w[idx[inside]]
        out[~inside] = self.w[-1] * (t[~inside] / T) ** self.tail_alpha
        return out

    def primitive(self, t) -> np.ndarray:
        """``W(t) = ∫_0^t w``."""
        self._require_primitive()
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            a1 = self.alpha + 1.0
            return self.c / a1 * np.power(t, a1)
        tb, w, cum = self.t, self.w, self._cum
        T = tb[-1]
        out = np.empty(t.shape)
        idx = np.searchsorted(tb, t, side="right")
        inside = idx < tb.size
        left = np.concatenate([[0.0], tb])[idx[inside]]
        out[inside] = cum[idx[inside]] + w[idx[inside]] * (t[inside] - left)
        tt = t[~inside] / T
        g = self.tail_alpha
        if g == -1.0:
            extra = w[-1] * T * np.log(tt)
        else:
            extra = w[-1] * T / (g + 1.0) * (tt ** (g + 1.0) - 1.0)
        out[~inside] = cum[-1] + extra
        return out

    def increments(self, edges: np.ndarray) -> np.ndarray:
        """``W(edges[i+1]) - W(edges[i])``."""
        if self.kind == "power":
            self._require_primitive()
            a1 = self.alpha + 1.0
            return self.c / a1 * np.diff(np.power(edges, a1))
        return np.diff(self.primitive(edges))

    def tail_moment(self, r, p: float) -> np.ndarray:
        """``∫_r^∞ w(t) t^{-p} dt`` in closed form; ``inf`` when divergent."""
        r = np.asarray(r, dtype=float)
        g = self.tail_exponent
        if g - p >= -1.0:
            return np.full(r.shape, np.inf)
        if self.kind == "power":
            e = self.alpha - p + 1.0
            return self.c * np.power(r, e) / (-e)
        tb, w = self.t, self.w
        T = tb[-1]
        edges = np.concatenate([[0.0], tb])
        out = np.zeros(r.shape)
        # piecewise-constant part on [max(r, a), b)
        for a, b, wi in zip(edges[:-1], edges[1:], w):
            lo = np.maximum(r, a)
            active = lo < b
            if not np.any(active) or wi == 0:
                continue
            out[active] += wi * _power_integral(lo[active], b, -p)
        lo = np.maximum(r, T)
        e = g - p + 1.0
        out += w[-1] * T ** (-g) * np.power(lo, e) / (-e)
        return out


def _power_integral(a, b, e):
    """``∫_a^b t^e dt`` for arrays ``a``."""
    if e == -1.0:
        return np.log(b / a)
    return (np.power(b, e + 1.0) - np.power(a, e + 1.0)) / (e + 1.0)


@dataclass(frozen=True)
class BpResult:
    value: float
    finite: bool
    reason: str = ""
    method: str = ""

    def to_dict(self) -> dict:
        return {
            "value": self.value if self.finite else None,
            "finite": self.finite,
            "reason": self.reason,
            "method": self.method,
        }


def _simpson_tail(w: WeightProfile, r: np.ndarray, p: float) -> np.ndarray:
    """``∫_r^∞ w t^{-p} dt`` by Simpson in ``log t`` on the grid ``r``.

    Beyond the last node the integrand is continued as a power law with
    the weight's tail exponent.
    """
    u = np.log(r)
    g = w(r) * r ** (1.0 - p)
    # accumulate from the top node down; differencing a forward cumulative
    # loses the small tail values to cancellation
    cum = cumulative_simpson(g[::-1], x=-u[::-1], initial=0.0)[::-1]
    e = w.tail_exponent - p + 1.0
    beyond = g[-1] / (-e)
    return cum + beyond


def _simpson_primitive(w: WeightProfile, r: np.ndarray) -> np.ndarray:
    """``W(r)`` by Simpson in ``log t`` plus a power-law head below ``r[0]``."""
    u = np.log(r)
    g = w(r) * r
    cum = cumulative_simpson(g, x=u, initial=0.0)
    head = g[0] / (w.head_exponent + 1.0)
    return head + cum


def bp_constant(
    w: WeightProfile, p: float, method: str = "auto", scale: float = 1.0
) -> BpResult:
    """Constant of the Ariño-Muckenhoupt class ``B_p``.

    ``sup_r r^p ∫_r^∞ w(t) t^{-p} dt / W(r)``.  ``method`` selects the
    closed form (power weights), the Simpson route (log ``r`` grid, any
    weight), or ``auto``: closed form when available, otherwise the sup of
    exact piecewise integrals over the log grid plus the ``r -> 0`` and
    ``r -> ∞`` limits.
    """
    if not p >= 1:
        raise ValueError(f"B_p needs p >= 1, got {p}")
    if not w.locally_integrable:
        return BpResult(math.inf, False, "W diverges at 0 (alpha <= -1)", method)
    if w.tail_exponent >= p - 1.0:
        return BpResult(math.inf, False, "tail divergent", method)
    if method == "auto":
        method = "closed" if w.kind == "power" else "scan"
    if method == "closed":
        if w.kind != "power":
            raise ValueError("closed form exists only for power weights")
        a = w.alpha
        return BpResult((a + 1.0) / (p - a - 1.0), True, "", "closed")
    r = log_grid(scale)
    if method == "quadrature":
        ratio = r ** p * _simpson_tail(w, r, p) / _simpson_primitive(w, r)
        return BpResult(float(np.max(ratio)), True, "", "quadrature")
    if method != "scan":
        raise ValueError(f"unknown method {method!r}")
    W = w.primitive(r)
    num = r ** p * w.tail_moment(r, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(W > 0, num / W, np.where(num > 0, np.inf, 0.0))
    # power-law limits at both ends of the r axis
    h = w.head_exponent
    if w.kind == "power" or w.w[0] > 0:
        if h >= p - 1.0:
            return BpResult(math.inf, False, "head divergent", "scan")
        ratio = np.append(ratio, (h + 1.0) / (p - h - 1.0))
    g = w.tail_exponent
    if g > -1:
        ratio = np.append(ratio, (g + 1.0) / (p - g - 1.0))
    best = float(np.max(ratio))
    if not math.isfinite(best):
        return BpResult(math.inf, False, "W vanishes where the tail does not", "scan")
    return BpResult(best, True, "", "scan")


def lambda_norm(f: GridFunction, p: float, w: WeightProfile) -> float:
    """``(∫_0^∞ f*(t)^p w(t) dt)^{1/p}``, exact on each step of ``f*``."""
    if not p >= 1:
        raise ValueError(f"Lorentz norm needs p >= 1, got {p}")
    prof = rearrangement(f)
    edges = prof.step * np.arange(prof.count + 1)
    dW = w.increments(edges)
    return float(np.sum(prof.sorted_values ** p * dW) ** (1.0 / p))


def weak_lambda_norm(f: GridFunction, p: float, w: WeightProfile) -> float:
    """``sup_t f*(t) W(t)^{1/p}``, attained at the right end of a step."""
    if not p > 0:
        raise ValueError(f"weak Lorentz norm needs p > 0, got {p}")
    prof = rearrangement(f)
    W = w.primitive(prof.breakpoints)
    if prof.count == 0:
        return 0.0
    return float(np.max(prof.sorted_values * W ** (1.0 / p)))


def lorentz_sobolev_norm(
    f: GridFunction, s: float, p: float, w: WeightProfile, weak: bool = False
) -> float:
    """Lorentz norm of ``J^{s/2} f``; ``weak`` selects the weak variant."""
    if not s > 0:
        raise ValueError(f"order must be positive, got {s}")
    if not p > 1:
        raise ValueError(f"exponent must exceed 1, got {p}")
    g = laplacian_power(f, s)
    return weak_lambda_norm(g, p, w) if weak else lambda_norm(g, p, w)


# two-weight conditions ----------------------------------------------------

SLOPE_TOL = 1e-4


@dataclass(frozen=True)
class ConditionValue:
    name: str
    value: float
    finite: bool
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value if self.finite else None,
            "finite": self.finite,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class TwoWeightResult:
    variant: str
    conditions: tuple[ConditionValue, ...]
    flags: tuple[str, ...] = ()

    @property
    def finite(self) -> bool:
        return all(c.finite for c in self.conditions)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "finite": self.finite,
            "conditions": [c.to_dict() for c in self.conditions],
            "flags": list(self.flags),
        }


def _end_slopes(t: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    lt, ly = np.log(t), np.log(y)
    return (ly[1] - ly[0]) / (lt[1] - lt[0]), (ly[-1] - ly[-2]) / (lt[-1] - lt[-2])


def _sup_condition(name: str, t: np.ndarray, y: np.ndarray) -> ConditionValue:
    if not np.all(np.isfinite(y)):
        return ConditionValue(name, math.inf, False, "non-finite inner integral")
    if np.any(y <= 0):
        return ConditionValue(name, float(np.max(y)), True, "")
    lo, hi = _end_slopes(t, y)
    if lo < -SLOPE_TOL:
        return ConditionValue(name, math.inf, False, f"grows as t -> 0 (slope {lo:.4g})")
    if hi > SLOPE_TOL:
        return ConditionValue(name, math.inf, False, f"grows as t -> inf (slope {hi:.4g})")
    return ConditionValue(name, float(np.max(y)), True, "")


def _head_cumulative(t: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``∫_0^{t_i} g`` by Simpson in ``log t`` plus a power-law head.

    Returns ``inf`` everywhere when the head is not integrable.
    """
    if np.any(~np.isfinite(g)):
        return np.full(t.shape, np.inf)
    if g[0] <= 0:
        head = 0.0
    else:
        kappa = math.log(g[1] / g[0]) / math.log(t[1] / t[0])
        if kappa <= -1.0 + SLOPE_TOL:
            return np.full(t.shape, np.inf)
        head = g[0] * t[0] / (kappa + 1.0)
    return head + cumulative_simpson(g * t, x=np.log(t), initial=0.0)


def _full_integral(name: str, t: np.ndarray, g: np.ndarray) -> ConditionValue:
    """``∫_0^∞ g`` with power-law extrapolation at both ends."""
    if np.any(~np.isfinite(g)):
        return ConditionValue(name, math.inf, False, "non-finite integrand")
    body = float(cumulative_simpson(g * t, x=np.log(t), initial=0.0)[-1])
    head = tail = 0.0
    if g[0] > 0:
        k0 = math.log(g[1] / g[0]) / math.log(t[1] / t[0])
        if k0 <= -1.0 + SLOPE_TOL:
            return ConditionValue(name, math.inf, False, "integrand not integrable at 0")
        head = g[0] * t[0] / (k0 + 1.0)
    if g[-1] > 0:
        k1 = math.log(g[-1] / g[-2]) / math.log(t[-1] / t[-2])
        if k1 >= -1.0 - SLOPE_TOL:
            return ConditionValue(name, math.inf, False, "integrand not integrable at inf")
        tail = g[-1] * t[-1] / (-(k1 + 1.0))
    return ConditionValue(name, head + body + tail, True, "")


def _conj(x: float) -> float:
    return x / (x - 1.0)


VARIANTS = ("strong-1", "strong-2-r", "small-q0", "weak")


def two_weight_conditions(
    v: WeightProfile,
    w: WeightProfile,
    p: float,
    q0: float,
    variant: str,
    q: float | None = None,
    scale: float = 1.0,
) -> TwoWeightResult:
    """Evaluate the weight-pair conditions of one two-weight variant.

    Variants
    --------
    ``strong-1`` (``1 < q0 <= p``)
        ``sup W^{1/p} / V^{1/q0}`` and
        ``sup (∫_t^∞ w s^{-p})^{1/p} (∫_0^t v s^{q0'} / V^{q0'})^{1/q0'}``.
        With ``q0 = p`` this is the plain two-weight pair.
    ``strong-2-r`` (``1 < p < q0``, needs ``q > p``)
        Two integral conditions with ``1/r = 1/p - 1/q``, evaluated in the
        form they are usually printed; the result carries the
        ``as-printed`` flag.
    ``small-q0`` (``0 < q0 < 1``)
        ``sup W^{1/p} / V^{1/q0}`` and ``sup t V^{-1/q0} (∫_t^∞ w s^{-p})^{1/p}``.
    ``weak``
        ``sup W^{1/p} t^{-1} ∫_0^t V^{-1/q0}``.

    Sups and integrals use a 65-per-decade log grid over
    ``[1e-6, 1e6] * scale``; divergence is read from the log-log slope at
    the grid ends, with power-law continuation for the inner integrals.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    for weight in (v, w):
        if weight.kind not in ("power", "tabulated"):
            raise ValueError(f"unsupported weight kind {weight.kind!r} for tail analysis")
    if variant == "strong-1" and not (1 < q0 <= p):
        raise ValueError("strong-1 needs 1 < q0 <= p")
    if variant == "strong-2-r":
        if not (1 < p < q0):
            raise ValueError("strong-2-r needs 1 < p < q0")
        if q is None or not q > p:
            raise ValueError("strong-2-r needs q > p")
    if variant == "small-q0" and not (0 < q0 < 1 and p > 1):
        raise ValueError("small-q0 needs 0 < q0 < 1 and p > 1")
    if variant == "weak" and not (p > 1 and q0 > 0):
        raise ValueError("weak needs p > 1 and q0 > 0")

    if not v.locally_integrable:
        return TwoWeightResult(
            variant, (ConditionValue("V", math.inf, False, "V diverges at 0"),)
        )
    if not w.locally_integrable:
        return TwoWeightResult(
            variant, (ConditionValue("W", math.inf, False, "W diverges at 0"),)
        )

    t = log_grid(scale)
    W = w.primitive(t)
    V = v.primitive(t)
    conds = []
    flags = ()

    if variant in ("strong-1", "small-q0"):
        conds.append(_sup_condition("sup W^(1/p)/V^(1/q0)", t, W ** (1 / p) / V ** (1 / q0)))

    if variant == "strong-1":
        qc = _conj(q0)
        tail = w.tail_moment(t, p)
        inner = _head_cumulative(t, v(t) * t ** qc / V ** qc)
        conds.append(
            _sup_condition(
                "sup (int_t^inf w/s^p)^(1/p) (int_0^t v s^q0'/V^q0')^(1/q0')",
                t,
                tail ** (1 / p) * inner ** (1 / qc),
            )
        )
    elif variant == "small-q0":
        tail = w.tail_moment(t, p)
        conds.append(
            _sup_condition("sup t V^(-1/q0) (int_t^inf w/s^p)^(1/p)", t, t / V ** (1 / q0) * tail ** (1 / p))
        )
    elif variant == "weak":
        inner = _head_cumulative(t, V ** (-1.0 / q0))
        conds.append(_sup_condition("sup W^(1/p)/t int_0^t V^(-1/q0)", t, W ** (1 / p) / t * inner))
    else:
        r = 1.0 / (1.0 / p - 1.0 / q)
        qc = _conj(q0)
        pc = _conj(p)
        first = _full_integral("int (W/V)^(r/q0) w", t, (W / V) ** (r / q0) * w(t))
        conds.append(
            ConditionValue(first.name, first.value ** (1 / r) if first.finite else math.inf,
                           first.finite, first.reason)
        )
        dens = v(t) * t ** qc / V ** qc
        inner = _head_cumulative(t, dens)
        bracket = w.tail_moment(t, p) ** (1 / p) * inner ** (1 / pc)
        second = _full_integral("int [bracket]^r v s^q0'/V^q0'", t, bracket ** r * dens)
        conds.append(
            ConditionValue(second.name, second.value ** (1 / r) if second.finite else math.inf,
                           second.finite, second.reason)
        )
        flags = ("as-printed",)
    return TwoWeightResult(variant, tuple(conds), flags)
