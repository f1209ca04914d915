"""Exponent algebra for each inequality family."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ..rearrange import WeightProfile, bp_constant, two_weight_conditions

CASE_IDS = (
    "thm1",
    "thm2-lorentz",
    "cor-weak-lorentz",
    "cor-two-weight",
    "thm3-morrey",
    "thm4-weighted",
    "hedberg-pointwise",
)

ALIASES = {
    "thm2": "thm2-lorentz",
    "cor-weak": "cor-weak-lorentz",
    "two-weight": "cor-two-weight",
    "thm3": "thm3-morrey",
    "thm4": "thm4-weighted",
    "hedberg": "hedberg-pointwise",
}

# cases whose left side is built from J^{s/2} f with the gradient on the right
GRADIENT_CASES = ("thm1", "thm4-weighted")
LORENTZ_CASES = ("thm2-lorentz", "cor-weak-lorentz", "cor-two-weight", "thm3-morrey")


class ParameterError(ValueError):
    """Exponents outside the range where an inequality is claimed."""


def canonical_id(case_id: str) -> str:
    cid = ALIASES.get(case_id, case_id)
    if cid not in CASE_IDS:
        raise ParameterError(f"unknown case id {case_id!r}")
    return cid


@dataclass(frozen=True)
class InequalityCase:
    """One fully specified inequality.

    ``ratio = lhs / (A^theta * B^(1-theta))`` where ``B`` is always the
    negative-index Besov norm of ``f`` and ``lhs``/``A`` depend on ``id``.
    ``control`` marks a deliberately perturbed case that skips the
    validity gate.
    """

    id: str
    s: float
    s1: float
    q: float
    beta: float
    theta: float
    p: float | None = None
    a: float | None = None
    w: WeightProfile | None = None
    v: WeightProfile | None = None
    q0: float | None = None
    omega_exponent: float | None = None
    control: bool = False

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "s": self.s,
            "s1": self.s1,
            "p": self.p,
            "q": self.q,
            "beta": self.beta,
            "theta": self.theta,
        }
        if self.a is not None:
            out["a"] = self.a
        if self.w is not None:
            out["w"] = self.w.to_dict()
        if self.v is not None:
            out["v"] = self.v.to_dict()
        if self.q0 is not None:
            out["q0"] = self.q0
        if self.omega_exponent is not None:
            out["omega"] = {"kind": "power_distance", "exponent": self.omega_exponent}
        if self.control:
            out["control"] = True
        return out


def _require(cond: bool, message: str):
    if not cond:
        raise ParameterError(message)


def _finite(x, name):
    _require(x is not None, f"{name} is required")
    _require(math.isfinite(x), f"{name} must be finite")
    return float(x)


def derive_params(case_id: str, n: int = 1, **given) -> InequalityCase:
    """Complete a case from the exponents a caller chooses.

    ``thm1``/``thm4``: ``q`` and ``s`` (default 0).  ``thm2``, ``thm3``,
    ``cor-weak`` and ``two-weight``: ``s``, ``beta``, ``p``, ``q``.  ``hedberg``: ``s``,
    ``s1``, ``beta`` (``q`` optional, used for the integrated chain).
    Weights come as :class:`WeightProfile` objects (``w``, ``v``) or a
    distance exponent (``omega_exponent``).
    """
    cid = canonical_id(case_id)
    unknown = set(given) - {"s", "s1", "p", "q", "beta", "a", "w", "v", "q0", "omega_exponent"}
    _require(not unknown, f"unexpected parameters {sorted(unknown)}")

    if cid in GRADIENT_CASES:
        q = _finite(given.get("q"), "q")
        s = _finite(given.get("s", 0.0), "s")
        _require(1 < q, "1 < q violated")
        _require(s >= 0, "s >= 0 violated")
        _require(s < 1 / q, "s < 1/q violated")
        beta = (1 - s * q) / (q - 1)
        theta = 1 / q
        omega_exponent = None
        if cid == "thm4-weighted":
            omega_exponent = float(given.get("omega_exponent", -0.5))
            # |x|^γ is an A1 weight exactly when -n < γ <= 0
            _require(-n < omega_exponent <= 0, "omega in A_1 violated (need -n < exponent <= 0)")
        return InequalityCase(cid, s, s, q, beta, theta, p=1.0, omega_exponent=omega_exponent)

    if cid == "hedberg-pointwise":
        s = _finite(given.get("s"), "s")
        s1 = _finite(given.get("s1"), "s1")
        beta = _finite(given.get("beta"), "beta")
        q = float(given.get("q", 4.0))
        _require(beta > 0, "beta > 0 violated")
        _require(0 <= s1 < s, "0 <= s1 < s violated")
        theta = (s1 + beta) / (s + beta)
        _require(0 < theta < 1, "0 < theta < 1 violated")
        _require(q > 1, "q > 1 violated")
        return InequalityCase(cid, s, s1, q, beta, theta, p=theta * q)

    s = _finite(given.get("s"), "s")
    beta = _finite(given.get("beta"), "beta")
    p = _finite(given.get("p"), "p")
    q = _finite(given.get("q"), "q")
    _require(s > 0, "s > 0 violated")
    _require(beta > 0, "beta > 0 violated")
    _require(1 < p, "1 < p violated")
    _require(p < q, "p < q violated")
    theta = p / q
    s1 = theta * s - (1 - theta) * beta
    _require(-beta < s1 < s, "-beta < s1 < s violated")

    if cid == "thm3-morrey":
        a = _finite(given.get("a", 0.5), "a")
        _require(0 <= a < n, f"0 <= a < n violated (n={n})")
        return InequalityCase(cid, s, s1, q, beta, theta, p=p, a=a)

    w = given.get("w") or WeightProfile.power(1.0, p / q - 1.0)
    if cid in ("thm2-lorentz", "cor-weak-lorentz"):
        bp = bp_constant(w, p)
        _require(bp.finite, f"w in B_p violated: {bp.reason}")
        return InequalityCase(cid, s, s1, q, beta, theta, p=p, w=w)

    v = given.get("v") or WeightProfile.power(1.0, 0.0)
    if given.get("w") is None:
        w = WeightProfile.power(1.0, 0.0)
    q0 = float(given.get("q0", p))
    if 0 < q0 < 1:
        variant = "small-q0"
    elif 1 < q0 <= p:
        variant = "strong-1"
    elif q0 > p:
        variant = "strong-2-r"
    else:
        raise ParameterError("q0 = 1 is not covered by any two-weight variant")
    res = two_weight_conditions(v, w, p, q0, variant, q=q)
    bad = [c for c in res.conditions if not c.finite]
    _require(not bad, "two-weight condition violated: " + "; ".join(f"{c.name} ({c.reason})" for c in bad))
    return InequalityCase(cid, s, s1, q, beta, theta, p=p, w=w, v=v, q0=q0)


def perturb_beta(case: InequalityCase, shift: float) -> InequalityCase:
    """Negative control: the same case with ``beta`` moved by ``shift``."""
    return replace(case, beta=case.beta + shift, control=True)
