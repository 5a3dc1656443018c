"""Closed-form constants, tail bounds and dimension thresholds.

``exp`` in every bound is base 2. Tail bounds multiply astronomically large
net cardinalities by tiny exponentials, so they are accumulated as sums of
log2 terms and only exponentiated at the end (``value`` is ``None`` when
``|log2_value| > 1000``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

LN2 = math.log(2.0)
PI = math.pi

C1 = 1.0 / (9 * PI**3 * LN2)
C2 = 1.0 / (2 * PI**2 * LN2)
C3 = 1.0 / (8 * PI**2 * LN2)
GAMMA = 1.0 / 1753

LOG_LIMIT = 1000.0


def constants() -> dict[str, float]:
    return {"C1": C1, "C2": C2, "C3": C3, "Gamma": GAMMA}


def log2(x: float) -> float:
    return math.log2(x)


@dataclass(frozen=True)
class BoundResult:
    kind: str
    params: dict[str, Any]
    log2_value: float | None
    value: float | None
    probability: bool = True
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def vacuous(self) -> bool:
        return self.probability and self.log2_value is not None and self.log2_value >= 0.0

    @property
    def clamped(self) -> float:
        """Probability bound clamped to [0, 1] (report use only)."""
        if self.log2_value is None:
            return float(self.value)
        if self.log2_value >= 0:
            return 1.0
        if self.log2_value < -LOG_LIMIT:
            return 0.0
        return 2.0**self.log2_value

    def to_json_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "params": self.params,
            "value": self.value,
            "log2_value": self.log2_value,
            "vacuous": self.vacuous,
        }
        if self.extra:
            out["extra"] = self.extra
        return out


def _prob(kind: str, params: dict, log2_value: float, **extra) -> BoundResult:
    if not math.isfinite(log2_value) and log2_value != -math.inf:
        raise ArithmeticError(f"{kind}: non-finite log2 bound {log2_value}")
    value = 2.0**log2_value if abs(log2_value) <= LOG_LIMIT else None
    return BoundResult(kind, dict(params), log2_value, value, True, extra)


def _thr(kind: str, params: dict, value: float, **extra) -> BoundResult:
    lv = math.log2(value) if value > 0 else None
    return BoundResult(kind, dict(params), lv, float(value), False, extra)


def _need(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


# mean entropy ----------------------------------------------------------------


def harmonic(n: int) -> float:
    """H_n = sum_{j<=n} 1/j, exact summation for small n, asymptotic beyond."""
    if n <= 0:
        return 0.0
    if n <= 10**6:
        return math.fsum(1.0 / j for j in range(1, n + 1))
    inv = 1.0 / n
    inv2 = inv * inv
    return math.log(n) + 0.5772156649015329 + 0.5 * inv - inv2 / 12 + inv2 * inv2 / 120


def page_mean_entropy(dA: int, dB: int) -> BoundResult:
    """Exact mean entanglement entropy (bits) of a Haar-random pure state on
    dA x dB, dA <= dB; ``extra`` carries the lower bound log dA - beta/2."""
    _need(1 <= dA <= dB, f"need 1 <= dA <= dB, got dA={dA}, dB={dB}")
    n = dA * dB
    if n - dB <= 10**6:
        s = math.fsum(1.0 / j for j in range(dB + 1, n + 1))
    else:
        s = harmonic(n) - harmonic(dB)
    mean = (s - (dA - 1) / (2 * dB)) / LN2
    beta = dA / (dB * LN2)
    lower = math.log2(dA) - beta / 2
    if dA > 1 and not mean > lower:
        raise ArithmeticError(f"mean entropy {mean} not above lower bound {lower}")
    return _thr("page_mean_entropy", {"dA": dA, "dB": dB}, mean, lower_bound=lower, beta=beta)


def beta(dA: int, dB: int) -> float:
    return dA / (dB * LN2)


# tail bounds -----------------------------------------------------------------


def _levy_mean(p):
    k, alpha, eta = p["k"], p["alpha"], p["eta"]
    _need(k >= 1 and eta > 0 and alpha > 0, "levy_mean needs k >= 1, eta > 0, alpha > 0")
    return 1.0 - C1 * (k + 1) * alpha**2 / eta**2


def _levy_median(p):
    k, alpha, eta = p["k"], p["alpha"], p["eta"]
    _need(k >= 1 and eta > 0 and alpha > 0, "levy_median needs k >= 1, eta > 0, alpha > 0")
    return -C2 * (k - 1) * alpha**2 / eta**2


def _entropy_concentration(p):
    dA, dB, alpha = p["dA"], p["dB"], p["alpha"]
    _need(dB >= dA >= 3, "entropy_concentration needs dB >= dA >= 3")
    _need(alpha > 0, "alpha must be positive")
    return -(dA * dB - 1) * C3 * alpha**2 / math.log2(dA) ** 2


def _eig_concentration(p):
    dA, dB, eps = p["dA"], p["dB"], p["epsilon"]
    _need(0 < eps <= 1, "eig_concentration needs 0 < epsilon <= 1")
    _need(dA >= 1 and dB >= 1, "dimensions must be positive")
    return 2 * dA * math.log2(10 * dA / eps) - dB * eps**2 / (14 * LN2)


def _projector_overlap(p):
    q, s, eps = p["q"], p["s"], p["epsilon"]
    side = p.get("side", "upper")
    form = p.get("form", "strong")
    _need(q >= 1 and s >= 1, "q and s must be positive")
    _need(side in ("upper", "lower") and form in ("strong", "weak"), "side upper|lower, form strong|weak")
    _need(0 < eps <= 1, "projector_overlap needs 0 < epsilon <= 1")
    if form == "weak":
        return -q * s * eps**2 / (6 * LN2)
    if side == "upper":
        return -q * s * (eps - math.log(1 + eps)) / LN2
    _need(eps < 1, "lower-side strong form needs epsilon < 1")
    return -q * s * (-eps - math.log(1 - eps)) / LN2


def _subspace_failure(p):
    dA, dB, s, alpha = p["dA"], p["dB"], p["s"], p["alpha"]
    _need(dB >= dA >= 3, "subspace_failure needs dB >= dA >= 3")
    la = math.log2(dA)
    _need(0 < alpha < la, "subspace_failure needs 0 < alpha < log dA")
    _need(s >= 1, "s must be positive")
    return 2 * s * math.log2(15 * la / alpha) - (dA * dB - 1) * alpha**2 / (32 * PI**2 * LN2 * la**2)


def _oneway_vanishing(p):
    dB, s, eps = p["dB"], p["s"], p["epsilon"]
    dA = p.get("dA", dB)
    _need(dB >= dA >= 1, "oneway_vanishing needs dB >= dA")
    _need(0 < eps <= 1 / 3, "oneway_vanishing needs 0 < epsilon <= 1/3")
    return 1 + 4 * dB * math.log2(20 * dB**2 / eps) - s * eps**2 / 17


def _oneway_value(p):
    dA, dB, s, eps = p["dA"], p["dB"], p["s"], p["epsilon"]
    _need(s >= 2, "oneway_value needs s >= 2")
    _need(0 < eps <= 1 / 3, "oneway_value needs 0 < epsilon <= 1/3")
    _need(s / eps <= dB <= eps * s * dA, "oneway_value needs s/epsilon <= dB <= epsilon*s*dA")
    ls = math.log2(s)
    return 1 + 2 * dA * math.log2(15 * ls / eps) - (s * dB - 1) * eps**2 / (32 * PI**2 * LN2 * ls**2)


def _one_copy(p):
    dB, s = p["dB"], p["s"]
    _need(dB >= p.get("dA", 2) >= 2, "one_copy needs dB >= dA >= 2")
    _need(s >= 1, "s must be positive")
    return 1 + 16 * dB * math.log2(10 * dB) - s / (600 * LN2)


def _multiparty_cut(p):
    n, d, alpha = p["n"], p["d"], p["alpha"]
    _need(n >= 2 and d >= 2, "multiparty_cut needs n >= 2, d >= 2")
    _need(alpha > 0, "alpha must be positive")
    # (d^n - 1) evaluated in floating point to stay finite for huge n
    dn = float(d) ** n if n * math.log2(d) < 1000 else math.inf
    _need(math.isfinite(dn), "d^n too large")
    return (n - 1) - (dn - 1) * C3 * alpha**2 / (n**2 * math.log2(d) ** 2)


def _mutual_info_tail(p):
    dA, dB, s, alpha = p["dA"], p["dB"], p["s"], p["alpha"]
    _need(s >= 2 and s != dA * dB, "mutual_info_tail needs s >= 2 and s != dA*dB")
    _need(alpha > 0, "alpha must be positive")
    small = min(s, dA * dB)
    return -(s * dA * dB - 1) * C3 * alpha**2 / math.log2(small) ** 2


TAIL_KINDS: dict[str, Callable[[dict], float]] = {
    "levy_mean": _levy_mean,
    "levy_median": _levy_median,
    "entropy_concentration": _entropy_concentration,
    "eig_concentration": _eig_concentration,
    "projector_overlap": _projector_overlap,
    "subspace_failure": _subspace_failure,
    "oneway_vanishing": _oneway_vanishing,
    "oneway_value": _oneway_value,
    "one_copy": _one_copy,
    "multiparty_cut": _multiparty_cut,
    "mutual_info_tail": _mutual_info_tail,
}


def tail_bound(kind: str, **params) -> BoundResult:
    try:
        fn = TAIL_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown tail-bound kind {kind!r}; choose from {sorted(TAIL_KINDS)}") from None
    try:
        lv = fn(params)
    except KeyError as e:
        raise ValueError(f"{kind}: missing parameter {e.args[0]!r}") from None
    return _prob(kind, params, lv)


# thresholds -------------------------------------------------------------------


def _alpha_range(p):
    la = math.log2(p["dA"])
    _need(p["dB"] >= p["dA"] >= 3, "needs dB >= dA >= 3")
    _need(0 < p["alpha"] < la, "alpha must lie in (0, log dA)")
    return la


def _subspace_dim(p):
    la = _alpha_range(p)
    v = p["dA"] * p["dB"] * GAMMA * p["alpha"] ** 2.5 / la**2.5
    return _thr("subspace_dim", p, float(math.floor(v)), unfloored=v)


def _subspace_dim_tight(p):
    la = _alpha_range(p)
    a = p["alpha"]
    v = (p["dA"] * p["dB"] - 1) * a**2 / (438 * la**2 * math.log2(15 * la / a))
    return _thr("subspace_dim_tight", p, v, relation="s < value")


def _mutual_info_cap(p):
    dA, a = p["dA"], p["alpha"]
    _need(dA >= 3 and 0 < a <= 1, "mutual_info_cap needs dA >= 3 and 0 < alpha <= 1")
    v = 2.5 * math.log2(math.log2(dA)) - math.log2(GAMMA * a**2.5) + 1
    return _thr("mutual_info_cap", p, v, relation="S(A:B) <= value")


def _eof_high_threshold(p):
    la = _alpha_range(p)
    v = p["dA"] * p["dB"] * la**-2.5 * GAMMA * p["alpha"] ** 2.5
    return _thr("eof_high_threshold", p, v, relation="s < value", eof_floor=la - p["alpha"] - beta(p["dA"], p["dB"]))


def _eof_low_threshold(p):
    dA, dB, eps = p["dA"], p["dB"], p["epsilon"]
    _need(dB >= dA >= 3 and eps > 0, "needs dB >= dA >= 3 and epsilon > 0")
    la = math.log2(dA)
    v = dA * dB * la**2 * (6 * math.log2(dB) - 4 * math.log2(eps)) * 14 * LN2 / eps**2
    return _thr("eof_low_threshold", p, v, relation="s > value")


def _separable_threshold(p):
    dA, dB = p["dA"], p["dB"]
    _need(dA >= 1 and dB >= 1, "dimensions must be positive")
    return _thr("separable_threshold", p, 6.0 * (dA * dB) ** 2, relation="s > value")


def _mutual_info_random(p):
    dA, dB, s, a = p["dA"], p["dB"], p["s"], p["alpha"]
    _need(a > 0 and s >= 1, "needs alpha > 0 and s >= 1")
    D = dA * dB
    if s < D:
        b1 = s / (D * LN2)
        v = math.log2(dA) + math.log2(dB) - math.log2(s) + a + b1
        return _thr("mutual_info_random", p, v, relation="S(A:B) <= value", beta1=b1, regime="s < dA*dB")
    if s > D:
        b2 = D / (s * LN2)
        return _thr("mutual_info_random", p, a + b2, relation="S(A:B) <= value", beta2=b2, regime="s > dA*dB")
    raise ValueError("mutual_info_random is not stated for s == dA*dB")


def _multiparty_eof(p):
    n, d = p["n"], p["d"]
    part = int(p.get("part", 1))
    M1 = p.get("M1", 1.0)
    M2 = p.get("M2", 1.0)
    _need(n >= 2 and d >= 2, "needs n >= 2, d >= 2")
    ld = math.log2(d)
    if part == 1:
        a = p["alpha"]
        _need(0 < a < 1, "part 1 needs 0 < alpha < 1")
        v = n / 2 + M1 / ld * math.log2(n * ld / a)
        rel = "x > value"
    elif part == 2:
        e = p["epsilon"]
        _need(e > 0, "part 2 needs epsilon > 0")
        v = n / 2 - M2 / ld * math.log2(n * ld / e**2)
        rel = "x < value"
    elif part == 3:
        v = n / 3 - 1 / ld
        rel = "x < value"
    else:
        raise ValueError("part must be 1, 2 or 3")
    extra = {"relation": rel}
    if "x" in p:
        x = p["x"]
        extra["satisfied"] = bool(x > v) if part == 1 else bool(x < v)
        if part == 1 and "x1" in p:
            x1, x2 = p["x1"], x - p["x1"]
            extra["beta"] = d ** (x1 - x2) / (2 * LN2)
            extra["eof_floor"] = x1 * ld - p["alpha"] - extra["beta"]
    return _thr("multiparty_eof", p, v, **extra)


def _cor17_floor(p):
    d, a = p["d"], p["alpha"]
    _need(d >= 2 and a > 0, "needs d >= 2 and alpha > 0")
    return _thr("cor17_floor", p, math.log2(d) - 1 / LN2 - a, relation="E >= value")


THRESHOLD_KINDS: dict[str, Callable[[dict], BoundResult]] = {
    "subspace_dim": _subspace_dim,
    "subspace_dim_tight": _subspace_dim_tight,
    "mutual_info_cap": _mutual_info_cap,
    "eof_high_threshold": _eof_high_threshold,
    "eof_low_threshold": _eof_low_threshold,
    "separable_threshold": _separable_threshold,
    "mutual_info_random": _mutual_info_random,
    "multiparty_eof": _multiparty_eof,
    "cor17_floor": _cor17_floor,
}


def threshold_calculator(kind: str, **params) -> BoundResult:
    try:
        fn = THRESHOLD_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown threshold kind {kind!r}; choose from {sorted(THRESHOLD_KINDS)}") from None
    try:
        return fn(params)
    except KeyError as e:
        raise ValueError(f"{kind}: missing parameter {e.args[0]!r}") from None


def evaluate(kind: str, **params) -> BoundResult:
    if kind in TAIL_KINDS:
        return tail_bound(kind, **params)
    if kind == "page_mean_entropy":
        return page_mean_entropy(params["dA"], params["dB"])
    return threshold_calculator(kind, **params)


ALL_KINDS = sorted([*TAIL_KINDS, *THRESHOLD_KINDS, "page_mean_entropy"])
