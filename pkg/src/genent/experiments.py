"""Seeded Monte Carlo campaigns comparing sampled statistics with the bounds.

A campaign is described by an :class:`ExperimentConfig`. Trial ``t`` draws all
of its randomness from ``SeedSpec(master_seed, t)``, so the per-trial records
are identical whatever the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import stats
from threadpoolctl import threadpool_limits

from . import bounds
from .linalg import eigvalsh, schmidt_coefficients, spectrum_entropy
from .measures import (
    LN2,
    closest_max_entangled,
    is_npt,
    mutual_information,
    one_copy_distillable_search,
    oneway_info_lower_bound,
    purity_separable,
)
from .protocols import certify_subspace, locking_trial, multiparty_distill, sdc_run
from .sampler import SeedSpec, haar_pure, random_mixed, random_subspace
from .states import Register, reduced_density

log = logging.getLogger(__name__)

VERDICTS = ("holds", "vacuous", "violated", "out_of_range")

_UNIT_GRID = [round(0.1 * k, 1) for k in range(1, 11)]

# deviation grids used when a config gives none
DEFAULT_DEVIATIONS: dict[str, list[float]] = {
    "entropy_tail": _UNIT_GRID,
    "eig_tail": [0.25, 0.5, 0.75],
    "projector_tail": [0.1, 0.25, 0.5, 0.9],
    "mutual_info": [0.5],
    "oneway": [0.01, 0.05, 0.1],
    "multiparty_cuts": _UNIT_GRID,
}


@dataclass
class ExperimentConfig:
    """Campaign description; the JSON form uses the same field names.

    ``dims`` is ``[dA, dB]`` for bipartite scenarios, ``[d]`` for
    ``purity_mean`` and ``projector_tail``, ``[n, d]`` for the multiparty
    scenarios and ``[n]`` (qubits per side) for ``locking``.
    """

    scenario: str
    dims: list[int]
    trials: int
    master_seed: int = 0
    rank: int | None = None
    q: int = 1
    pair: list[int] = field(default_factory=lambda: [0, 1])
    traced: int = 1
    deviations: list[float] = field(default_factory=list)
    targets: int = 10
    restarts: int = 5
    iters: int = 200
    workers: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; choose from {sorted(SCENARIOS)}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        self.dims = [int(d) for d in self.dims]
        if not self.deviations:
            self.deviations = list(DEFAULT_DEVIATIONS.get(self.scenario, []))
        self.deviations = [float(x) for x in self.deviations]
        SCENARIOS[self.scenario].validate(self)

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(obj) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        missing = {"scenario", "dims", "trials"} - set(obj)
        if missing:
            raise ValueError(f"missing config keys: {sorted(missing)}")
        return cls(**obj)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    def echo(self) -> dict:
        out = asdict(self)
        out.pop("workers")
        return out


# statistics helpers ---------------------------------------------------------


def tail_fraction(samples: Sequence[float], threshold: float, side: str = "below") -> tuple[float, float]:
    """Fraction of samples strictly beyond ``threshold`` with its binomial SE."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("empty sample set")
    if side == "below":
        p = float(np.mean(x < threshold))
    elif side == "above":
        p = float(np.mean(x > threshold))
    else:
        raise ValueError("side must be 'below' or 'above'")
    return p, math.sqrt(p * (1 - p) / x.size)


def compare_with_bound(fraction: float, se: float, bound: bounds.BoundResult) -> str:
    if not bound.probability:
        raise ValueError(f"{bound.kind} is not a probability bound")
    if bound.vacuous:
        return "vacuous"
    if fraction - 3 * se > bound.clamped:
        return "violated"
    return "holds"


def median_mean_gap(samples: Sequence[float]) -> tuple[float, float, float]:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("empty sample set")
    mean, med = float(np.mean(x)), float(np.median(x))
    return mean, med, mean - med


def _summary(x: np.ndarray) -> dict:
    return {
        "count": int(x.size),
        "mean": float(np.mean(x)),
        "median": float(np.median(x)),
        "std": float(np.std(x, ddof=1)) if x.size > 1 else 0.0,
    }


def _mean_check(name: str, x: np.ndarray, target: float, side: str = "two-sided") -> dict:
    """``holds`` unless the mean misses ``target`` by more than 3 SE."""
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    if side == "two-sided":
        bad = abs(mean - target) > 3 * se
    elif side == "at_most":
        bad = mean - 3 * se > target
    else:
        bad = mean + 3 * se < target
    return {
        "check": name,
        "type": "mean",
        "side": side,
        "target": target,
        "mean": mean,
        "se": se,
        "verdict": "violated" if bad else "holds",
    }


def _tail_check(name: str, x: np.ndarray, threshold: float, side: str, deviation: float | None, bound_fn) -> dict:
    frac, se = tail_fraction(x, threshold, side)
    out = {
        "check": name,
        "type": "tail",
        "deviation": deviation,
        "threshold": threshold,
        "side": side,
        "fraction": frac,
        "se": se,
    }
    try:
        b = bound_fn()
    except ValueError as e:
        out.update(bound=None, verdict="out_of_range", reason=str(e))
        return out
    out.update(bound=b.to_json_dict(), verdict=compare_with_bound(frac, se, b))
    return out


# scenarios ------------------------------------------------------------------

Row = tuple[str, float, str]


@dataclass(frozen=True)
class Scenario:
    validate: Callable[[ExperimentConfig], None]
    trial: Callable[[ExperimentConfig, SeedSpec], list[Row]]
    analyse: Callable[[ExperimentConfig, dict[str, np.ndarray], dict[str, list]], list[dict]]


def _need(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


def _bipartite(cfg, need_rank=False):
    _need(len(cfg.dims) == 2, f"{cfg.scenario} needs dims [dA, dB]")
    dA, dB = cfg.dims
    _need(1 <= dA <= dB, f"{cfg.scenario} needs 1 <= dA <= dB")
    if need_rank:
        _need(cfg.rank is not None and cfg.rank >= 1, f"{cfg.scenario} needs rank >= 1")


def _entanglement(v: np.ndarray, dA: int, dB: int) -> float:
    return spectrum_entropy(schmidt_coefficients(v, dA, dB) ** 2)


# page_mean / entropy_tail


def _entropy_trial(cfg, seed):
    dA, dB = cfg.dims
    return [("entropy", _entanglement(haar_pure(dA * dB, seed), dA, dB), "")]


def _page_analyse(cfg, cols, _labels):
    dA, dB = cfg.dims
    exact = bounds.page_mean_entropy(dA, dB).value
    return [_mean_check("page_mean", cols["entropy"], exact)]


def _entropy_tail_analyse(cfg, cols, _labels):
    dA, dB = cfg.dims
    x = cols["entropy"]
    b = bounds.beta(dA, dB)
    la = math.log2(dA)
    checks = []
    for a in cfg.deviations:
        checks.append(
            _tail_check(
                "entropy_concentration", x, la - a - b, "below", a,
                lambda a=a: bounds.tail_bound("entropy_concentration", dA=dA, dB=dB, alpha=a),
            )
        )
    mean, med, gap = median_mean_gap(x)
    ok = med >= la - b
    if not ok:
        log.warning("empirical median %.6f below log dA - beta = %.6f", med, la - b)
    checks.append(
        {"check": "median_floor", "type": "median", "median": med, "mean": mean, "gap": gap,
         "target": la - b, "verdict": "holds" if ok else "violated"}
    )
    return checks


# purity_mean


def _purity_validate(cfg):
    _need(len(cfg.dims) == 1 and cfg.dims[0] >= 1, "purity_mean needs dims [d]")
    _need(cfg.rank is not None and cfg.rank >= 1, "purity_mean needs rank >= 1")


def _purity_trial(cfg, seed):
    rho = random_mixed(cfg.dims[0], cfg.rank, seed)
    return [("purity", float(np.real(np.vdot(rho, rho))), "")]


def _purity_analyse(cfg, cols, _labels):
    d, s = cfg.dims[0], cfg.rank
    return [_mean_check("purity_mean", cols["purity"], (d + s) / (d * s + 1))]


# eig_tail


def _eig_trial(cfg, seed):
    dA, dB = cfg.dims
    w = schmidt_coefficients(haar_pure(dA * dB, seed), dA, dB) ** 2
    return [("lambda_max", float(w[0]), ""), ("lambda_min", float(w[min(dA, dB) - 1]), "")]


def _eig_analyse(cfg, cols, _labels):
    dA, dB = cfg.dims
    hi, lo = cols["lambda_max"], cols["lambda_min"]
    checks = []
    for e in cfg.deviations:
        outside = np.maximum(hi - (1 + e) / dA, (1 - e) / dA - lo)
        two = _tail_check(
            "eig_concentration", outside, 0.0, "above", e,
            lambda e=e: bounds.tail_bound("eig_concentration", dA=dA, dB=dB, epsilon=e),
        )
        two["within_band_fraction"] = 1 - two["fraction"]
        checks.append(two)
        checks.append(
            _tail_check(
                "eig_concentration_upper", hi, (1 + e) / dA, "above", e,
                lambda e=e: bounds.tail_bound("eig_concentration", dA=dA, dB=dB, epsilon=e),
            )
        )
    return checks


# projector_tail


def _projector_validate(cfg):
    _need(len(cfg.dims) == 1, "projector_tail needs dims [d]")
    d = cfg.dims[0]
    _need(cfg.rank is not None and 1 <= cfg.rank <= d, "projector_tail needs 1 <= rank <= d")
    _need(1 <= cfg.q <= d, "projector_tail needs 1 <= q <= d")


def _projector_trial(cfg, seed):
    d = cfg.dims[0]
    V = random_subspace(d, 1, cfg.rank, seed).columns
    return [("overlap", float(np.sum(np.abs(V[: cfg.q]) ** 2)), "")]


def _projector_analyse(cfg, cols, _labels):
    d, s, q = cfg.dims[0], cfg.rank, cfg.q
    x = cols["overlap"]
    mid = q * s / d
    checks = []
    for e in cfg.deviations:
        for side, thr, tside in (("upper", (1 + e) * mid, "above"), ("lower", (1 - e) * mid, "below")):
            for form in ("strong", "weak"):
                checks.append(
                    _tail_check(
                        f"projector_overlap_{side}_{form}", x, thr, tside, e,
                        lambda e=e, side=side, form=form: bounds.tail_bound(
                            "projector_overlap", q=q, s=s, epsilon=e, side=side, form=form
                        ),
                    )
                )
    return checks


# mutual_info


def _mi_trial(cfg, seed):
    dA, dB = cfg.dims
    rho = random_mixed(dA * dB, cfg.rank, seed)
    return [("mutual_information", mutual_information(Register.mixed(rho, (dA, dB))), "")]


def _mi_analyse(cfg, cols, _labels):
    dA, dB = cfg.dims
    s = cfg.rank
    x = cols["mutual_information"]
    checks = []
    for a in cfg.deviations:
        try:
            thr = bounds.threshold_calculator("mutual_info_random", dA=dA, dB=dB, s=s, alpha=a)
        except ValueError as e:
            checks.append({"check": "mutual_info_random", "deviation": a, "verdict": "out_of_range", "reason": str(e)})
            continue
        m = _mean_check("mutual_info_random_mean", x, thr.value, "at_most")
        m.update(deviation=a, threshold=thr.to_json_dict())
        checks.append(m)
        checks.append(
            _tail_check(
                "mutual_info_tail", x, thr.value, "above", a,
                lambda a=a: bounds.tail_bound("mutual_info_tail", dA=dA, dB=dB, s=s, alpha=a),
            )
        )
    return checks


# oneway


def _oneway_trial(cfg, seed):
    dA, dB = cfg.dims
    r = Register.mixed(random_mixed(dA * dB, cfg.rank, seed.child(0)), (dA, dB))
    low = oneway_info_lower_bound(r, restarts=cfg.restarts, iters=cfg.iters, seed=seed.child(1)).value
    return [("oneway_lower", low, ""), ("mutual_information", mutual_information(r), "")]


def _oneway_analyse(cfg, cols, _labels):
    dA, dB = cfg.dims
    x, mi = cols["oneway_lower"], cols["mutual_information"]
    over = int(np.sum(x > mi + 1e-9))
    checks = [{"check": "oneway_below_mutual_information", "type": "count", "exceptions": over,
               "verdict": "violated" if over else "holds"}]
    for e in cfg.deviations:
        # the statistic is a lower bound, so the tail estimate is one-sided sound
        checks.append(
            _tail_check(
                "oneway_vanishing", x, 5 * e, "above", e,
                lambda e=e: bounds.tail_bound("oneway_vanishing", dA=dA, dB=dB, s=cfg.rank, epsilon=e),
            )
        )
    return checks


# one_copy


def _one_copy_trial(cfg, seed):
    dA, dB = cfg.dims
    r = Register.mixed(random_mixed(dA * dB, cfg.rank, seed.child(0)), (dA, dB))
    w = one_copy_distillable_search(r, restarts=cfg.restarts, seed=seed.child(1))
    npt, lmin = is_npt(r)
    return [
        ("one_copy_found", float(w.distillable), ""),
        ("one_copy_negativity", w.negativity, ""),
        ("npt", float(npt), ""),
        ("purity_separable", float(purity_separable(r)), ""),
    ]


def _one_copy_analyse(cfg, cols, _labels):
    dA, dB = cfg.dims
    found = cols["one_copy_found"]
    sep, npt = cols["purity_separable"], cols["npt"]
    bad = int(np.sum((sep > 0) & (npt > 0)))
    return [
        # a found witness is genuine, so the found fraction never overstates the tail
        _tail_check(
            "one_copy", found, 0.5, "above", None,
            lambda: bounds.tail_bound("one_copy", dA=dA, dB=dB, s=cfg.rank),
        ),
        {"check": "purity_separable_implies_ppt", "type": "count", "exceptions": bad,
         "purity_separable_fraction": float(np.mean(sep)), "verdict": "violated" if bad else "holds"},
    ]


# multiparty_cuts


def _multi_validate(cfg):
    _need(len(cfg.dims) == 2, f"{cfg.scenario} needs dims [n, d]")
    n, d = cfg.dims
    _need(n >= 2 and d >= 2, f"{cfg.scenario} needs n >= 2 and d >= 2")
    _need(d**n <= 2**16, f"{cfg.scenario}: d^n = {d**n} is beyond the supported 2^16")


def _cuts(n: int) -> list[tuple[int, ...]]:
    """One representative per bipartition, the side containing party 0 unless
    the other side is smaller."""
    out = []
    for k in range(1, n // 2 + 1):
        for X in itertools.combinations(range(n), k):
            if 2 * k == n and 0 not in X:
                continue
            out.append(X)
    return out


def _multi_trial(cfg, seed):
    n, d = cfg.dims
    v = haar_pure(d**n, seed)
    ld = math.log2(d)
    slack = math.inf
    for X in _cuts(n):
        x = len(X)
        rho = reduced_density(v, [d] * n, list(X))
        s = spectrum_entropy(eigvalsh(rho))
        slack = min(slack, s - (x * ld - d ** (2 * x - n) / LN2))
    return [("min_cut_slack", slack, "")]


def _multi_analyse(cfg, cols, _labels):
    n, d = cfg.dims
    x = cols["min_cut_slack"]
    return [
        _tail_check(
            "multiparty_cut", x, -a, "below", a,
            lambda a=a: bounds.tail_bound("multiparty_cut", n=n, d=d, alpha=a),
        )
        for a in cfg.deviations
    ]


# cor17


def _cor17_validate(cfg):
    _multi_validate(cfg)
    n = cfg.dims[0]
    _need(len(cfg.pair) == 2 and len(set(cfg.pair)) == 2 and all(0 <= p < n for p in cfg.pair),
          "pair must name two distinct parties (0-indexed)")


def _cor17_trial(cfg, seed):
    n, d = cfg.dims
    phi = Register.pure(haar_pure(d**n, seed.child(0)), (d,) * n)
    outs, _ = multiparty_distill(phi, cfg.pair)
    rows = [("outcome_entanglement", o.entanglement, "-".join(map(str, o.label))) for o in outs]
    # equally many fresh pair states as reference
    for k in range(d ** (n - 2)):
        rows.append(("haar_reference", _entanglement(haar_pure(d * d, seed.child(1, k)), d, d), ""))
    return rows


def _cor17_analyse(cfg, cols, _labels):
    n, d = cfg.dims
    x, ref = cols["outcome_entanglement"], cols["haar_reference"]
    ks = stats.ks_2samp(x, ref)
    floor = float(math.log2(d) - 1 / LN2)
    med = float(np.median(x))
    return [
        {"check": "outcome_vs_haar_ks", "type": "ks", "statistic": float(ks.statistic),
         "pvalue": float(ks.pvalue), "level": 1e-3,
         "verdict": "violated" if ks.pvalue < 1e-3 else "holds"},
        {"check": "outcome_median_floor", "type": "median", "median": med, "target": floor,
         "verdict": "holds" if med >= floor else "violated"},
    ]


# locking


def _locking_validate(cfg):
    _need(len(cfg.dims) == 1 and 1 <= cfg.dims[0] <= 4, "locking needs dims [n] with 1 <= n <= 4")
    _need(0 <= cfg.traced <= cfg.dims[0], "locking needs 0 <= traced <= n")


def _locking_trial(cfg, seed):
    row = locking_trial(cfg.dims[0], cfg.traced, seed, cfg.rank, cfg.restarts, cfg.iters)
    return [
        ("eof_before", row.before, ""),
        ("eof_after", row.after, ""),
        ("gap", row.gap, ""),
        ("after_purity_separable", float(row.after_purity_separable), ""),
    ]


def _no_checks(cfg, cols, _labels):
    return []


# sdc


def _sdc_validate(cfg):
    _bipartite(cfg, need_rank=True)
    dA, dB = cfg.dims
    _need(cfg.rank <= dA * dB, "sdc needs rank <= dA*dB")
    _need(cfg.targets >= 1, "sdc needs targets >= 1")


def _sdc_trial(cfg, seed):
    dA, dB = cfg.dims
    V = random_subspace(dA, dB, cfg.rank, seed.child(0))
    cert = certify_subspace(V, "minimize", seed=seed.child(1), restarts=cfg.restarts, iters=cfg.iters)
    targets = []
    for k in range(cfg.targets):
        c = haar_pure(cfg.rank, seed.child(2, k))
        targets.append(Register.pure(V.columns @ c, (dA, dB)))
    # a target less entangled than the minimiser's estimate tightens it
    floor = min([cert.min_entanglement_estimate] + [_entanglement(t.data, dA, dB) for t in targets])
    delta = max(math.log2(dA) - floor, 0.0)
    rows = [("deficit", delta, "")]
    for k, t in enumerate(targets):
        _, f_close = closest_max_entangled(t)
        _, f_run = sdc_run(V, t)
        rows.append(("closest_margin", f_close - (1 - math.sqrt(2 * delta)), str(k)))
        rows.append(("protocol_margin", f_run - (1 - 2 * math.sqrt(delta)), str(k)))
    return rows


def _sdc_analyse(cfg, cols, _labels):
    out = []
    for name in ("closest_margin", "protocol_margin"):
        bad = int(np.sum(cols[name] < -1e-9))
        out.append({"check": name, "type": "count", "exceptions": bad, "min": float(np.min(cols[name])),
                    "verdict": "violated" if bad else "holds"})
    return out


SCENARIOS: dict[str, Scenario] = {
    "page_mean": Scenario(_bipartite, _entropy_trial, _page_analyse),
    "purity_mean": Scenario(_purity_validate, _purity_trial, _purity_analyse),
    "entropy_tail": Scenario(_bipartite, _entropy_trial, _entropy_tail_analyse),
    "eig_tail": Scenario(_bipartite, _eig_trial, _eig_analyse),
    "projector_tail": Scenario(_projector_validate, _projector_trial, _projector_analyse),
    "mutual_info": Scenario(lambda c: _bipartite(c, True), _mi_trial, _mi_analyse),
    "oneway": Scenario(lambda c: _bipartite(c, True), _oneway_trial, _oneway_analyse),
    "one_copy": Scenario(lambda c: _bipartite(c, True), _one_copy_trial, _one_copy_analyse),
    "multiparty_cuts": Scenario(_multi_validate, _multi_trial, _multi_analyse),
    "cor17": Scenario(_cor17_validate, _cor17_trial, _cor17_analyse),
    "locking": Scenario(_locking_validate, _locking_trial, _no_checks),
    "sdc": Scenario(_sdc_validate, _sdc_trial, _sdc_analyse),
}


# runner ---------------------------------------------------------------------


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    records: list[tuple[int, str, float, str]]
    summary: dict[str, dict]
    checks: list[dict]
    wall_time: float = 0.0

    @property
    def violated(self) -> bool:
        return any(c.get("verdict") == "violated" for c in self.checks)

    def column(self, statistic: str) -> np.ndarray:
        return np.array([r[2] for r in self.records if r[1] == statistic])

    def to_json_dict(self) -> dict:
        """Report body; excludes worker count and wall time so that it is
        byte-identical across reruns."""
        return {
            "config": self.config.echo(),
            "summary": self.summary,
            "checks": self.checks,
            "status": "violated" if self.violated else "ok",
        }

    def samples_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "statistic", "value", "label"])
        for t, name, val, label in self.records:
            w.writerow([t, name, repr(float(val)), label])
        return buf.getvalue()

    def write(self, out_dir: str | os.PathLike) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / "report.json", out / "samples.csv", out / "run_meta.json"]
        paths[0].write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")
        paths[1].write_text(self.samples_csv())
        paths[2].write_text(
            json.dumps({"workers": self.config.workers, "wall_time": self.wall_time}, indent=2) + "\n"
        )
        return paths


def _run_chunk(cfg: ExperimentConfig, trials: Sequence[int]) -> list[tuple[int, str, float, str]]:
    scen = SCENARIOS[cfg.scenario]
    out = []
    with threadpool_limits(1):
        for t in trials:
            for name, val, label in scen.trial(cfg, SeedSpec(cfg.master_seed, t)):
                out.append((t, name, float(val), label))
    return out


def run_monte_carlo(config: ExperimentConfig) -> ExperimentReport:
    start = time.perf_counter()
    trials = range(config.trials)
    if config.workers == 1 or config.trials == 1:
        records = _run_chunk(config, trials)
    else:
        n_chunks = min(config.trials, 4 * config.workers)
        chunks = [trials[i::n_chunks] for i in range(n_chunks)]
        records = []
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for part in pool.map(_run_chunk, [config] * len(chunks), chunks):
                records.extend(part)
        records.sort(key=lambda r: r[0])  # stable: keeps within-trial order
    cols: dict[str, list] = {}
    labels: dict[str, list] = {}
    for _, name, val, label in records:
        cols.setdefault(name, []).append(val)
        labels.setdefault(name, []).append(label)
    arrays = {k: np.asarray(v) for k, v in cols.items()}
    summary = {k: _summary(v) for k, v in sorted(arrays.items())}
    checks = SCENARIOS[config.scenario].analyse(config, arrays, labels)
    return ExperimentReport(config, records, summary, checks, time.perf_counter() - start)
