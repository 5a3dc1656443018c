"""Command-line front end: ``genent <subcommand> ...``.

JSON goes to stdout unless ``--out`` names a destination. Usage errors and
invalid input exit with status 1 and a one-line diagnostic on stderr; an
experiment whose checks report a violated bound exits with status 2.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import bounds, measures
from .experiments import SCENARIOS, ExperimentConfig, run_monte_carlo
from .protocols import certify_subspace, locking_experiment, multiparty_distill, sdc_run
from .sampler import SeedSpec, haar_pure, haar_unitary, random_mixed, random_subspace
from .states import Register

PROG = "genent"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _matrix_json(m: np.ndarray) -> dict:
    inter = np.empty(2 * m.size)
    inter[0::2] = m.real.ravel()
    inter[1::2] = m.imag.ravel()
    return {"shape": list(m.shape), "entries": inter.tolist()}


def _emit(obj, out: str | None):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return repr(float(x))


# sample ---------------------------------------------------------------------


def cmd_sample(a) -> int:
    seed = SeedSpec(a.seed)
    if a.kind == "pure":
        obj = Register.pure(haar_pure(a.dims, seed), a.dims).to_json_dict()
    elif a.kind == "mixed":
        if a.rank is None:
            raise UsageError("sample --kind mixed needs --rank")
        d = int(np.prod(a.dims))
        obj = Register.mixed(random_mixed(d, a.rank, seed), a.dims).to_json_dict()
    elif a.kind == "unitary":
        if len(a.dims) != 1:
            raise UsageError("sample --kind unitary takes a single dimension")
        obj = _matrix_json(haar_unitary(a.dims[0], seed))
    else:
        if len(a.dims) != 2 or a.rank is None:
            raise UsageError("sample --kind subspace needs --dims dA,dB and --rank")
        obj = _matrix_json(random_subspace(a.dims[0], a.dims[1], a.rank, seed).columns)
        obj["ambient_dims"] = a.dims
    _emit(obj, a.out)
    return 0


# bounds ---------------------------------------------------------------------

_BOUND_PARAMS = ("dA", "dB", "s", "q", "n", "d", "k", "eta", "alpha", "epsilon",
                 "side", "form", "part", "M1", "M2", "x", "x1")


def cmd_bounds(a) -> int:
    if a.list:
        _emit({"kinds": bounds.ALL_KINDS}, a.out)
        return 0
    if a.constants:
        _emit(bounds.constants(), a.out)
        return 0
    if not a.kind:
        raise UsageError("bounds needs --kind (or --list / --constants)")
    params = {k: getattr(a, k) for k in _BOUND_PARAMS if getattr(a, k) is not None}
    _emit(bounds.evaluate(a.kind, **params).to_json_dict(), a.out)
    return 0


# measure --------------------------------------------------------------------


def _load_state(path: str) -> Register:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    try:
        return Register.loads(text)
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise ValueError(f"malformed state file {path}: {e}") from None


def cmd_measure(a) -> int:
    r = _load_state(a.state)
    cut = [p - 1 for p in a.cut] if a.cut else None
    q = a.quantity
    out: dict = {"quantity": q, "dims": list(r.dims)}
    if q == "entropy":
        out["value"] = measures.entropy(r)
    elif q == "entanglement":
        if not r.is_pure:
            raise ValueError("entanglement needs a pure state; use eof for mixed states")
        out["value"] = measures.pure_entanglement(r, cut or (0,))
    elif q == "mutual_info":
        out["value"] = measures.mutual_information(r, cut)
    elif q == "coherent_info":
        out["value"] = measures.coherent_information(r, cut)
    elif q == "npt":
        flag, lmin = measures.is_npt(r.to_mixed(), cut)
        out.update(npt=flag, min_pt_eigenvalue=lmin)
    elif q == "purity_separable":
        out["value"] = measures.purity_separable(r.to_mixed())
    elif q == "eof":
        res = measures.eof_upper_bound(r, restarts=a.restarts, iters=a.iters, seed=SeedSpec(a.seed))
        out.update(value=res.value, kind="upper_bound", restarts=res.restarts)
    elif q == "oneway":
        res = measures.oneway_info_lower_bound(r, restarts=a.restarts, iters=a.iters, seed=SeedSpec(a.seed))
        out.update(value=res.value, kind="lower_bound", restarts=res.restarts)
    elif q == "one_copy":
        w = measures.one_copy_distillable_search(r, restarts=a.restarts, seed=SeedSpec(a.seed))
        out.update(distillable=w.distillable, negativity=w.negativity)
    _emit(out, a.out)
    return 0


# subspace -------------------------------------------------------------------


def cmd_subspace(a) -> int:
    V = random_subspace(a.dA, a.dB, a.s, SeedSpec(a.seed, 0))
    cert = certify_subspace(
        V, a.mode, budget=a.budget, seed=SeedSpec(a.seed, 1), epsilon=a.epsilon,
        restarts=a.restarts, iters=a.iters,
    )
    out = cert.summary()
    out["seed"] = a.seed
    _emit(out, a.out)
    return 0


# protocol -------------------------------------------------------------------


def _write_protocol(a, header, rows, summary) -> int:
    if a.out:
        d = Path(a.out)
        d.mkdir(parents=True, exist_ok=True)
        (d / "outcomes.csv").write_text(_rows_csv(header, rows))
        (d / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    elif a.format == "csv":
        sys.stdout.write(_rows_csv(header, rows))
    else:
        _emit({"summary": summary, "rows": [dict(zip(header, r)) for r in rows]}, None)
    return 0


def cmd_distill(a) -> int:
    pair = [p - 1 for p in a.pair]
    if len(pair) != 2:
        raise UsageError("--pair takes exactly two parties, e.g. 1,2")
    if a.trials < 1 or a.n < 2 or a.d < 2:
        raise UsageError("distill needs --trials >= 1, --n >= 2 and --d >= 2")
    if a.d**a.n > 2**20:
        raise UsageError(f"d^n = {a.d**a.n} exceeds the supported 2^20")
    rows, ents, omitted = [], [], 0
    for t in range(a.trials):
        phi = Register.pure(haar_pure(a.d**a.n, SeedSpec(a.seed, t)), (a.d,) * a.n)
        outs, om = multiparty_distill(phi, pair)
        omitted += om
        for o in outs:
            label = "-".join(str(j) for j in o.label)
            rows.append([t, label, _fmt(o.probability), _fmt(o.entanglement)])
            ents.append(o.entanglement)
    e = np.asarray(ents)
    summary = {
        "n": a.n, "d": a.d, "pair": a.pair, "seed": a.seed, "trials": a.trials,
        "outcomes": len(rows), "omitted": omitted,
        "mean_entanglement": float(e.mean()), "median_entanglement": float(np.median(e)),
        "median_floor": float(np.log2(a.d) - 1 / np.log(2)),
    }
    return _write_protocol(a, ["trial", "outcome_label", "probability", "entanglement"], rows, summary)


def cmd_sdc(a) -> int:
    if a.trials < 1 or a.targets < 1:
        raise UsageError("sdc needs --trials >= 1 and --targets >= 1")
    rows, deficits = [], []
    for t in range(a.trials):
        seed = SeedSpec(a.seed, t)
        V = random_subspace(a.dA, a.dB, a.s, seed.child(0))
        cert = certify_subspace(V, "minimize", seed=seed.child(1), restarts=a.restarts)
        deficits.append(cert.deficit)
        for k in range(a.targets):
            target = Register.pure(V.columns @ haar_pure(a.s, seed.child(2, k)), (a.dA, a.dB))
            _, f = sdc_run(cert, target)
            rows.append([t, str(k), "1.0", _fmt(measures.pure_entanglement(target)), _fmt(f)])
    summary = {
        "dA": a.dA, "dB": a.dB, "s": a.s, "seed": a.seed, "trials": a.trials,
        "deficits": deficits, "min_fidelity": min(float(r[4]) for r in rows),
    }
    header = ["trial", "outcome_label", "probability", "entanglement", "fidelity"]
    return _write_protocol(a, header, rows, summary)


def cmd_locking(a) -> int:
    if a.trials < 1:
        raise UsageError("locking needs --trials >= 1")
    res = locking_experiment(a.n, a.traced, a.trials, a.seed, rank=a.rank, restarts=a.restarts)
    rows = []
    for r in res:
        rows.append([r.trial, "before", "1.0", _fmt(r.before)])
        rows.append([r.trial, "after", "1.0", _fmt(r.after)])
    gaps = np.array([r.gap for r in res])
    summary = {
        "n": a.n, "traced": a.traced, "seed": a.seed, "trials": a.trials,
        "mean_gap": float(gaps.mean()), "min_gap": float(gaps.min()), "max_gap": float(gaps.max()),
        "after_purity_separable": [r.after_purity_separable for r in res],
    }
    return _write_protocol(a, ["trial", "outcome_label", "probability", "entanglement"], rows, summary)


# experiment -----------------------------------------------------------------


def cmd_experiment(a) -> int:
    if a.action == "scenarios":
        _emit({"scenarios": sorted(SCENARIOS)}, None)
        return 0
    if not a.config:
        raise UsageError("experiment run needs a config file")
    try:
        raw = json.loads(Path(a.config).read_text())
    except json.JSONDecodeError as e:
        raise ValueError(f"config {a.config} is not valid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise ValueError("config must be a JSON object")
    if a.workers is not None:
        raw["workers"] = a.workers
    elif "workers" not in raw and os.environ.get("GENENT_WORKERS"):
        raw["workers"] = int(os.environ["GENENT_WORKERS"])
    cfg = ExperimentConfig.from_json_dict(raw)
    report = run_monte_carlo(cfg)
    if a.out:
        report.write(a.out)
    else:
        _emit(report.to_json_dict(), None)
    return 2 if report.violated else 0


# parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog=PROG, description="Generic entanglement of random states: sampling, measures, bounds, protocols.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", help="draw a random state, unitary or subspace")
    s.add_argument("--kind", choices=["pure", "mixed", "unitary", "subspace"], default="pure",
                   help="pure: uniform pure state; mixed: rank-r state from tracing a pure state; "
                        "unitary: Haar unitary; subspace: orthonormal basis of a uniform subspace")
    s.add_argument("--dims", type=_ints, required=True, help="local dimensions, e.g. 2,3")
    s.add_argument("--rank", type=int, help="rank r (mixed) or subspace dimension (subspace)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    b = sub.add_parser(
        "bounds", help="evaluate a closed-form constant, tail bound or threshold",
        description="Tail bounds: Levy concentration on the sphere (levy_mean, levy_median), reduced-state "
                    "entropy concentration (entropy_concentration), reduced-state eigenvalue concentration "
                    "(eig_concentration), projector overlap (projector_overlap), entangled subspace failure "
                    "(subspace_failure), vanishing and typical one-way information (oneway_vanishing, "
                    "oneway_value), one-copy undistillability (one_copy), all-cuts multiparty entropy "
                    "(multiparty_cut), random-state mutual information (mutual_info_tail). Thresholds: "
                    "entangled subspace dimension (subspace_dim, subspace_dim_tight), mutual information cap "
                    "(mutual_info_cap), rank regimes of the entanglement of formation (eof_high_threshold, "
                    "eof_low_threshold, separable_threshold), random mutual information level "
                    "(mutual_info_random), multiparty cut sizes (multiparty_eof), pairwise distillation floor "
                    "(cor17_floor). Also the mean subsystem entropy (page_mean_entropy).",
    )
    b.add_argument("--kind", help="bound identifier; see --list")
    b.add_argument("--list", action="store_true", help="list bound identifiers")
    b.add_argument("--constants", action="store_true", help="print the absolute constants")
    for name in ("dA", "dB", "s", "q", "n", "d", "k", "part"):
        b.add_argument(f"--{name}", type=int)
    for name in ("eta", "alpha", "epsilon", "M1", "M2", "x", "x1"):
        b.add_argument(f"--{name}", type=float)
    b.add_argument("--side", choices=["upper", "lower"])
    b.add_argument("--form", choices=["strong", "weak"])
    b.add_argument("--out")
    b.set_defaults(func=cmd_bounds)

    m = sub.add_parser("measure", help="evaluate a correlation measure on a state file")
    m.add_argument("--state", required=True, help="state JSON as written by 'sample' ('-' for stdin)")
    m.add_argument("--quantity", required=True,
                   choices=["entropy", "entanglement", "mutual_info", "coherent_info", "npt",
                            "purity_separable", "eof", "oneway", "one_copy"],
                   help="eof is an upper bound, oneway a lower bound, one_copy a witness search")
    m.add_argument("--cut", type=_ints, help="parties on the A side (1-indexed)")
    m.add_argument("--restarts", type=int, default=10)
    m.add_argument("--iters", type=int, default=200)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out")
    m.set_defaults(func=cmd_measure)

    c = sub.add_parser("subspace", help="sample a random subspace and certify its minimum entanglement",
                       description="net mode enumerates a net on the unit sphere of the subspace and subtracts "
                                   "the Lipschitz correction (a certified lower bound); minimize mode runs "
                                   "multi-start descent (an upper bound on the minimum).")
    c.add_argument("--dA", type=int, required=True)
    c.add_argument("--dB", type=int, required=True)
    c.add_argument("--s", type=int, required=True, help="subspace dimension")
    c.add_argument("--mode", choices=["net", "minimize"], default="minimize")
    c.add_argument("--epsilon", type=float, default=0.5, help="net resolution")
    c.add_argument("--budget", type=int, default=10**6, help="largest net to enumerate")
    c.add_argument("--restarts", type=int, default=20)
    c.add_argument("--iters", type=int, default=300)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_subspace)

    pr = sub.add_parser("protocol", help="simulate a constructive protocol")
    psub = pr.add_subparsers(dest="protocol", required=True, parser_class=_Parser)

    def common(q):
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--trials", type=int, default=1)
        q.add_argument("--format", choices=["json", "csv"], default="json")
        q.add_argument("--out", help="directory for outcomes.csv and summary.json")

    pd = psub.add_parser("distill", help="pairwise entanglement from a random multiparty state",
                         description="All parties outside the pair measure in the computational basis; "
                                     "reports every outcome's probability and the pair's entanglement.")
    pd.add_argument("--n", type=int, required=True, help="number of parties")
    pd.add_argument("--d", type=int, required=True, help="local dimension")
    pd.add_argument("--pair", type=_ints, default=[1, 2], help="1-indexed pair, e.g. 1,2")
    common(pd)
    pd.set_defaults(func=cmd_distill)

    ps = psub.add_parser("sdc", help="superdense coding through a random entangled subspace",
                         description="Encodes each target by a unitary on B and decodes by projecting onto "
                                     "the subspace; reports the protocol fidelity per target.")
    ps.add_argument("--dA", type=int, required=True)
    ps.add_argument("--dB", type=int, required=True)
    ps.add_argument("--s", type=int, required=True)
    ps.add_argument("--targets", type=int, default=10)
    ps.add_argument("--restarts", type=int, default=20)
    common(ps)
    ps.set_defaults(func=cmd_sdc)

    pl = psub.add_parser("locking", help="entanglement of formation before and after discarding qubits",
                         description="Random rank-s state on n+n qubits; upper bounds on the entanglement "
                                     "of formation before and after Alice discards some qubits.")
    pl.add_argument("--n", type=int, required=True, help="qubits per side")
    pl.add_argument("--traced", type=int, default=1, help="qubits Alice discards")
    pl.add_argument("--rank", type=int, help="state rank; default 4^n / n^2")
    pl.add_argument("--restarts", type=int, default=5)
    common(pl)
    pl.set_defaults(func=cmd_locking)

    e = sub.add_parser("experiment", help="run a Monte Carlo campaign from a JSON config",
                       description="Scenarios: " + ", ".join(sorted(SCENARIOS)) + ". Writes report.json, "
                                   "samples.csv and run_meta.json with --out. Exit status 2 if any check "
                                   "reports a violated bound.")
    e.add_argument("action", choices=["run", "scenarios"])
    e.add_argument("config", nargs="?")
    e.add_argument("--workers", type=int, help="worker processes (default: $GENENT_WORKERS or 1)")
    e.add_argument("--out", help="output directory")
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as e:
        print(f"{PROG}: usage error: {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"{PROG}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
