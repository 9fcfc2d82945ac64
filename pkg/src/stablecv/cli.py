"""Command-line entry point: ``stablecv <subcommand> [options]``.

Options can also come from ``--config FILE`` (UTF-8 ``key=value`` lines,
``#`` comments); explicit flags win.  Tables go to stdout, and ``--out``
writes a JSON artifact carrying the resolved configuration.

Exit codes: 0 success, 1 a reported check failed, 2 usage error,
3 data error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .bounds import (BoundInputs, corrected_upper_bound, kfold_lower_bounds,
                     kfold_upper_bound, model_selection_bound)
from .data_io import CsvSchema, load_csv, split_indices, standardize
from .errors import ConstructionError, DataError, FitError, FoldError
from .estimators import decompose
from .folds import build_kfold
from .learners import LearnerSpec
from .oracles import (LinearGaussian, RermConstruction, RermDistribution, SgdConstruction,
                      SgdDistribution, make_oracle,
                      rerm_exact_report, rerm_simulated_report, sgd_bias_report)
from .parallel import default_workers
from .rng import derive_seed
from .selection import ModelGrid, build_grid, select
from .stability import declared_ceiling, probe_randomized_stability, probe_stability

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3

log = logging.getLogger("stablecv")


class UsageError(Exception):
    pass


# -- helpers -------------------------------------------------------------------

def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _int_list(text):
    return [int(v) for v in str(text).split(",") if v.strip()]


def _float_list(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def format_table(headers, rows) -> str:
    cells = [[str(h) for h in headers]] + [[_fmt(v) for v in r] for r in rows]
    widths = [max(len(r[j]) for r in cells) for j in range(len(headers))]
    lines = ["  ".join(c.rjust(w) if j else c.ljust(w) for j, (c, w) in enumerate(zip(r, widths)))
             for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _fmt(v):
    if isinstance(v, bool):
        return "PASS" if v else "FAIL"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6f}"
    return str(v)


def _check(name, ok, detail=""):
    return {"check": name, "passed": bool(ok), "detail": detail}


def _config_of(args) -> dict:
    skip = {"func", "config", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, result: dict, checks: list, table: str) -> int:
    passed = all(c["passed"] for c in checks)
    config = _config_of(args)
    print(f"# stablecv {__version__} {args.command} "
          + " ".join(f"{k}={v}" for k, v in config.items() if v is not None))
    print(table)
    if checks:
        print()
        print(format_table(["check", "result", "detail"],
                           [[c["check"], c["passed"], c["detail"]] for c in checks]))
    if args.out:
        doc = {"version": __version__, "command": args.command, "config": config,
               "result": result, "checks": checks, "passed": passed}
        Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n",
                                  encoding="utf-8")
    return EXIT_OK if passed else EXIT_CHECK


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


# -- subcommands ---------------------------------------------------------------

def cmd_counterexample(args) -> int:
    _require(args, "n", "k")
    if args.construction == "rerm":
        _require(args, "m")
        c = RermConstruction(args.m, args.n, args.k)
        exact = rerm_exact_report(c)
        sim = rerm_simulated_report(c, seed=args.seed, workers=args.workers)
        rows = [[f, getattr(exact, f), getattr(sim, f)]
                for f in ("kfold_bias", "corrected_bias", "lower_bound", "upper_bound",
                          "full_risk", "fold_risk", "beta_full")]
        checks = [
            _check("lower <= bias <= upper", exact.lower_bound <= sim.kfold_bias <= exact.upper_bound,
                   f"[{exact.lower_bound:.6f}, {exact.upper_bound:.6f}]"),
            _check("measured bias = closed form (1e-9)", abs(sim.kfold_bias - exact.kfold_bias) <= 1e-9,
                   f"diff {abs(sim.kfold_bias - exact.kfold_bias):.2e}"),
            _check("corrected bias = 0 (1e-12)", abs(sim.corrected_bias) <= 1e-12,
                   f"{sim.corrected_bias:.2e}"),
        ]
        table = format_table(["quantity", "closed form", "measured"], rows)
        return _emit(args, {"exact": exact.to_dict(), "measured": sim.to_dict()}, checks, table)

    _require(args, "t", "replicates")
    c = SgdConstruction(args.m if args.m is not None else 10.0, args.n, args.k, args.t,
                        p_plus=args.p_plus)
    rep = sgd_bias_report(c, args.replicates, seed=args.seed)
    se = rep.expected_bias_se
    rows = [
        ["E[cv - R] (MC)", rep.expected_bias_mc, se],
        ["E|cv - R| (MC)", rep.abs_error_mc, rep.abs_error_se],
        ["E[corrected - R] (MC)", rep.corrected_bias_mc, rep.corrected_bias_se],
        ["log(K/(K-1))/3", rep.expected_bias_closed_form, ""],
        ["(2p-1)^2 log(K/(K-1))", rep.expected_bias_exact, ""],
        ["stability bound 3 sum(alpha)/(n-1)", rep.stability_bound, ""],
    ]
    checks = [
        _check("|E[cv - R]| within 3 s.e. of log(K/(K-1))/3",
               abs(abs(rep.expected_bias_mc) - rep.expected_bias_closed_form) <= 3 * se,
               f"{abs(rep.expected_bias_mc):.6f} vs {rep.expected_bias_closed_form:.6f} (s.e. {se:.6f})"),
        _check("|E[cv - R]| > log(K/(K-1))/3 - 3 s.e.",
               abs(rep.expected_bias_mc) > rep.lower_bound - 3 * se, ""),
        _check("E[cv - R] within 3 s.e. of (2p-1)^2 log(K/(K-1))",
               abs(rep.expected_bias_mc - rep.expected_bias_exact) <= 3 * se, ""),
        _check("E|cv - R| >= log(K/(K-1))/3", rep.abs_error_mc >= rep.lower_bound, ""),
    ]
    table = format_table(["quantity", "value", "s.e."], rows)
    return _emit(args, rep.to_dict(), checks, table)


def _parse_reference(text):
    """``"3:74.198,68.958;5:70.1,65.2"`` -> ``{3: (74.198, 68.958), ...}``."""
    out = {}
    for part in filter(None, (p.strip() for p in str(text).split(";"))):
        k, vals = part.split(":")
        a, b = _float_list(vals)
        out[int(k)] = (a, b)
    return out


def _grid_from_args(args, base):
    if args.grid_values:
        return ModelGrid.from_values(base, _float_list(args.grid_values))
    a, b, step = _float_list(args.grid)
    return build_grid(base, a, b, step)


def _base_spec(args) -> LearnerSpec:
    return LearnerSpec(args.learner, regularization=args.lam, seed=args.seed,
                       kernel_scale=args.kernel_scale, passes=args.passes,
                       fit_intercept=args.fit_intercept)


def cmd_select(args) -> int:
    _require(args, "csv")
    task = "classification" if args.learner == "hinge_sgd" else "regression"
    target = args.target if args.target is not None else -1
    schema = CsvSchema(has_header=args.header, target_column=target, task=task,
                       positive_label=args.positive_label)
    data = load_csv(args.csv, schema)
    grid = _grid_from_args(args, _base_spec(args))
    ks = _int_list(args.k)
    reference = _parse_reference(args.reference) if args.reference else {}
    name = args.dataset_name or Path(args.csv).stem
    rows, result, checks = [], [], []
    for k in ks:
        runs = []
        for s in range(args.seeds):
            tr_idx, te_idx = split_indices(len(data), args.test_fraction, derive_seed(args.seed, s, 0))
            train, test = data.subset(tr_idx), data.subset(te_idx)
            scheme = build_kfold(len(train), k, derive_seed(args.seed, s, 1), truncate=args.truncate)
            if scheme.dropped:
                train = train.subset(np.arange(scheme.n))
            if args.standardize:
                train, test, _ = standardize(train, test)
            res = select(grid, train, scheme, test, workers=args.workers)
            runs.append(res)
        std = [r.test_risk_standard for r in runs]
        corr = [r.test_risk_corrected for r in runs]
        if len(runs) > 1:
            se_s = float(np.std(std, ddof=1) / math.sqrt(len(runs)))
            se_c = float(np.std(corr, ddof=1) / math.sqrt(len(runs)))
        else:
            se_s, se_c = runs[0].test_se_standard, runs[0].test_se_corrected
        m_s, m_c = math.fsum(std) / len(std), math.fsum(corr) / len(corr)
        row = [name, k, f"{m_s:.4f} ({se_s:.4f})", f"{m_c:.4f} ({se_c:.4f})"]
        if reference:
            ref = reference.get(k)
            row.append(f"{ref[0]:g} / {ref[1]:g}" if ref else "")
        rows.append(row)
        result.append({"k": k, "standard": m_s, "standard_se": se_s, "corrected": m_c,
                       "corrected_se": se_c, "runs": [r.to_dict() for r in runs],
                       "reference": list(reference[k]) if k in reference else None})
    headers = ["dataset", "K", "K-fold", "corrected K-fold"] + (["reference (K-fold / corrected)"] if reference else [])
    return _emit(args, {"dataset": name, "rows": result, "grid": grid.to_dict()}, checks,
                 format_table(headers, rows))


def cmd_bounds(args) -> int:
    _require(args, "n", "k")
    inp = BoundInputs(args.n, args.k, args.delta, args.l, args.c, args.m, args.models)
    res = {
        "kfold_upper_bound": kfold_upper_bound(inp),
        "corrected_upper_bound": corrected_upper_bound(inp, "constant"),
        "bias_floor_c_log": args.c * math.log(args.k / (args.k - 1)),
    }
    if args.m is not None:
        res["model_selection_bound"] = model_selection_bound(inp)
        low = kfold_lower_bounds(inp)
        res["lower_bound_rerm"] = low["rerm"]
        res["lower_bound_sgd"] = low["sgd"]
    consts = f"C={args.c:g} L={args.l:g} n={args.n} K={args.k} delta={args.delta:g}"
    extra = {}
    if args.m is not None:
        extra = {"model_selection_bound": f" M={args.m:g} models={args.models}",
                 "lower_bound_rerm": f" M={args.m:g}"}
    rows = [[k, v, consts + extra.get(k, "")] for k, v in res.items()]
    return _emit(args, res, [], format_table(["bound", "value", "constants"], rows))


def _sampler_and_spec(args):
    fam = args.family
    if fam == "rerm":
        _require(args, "m")
        spec = LearnerSpec("rerm1d", lambda_schedule="rerm_log", m_bound=args.m,
                           stability_constant=2.0)
        return RermDistribution(args.m), spec
    if fam == "sgd":
        return SgdDistribution(args.p_plus), LearnerSpec("sgd_quadratic", sgd_steps=args.t or 10,
                                                          seed=args.seed)
    return LinearGaussian(args.d, args.sigma), _base_spec(args)


def cmd_probe(args) -> int:
    _require(args, "sizes")
    sizes = _int_list(args.sizes)
    sampler, spec = _sampler_and_spec(args)
    kw = dict(trials=args.trials, eval_points=args.eval_points, seed=args.seed,
              removals=args.removals, workers=args.workers)
    if spec.stochastic:
        prof = probe_randomized_stability(spec, sampler, sizes, inner_reps=args.inner_reps, **kw)
    else:
        prof = probe_stability(spec, sampler, sizes, **kw)
    checks = []
    for e in prof.entries:
        ceiling = declared_ceiling(spec, e.n_train)
        if ceiling is not None:
            checks.append(_check(f"beta_hat <= ceiling + 3 s.e. at n_T={e.n_train}",
                                 e.beta_hat <= ceiling + 3 * e.se, f"ceiling {ceiling:.6f}"))
    if args.csv_out:
        Path(args.csv_out).write_text(prof.to_csv(), encoding="utf-8")
    fe = prof.fit_exponent
    table = prof.to_csv().rstrip("\n") + f"\nfit_exponent: {'n/a' if fe is None else f'{fe:.4f}'}"
    return _emit(args, prof.to_dict(), checks, table)


def cmd_diagnose(args) -> int:
    _require(args, "n", "k")
    seed = args.seed
    if args.construction == "rerm":
        _require(args, "m")
        c = RermConstruction(args.m, args.n, args.k)
        spec, oracle = c.spec(), make_oracle(c)
        data = c.distribution().sample(args.n, derive_seed(seed, 0))
    elif args.construction == "sgd":
        c = SgdConstruction(args.m if args.m is not None else 10.0, args.n, args.k, args.t or 10)
        spec, oracle = c.spec(derive_seed(seed, 1)), make_oracle(c)
        data = c.distribution().sample(args.n, derive_seed(seed, 0))
    else:
        dist = LinearGaussian(args.d, args.sigma)
        spec, oracle = _base_spec(args), make_oracle("linear_gaussian", {"d": args.d, "sigma": args.sigma})
        data = dist.sample(args.n, derive_seed(seed, 0))
    dec = decompose(spec, data, build_kfold(args.n, args.k, derive_seed(seed, 2)), oracle,
                    workers=args.workers)
    rows = [[k, v] for k, v in dec.to_dict().items() if not isinstance(v, list)]
    checks = [
        _check("standard identity (1e-9)", abs(dec.standard_residual()) <= 1e-9,
               f"residual {dec.standard_residual():.2e}"),
        _check("corrected identity (1e-9)", abs(dec.corrected_residual()) <= 1e-9,
               f"residual {dec.corrected_residual():.2e}"),
    ]
    return _emit(args, dec.to_dict(), checks, format_table(["component", "value"], rows))


# -- parser ----------------------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=default_workers())


def _learner_args(p):
    p.add_argument("--learner", default="ridge",
                   choices=["ridge", "kernel_ridge_sigmoid", "hinge_sgd", "rerm1d"])
    p.add_argument("--lam", type=float, default=1.0, help="regularization (single model)")
    p.add_argument("--kernel-scale", type=float, default=None)
    p.add_argument("--passes", type=int, default=5)
    p.add_argument("--fit-intercept", type=_bool, nargs="?", const=True, default=False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stablecv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__} ({kernels.BACKEND} kernels)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("counterexample", help="bias of the RERM or SGD construction")
    p.add_argument("construction", choices=["rerm", "sgd"])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=float)
    p.add_argument("--t", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--p-plus", type=float, default=2 / 3)
    _common(p)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("select", help="grid search with standard vs corrected K-fold")
    p.add_argument("--csv")
    p.add_argument("--target", help="target column name or index (default: last)")
    p.add_argument("--header", type=_bool, nargs="?", const=True, default=True)
    p.add_argument("--positive-label")
    p.add_argument("--dataset-name")
    p.add_argument("--grid", default="0.1,100,0.1", help="a,b,step")
    p.add_argument("--grid-values", help="explicit comma-separated lambdas")
    p.add_argument("--k", default="3", help="comma-separated fold counts")
    p.add_argument("--seeds", type=int, default=1, help="number of random splits")
    p.add_argument("--test-fraction", type=float, default=1 / 3)
    p.add_argument("--truncate", type=_bool, nargs="?", const=True, default=False)
    p.add_argument("--standardize", type=_bool, nargs="?", const=True, default=True)
    p.add_argument("--reference", help='reference rows, e.g. "3:74.198,68.958"')
    _learner_args(p)
    _common(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("bounds", help="evaluate the error bounds")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--l", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--m", type=float)
    p.add_argument("--models", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("probe", help="measure leave-one-out stability")
    p.add_argument("--family", default="linear_gaussian", choices=["linear_gaussian", "rerm", "sgd"])
    p.add_argument("--sizes")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--eval-points", type=int, default=64)
    p.add_argument("--removals", type=int)
    p.add_argument("--inner-reps", type=int, default=64)
    p.add_argument("--d", type=int, default=5)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--m", type=float)
    p.add_argument("--t", type=int)
    p.add_argument("--p-plus", type=float, default=2 / 3)
    p.add_argument("--csv-out", help="also write the profile CSV here")
    _learner_args(p)
    _common(p)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("diagnose", help="error decomposition against a true-risk oracle")
    p.add_argument("--construction", default="rerm", choices=["rerm", "sgd", "linear_gaussian"])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=float)
    p.add_argument("--t", type=int)
    p.add_argument("--d", type=int, default=5)
    p.add_argument("--sigma", type=float, default=1.0)
    _learner_args(p)
    _common(p)
    p.set_defaults(func=cmd_diagnose)
    return parser


def _subparser(parser, name):
    return parser._subparsers._group_actions[0].choices[name]


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            values = read_config(args.config)
        except OSError as exc:
            parser.error(f"cannot read config: {exc}")
        except UsageError as exc:
            parser.error(str(exc))
        sub = _subparser(parser, args.command)
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(values) - known)
        if unknown:
            parser.error(f"unknown config key(s): {', '.join(unknown)}")
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    return parser, args


def main(argv=None) -> int:
    parser, args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"stablecv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FoldError, ConstructionError, ValueError) as exc:
        if isinstance(exc, DataError):
            print(f"stablecv: data error: {exc}", file=sys.stderr)
            return EXIT_DATA
        print(f"stablecv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"stablecv: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FitError as exc:
        where = f" (fold {exc.fold})" if exc.fold is not None else ""
        print(f"stablecv: fit failed{where}: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
