"""Command-line batch reports.

    orlicz-lab norm             --config cfg.json [--out report.csv]
    orlicz-lab conjugate-table  --config cfg.json
    orlicz-lab probe            [--config cfg.json]
    orlicz-lab verify-theorems  [--config cfg.json] [--seed N]
    orlicz-lab solve            --config problem.json [--tol X]

CSV output has a header row and 17 significant digits; an ``--out`` path
ending in ``.json`` gets the same rows as a JSON list.  Malformed input
exits with status 64 and one ``error: ...`` line on stderr.  Random draws
use numpy's PCG64 generator seeded with ``--seed``.
"""
import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import estimates as es
from . import hammerstein as hm
from . import nfunction as nf
from .measure import MeasureSpace, indicator, read_csv
from .modular import REPORT_TOL, char_norms, check_relations, luxemburg_norm, orlicz_norm

EXIT_USAGE = 64
COMMANDS = ("norm", "conjugate-table", "probe", "verify-theorems", "solve")


class UsageError(Exception):
    pass


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else fmt(v)
    return v


def write_rows(rows, header, out):
    if out and out.endswith(".json"):
        text = json.dumps([{k: _jsonable(r.get(k)) for k in header} for r in rows], indent=1)
        text += "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(r.get(k, "")) for k in header])
        text = buf.getvalue()
    _emit(text, out)


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_config(path, required=True):
    if path is None:
        if required:
            raise UsageError("--config is required")
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return cfg


def _space(cfg):
    if "csv" in cfg:
        return read_csv(cfg["csv"])
    if "space" not in cfg:
        raise UsageError("config needs 'space' (weights) or 'csv'")
    return MeasureSpace.from_json(cfg["space"]), None


# -- commands ---------------------------------------------------------------

NORM_HEADER = ["function", "quantity", "value", "bound", "slack", "pass"]


def cmd_norm(cfg, args):
    M = nf.from_json(cfg["nfunction"])
    space, csv_x = _space(cfg)
    functions = list(cfg.get("functions", []))
    if csv_x is not None:
        functions.insert(0, csv_x.tolist())
    indicators = cfg.get("indicators", [])
    if not functions and not indicators:
        raise UsageError("no functions or indicators to evaluate")
    lambdas = cfg.get("lambdas", [0.5, 1.0, 2.0])
    ys = cfg.get("y")
    tol = args.tol if args.tol is not None else REPORT_TOL
    rows = []
    for i, x in enumerate(functions):
        y = ys[i] if ys else None
        rep = check_relations(M, space, x, lambdas, y=y, tol=tol)
        tag = f"f{i}"
        rows.append({"function": tag, "quantity": "luxemburg", "value": rep.luxemburg})
        rows.append({"function": tag, "quantity": "orlicz", "value": rep.orlicz})
        rows.append({"function": tag, "quantity": "modular", "value": rep.modular_value})
        for c in rep.checks:
            rows.append({"function": tag, "quantity": c.name, "value": c.value,
                         "bound": c.bound, "slack": c.slack, "pass": c.passed})
    for j, cells in enumerate(indicators):
        chi, mu_d = indicator(space, cells)
        closed = char_norms(M, mu_d)
        tag = f"chi{j}"
        for key, computed in (("luxemburg", luxemburg_norm(M, space, chi)),
                              ("orlicz", orlicz_norm(M, space, chi))):
            diff = abs(computed - closed[key])
            rows.append({"function": tag, "quantity": f"char_{key}", "value": computed,
                         "bound": closed[key], "slack": tol - diff, "pass": diff <= tol})
    write_rows(rows, NORM_HEADER, args.out)
    return 0


CONJ_HEADER = ["v", "conjugate", "numeric", "abs_diff", "young_slack_at_argmax"]


def cmd_conjugate_table(cfg, args):
    M = nf.from_json(cfg["nfunction"])
    if "v" in cfg:
        v = np.asarray(cfg["v"], dtype=float)
    else:
        lo, hi, n = cfg.get("v_range", [0.01, 10.0, 25])
        v = np.geomspace(lo, hi, int(n))
    if v.size == 0 or np.any(v < 0):
        raise UsageError("v values must be nonnegative and nonempty")
    conj = M.conjugate()
    num = M.conjugate(numeric=True)
    cv, nv = conj(v), num(v)
    arg = M.deriv_inverse(v)
    young = M(arg) + cv - arg * v
    rows = [{"v": a, "conjugate": b, "numeric": c, "abs_diff": abs(b - c),
             "young_slack_at_argmax": d} for a, b, c, d in zip(v, cv, nv, young)]
    write_rows(rows, CONJ_HEADER, args.out)
    return 0


PROBE_HEADER = ["nfunction", "probe", "verdict", "value", "detail"]


def default_catalog_specs():
    return [nf.power(1.5).spec, nf.power(2).spec, nf.power(3).spec,
            nf.exp_minus_linear().spec, nf.exp_square().spec,
            nf.entropy_like().spec, nf.power_log(2).spec]


def cmd_probe(cfg, args):
    specs = cfg.get("nfunctions")
    functions = ([nf.from_json(s) for s in specs] if specs is not None
                 else [nf.NFunction(s) for s in default_catalog_specs()])
    probes = cfg.get("probes", ["delta2", "delta3", "condition4"])
    k = float(cfg.get("k", 2.0))
    rows = []
    for M in functions:
        for probe in probes:
            if probe == "delta2":
                res = nf.delta2_probe(M, u_max=float(cfg.get("delta2_u_max", 1e4)))
            elif probe == "delta3":
                res = nf.delta3_probe(M, k, u_max=float(cfg.get("delta3_u_max", 1e4)))
            elif probe == "condition4":
                res = nf.growth_condition4_probe(M, k, u_max=float(cfg.get("condition4_u_max", 1e6)))
            else:
                raise UsageError(f"unknown probe {probe!r}")
            detail = ";".join(f"{key}={fmt(val)}" for key, val in sorted(res.detail.items()))
            rows.append({"nfunction": M.name, "probe": res.probe, "verdict": res.verdict,
                         "value": res.value, "detail": detail})
    write_rows(rows, PROBE_HEADER, args.out)
    return 0


THEOREM_HEADER = ["theorem", "nfunction", "phi", "sample", "norm", "bound", "actual",
                  "slack", "pass"]


def default_suite():
    return [
        {"theorem": "theorem1", "nfunction": {"kind": "exp_minus_linear"},
         "phi": {"kind": "power", "k": 2}},
        {"theorem": "theorem1", "nfunction": {"kind": "exp_square"},
         "phi": {"kind": "power", "k": 2}},
        {"theorem": "theorem1", "nfunction": {"kind": "power", "params": {"p": 3}},
         "phi": {"kind": "power", "k": 3}},
        {"theorem": "theorem1", "nfunction": {"kind": "entropy_like"},
         "phi": {"kind": "baseline"}},
        {"theorem": "theorem2", "nfunction": {"kind": "exp_minus_linear"},
         "phi": {"kind": "exp_linear"}, "R": 2.0},
        {"theorem": "theorem2", "nfunction": {"kind": "exp_square"},
         "phi": {"kind": "exp_square"}, "R": 2.0},
        {"theorem": "theorem3", "nfunction": {"kind": "entropy_like"},
         "phi": {"kind": "power", "k": 2, "domain": "small"}},
        {"theorem": "theorem3", "nfunction": {"kind": "power_log", "params": {"p": 2}},
         "phi": {"kind": "power", "k": 3, "domain": "small"}},
        {"theorem": "theorem4", "nfunction": {"kind": "entropy_like"},
         "phi": {"kind": "ratio", "domain": "small"}, "h_fraction": 0.5},
    ]


def default_space(seed, n=64):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.2, 1.0, n)
    return MeasureSpace(w / w.sum())


def cmd_verify_theorems(cfg, args):
    suite = cfg.get("suite", default_suite())
    samples = int(cfg.get("samples", 100))
    # the space is pinned so a seed change only moves the samples
    space = MeasureSpace.from_json(cfg["space"]) if "space" in cfg else default_space(0)
    rng = np.random.default_rng(args.seed)
    rows = []
    failed = 0
    for case in suite:
        M = nf.from_json(case["nfunction"])
        phi = es.phi_from_json(case["phi"], M)
        kwargs = {k: case[k] for k in ("R", "h_fraction") if k in case}
        summary = es.sweep(case["theorem"], M, space, phi, rng, samples, **kwargs)
        for i, rep in enumerate(summary.reports):
            if not rep.applicable:
                continue
            failed += not rep.passed
            rows.append({"theorem": rep.theorem, "nfunction": M.name, "phi": phi.name,
                         "sample": i, "norm": rep.norm, "bound": rep.bound_value,
                         "actual": rep.actual, "slack": rep.slack, "pass": rep.passed})
    write_rows(rows, THEOREM_HEADER, args.out)
    if failed:
        print(f"verify-theorems: {failed} failed rows", file=sys.stderr)
        return 1
    return 0


def cmd_solve(cfg, args):
    problem = hm.HammersteinProblem.from_json(cfg)
    check = hm.check_left_inverse(problem.S, problem.T)
    if check > 1e-10:
        raise UsageError(f"S T differs from the identity (max entry error {check:.3g})")
    phi = es.phi_from_json(cfg["phi"], problem.M) if "phi" in cfg else None
    tol = args.tol if args.tol is not None else float(cfg.get("tol", 1e-10))
    result = hm.solve(problem, tol=tol, max_iter=int(cfg.get("max_iter", 200)), phi=phi,
                      seed=args.seed)
    payload = result.to_json()
    text = json.dumps(payload, indent=1, sort_keys=True, default=_jsonable) + "\n"
    _emit(text, args.out)
    return result.exit_code


HANDLERS = {
    "norm": (cmd_norm, True),
    "conjugate-table": (cmd_conjugate_table, True),
    "probe": (cmd_probe, False),
    "verify-theorems": (cmd_verify_theorems, False),
    "solve": (cmd_solve, True),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="orlicz-lab", description=__doc__.split("\n")[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON input file")
    parser.add_argument("--out", help="output path (default stdout)")
    parser.add_argument("--seed", type=int, default=0, help="PCG64 seed (default 0)")
    parser.add_argument("--tol", type=float, default=None, help="tolerance override")
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.seed < 0:
            raise UsageError("--seed must be nonnegative")
        handler, needs_config = HANDLERS[args.command]
        cfg = _load_config(args.config, required=needs_config)
        return handler(cfg, args)
    except (UsageError, ValueError, KeyError, TypeError, IndexError) as exc:
        msg = str(exc).replace("\n", " ")
        if isinstance(exc, KeyError):
            msg = f"missing field {msg}"
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
