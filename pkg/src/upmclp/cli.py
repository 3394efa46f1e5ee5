"""Command line: generate, preprocess, build, solve, oracle, experiment, profile,
calibrate-radius.

Exit codes: 0 success, 1 bad arguments/config/input, 2 some experiment runs failed.
"""
from __future__ import annotations

import argparse
import itertools
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

from . import metrics
from .formulations import (PATH, CLI_KINDS, FormulationSpec, build_model, extract_solution,
                           make_generators, model_size_report)
from .instance import (FormatError, GeneratorConfig, calibrate_radius, generate_geometric,
                       normalize, parse_kv, read_instance, read_orlibrary, write_instance)
from .milp import Limits, SizeCounter, export_lp_file, solve_lp, solve_mip
from .oracle import OracleLimitError, OracleLimits, solve_upmclp_exact
from .preprocess import CONDITIONS, classify_pairs

log = logging.getLogger("upmclp")


class ConfigError(ValueError):
    pass


@contextmanager
def _sink(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _load(path: str, normalized: bool = True):
    try:
        with open(path, encoding="utf-8") as fh:
            inst = read_instance(fh, name=path)
    except OSError as exc:
        raise ConfigError(str(exc)) from None
    except FormatError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not normalized:
        return inst
    inst, nlog = normalize(inst)
    for line in nlog.lines():
        log.info("normalize: %s", line)
    return inst


def _split(text):
    if text is None:
        return None
    return [t for t in text.replace(";", ",").split(",") if t.strip()]


def _spec(args) -> FormulationSpec:
    return FormulationSpec.from_cli(args.formulation, _split(args.vi), _split(args.cuts),
                                    not args.no_preprocess)


def _kv_lines(pairs) -> str:
    return "".join(f"{k}={v}\n" for k, v in pairs)


def _ids(items) -> str:
    return ",".join(str(int(i) + 1) for i in items)


# subcommands ---------------------------------------------------------------

def cmd_generate(args):
    cfg = GeneratorConfig(n=args.n, seed=args.seed, budget_fraction=args.budget_fraction,
                          coverage_target=args.coverage_target, p_rule=args.p_rule,
                          topology="or-library" if args.orlib else "complete-geometric")
    if args.orlib:
        with open(args.orlib, encoding="utf-8") as fh:
            inst = read_orlibrary(fh, cfg, duplicates=args.duplicates)
    else:
        inst = generate_geometric(cfg)
    with _sink(args.out) as fh:
        write_instance(inst, fh)
    return 0


def cmd_preprocess(args):
    inst = _load(args.instance)
    conds = tuple(_split(args.conditions)) if args.conditions else CONDITIONS
    rep = classify_pairs(inst, conds, jobs=args.jobs)
    with _sink(args.out) as fh:
        rep.to_csv(fh)
    c = rep.counts()
    log.info("always=%d never=%d undecided=%d in %.3fs", c["AlwaysCovered"],
             c["NeverCovered"], c["Undecided"], rep.elapsed_pre)
    return 0


def _report_for(inst, spec, jobs=1):
    if spec.kind == PATH or not spec.use_preprocess:
        return None, 0.0
    rep = classify_pairs(inst, jobs=jobs)
    return rep, rep.elapsed_pre


def cmd_build(args):
    inst = _load(args.instance)
    spec = _spec(args)
    rep, _ = _report_for(inst, spec, args.jobs)
    model, _vm = build_model(inst, spec, rep)
    if args.export_lp:
        mapping = export_lp_file(model, args.export_lp)
        if mapping:
            log.info("%d variable names mangled (see header of %s)", len(mapping),
                     args.export_lp)
    with _sink(args.out) as fh:
        fh.write(_kv_lines([("formulation", spec.echo()), *model.summary().items()]))
    return 0


def cmd_solve(args):
    inst = _load(args.instance)
    spec = _spec(args)
    t0 = time.perf_counter()
    rep, t_st = _report_for(inst, spec, args.jobs)
    model, vm = build_model(inst, spec, rep)
    if args.export_lp:
        export_lp_file(model, args.export_lp)
    res = solve_mip(model, make_generators(spec.cut_generators, vm, inst),
                    Limits(time=args.time_limit))
    lines = [("status", res.status.value), ("formulation", spec.echo())]
    if res.has_solution:
        sol = extract_solution(inst, vm, res)
        lines += [("objective", repr(sol.objective)), ("bound", repr(res.bound)),
                  ("gap_pct", repr(res.gap)), ("facilities", _ids(sol.facilities)),
                  ("covered", _ids(sol.covered)),
                  ("delta", ",".join(f"{v:.9g}" for v in sol.delta))]
    lines += [("nodes", res.node_count), ("cuts", ",".join(f"{k}:{v}" for k, v in
                                                            sorted(res.cut_counts.items()))),
              ("t_st", f"{t_st:.3f}"), ("t_total", f"{time.perf_counter() - t0:.3f}")]
    with _sink(args.out) as fh:
        fh.write(_kv_lines(lines))
    return 0


def cmd_oracle(args):
    inst = _load(args.instance)
    lim = OracleLimits(max_nodes=args.max_nodes, max_paths_per_pair=args.max_paths)
    try:
        sol = solve_upmclp_exact(inst, lim)
    except OracleLimitError as exc:
        raise ConfigError(str(exc)) from None
    with _sink(args.out) as fh:
        fh.write(_kv_lines([("objective", repr(sol.objective)),
                            ("facilities", _ids(sol.facilities)),
                            ("covered", _ids(sol.covered)),
                            ("delta", ",".join(f"{v:.9g}" for v in sol.delta))]))
    return 0


def cmd_calibrate(args):
    # normalizing depends on R, so calibrate on the network as written
    inst = _load(args.instance, normalized=False)
    cal = calibrate_radius(inst, args.coverage_target, return_info=True)
    with _sink(args.out) as fh:
        fh.write(_kv_lines([("R", repr(cal.R)), ("coverage", repr(cal.coverage)),
                            ("reached", int(cal.reached))]))
    return 0


# experiments ---------------------------------------------------------------

_LIST_KEYS = {"sizes": int, "seeds": int, "budget_fractions": float, "p_rules": str,
              "coverage_targets": float, "formulations": str}


def parse_experiment(text: str) -> dict:
    try:
        kv = parse_kv(text)
    except FormatError as exc:
        raise ConfigError(str(exc)) from None
    cfg = {}
    for key, typ in _LIST_KEYS.items():
        if key not in kv:
            raise ConfigError(f"experiment config lacks {key}=")
        try:
            cfg[key] = [typ(t.strip()) for t in kv[key].split(",") if t.strip()]
        except ValueError:
            raise ConfigError(f"bad value in {key}={kv[key]}") from None
    bad = [f for f in cfg["formulations"] if f not in CLI_KINDS]
    if bad:
        raise ConfigError(f"unknown formulations {bad}")
    try:
        cfg["time_limit"] = float(kv["time_limit"]) if "time_limit" in kv else None
    except ValueError:
        raise ConfigError("time_limit must be a number") from None
    cfg["use_preprocess"] = kv.get("use_preprocess", "1") not in ("0", "false", "no")
    cfg["specs"] = {}
    for f in cfg["formulations"]:
        try:
            cfg["specs"][f] = FormulationSpec.from_cli(f, _split(kv.get(f"vi.{f}")),
                                                       _split(kv.get(f"cuts.{f}")),
                                                       cfg["use_preprocess"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    known = set(_LIST_KEYS) | {"time_limit", "use_preprocess"}
    known |= {f"{p}.{f}" for p in ("vi", "cuts") for f in cfg["formulations"]}
    extra = set(kv) - known
    if extra:
        raise ConfigError(f"unknown config keys {sorted(extra)}")
    return cfg


def _run_one(inst, inst_meta, name, spec, rep, t_st, time_limit):
    rec = metrics.RunRecord(instance=inst.name, formulation=name, spec=spec.echo(),
                            **inst_meta)
    t0 = time.perf_counter()
    try:
        use_rep = rep if spec.kind != PATH and spec.use_preprocess else None
        rec.t_st = t_st if use_rep is not None else 0.0
        model, vm = build_model(inst, spec, use_rep)
        rec.n_constraints, rec.n_vars, rec.n_binvars = (model.n_constraints, model.n_vars,
                                                        model.n_binvars)
        raw, _ = build_model(inst, spec.with_(use_preprocess=False), None, SizeCounter())
        sizes = model_size_report(raw, model)
        rec.r_c_pct, rec.r_v_pct, rec.r_bv_pct = (sizes["R_c%"], sizes["R_v%"],
                                                  sizes["R_bv%"])
        lp = solve_lp(model)
        if lp.objective is not None:
            rec.lp_value = float(lp.objective)
        res = solve_mip(model, make_generators(spec.cut_generators, vm, inst),
                        Limits(time=time_limit))
        rec.status = res.status.value
        rec.node_count = res.node_count
        if res.bound is not None:
            rec.best_bound = float(res.bound)
        if res.has_solution:
            sol = extract_solution(inst, vm, res)
            rec.best_obj = sol.objective
            rec.gap_pct = float(res.gap) if res.gap is not None else math.nan
    except Exception as exc:   # recorded in-row; the batch goes on
        rec.status = "Error"
        rec.error = f"{type(exc).__name__}: {exc}".replace("\n", " ")
    rec.t_total = rec.t_st + time.perf_counter() - t0
    return rec


def run_experiment(cfg: dict, jobs: int = 1) -> list[metrics.RunRecord]:
    tasks = []
    grid = itertools.product(cfg["sizes"], cfg["budget_fractions"], cfg["p_rules"],
                             cfg["coverage_targets"], cfg["seeds"])
    for n, frac, prule, cov, seed in grid:
        gcfg = GeneratorConfig(n=n, seed=seed, budget_fraction=frac, coverage_target=cov,
                               p_rule=prule)
        tasks.append((gcfg, dict(n=n, budget_fraction=frac, coverage_target=cov, seed=seed)))

    def per_instance(task):
        gcfg, meta = task
        inst, _ = normalize(generate_geometric(gcfg))
        inst = inst.with_params(name=f"{inst.name}-b{gcfg.budget_fraction:g}-p{gcfg.p_rule}"
                                     f"-c{gcfg.coverage_target:g}")
        meta = dict(meta, p=inst.p)
        rep = None
        t_st = 0.0
        if cfg["use_preprocess"]:
            rep = classify_pairs(inst)
            t_st = rep.elapsed_pre
        return [_run_one(inst, meta, f, cfg["specs"][f], rep, t_st, cfg["time_limit"])
                for f in cfg["formulations"]]

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            groups = list(pool.map(per_instance, tasks))
    else:
        groups = [per_instance(t) for t in tasks]
    records = [r for g in groups for r in g]
    metrics.fill_cross_gaps(records)
    return records


def cmd_experiment(args):
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_experiment(fh.read())
    except OSError as exc:
        raise ConfigError(str(exc)) from None
    if args.time_limit is not None:
        cfg["time_limit"] = args.time_limit
    records = run_experiment(cfg, args.jobs)
    with _sink(args.out) as fh:
        metrics.write_records(records, fh)
    if args.summary:
        with _sink(args.summary) as fh:
            metrics.write_rows(metrics.group_averages(records, cfg["time_limit"]), fh)
    return 2 if any(r.status == "Error" for r in records) else 0


def cmd_profile(args):
    try:
        with open(args.input, encoding="utf-8") as fh:
            records = metrics.read_records(fh)
    except OSError as exc:
        raise ConfigError(str(exc)) from None
    pts = metrics.profile_points(records)
    with _sink(args.out) as fh:
        fh.write("formulation,time,solved\n")
        for name in sorted(pts):
            for t, k in pts[name]:
                fh.write(f"{name},{t!r},{k}\n")
    return 0


# parser --------------------------------------------------------------------

def _add_model_args(p):
    p.add_argument("--instance", required=True)
    p.add_argument("--formulation", default="flowcov-gamma", choices=sorted(CLI_KINDS))
    p.add_argument("--vi", help="comma list of valid-inequality families (default per kind)")
    p.add_argument("--cuts", help="comma list of cut generators")
    p.add_argument("--no-preprocess", action="store_true")
    p.add_argument("--export-lp")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="upmclp", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("generate", help="draw a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-fraction", type=float, default=0.005)
    p.add_argument("--coverage-target", type=float, default=0.5)
    p.add_argument("--p-rule", default="1")
    p.add_argument("--orlib", help="OR-Library p-median file to take the graph from")
    p.add_argument("--duplicates", choices=("error", "last"), default="last")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("preprocess", help="classify node pairs, write the report CSV")
    p.add_argument("--instance", required=True)
    p.add_argument("--conditions", help="subset of i,ii,iii,iv")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("build", help="build a model, print its size, optionally export it")
    _add_model_args(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", help="build and solve with the built-in branch-and-bound")
    _add_model_args(p)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--seed", type=int, default=0, help="accepted for symmetry; solves are deterministic")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exact brute force for tiny instances")
    p.add_argument("--instance", required=True)
    p.add_argument("--max-nodes", type=int, default=7)
    p.add_argument("--max-paths", type=int, default=64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("experiment", help="batch runs from a key=value config")
    p.add_argument("config")
    p.add_argument("--time-limit", type=float)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--summary", help="write per-group averages here")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("profile", help="performance-profile points from a run CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("calibrate-radius", help="smallest R reaching a plain-MCLP coverage share")
    p.add_argument("--instance", required=True)
    p.add_argument("--coverage-target", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_calibrate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"upmclp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
