"""Run records, cross-formulation gaps, group averages and performance profiles."""
from __future__ import annotations

import csv
import io
import math
from collections import OrderedDict, defaultdict
from dataclasses import asdict, dataclass, fields

SCHEMA = "upmclp-run/1"


@dataclass
class RunRecord:
    instance: str
    formulation: str
    spec: str = ""
    n: int = 0
    p: int = 0
    budget_fraction: float = math.nan
    coverage_target: float = math.nan
    seed: int = -1
    t_st: float = 0.0
    t_total: float = 0.0
    status: str = ""
    best_obj: float = math.nan
    best_bound: float = math.nan
    lp_value: float = math.nan
    gap_pct: float = math.nan
    gap_bs_pct: float = math.nan
    gap_lp_pct: float = math.nan
    node_count: int = 0
    n_constraints: int = 0
    n_vars: int = 0
    n_binvars: int = 0
    r_c_pct: float = math.nan
    r_v_pct: float = math.nan
    r_bv_pct: float = math.nan
    error: str = ""

    @property
    def solved(self) -> bool:
        return self.status == "Optimal"


COLUMNS = ["schema"] + [f.name for f in fields(RunRecord)]
NON_TIME = [c for c in COLUMNS if c not in ("t_st", "t_total")]


def gap_bs(bs: float, bs_t: float) -> float:
    """``(BS^t - BS) / BS^t * 100``."""
    if bs_t == 0:
        return 0.0 if bs == 0 else math.nan
    return (bs_t - bs) / bs_t * 100.0


def gap_lp(lp: float, bs_t: float) -> float:
    """``(LP - BS^t) / BS^t * 100``."""
    if bs_t == 0:
        return 0.0 if lp == 0 else math.nan
    return (lp - bs_t) / bs_t * 100.0


def fill_cross_gaps(records) -> None:
    """Set the BS^t based columns per instance, in place."""
    by_inst = defaultdict(list)
    for r in records:
        by_inst[r.instance].append(r)
    for group in by_inst.values():
        vals = [r.best_obj for r in group if not math.isnan(r.best_obj)]
        if not vals:
            continue
        bs_t = max(vals)
        for r in group:
            if not math.isnan(r.best_obj):
                r.gap_bs_pct = gap_bs(r.best_obj, bs_t)
            if not math.isnan(r.lp_value):
                r.gap_lp_pct = gap_lp(r.lp_value, bs_t)


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return repr(v) if v != int(v) or abs(v) >= 1e15 else f"{v:.1f}"
    return str(v)


def write_records(records, sink=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        d = asdict(r)
        w.writerow([SCHEMA] + [_fmt(d[c]) for c in COLUMNS[1:]])
    text = buf.getvalue()
    if sink is not None:
        sink.write(text)
    return text


def read_records(src) -> list[RunRecord]:
    text = src if isinstance(src, str) else src.read()
    rows = list(csv.DictReader(io.StringIO(text)))
    types = {f.name: f.type for f in fields(RunRecord)}
    out = []
    for row in rows:
        if row.get("schema") != SCHEMA:
            raise ValueError(f"unsupported schema {row.get('schema')!r}")
        kw = {}
        for name, typ in types.items():
            raw = row.get(name, "")
            if typ in ("float", float):
                kw[name] = float(raw) if raw != "" else math.nan
            elif typ in ("int", int):
                kw[name] = int(float(raw)) if raw != "" else 0
            else:
                kw[name] = raw
        out.append(RunRecord(**kw))
    return out


GROUP_KEYS = ("n", "budget_fraction", "p", "coverage_target", "formulation")
AVG_FIELDS = ("t_total", "gap_pct", "gap_bs_pct", "gap_lp_pct", "node_count",
              "r_c_pct", "r_v_pct", "r_bv_pct")


def group_averages(records, time_limit: float | None) -> list[dict]:
    """Mean per table row. Runs that hit a limit count at ``time_limit``."""
    groups: OrderedDict = OrderedDict()
    for r in records:
        groups.setdefault(tuple(getattr(r, k) for k in GROUP_KEYS), []).append(r)
    out = []
    for key, rs in groups.items():
        row = dict(zip(GROUP_KEYS, key))
        row["runs"] = len(rs)
        row["solved"] = sum(r.solved for r in rs)
        for f in AVG_FIELDS:
            vals = []
            for r in rs:
                v = float(getattr(r, f))
                if f == "t_total" and not r.solved and time_limit is not None:
                    v = time_limit
                if not math.isnan(v):
                    vals.append(v)
            row[f] = sum(vals) / len(vals) if vals else math.nan
        out.append(row)
    return out


def write_rows(rows, sink=None) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(v) for k, v in row.items()})
    text = buf.getvalue()
    if sink is not None:
        sink.write(text)
    return text


def profile_points(records) -> dict[str, list[tuple[float, int]]]:
    """Per formulation, ``(t, #solved within t)`` steps; equal times merge."""
    if not records:
        raise ValueError("no records to profile")
    times = defaultdict(list)
    for r in records:
        times.setdefault(r.formulation, [])
        if r.solved:
            times[r.formulation].append(r.t_total)
    out = {}
    for name, ts in times.items():
        pts = []
        count = 0
        for t in sorted(ts):
            count += 1
            if pts and pts[-1][0] == t:
                pts[-1] = (t, count)
            else:
                pts.append((t, count))
        out[name] = pts
    return out
