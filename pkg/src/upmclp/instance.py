"""Problem instances: normalization, random generation, file formats.

Canonical text format (1-based node labels, ``#`` starts a comment line)::

    UPMCLP 1
    NODES n
    WEIGHTS w_1 ... w_n
    EDGES m
    k q l u c          (m lines)
    PARAMS p R B

Reals are written with 9 significant digits.
"""
from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import IO, Callable

import numpy as np

from .graph import Network, shortest_distances

FORMAT_HEADER = "UPMCLP 1"
# relative slack for the two normalization checks; files keep 9 digits
NORM_RTOL = 1e-7


@dataclass(frozen=True, eq=False)
class Instance:
    net: Network
    weights: np.ndarray
    p: int
    R: float
    B: float
    name: str = ""

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if w.shape != (self.net.n,):
            raise ValueError(f"expected {self.net.n} weights, got {w.shape}")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if not 1 <= self.p <= self.net.n:
            raise ValueError(f"p={self.p} outside [1, n={self.net.n}]")
        if not self.R > 0:
            raise ValueError("coverage radius must be positive")
        if self.B < 0:
            raise ValueError("budget must be nonnegative")

    @property
    def n(self) -> int:
        return self.net.n

    def with_params(self, **kw) -> "Instance":
        return replace(self, **kw)


@dataclass
class NormalizationLog:
    capped: list = field(default_factory=list)    # (edge, old u, new u)
    deleted: list = field(default_factory=list)   # (edge, k, q, l, u)

    @property
    def changed(self) -> bool:
        return bool(self.capped or self.deleted)

    def lines(self) -> list[str]:
        out = [f"cap u on edge {e}: {a:.9g} -> {b:.9g}" for e, a, b in self.capped]
        out += [f"delete edge {e} [{k + 1},{q + 1}]: l-u={l - u:.9g} > R"
                for e, k, q, l, u in self.deleted]
        return out


def _cap_exceeds(c, u, B) -> bool:
    return c * u > B * (1 + NORM_RTOL) + 1e-12


def _long_edge(l, u, R) -> bool:
    return l - u > R * (1 + NORM_RTOL) + 1e-12


def is_normalized(inst: Instance) -> bool:
    net = inst.net
    for _k, _q, l, u, c in net.edges():
        if _cap_exceeds(c, u, inst.B) or _long_edge(l, u, inst.R):
            return False
    return True


def normalize(inst: Instance) -> tuple[Instance, NormalizationLog]:
    """Cap ``u`` at ``B/c`` where ``c u > B``, then drop edges with ``l - u > R``.

    Capping first makes the map idempotent: a second pass finds nothing to do.
    Edge indices in the log refer to the input instance.
    """
    log = NormalizationLog()
    kept = []
    for e, (k, q, l, u, c) in enumerate(inst.net.edges()):
        if _cap_exceeds(c, u, inst.B):
            new_u = inst.B / c
            log.capped.append((e, u, new_u))
            u = new_u
        if _long_edge(l, u, inst.R):
            log.deleted.append((e, k, q, l, u))
            continue
        kept.append((k, q, l, u, c))
    if not log.changed:
        return inst, log
    return replace(inst, net=inst.net.with_edges(kept)), log


def compute_bmax(inst: Instance) -> float:
    """Sum of the ``n - p`` largest products ``c_e u_e``."""
    prod = np.sort(inst.net.cost * inst.net.max_reduction)[::-1]
    return float(prod[: max(inst.n - inst.p, 0)].sum())


def p_from_rule(rule, n: int) -> int:
    """``"1"``, ``"n/10"`` or ``"n/20"``; fractional rules round half up, minimum 1."""
    rule = str(rule).strip()
    if rule == "1":
        return 1
    if rule.startswith("n/"):
        div = int(rule[2:])
        return max(1, int(math.floor(n / div + 0.5)))
    raise ValueError(f"unknown p rule {rule!r}")


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    seed: int = 0
    topology: str = "complete-geometric"
    budget_fraction: float = 0.005
    coverage_target: float = 0.5
    p_rule: str = "1"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2")
        if self.topology not in ("complete-geometric", "or-library"):
            raise ValueError(f"unknown topology {self.topology!r}")
        for name in ("budget_fraction", "coverage_target"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _finish(net_edges, n, weights, cfg: GeneratorConfig, name, mclp_solver) -> Instance:
    """Attach p, calibrated R and budget to freshly drawn edge data."""
    p = p_from_rule(cfg.p_rule, n)
    net = Network.from_edges(n, net_edges)
    probe = Instance(net, weights, p, R=1.0, B=0.0, name=name)
    R = calibrate_radius(probe, cfg.coverage_target, mclp_solver)
    B = cfg.budget_fraction * compute_bmax(probe)
    return Instance(net, weights, p, R=R, B=B, name=name)


def _draw_edges(rng, pairs, base_len):
    m = len(pairs)
    cost = rng.integers(1, 4, size=m).astype(float)
    u = rng.uniform(0.0, 0.3 * base_len)
    length = base_len + u
    return [(k, q, float(length[e]), float(u[e]), float(cost[e]))
            for e, (k, q) in enumerate(pairs)]


def generate_geometric(cfg: GeneratorConfig, mclp_solver: Callable | None = None) -> Instance:
    """Complete graph on uniform points of ``[0, 30]^2``.

    Stream order: coordinates, weights, edge costs, edge reductions.
    """
    if cfg.topology != "complete-geometric":
        raise ValueError("generate_geometric needs topology 'complete-geometric'")
    rng = _rng(cfg.seed)
    n = cfg.n
    xy = rng.uniform(0.0, 30.0, size=(n, 2))
    w = rng.integers(1, 101, size=n).astype(float)
    pairs = [(k, q) for k in range(n) for q in range(k + 1, n)]
    pk = np.array([k for k, _ in pairs])
    pq = np.array([q for _, q in pairs])
    base = np.hypot(*(xy[pk] - xy[pq]).T)
    if np.any(base <= 0):
        raise ValueError("coincident points drawn; change the seed")
    edges = _draw_edges(rng, pairs, base)
    return _finish(edges, n, w, cfg, f"geo{n}-s{cfg.seed}", mclp_solver)


class FormatError(ValueError):
    def __init__(self, lineno: int, msg: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {msg}")


def _text(src) -> str:
    if isinstance(src, bytes):
        return src.decode("utf-8")
    if isinstance(src, str):
        return src
    data = src.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def read_orlibrary(src, cfg: GeneratorConfig, duplicates: str = "error",
                   mclp_solver: Callable | None = None) -> Instance:
    """OR-Library p-median file: header ``n m p`` then ``i j cost`` lines.

    The file's own ``p`` is ignored in favor of ``cfg.p_rule``. With
    ``duplicates="last"`` a repeated edge keeps its last cost, the convention
    of the original collection.
    """
    if duplicates not in ("error", "last"):
        raise ValueError("duplicates must be 'error' or 'last'")
    rows = []
    for lineno, raw in enumerate(io.StringIO(_text(src)), start=1):
        s = raw.strip()
        if s and not s.startswith("#"):
            rows.append((lineno, s.split()))
    if not rows:
        raise FormatError(1, "empty input")
    lineno, head = rows[0]
    try:
        n, m, _p = (int(t) for t in head)
    except ValueError:
        raise FormatError(lineno, f"malformed header {' '.join(head)!r}") from None
    if n < 2 or m < 0:
        raise FormatError(lineno, "header needs n >= 2 and m >= 0")
    if len(rows) - 1 != m:
        raise FormatError(rows[-1][0], f"header announces {m} edges, found {len(rows) - 1}")
    edges: dict = {}
    for lineno, tok in rows[1:]:
        if len(tok) != 3:
            raise FormatError(lineno, "expected 'i j cost'")
        try:
            i, j, cost = int(tok[0]), int(tok[1]), float(tok[2])
        except ValueError:
            raise FormatError(lineno, "non-numeric field") from None
        if not (1 <= i <= n and 1 <= j <= n):
            raise FormatError(lineno, f"node index out of range 1..{n}")
        if i == j:
            raise FormatError(lineno, "self-loop")
        if not cost > 0:
            raise FormatError(lineno, "edge cost must be positive")
        key = (min(i, j) - 1, max(i, j) - 1)
        if key in edges and duplicates == "error":
            raise FormatError(lineno, f"duplicate edge [{key[0] + 1},{key[1] + 1}]")
        edges.pop(key, None)
        edges[key] = cost
    rng = _rng(cfg.seed)
    w = rng.integers(1, 101, size=n).astype(float)
    pairs = list(edges)
    edge_data = _draw_edges(rng, pairs, np.array([edges[k] for k in pairs], dtype=float))
    return _finish(edge_data, n, w, cfg, f"orlib{n}-s{cfg.seed}", mclp_solver)


# canonical format --------------------------------------------------------

def _g(v: float) -> str:
    return f"{v:.9g}"


def write_instance(inst: Instance, sink: IO[str] | None = None) -> str:
    lines = [FORMAT_HEADER, f"NODES {inst.n}",
             "WEIGHTS " + " ".join(_g(w) for w in inst.weights),
             f"EDGES {inst.net.m}"]
    for k, q, l, u, c in inst.net.edges():
        lines.append(f"{k + 1} {q + 1} {_g(l)} {_g(u)} {_g(c)}")
    lines.append(f"PARAMS {inst.p} {_g(inst.R)} {_g(inst.B)}")
    text = "\n".join(lines) + "\n"
    if sink is not None:
        sink.write(text)
    return text


def read_instance(src, name: str = "") -> Instance:
    lines = []
    for lineno, raw in enumerate(io.StringIO(_text(src)), start=1):
        s = raw.strip()
        if s and not s.startswith("#"):
            lines.append((lineno, s.split()))
    it = iter(lines)

    def expect(tag, count=None):
        try:
            lineno, tok = next(it)
        except StopIteration:
            raise FormatError(lines[-1][0] if lines else 1, f"missing {tag} line") from None
        if tok[0] != tag:
            raise FormatError(lineno, f"expected {tag!r}, found {tok[0]!r}")
        if count is not None and len(tok) - 1 != count:
            raise FormatError(lineno, f"{tag} needs {count} fields, found {len(tok) - 1}")
        return lineno, tok[1:]

    try:
        lineno, tok = next(it)
    except StopIteration:
        raise FormatError(1, "empty instance file") from None
    if " ".join(tok) != FORMAT_HEADER:
        raise FormatError(lineno, f"bad header, expected {FORMAT_HEADER!r}")
    lineno, (n_s,) = expect("NODES", 1)
    n = int(n_s)
    lineno, ws = expect("WEIGHTS", n)
    weights = [float(t) for t in ws]
    lineno, (m_s,) = expect("EDGES", 1)
    m = int(m_s)
    edges = []
    for _ in range(m):
        try:
            lineno, tok = next(it)
        except StopIteration:
            raise FormatError(lineno, f"expected {m} edge lines") from None
        if len(tok) != 5:
            raise FormatError(lineno, "edge line needs 'k q l u c'")
        try:
            k, q = int(tok[0]) - 1, int(tok[1]) - 1
            l, u, c = (float(t) for t in tok[2:])
        except ValueError:
            raise FormatError(lineno, "non-numeric edge field") from None
        edges.append((k, q, l, u, c))
    lineno, ps = expect("PARAMS", 3)
    try:
        net = Network.from_edges(n, edges)
        return Instance(net, weights, int(ps[0]), float(ps[1]), float(ps[2]), name=name)
    except ValueError as exc:
        raise FormatError(lineno, str(exc)) from None


def parse_kv(text: str) -> dict[str, str]:
    """``key=value`` lines; ``#`` comments and blank lines skipped."""
    out = {}
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        s = raw.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise FormatError(lineno, f"expected key=value, got {s!r}")
        k, v = s.split("=", 1)
        out[k.strip()] = v.strip()
    return out


# radius calibration -------------------------------------------------------

def default_mclp_solver(d: np.ndarray, weights, p: int, R: float) -> float:
    """Exact plain-MCLP value: enumeration when small, otherwise a MILP."""
    from .oracle import OracleLimits, mclp_by_enumeration, mclp_by_milp

    n = len(weights)
    if math.comb(n, p) <= OracleLimits().max_facility_sets:
        return mclp_by_enumeration(d, weights, p, R)[0]
    return mclp_by_milp(d, weights, p, R)


@dataclass(frozen=True)
class Calibration:
    R: float
    coverage: float
    reached: bool


def calibrate_radius(inst: Instance, coverage_target: float,
                     mclp_solver: Callable | None = None,
                     return_info: bool = False):
    """Smallest pairwise distance ``R`` whose plain-MCLP optimum covers the target share.

    Warns and returns the largest finite distance if the target is out of reach.
    """
    solver = mclp_solver or default_mclp_solver
    d = shortest_distances(inst.net)
    iu = np.triu_indices(inst.n, 1)
    cand = np.unique(d[iu])
    cand = cand[np.isfinite(cand) & (cand > 0)]
    if cand.size == 0:
        raise ValueError("no positive finite pairwise distance to calibrate on")
    goal = coverage_target * float(inst.weights.sum())

    cache = {}

    def value(idx):
        if idx not in cache:
            cache[idx] = solver(d, inst.weights, inst.p, float(cand[idx]))
        return cache[idx]

    lo, hi = 0, cand.size - 1
    if value(hi) < goal - 1e-9:
        warnings.warn(f"coverage target {coverage_target} unreachable; using max distance",
                      RuntimeWarning, stacklevel=2)
        res = Calibration(float(cand[hi]), value(hi), False)
        return res if return_info else res.R
    while lo < hi:
        mid = (lo + hi) // 2
        if value(mid) >= goal - 1e-9:
            hi = mid
        else:
            lo = mid + 1
    res = Calibration(float(cand[lo]), value(lo), True)
    return res if return_info else res.R


# small reference instance ------------------------------------------------

TOY_LABELS = ("i", "j", "k", "q", "r", "s")


def toy_instance() -> Instance:
    """Six-node instance on which the two closest-assignment VI families clash.

    Node order i, j, k, q, r, s. Only edge [k, q] is upgradable.
    """
    edges = [(0, 2, 1.0, 0.0, 0.0),
             (1, 2, 0.5, 0.0, 0.0),
             (2, 3, 1.25, 0.75, 1.0),
             (0, 4, 0.5, 0.0, 0.0),
             (3, 5, 0.55, 0.0, 0.0)]
    net = Network.from_edges(6, edges)
    return Instance(net, [1, 1, 1, 1, 1000, 1000], p=2, R=1.0, B=0.75, name="toy6")
