"""Formulation options and the map from model columns back to the problem."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..instance import Instance, is_normalized, parse_kv

FLOWCOV, PATH, PATHCOV = "FlowCov", "Path", "PathCov"
KINDS = (FLOWCOV, PATH, PATHCOV)

VI_FAMILIES = ("F18_no_two_way", "F19_20_path_chain", "F21_closest_before",
               "F22_closest_delta", "F29_lb_dz", "F30_mtz_reinforced",
               "F31_closest_path", "F34_triangle_cycle", "F40_lb_dy")
CUT_GENERATORS = ("SEP_35_36_cutdi", "SEP_42_cutsepa", "F34_as_cuts")

ALLOWED_VI = {
    FLOWCOV: {"F18_no_two_way", "F19_20_path_chain", "F21_closest_before", "F22_closest_delta"},
    PATH: {"F29_lb_dz", "F30_mtz_reinforced", "F31_closest_path", "F34_triangle_cycle"},
    PATHCOV: {"F29_lb_dz", "F30_mtz_reinforced", "F31_closest_path", "F34_triangle_cycle",
              "F40_lb_dy", "F22_closest_delta"},
}
ALLOWED_CUTS = {
    FLOWCOV: set(),
    PATH: {"SEP_35_36_cutdi", "F34_as_cuts"},
    PATHCOV: {"SEP_35_36_cutdi", "SEP_42_cutsepa", "F34_as_cuts"},
}
DEFAULT_VI = {
    FLOWCOV: frozenset({"F18_no_two_way"}),
    PATH: frozenset({"F29_lb_dz", "F30_mtz_reinforced"}),
    PATHCOV: frozenset({"F30_mtz_reinforced", "F40_lb_dy"}),
}

# short aliases accepted on the command line and in config files
_ALIASES = {name.split("_", 1)[0].lower(): name for name in VI_FAMILIES}
_ALIASES.update({"f19": "F19_20_path_chain", "f20": "F19_20_path_chain",
                 "cutdi": "SEP_35_36_cutdi", "cutsepa": "SEP_42_cutsepa",
                 "triangles": "F34_as_cuts"})

CLI_KINDS = {"flowcov-alpha": (FLOWCOV, "alpha"), "flowcov-gamma": (FLOWCOV, "gamma"),
             "path": (PATH, "gamma"), "pathcov": (PATHCOV, "gamma")}


class IncompatibleFamilies(ValueError):
    pass


def resolve_names(items, universe) -> frozenset:
    out = set()
    for raw in items:
        s = raw.strip()
        if not s:
            continue
        name = s if s in universe else _ALIASES.get(s.lower())
        if name is None or name not in universe:
            raise ValueError(f"unknown family {s!r}")
        out.add(name)
    return frozenset(out)


@dataclass(frozen=True)
class FormulationSpec:
    """What to build. ``vi_families=None`` picks the defaults of ``kind``.

    ``allow_conflict`` lets tests combine F19_20 with F21, which the builder
    otherwise refuses because the pair can cut off every optimum.
    """

    kind: str = FLOWCOV
    flow_variant: str = "gamma"
    relax_x: bool = True
    relax_y: bool = True
    vi_families: frozenset | None = None
    cut_generators: frozenset = frozenset()
    use_preprocess: bool = True
    triangle_cap: int = 20_000
    allow_conflict: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown formulation kind {self.kind!r}")
        if self.flow_variant not in ("alpha", "gamma"):
            raise ValueError("flow_variant must be 'alpha' or 'gamma'")
        vi = DEFAULT_VI[self.kind] if self.vi_families is None else frozenset(self.vi_families)
        object.__setattr__(self, "vi_families", vi)
        object.__setattr__(self, "cut_generators", frozenset(self.cut_generators))
        bad = vi - ALLOWED_VI[self.kind]
        if bad:
            raise ValueError(f"families {sorted(bad)} not available for {self.kind}")
        bad = self.cut_generators - ALLOWED_CUTS[self.kind]
        if bad:
            raise ValueError(f"cut generators {sorted(bad)} not available for {self.kind}")
        if ({"F19_20_path_chain", "F21_closest_before"} <= vi) and not self.allow_conflict:
            raise IncompatibleFamilies(
                "F19_20_path_chain and F21_closest_before cannot be combined: "
                "together they may exclude every optimal solution")

    def has(self, family: str) -> bool:
        return family in self.vi_families

    @property
    def label(self) -> str:
        if self.kind == FLOWCOV:
            return f"flowcov-{self.flow_variant}"
        return self.kind.lower()

    def with_(self, **kw) -> "FormulationSpec":
        return replace(self, **kw)

    def to_text(self) -> str:
        lines = [f"kind={self.kind}", f"flow_variant={self.flow_variant}",
                 f"relax_x={int(self.relax_x)}", f"relax_y={int(self.relax_y)}",
                 "vi=" + ",".join(sorted(self.vi_families)),
                 "cuts=" + ",".join(sorted(self.cut_generators)),
                 f"use_preprocess={int(self.use_preprocess)}"]
        return "\n".join(lines) + "\n"

    def echo(self) -> str:
        """One-line form for CSV cells."""
        return ";".join(self.to_text().strip().splitlines())

    @classmethod
    def from_text(cls, text: str) -> "FormulationSpec":
        kv = parse_kv(text.replace(";", "\n"))
        kw = {}
        if "kind" in kv:
            kw["kind"] = kv["kind"]
        if "flow_variant" in kv:
            kw["flow_variant"] = kv["flow_variant"]
        for key in ("relax_x", "relax_y", "use_preprocess"):
            if key in kv:
                kw[key] = kv[key] not in ("0", "false", "False", "no")
        if "vi" in kv:
            kw["vi_families"] = resolve_names(kv["vi"].split(","), VI_FAMILIES)
        if "cuts" in kv:
            kw["cut_generators"] = resolve_names(kv["cuts"].split(","), CUT_GENERATORS)
        return cls(**kw)

    @classmethod
    def from_cli(cls, name: str, vi=None, cuts=None, use_preprocess=True,
                 allow_conflict=False) -> "FormulationSpec":
        try:
            kind, variant = CLI_KINDS[name]
        except KeyError:
            raise ValueError(f"unknown formulation {name!r}; choose from {sorted(CLI_KINDS)}") from None
        vi_set = None if vi is None else resolve_names(vi, VI_FAMILIES)
        cut_set = frozenset() if cuts is None else resolve_names(cuts, CUT_GENERATORS)
        return cls(kind=kind, flow_variant=variant, vi_families=vi_set,
                   cut_generators=cut_set, use_preprocess=use_preprocess,
                   allow_conflict=allow_conflict)


@dataclass
class VariableMap:
    """Column indices by role. Missing keys mean the variable was eliminated.

    Names (1-based): ``x_j``, ``y_i_j``, ``z_i_j``, ``d_i``, ``del_e``,
    ``f_i_j_a``, ``gam_i_j_a`` or ``alpha_i_j_a``; arc ``a = 2e`` runs
    tail to head of edge ``e`` and ``a = 2e + 1`` the other way.
    """

    kind: str
    n: int
    m: int
    x: list = field(default_factory=list)
    y: dict = field(default_factory=dict)
    z: dict = field(default_factory=dict)
    d: list = field(default_factory=list)
    delta: list = field(default_factory=list)
    flow: dict = field(default_factory=dict)   # (i, j) -> (arcs, f cols, aux cols)
    flow_variant: str = "gamma"

    def yv(self, xvec, i, j) -> float:
        col = self.y.get((i, j))
        return 0.0 if col is None else float(xvec[col])


def check_normalized(inst: Instance):
    if not is_normalized(inst):
        raise ValueError("instance is not normalized (some l-u > R or c*u > B); "
                         "run instance.normalize first")
