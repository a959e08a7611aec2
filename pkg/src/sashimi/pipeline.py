"""Whole-image feature extraction: type roles, every statistic, one row.

The emitted key set is a pure function of the configuration, never of the
data: extraction starts from an all-NaN table built from the schema and
fills in whatever could be computed, recording a reason for everything
that could not. Cell-type labels map to the role codes T, I, S in the
order they were selected; pair codes follow the reporting convention
T2I, T2S, S2I for directed statistics and TI, TS, IS for symmetric ones.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import areal
from .core import (
    DEFAULT_GRID_BINS,
    DistanceGrid,
    MarkedPointPattern,
    default_rgrid,
)
from .errors import (
    GridMismatch,
    NoSelectedTypePresent,
    SashimiError,
    TooFewCurves,
)
from .functional import CurveEnsemble, fpca
from .summaries import (
    SummaryCurve,
    f_cross,
    f_function,
    g_cross,
    g_function,
    j_function,
    k_cross,
    k_function,
    l_function,
    mark_connection_curves,
    pcf,
)
from .topology import (
    DEFAULT_LANDMARK_CAP,
    PersistenceDiagram,
    _SUMMARY_FAMILIES,
    _SUMMARY_STATS,
    persistence_summaries,
    witness_persistence,
)

ROLE_CODES = ("T", "I", "S")
ROLE_WORDS = ("tumor", "immune", "stromal")
FAMILIES = ("summaries", "areal", "topology")
CURVE_STATS = ("K", "L", "G", "F", "J", "PCF")

# directed pair codes as used in reporting; index pairs are (source, target)
CROSS_PAIRS = (("T2I", 0, 1), ("T2S", 0, 2), ("S2I", 2, 1))
# symmetric pair codes; index pairs follow role order
SYMMETRIC_PAIRS = (("TI", 0, 1), ("TS", 0, 2), ("IS", 1, 2))

PER_TYPE_SCALARS = (
    "MoranI",
    "GearyC",
    "QuadratChi2",
    "QuadratPval",
    "ClarkEvans",
    "JC.PP",
    "JC.PA",
    "JC.AA",
)
PAIR_SCALARS = ("Lee", "Jaccard", "Dice", "MH", "BC", "Cosine")


@dataclass(frozen=True)
class AnalysisConfig:
    """Everything that determines the feature schema and the numerics."""

    selected_types: tuple[str, ...]
    feature_families: tuple[str, ...] = FAMILIES
    q: int = areal.DEFAULT_Q
    bins: int = DEFAULT_GRID_BINS
    r_max: float | None = None
    seed: int = 0
    pair_weighting: str = "isotropic"
    nn_correction: str = "border"
    weights_scheme: str = "rook"
    landmark_cap: int = DEFAULT_LANDMARK_CAP
    topology_max_eps: float | None = None

    def __post_init__(self):
        types = tuple(str(t).strip() for t in self.selected_types)
        if not (1 <= len(types) <= 3):
            raise ValueError(
                f"select between one and three cell types, got {len(types)}"
            )
        if any(not t for t in types):
            raise ValueError("cell type labels must be non-empty")
        if len(set(types)) != len(types):
            raise ValueError(f"cell types must be distinct, got {types}")
        families = tuple(dict.fromkeys(self.feature_families))
        unknown = [f for f in families if f not in FAMILIES]
        if unknown:
            raise ValueError(f"unknown feature families: {unknown}")
        if not families:
            raise ValueError("at least one feature family is required")
        families = tuple(f for f in FAMILIES if f in families)
        if self.r_max is not None and not (
            np.isfinite(self.r_max) and self.r_max > 0
        ):
            raise ValueError(f"r_max must be positive and finite, got {self.r_max}")
        object.__setattr__(self, "selected_types", types)
        object.__setattr__(self, "feature_families", families)

    @property
    def n_types(self) -> int:
        return len(self.selected_types)


def config_to_dict(config: AnalysisConfig) -> dict:
    out = asdict(config)
    out["selected_types"] = list(config.selected_types)
    out["feature_families"] = list(config.feature_families)
    return out


def config_from_dict(data: dict) -> AnalysisConfig:
    """Build a config from parsed JSON, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ValueError("config must be a JSON object")
    known = set(AnalysisConfig.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {unknown}")
    if "selected_types" not in data:
        raise ValueError("config requires selected_types")
    kwargs = dict(data)
    kwargs["selected_types"] = tuple(kwargs["selected_types"])
    if "feature_families" in kwargs:
        kwargs["feature_families"] = tuple(kwargs["feature_families"])
    return AnalysisConfig(**kwargs)


def config_hash(config: AnalysisConfig) -> str:
    blob = json.dumps(config_to_dict(config), sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class FeatureTable:
    """Single-row mapping from canonical feature name to scalar."""

    features: dict[str, float]
    metadata: dict = field(repr=False)


@dataclass(frozen=True)
class CurveBundle:
    """Every functional statistic of one image on the shared grid.

    ``diagrams`` carries the persistence diagrams keyed by their witness
    prefix so the diagram artifact can be serialized without recompute.
    """

    rgrid: DistanceGrid
    curves: dict[str, SummaryCurve]
    diagrams: dict[str, PersistenceDiagram] = field(default_factory=dict)


def _roles(config: AnalysisConfig) -> list[tuple[str, str, str]]:
    return [
        (ROLE_CODES[i], ROLE_WORDS[i], label)
        for i, label in enumerate(config.selected_types)
    ]


def _cross_pairs(config: AnalysisConfig):
    n = config.n_types
    return [(code, i, j) for code, i, j in CROSS_PAIRS if i < n and j < n]


def _symmetric_pairs(config: AnalysisConfig):
    n = config.n_types
    return [(code, i, j) for code, i, j in SYMMETRIC_PAIRS if i < n and j < n]


def feature_schema(config: AnalysisConfig) -> list[tuple[str, dict]]:
    """Ordered scalar feature names with provenance, data-independent."""
    roles = _roles(config)
    out: list[tuple[str, dict]] = []
    if "areal" in config.feature_families:
        for code, _, label in roles:
            for stat in PER_TYPE_SCALARS:
                head, _, tail = stat.partition(".")
                name = f"{head}.{code}.{tail}" if tail else f"{stat}.{code}"
                out.append(
                    (name, {"family": "areal", "statistic": stat, "types": [label]})
                )
        for code, i, j in _symmetric_pairs(config):
            for stat in PAIR_SCALARS:
                out.append(
                    (
                        f"{stat}.{code}",
                        {
                            "family": "areal",
                            "statistic": stat,
                            "types": [roles[i][2], roles[j][2]],
                        },
                    )
                )
    if "topology" in config.feature_families:
        for _, i, j in _symmetric_pairs(config):
            prefix = f"witness_{roles[i][1]}_{roles[j][1]}"
            for dim in (0, 1):
                for fam in _SUMMARY_FAMILIES:
                    for stat in _SUMMARY_STATS:
                        out.append(
                            (
                                f"{prefix}_h{dim}_{fam}_{stat}",
                                {
                                    "family": "topology",
                                    "statistic": f"h{dim}_{fam}_{stat}",
                                    "types": [roles[i][2], roles[j][2]],
                                },
                            )
                        )
                out.append(
                    (
                        f"{prefix}_h{dim}_n_features",
                        {
                            "family": "topology",
                            "statistic": f"h{dim}_n_features",
                            "types": [roles[i][2], roles[j][2]],
                        },
                    )
                )
    return out


def curve_schema(config: AnalysisConfig) -> list[tuple[str, dict]]:
    """Ordered functional statistic names with provenance."""
    if "summaries" not in config.feature_families:
        return []
    roles = _roles(config)
    all_labels = [r[2] for r in roles]
    out: list[tuple[str, dict]] = []
    for stat in CURVE_STATS:
        out.append(
            (
                f"{stat}.REP",
                {"family": "summaries", "statistic": stat, "variant": "REP",
                 "types": all_labels},
            )
        )
    for code, _, label in roles:
        for stat in CURVE_STATS:
            out.append(
                (
                    f"{stat}.REP.{code}",
                    {"family": "summaries", "statistic": stat, "variant": "REP",
                     "types": [label]},
                )
            )
    for code, i, j in _cross_pairs(config):
        pair_types = [roles[i][2], roles[j][2]]
        for stat in CURVE_STATS:
            out.append(
                (
                    f"{stat}.CROSS.{code}",
                    {"family": "summaries", "statistic": stat, "variant": "CROSS",
                     "types": pair_types},
                )
            )
        out.append(
            (
                f"MK.CONN.{code}",
                {"family": "summaries", "statistic": "MK.CONN",
                 "variant": "CROSS", "types": pair_types},
            )
        )
    return out


def fpca_schema(config: AnalysisConfig) -> list[tuple[str, dict]]:
    """Score feature names appended by the across-image decomposition."""
    out = []
    for name, prov in curve_schema(config):
        for component in (1, 2):
            out.append(
                (
                    f"{name}.PC{component}",
                    {"family": "functional", "statistic": name,
                     "component": component, "types": prov["types"]},
                )
            )
    return out


def resolve_rgrid(window, config: AnalysisConfig) -> DistanceGrid:
    if config.r_max is None:
        return default_rgrid(window, config.bins)
    return DistanceGrid(np.linspace(0.0, config.r_max, config.bins))


def _nan_curve(name: str, rgrid: DistanceGrid) -> SummaryCurve:
    filler = np.full(rgrid.count, np.nan)
    return SummaryCurve(name, rgrid, filler, filler.copy(), "none")


class _Extraction:
    """Mutable scratch state for one image; assembles the outputs."""

    def __init__(self, pattern: MarkedPointPattern, config: AnalysisConfig):
        self.config = config
        self.window = pattern.window
        roles = _roles(config)
        self.roles = roles
        counts = pattern.type_counts()
        self.n_by_code = {
            code: int(counts.get(label, 0)) for code, _, label in roles
        }
        if all(n == 0 for n in self.n_by_code.values()):
            raise NoSelectedTypePresent(
                f"none of the selected types {list(config.selected_types)} "
                "appear in the pattern"
            )
        labels = [label for _, _, label in roles]
        mask = np.isin(pattern.marks, labels)
        self.pattern = MarkedPointPattern(
            pattern.points[mask], pattern.marks[mask], pattern.window
        )
        self.points_by_code = {
            code: self.pattern.points[self.pattern.marks == label]
            for code, _, label in roles
        }
        self.rgrid = resolve_rgrid(pattern.window, config)
        self.values = {name: float("nan") for name, _ in feature_schema(config)}
        self.curves: dict[str, SummaryCurve] = {}
        self.diagrams: dict[str, PersistenceDiagram] = {}
        self.degraded: dict[str, str] = {}

    def mark_degraded(self, name: str, reason: str):
        self.degraded[name] = reason

    def put_curve(self, curve: SummaryCurve):
        self.curves[curve.name] = curve

    def nan_curves(self, names: list[str], reason: str):
        for name in names:
            self.curves[name] = _nan_curve(name, self.rgrid)
            self.mark_degraded(name, reason)

    # ---- summaries family -------------------------------------------------

    def univariate_group(self, points: np.ndarray, suffix: str):
        """K/L/G/F/J/PCF for one point subset; failures cascade as NaN."""
        cfg = self.config
        names = {stat: f"{stat}.REP{suffix}" for stat in CURVE_STATS}
        k = g = f = None
        try:
            k = k_function(
                points, self.window, self.rgrid, cfg.pair_weighting, name=names["K"]
            )
            self.put_curve(k)
        except SashimiError as exc:
            self.nan_curves([names["K"], names["L"], names["PCF"]], str(exc))
        if k is not None:
            self.put_curve(l_function(k, name=names["L"]))
            self.put_curve(pcf(k, name=names["PCF"]))
        try:
            g = g_function(
                points, self.window, self.rgrid, cfg.nn_correction, name=names["G"]
            )
            self.put_curve(g)
        except SashimiError as exc:
            self.nan_curves([names["G"]], str(exc))
        try:
            f = f_function(
                points, self.window, self.rgrid, cfg.nn_correction, name=names["F"]
            )
            self.put_curve(f)
        except SashimiError as exc:
            self.nan_curves([names["F"]], str(exc))
        if g is not None and f is not None:
            self.put_curve(j_function(g, f, name=names["J"]))
        else:
            self.nan_curves([names["J"]], "needs both G and F")
        return k

    def cross_group(self, code: str, p_label: str, q_label: str, k_pooled):
        cfg = self.config
        names = {stat: f"{stat}.CROSS.{code}" for stat in CURVE_STATS}
        mc_name = f"MK.CONN.{code}"
        k = g = f = None
        try:
            k = k_cross(
                self.pattern, p_label, q_label, self.rgrid, cfg.pair_weighting,
                name=names["K"],
            )
            self.put_curve(k)
        except SashimiError as exc:
            self.nan_curves([names["K"], names["L"], names["PCF"]], str(exc))
        if k is not None:
            self.put_curve(l_function(k, name=names["L"]))
            self.put_curve(pcf(k, name=names["PCF"]))
        try:
            g = g_cross(
                self.pattern, p_label, q_label, self.rgrid, cfg.nn_correction,
                name=names["G"],
            )
            self.put_curve(g)
        except SashimiError as exc:
            self.nan_curves([names["G"]], str(exc))
        # the empty-space curve depends only on the target type; it is kept
        # under the pair name so every cross family carries all six members
        try:
            f = f_cross(
                self.pattern, q_label, self.rgrid, cfg.nn_correction,
                name=names["F"],
            )
            self.put_curve(f)
        except SashimiError as exc:
            self.nan_curves([names["F"]], str(exc))
        if g is not None and f is not None:
            self.put_curve(j_function(g, f, name=names["J"]))
        else:
            self.nan_curves([names["J"]], "needs both G and F")
        if k is not None and k_pooled is not None:
            n_p = len(self.points_by_code[code[0]])
            n_q = len(self.points_by_code[code[-1]])
            self.put_curve(
                mark_connection_curves(
                    k_pooled, k, self.pattern.n, n_p, n_q, name=mc_name
                )
            )
        else:
            self.nan_curves([mc_name], "needs pooled and cross K")

    def run_summaries(self):
        k_pooled = self.univariate_group(self.pattern.points, "")
        for code, _, label in self.roles:
            self.univariate_group(self.points_by_code[code], f".{code}")
        for code, i, j in _cross_pairs(self.config):
            self.cross_group(code, self.roles[i][2], self.roles[j][2], k_pooled)

    # ---- areal family -----------------------------------------------------

    def scalar(self, name: str, fn, *args):
        try:
            self.values[name] = float(fn(*args))
        except SashimiError as exc:
            self.mark_degraded(name, str(exc))

    def run_areal(self):
        cfg = self.config
        weights = areal.build_weights(cfg.q, cfg.weights_scheme)
        grids: dict[str, areal.QuadratGrid | None] = {}
        for code, _, label in self.roles:
            points = self.points_by_code[code]
            if len(points) == 0:
                grids[code] = None
                for stat in PER_TYPE_SCALARS:
                    head, _, tail = stat.partition(".")
                    name = f"{head}.{code}.{tail}" if tail else f"{stat}.{code}"
                    self.mark_degraded(name, f"no points of type {label!r}")
                continue
            grid = areal.quadrat_counts(points, self.window, cfg.q)
            grids[code] = grid
            self.scalar(f"MoranI.{code}", areal.morans_i, grid, weights)
            self.scalar(f"GearyC.{code}", areal.gearys_c, grid, weights)
            try:
                test = areal.quadrat_test(grid)
                self.values[f"QuadratChi2.{code}"] = float(test.statistic)
                self.values[f"QuadratPval.{code}"] = float(test.p_upper)
            except SashimiError as exc:
                self.mark_degraded(f"QuadratChi2.{code}", str(exc))
                self.mark_degraded(f"QuadratPval.{code}", str(exc))
            self.scalar(f"ClarkEvans.{code}", areal.clark_evans, points, self.window)
            joins = areal.join_counts(grid, weights)
            self.values[f"JC.{code}.PP"] = float(joins.j_pp)
            self.values[f"JC.{code}.PA"] = float(joins.j_pq)
            self.values[f"JC.{code}.AA"] = float(joins.j_qq)
        for code, i, j in _symmetric_pairs(self.config):
            grid_i, grid_j = grids[self.roles[i][0]], grids[self.roles[j][0]]
            if grid_i is None or grid_j is None:
                for stat in PAIR_SCALARS:
                    self.mark_degraded(f"{stat}.{code}", "a type has no points")
                continue
            self.scalar(f"Lee.{code}", areal.lees_l, grid_i, grid_j, weights)
            ci, cj = grid_i.counts, grid_j.counts
            self.scalar(f"Jaccard.{code}", areal.tanimoto, ci, cj)
            self.scalar(f"Dice.{code}", areal.dice_sorensen, ci, cj)
            self.scalar(f"MH.{code}", areal.morisita_horn, ci, cj)
            self.scalar(f"BC.{code}", areal.bhattacharyya, ci, cj)
            self.scalar(f"Cosine.{code}", areal.cosine_similarity, ci, cj)

    # ---- topology family --------------------------------------------------

    def run_topology(self):
        cfg = self.config
        for _, i, j in _symmetric_pairs(cfg):
            prefix = f"witness_{self.roles[i][1]}_{self.roles[j][1]}"
            feature_names = [
                name
                for name, _ in feature_schema(cfg)
                if name.startswith(prefix + "_")
            ]
            landmarks = self.points_by_code[self.roles[i][0]]
            witnesses = self.points_by_code[self.roles[j][0]]
            try:
                diagram = witness_persistence(
                    landmarks,
                    witnesses,
                    max_dim=2,
                    max_eps=cfg.topology_max_eps,
                    landmark_cap=cfg.landmark_cap,
                )
            except SashimiError as exc:
                for name in feature_names:
                    self.mark_degraded(name, str(exc))
                continue
            self.diagrams[prefix] = diagram
            for dim in (0, 1):
                summary = persistence_summaries(diagram, dim, prefix)
                self.values.update(summary.features())

    # ---- assembly ----------------------------------------------------------

    def finish(self) -> tuple[FeatureTable, CurveBundle]:
        window = self.window
        metadata = {
            "config_hash": config_hash(self.config),
            "labels": {code: label for code, _, label in self.roles},
            "n_points": dict(self.n_by_code),
            "n_points_total": int(self.pattern.n),
            "window": [window.x_min, window.x_max, window.y_min, window.y_max],
            "degraded": dict(sorted(self.degraded.items())),
        }
        table = FeatureTable(self.values, metadata)
        # reorder into schema order; a missing name here is a programming
        # error, not a data condition, so KeyError is the right failure
        ordered = {name: self.curves[name] for name, _ in curve_schema(self.config)}
        bundle = CurveBundle(self.rgrid, ordered, self.diagrams)
        return table, bundle


def extract_features(
    pattern: MarkedPointPattern, config: AnalysisConfig
) -> tuple[FeatureTable, CurveBundle]:
    """All configured features of one image.

    Raises NoSelectedTypePresent when the pattern contains none of the
    selected types; a selected type that is merely absent degrades to NaN
    features with the reason recorded in the table metadata.
    """
    state = _Extraction(pattern, config)
    if "summaries" in config.feature_families:
        state.run_summaries()
    if "areal" in config.feature_families:
        state.run_areal()
    if "topology" in config.feature_families:
        state.run_topology()
    return state.finish()


def fpca_across_images(
    tables: list[FeatureTable],
    bundles: list[CurveBundle],
    config: AnalysisConfig,
) -> list[FeatureTable]:
    """Append per-image PC1 and PC2 scores for every functional statistic.

    A statistic whose ensemble cannot be decomposed (for example all-NaN
    curves from an absent type) contributes NaN scores rather than
    failing the whole run.
    """
    if len(tables) != len(bundles):
        raise ValueError("need exactly one curve bundle per feature table")
    if len(bundles) < 2:
        raise TooFewCurves(
            f"cross-image decomposition needs at least 2 images, got {len(bundles)}"
        )
    base = bundles[0].rgrid
    for bundle in bundles[1:]:
        if not np.array_equal(bundle.rgrid.values, base.values):
            raise GridMismatch("curve bundles do not share one distance grid")

    names = [name for name, _ in curve_schema(config)]
    scores: dict[str, np.ndarray | None] = {}
    for name in names:
        stack = np.vstack([bundle.curves[name].estimate for bundle in bundles])
        try:
            result = fpca(CurveEnsemble(base.values, stack))
        except SashimiError:
            scores[name] = None
            continue
        scores[name] = result.scores[:, :2]

    augmented = []
    for idx, table in enumerate(tables):
        extra = {}
        for name in names:
            per_stat = scores[name]
            for component in (1, 2):
                key = f"{name}.PC{component}"
                if per_stat is None:
                    extra[key] = float("nan")
                else:
                    extra[key] = float(per_stat[idx, component - 1])
        augmented.append(FeatureTable({**table.features, **extra}, table.metadata))
    return augmented


# ---- artifact serialization -------------------------------------------------
# One serializer set shared by every caller so identical inputs yield
# identical bytes no matter which interface produced them.


def _csv_cell(value: float) -> str:
    if isinstance(value, float) and np.isnan(value):
        return ""
    return repr(float(value))


def features_csv(tables: list[FeatureTable]) -> bytes:
    if not tables:
        raise ValueError("no feature tables to serialize")
    header = list(tables[0].features)
    for table in tables[1:]:
        if list(table.features) != header:
            raise ValueError("feature tables disagree on their key sets")
    lines = [",".join(header)]
    for table in tables:
        lines.append(",".join(_csv_cell(table.features[k]) for k in header))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _json_series(arr: np.ndarray) -> list:
    return [None if not np.isfinite(v) else float(v) for v in arr]


def curves_json(bundle: CurveBundle) -> bytes:
    payload = {
        "r": [float(v) for v in bundle.rgrid.values],
        "curves": {
            name: {
                "estimate": _json_series(curve.estimate),
                "theoretical": _json_series(curve.theoretical),
                "correction": curve.correction,
            }
            for name, curve in bundle.curves.items()
        },
    }
    return (json.dumps(payload, separators=(",", ":")) + "\n").encode("utf-8")


def manifest_json(config: AnalysisConfig) -> bytes:
    payload = {
        "config": config_to_dict(config),
        "config_hash": config_hash(config),
        "features": [
            {"name": name, **prov} for name, prov in feature_schema(config)
        ],
        "curves": [{"name": name, **prov} for name, prov in curve_schema(config)],
        "fpca_features": [
            {"name": name, **prov} for name, prov in fpca_schema(config)
        ],
    }
    return (json.dumps(payload, indent=2, sort_keys=False) + "\n").encode("utf-8")


def diagram_csv(bundle: CurveBundle) -> bytes:
    lines = ["pair,dim,birth,death,capped"]
    for prefix, diagram in bundle.diagrams.items():
        for dim, birth, death, capped in diagram.rows():
            lines.append(
                f"{prefix},{dim},{birth!r},{death!r},{int(capped)}"
            )
    return ("\n".join(lines) + "\n").encode("utf-8")
