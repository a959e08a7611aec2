"""Distance-based summary statistics for planar point patterns.

Ripley-style K (plain, directional, cross-type, mark-weighted), the
variance-stabilized L transform, nearest-neighbour G, empty-space F, the
J ratio, the pair correlation function, and the mark connection function.
Every estimator returns a :class:`SummaryCurve` carrying the estimate and
its closed-form reference under complete spatial randomness on the same
distance grid.

Edge handling on rectangle windows:

* ``isotropic`` weights each ordered pair (i, j) by the reciprocal of the
  fraction of the circle centred at i with radius d(i, j) that lies
  inside the window (K family).
* ``border`` restricts, at each distance r, to reference points farther
  than r from the window boundary (G and F families, and K).
* ``none`` applies no correction.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .core import DistanceGrid, MarkedPointPattern, ObservationWindow, subset_by_type
from .errors import (
    BadSector,
    EmptyType,
    GridMismatch,
    NegativeInput,
    TooFewPoints,
    ZeroNormalizer,
)

EPS_DIV = 1e-9

MarkWeightFn = Callable[[str, str], float]


@dataclass(frozen=True, eq=False)
class SummaryCurve:
    """One summary statistic evaluated on a distance grid.

    ``estimate`` may contain NaN where the estimator is undefined (for
    example J where the empty-space function saturates). ``theoretical``
    is the expectation under complete spatial randomness.
    """

    name: str
    r: DistanceGrid
    estimate: np.ndarray
    theoretical: np.ndarray
    correction: str

    def __post_init__(self):
        est = np.asarray(self.estimate, dtype=np.float64)
        theo = np.asarray(self.theoretical, dtype=np.float64)
        if est.shape != (self.r.count,) or theo.shape != (self.r.count,):
            raise ValueError("curve arrays must match the grid length")
        est.setflags(write=False)
        theo.setflags(write=False)
        object.__setattr__(self, "estimate", est)
        object.__setattr__(self, "theoretical", theo)


def arc_fraction_inside(
    window: ObservationWindow, centers: np.ndarray, radii: np.ndarray
) -> np.ndarray:
    """Fraction of each circle's circumference inside the window.

    Centres must lie in the window. Computed in closed form from the
    angular measure protruding past each edge, minus the double-counted
    corner lobes. Zero-radius circles count as fully inside.
    """
    x = centers[:, 0]
    y = centers[:, 1]
    r = np.asarray(radii, dtype=np.float64)
    d_left = x - window.x_min
    d_right = window.x_max - x
    d_bottom = y - window.y_min
    d_top = window.y_max - y
    with np.errstate(divide="ignore", invalid="ignore"):
        outside = np.zeros_like(r)
        for d in (d_left, d_right, d_bottom, d_top):
            outside += 2.0 * np.arccos(np.clip(d / r, -1.0, 1.0))
        for dx, dy in (
            (d_left, d_bottom),
            (d_left, d_top),
            (d_right, d_bottom),
            (d_right, d_top),
        ):
            lobe = (
                np.arccos(np.clip(dx / r, 0.0, 1.0))
                + np.arccos(np.clip(dy / r, 0.0, 1.0))
                - 0.5 * np.pi
            )
            outside -= np.where(dx * dx + dy * dy < r * r, lobe, 0.0)
        frac = 1.0 - outside / (2.0 * np.pi)
    frac = np.where(r == 0.0, 1.0, frac)
    return np.clip(frac, EPS_DIV, 1.0)


def _pair_weights(window, centers, dists, weighting: str) -> np.ndarray:
    if weighting == "isotropic":
        return 1.0 / arc_fraction_inside(window, centers, dists)
    if weighting in ("none", "border"):
        return np.ones(len(dists))
    raise ValueError(f"unknown weighting {weighting!r}")


def _as_points(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array")
    return pts


def _directed_pairs(points: np.ndarray, r_max: float):
    """All ordered pairs (src, dst) with d <= r_max, deterministic order."""
    tree = cKDTree(points)
    pairs = tree.query_pairs(r_max, output_type="ndarray")
    if len(pairs):
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        pairs = pairs[order]
    i, j = pairs[:, 0], pairs[:, 1]
    d = np.hypot(*(points[i] - points[j]).T)
    src = np.concatenate([i, j])
    dst = np.concatenate([j, i])
    return src, dst, np.concatenate([d, d])


def _cross_pairs(p_points: np.ndarray, q_points: np.ndarray, r_max: float):
    """Ordered pairs from every p point to the q points within r_max."""
    tree = cKDTree(q_points)
    hits = tree.query_ball_point(p_points, r_max, return_sorted=True)
    lens = np.fromiter((len(h) for h in hits), dtype=np.int64, count=len(hits))
    src = np.repeat(np.arange(len(p_points)), lens)
    dst = np.concatenate([np.asarray(h, dtype=np.int64) for h in hits]) if lens.sum() else np.empty(0, dtype=np.int64)
    d = np.hypot(*(p_points[src] - q_points[dst]).T)
    return src, dst, d


def _cumulative_pair_curve(grid, src_centers, dists, weights, sector_mask=None):
    """Cumulative weighted pair counts per grid value (d <= r inclusive)."""
    values = grid.values
    hist = np.zeros(grid.count)
    bins = np.searchsorted(values, dists, side="left")
    keep = bins < grid.count
    if sector_mask is not None:
        keep &= sector_mask
    np.add.at(hist, bins[keep], weights[keep])
    return np.cumsum(hist)


def _k_estimate(points, window, grid, weighting, sector=None):
    n = len(points)
    src, dst, d = _directed_pairs(points, r_max=grid.r_max)
    sector_mask = None
    if sector is not None:
        theta, dtheta = sector
        delta = points[dst] - points[src]
        bearing = np.mod(np.arctan2(delta[:, 1], delta[:, 0]), 2.0 * np.pi)
        sector_mask = np.mod(bearing - (theta - 0.5 * dtheta), 2.0 * np.pi) < dtheta
    if weighting == "border":
        return _k_border(points, window, grid, src, d, sector_mask, n)
    w = _pair_weights(window, points[src], d, weighting)
    cum = _cumulative_pair_curve(grid, points[src], d, w, sector_mask)
    return window.area() * cum / (n * (n - 1))


def _k_border(points, window, grid, src, d, sector_mask, n):
    values = grid.values
    b = window.boundary_distance(points)
    diff = np.zeros(grid.count + 1)
    lo = np.searchsorted(values, d, side="left")
    hi = np.searchsorted(values, b[src], side="left")
    ok = lo < hi
    if sector_mask is not None:
        ok &= sector_mask
    np.add.at(diff, lo[ok], 1.0)
    np.add.at(diff, hi[ok], -1.0)
    num = np.cumsum(diff[:-1])
    kept = n - np.searchsorted(np.sort(b), values, side="right")
    with np.errstate(divide="ignore", invalid="ignore"):
        est = window.area() * num / (n * kept)
    return np.where(kept > 0, est, np.nan)


def k_function(
    points: np.ndarray,
    window: ObservationWindow,
    rgrid: DistanceGrid,
    weighting: str = "isotropic",
    name: str = "K",
) -> SummaryCurve:
    """Ripley's K: scaled cumulative count of ordered pairs within r.

    K(r) = |A| / (n (n-1)) * sum_j sum_{i != j} 1[d_ij <= r] w_ij with the
    reference curve pi r^2 under complete spatial randomness.
    """
    points = _as_points(points)
    if len(points) < 2:
        raise TooFewPoints("K needs at least two points")
    est = _k_estimate(points, window, rgrid, weighting)
    return SummaryCurve(name, rgrid, est, np.pi * np.square(rgrid.values), weighting)


def k_directional(
    points: np.ndarray,
    window: ObservationWindow,
    theta: float,
    dtheta: float,
    rgrid: DistanceGrid,
    weighting: str = "isotropic",
    name: str = "K.DIR",
) -> SummaryCurve:
    """K restricted to ordered pairs whose bearing falls in a sector.

    The sector is the half-open arc [theta - dtheta/2, theta + dtheta/2)
    taken modulo 2 pi; a full circle reproduces :func:`k_function`
    exactly. The reference curve is the sector area (dtheta / 2) r^2.
    """
    points = _as_points(points)
    if len(points) < 2:
        raise TooFewPoints("directional K needs at least two points")
    if not np.isfinite(dtheta) or dtheta <= 0.0 or dtheta > 2.0 * np.pi:
        raise BadSector(f"sector width must lie in (0, 2*pi], got {dtheta!r}")
    if not np.isfinite(theta):
        raise BadSector("sector centre must be finite")
    est = _k_estimate(points, window, rgrid, weighting, sector=(theta, dtheta))
    theo = (0.5 * dtheta) * np.square(rgrid.values)
    return SummaryCurve(name, rgrid, est, theo, weighting)


def k_cross(
    pattern: MarkedPointPattern,
    p: str,
    q: str,
    rgrid: DistanceGrid,
    weighting: str = "isotropic",
    name: str = "K.CROSS",
) -> SummaryCurve:
    """Cross-type K: pairs from type p points to type q points.

    K_pq(r) = |A| / (n_p n_q) * sum over ordered (i in p, j in q) pairs of
    1[d_ij <= r] w_ij. With p == q self-pairs are excluded and the
    normalizer becomes n_p (n_p - 1), reducing to :func:`k_function` on
    the subset.
    """
    window = pattern.window
    if p.strip() == q.strip():
        sub = subset_by_type(pattern, p)
        if sub.n == 0:
            raise EmptyType(f"no points of type {p!r}")
        if sub.n < 2:
            raise TooFewPoints("same-type cross K needs at least two points")
        est = _k_estimate(sub.points, window, rgrid, weighting)
        return SummaryCurve(name, rgrid, est, np.pi * np.square(rgrid.values), weighting)
    sub_p = subset_by_type(pattern, p)
    sub_q = subset_by_type(pattern, q)
    if sub_p.n == 0:
        raise EmptyType(f"no points of type {p!r}")
    if sub_q.n == 0:
        raise EmptyType(f"no points of type {q!r}")
    src, dst, d = _cross_pairs(sub_p.points, sub_q.points, rgrid.r_max)
    if weighting == "border":
        values = rgrid.values
        b = window.boundary_distance(sub_p.points)
        diff = np.zeros(rgrid.count + 1)
        lo = np.searchsorted(values, d, side="left")
        hi = np.searchsorted(values, b[src], side="left")
        ok = lo < hi
        np.add.at(diff, lo[ok], 1.0)
        np.add.at(diff, hi[ok], -1.0)
        num = np.cumsum(diff[:-1])
        kept = sub_p.n - np.searchsorted(np.sort(b), values, side="right")
        lam_q = sub_q.n / window.area()
        with np.errstate(divide="ignore", invalid="ignore"):
            est = num / (lam_q * kept)
        est = np.where(kept > 0, est, np.nan)
    else:
        w = _pair_weights(window, sub_p.points[src], d, weighting)
        cum = _cumulative_pair_curve(rgrid, sub_p.points[src], d, w)
        est = window.area() * cum / (sub_p.n * sub_q.n)
    return SummaryCurve(name, rgrid, est, np.pi * np.square(rgrid.values), weighting)


def _default_mark_product(a: str, b: str) -> float:
    return float(a) * float(b)


def k_mark_weighted(
    pattern: MarkedPointPattern,
    rgrid: DistanceGrid,
    f: MarkWeightFn | None = None,
    weighting: str = "isotropic",
    name: str = "K.MARK",
) -> SummaryCurve:
    """K with every ordered pair weighted by a nonnegative mark function.

    The pair sum is divided by the mean of f over all ordered pairs of
    distinct points, so under independent marks the curve matches plain
    K. The default f is the product of numeric marks.
    """
    if pattern.n < 2:
        raise TooFewPoints("mark-weighted K needs at least two points")
    fn = f if f is not None else _default_mark_product
    labels, inverse, counts = np.unique(
        pattern.marks, return_inverse=True, return_counts=True
    )
    table = np.empty((len(labels), len(labels)))
    for a, la in enumerate(labels):
        for b, lb in enumerate(labels):
            table[a, b] = fn(str(la), str(lb))
    if (table < 0).any():
        raise NegativeInput("mark weight function must be nonnegative")
    n = pattern.n
    total = counts @ table @ counts - counts @ np.diag(table)
    mean_f = total / (n * (n - 1))
    if mean_f <= EPS_DIV:
        raise ZeroNormalizer("mark weights vanish over all ordered pairs")

    window = pattern.window
    src, dst, d = _directed_pairs(pattern.points, rgrid.r_max)
    w = _pair_weights(window, pattern.points[src], d, weighting)
    w = w * table[inverse[src], inverse[dst]]
    cum = _cumulative_pair_curve(rgrid, pattern.points[src], d, w)
    est = window.area() * cum / (n * (n - 1) * mean_f)
    return SummaryCurve(name, rgrid, est, np.pi * np.square(rgrid.values), weighting)


def l_function(k: SummaryCurve, name: str = "L") -> SummaryCurve:
    """Variance-stabilized transform L(r) = sqrt(K(r) / pi)."""
    est = k.estimate
    if np.any(est[np.isfinite(est)] < 0.0):
        raise NegativeInput("K must be nonnegative to take the L transform")
    with np.errstate(invalid="ignore"):
        l_est = np.sqrt(est / np.pi)
    return SummaryCurve(name, k.r, l_est, k.r.values.copy(), k.correction)


def _nearest_neighbour_distances(points: np.ndarray) -> np.ndarray:
    d, _ = cKDTree(points).query(points, k=2)
    return d[:, 1]


def _cdf_with_border(grid, event_d, ref_boundary, correction):
    """Empirical CDF of distances, optionally border-reduced per r."""
    values = grid.values
    n_ref = len(event_d)
    if correction == "none":
        counts = np.searchsorted(np.sort(event_d), values, side="right")
        return counts / n_ref
    if correction != "border":
        raise ValueError(f"unknown correction {correction!r}")
    diff = np.zeros(grid.count + 1)
    lo = np.searchsorted(values, event_d, side="left")
    hi = np.searchsorted(values, ref_boundary, side="left")
    ok = lo < hi
    np.add.at(diff, lo[ok], 1.0)
    np.add.at(diff, hi[ok], -1.0)
    num = np.cumsum(diff[:-1])
    kept = n_ref - np.searchsorted(np.sort(ref_boundary), values, side="right")
    with np.errstate(divide="ignore", invalid="ignore"):
        est = num / kept
    return np.where(kept > 0, est, np.nan)


def _csr_cdf(lam: float, r: np.ndarray) -> np.ndarray:
    return -np.expm1(-lam * np.pi * np.square(r))


def g_function(
    points: np.ndarray,
    window: ObservationWindow,
    rgrid: DistanceGrid,
    correction: str = "border",
    name: str = "G",
) -> SummaryCurve:
    """Nearest-neighbour distance distribution.

    The border correction keeps, at each r, only points farther than r
    from the window boundary; where none remain the estimate is NaN.
    """
    points = _as_points(points)
    if len(points) < 2:
        raise TooFewPoints("G needs at least two points")
    d = _nearest_neighbour_distances(points)
    est = _cdf_with_border(rgrid, d, window.boundary_distance(points), correction)
    lam = len(points) / window.area()
    return SummaryCurve(name, rgrid, est, _csr_cdf(lam, rgrid.values), correction)


def g_cross(
    pattern: MarkedPointPattern,
    p: str,
    q: str,
    rgrid: DistanceGrid,
    correction: str = "border",
    name: str = "G.CROSS",
) -> SummaryCurve:
    """Distance from each type p point to its nearest type q point.

    With p == q this is the nearest other point of the same type, i.e.
    :func:`g_function` on the subset. The reference curve uses the
    intensity of type q.
    """
    window = pattern.window
    sub_q = subset_by_type(pattern, q)
    if sub_q.n == 0:
        raise EmptyType(f"no points of type {q!r}")
    if p.strip() == q.strip():
        if sub_q.n < 2:
            raise TooFewPoints("same-type cross G needs at least two points")
        d = _nearest_neighbour_distances(sub_q.points)
        ref_points = sub_q.points
    else:
        sub_p = subset_by_type(pattern, p)
        if sub_p.n == 0:
            raise EmptyType(f"no points of type {p!r}")
        d, _ = cKDTree(sub_q.points).query(sub_p.points, k=1)
        ref_points = sub_p.points
    est = _cdf_with_border(rgrid, d, window.boundary_distance(ref_points), correction)
    lam_q = sub_q.n / window.area()
    return SummaryCurve(name, rgrid, est, _csr_cdf(lam_q, rgrid.values), correction)


def empty_space_reference(
    window: ObservationWindow, points: np.ndarray, resolution: int | None = None
) -> np.ndarray:
    """Deterministic reference lattice for the empty-space function.

    A square lattice of side ceil(sqrt(10 n)), at least 32, offset half a
    step from the boundary. Nodes that coincide exactly with a data point
    are nudged by 1e-9 of a lattice step so the empty-space distance at
    zero stays positive.
    """
    n = len(points)
    side = int(resolution) if resolution is not None else max(32, int(np.ceil(np.sqrt(10.0 * n))))
    if side < 2:
        raise ValueError("reference lattice needs at least 2 nodes per side")
    step_x = window.width / side
    step_y = window.height / side
    xs = window.x_min + (np.arange(side) + 0.5) * step_x
    ys = window.y_min + (np.arange(side) + 0.5) * step_y
    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])
    if n:
        data = points[:, 0] + 1j * points[:, 1]
        node_c = nodes[:, 0] + 1j * nodes[:, 1]
        clash = np.isin(node_c, data)
        nodes[clash, 0] += 1e-9 * step_x
        nodes[clash, 1] += 1e-9 * step_y
    return nodes


def f_function(
    points: np.ndarray,
    window: ObservationWindow,
    rgrid: DistanceGrid,
    correction: str = "border",
    ref_resolution: int | None = None,
    name: str = "F",
) -> SummaryCurve:
    """Empty-space function: distance from reference locations to the data.

    Reference locations come from :func:`empty_space_reference`; the
    border correction discards, per r, nodes closer than r to the window
    boundary.
    """
    points = _as_points(points)
    if len(points) < 1:
        raise TooFewPoints("F needs at least one point")
    nodes = empty_space_reference(window, points, ref_resolution)
    d, _ = cKDTree(points).query(nodes, k=1)
    est = _cdf_with_border(rgrid, d, window.boundary_distance(nodes), correction)
    lam = len(points) / window.area()
    return SummaryCurve(name, rgrid, est, _csr_cdf(lam, rgrid.values), correction)


def f_cross(
    pattern: MarkedPointPattern,
    q: str,
    rgrid: DistanceGrid,
    correction: str = "border",
    ref_resolution: int | None = None,
    name: str = "F.CROSS",
) -> SummaryCurve:
    """Empty-space function measured to the points of one type."""
    sub_q = subset_by_type(pattern, q)
    if sub_q.n == 0:
        raise EmptyType(f"no points of type {q!r}")
    return f_function(
        sub_q.points, pattern.window, rgrid, correction, ref_resolution, name=name
    )


def j_function(g: SummaryCurve, f: SummaryCurve, name: str = "J") -> SummaryCurve:
    """J(r) = (1 - G(r)) / (1 - F(r)), NaN where F saturates.

    Values above 1 indicate inhibition, below 1 clustering; the curve is
    identically 1 under complete spatial randomness.
    """
    if g.r.count != f.r.count or not np.array_equal(g.r.values, f.r.values):
        raise GridMismatch("J needs G and F on the same distance grid")
    denom = 1.0 - f.estimate
    with np.errstate(divide="ignore", invalid="ignore"):
        est = (1.0 - g.estimate) / denom
    est = np.where(denom <= EPS_DIV, np.nan, est)
    return SummaryCurve(name, g.r, est, np.ones(g.r.count), g.correction)


def pcf(k: SummaryCurve, bandwidth: int = 2, name: str = "PCF") -> SummaryCurve:
    """Pair correlation g(r) = K'(r) / (2 pi r) by local-linear slopes.

    The derivative at each grid point is the least-squares slope of K
    over a window of ``bandwidth`` grid steps on each side (truncated at
    the ends). Undefined at r = 0. Requires a uniform grid.
    """
    if not k.r.is_uniform():
        raise GridMismatch("pair correlation needs a uniform distance grid")
    if bandwidth < 1:
        raise ValueError("bandwidth must be a positive number of grid steps")
    r = k.r.values
    y = k.estimate
    m = k.r.count
    est = np.full(m, np.nan)
    for i in range(m):
        lo = max(0, i - bandwidth)
        hi = min(m, i + bandwidth + 1)
        rw = r[lo:hi]
        yw = y[lo:hi]
        rc = rw - rw.mean()
        denom = (rc * rc).sum()
        slope = (rc * (yw - yw.mean())).sum() / denom
        if i > 0:
            est[i] = slope / (2.0 * np.pi * r[i])
    return SummaryCurve(name, k.r, est, np.ones(m), k.correction)


def mark_connection_curves(
    k_all: SummaryCurve,
    k_pq: SummaryCurve,
    n: int,
    n_p: int,
    n_q: int,
    bandwidth: int = 2,
    name: str = "MK.CONN",
) -> SummaryCurve:
    """Mark connection from precomputed K curves (shared by the pipeline)."""
    if not np.array_equal(k_all.r.values, k_pq.r.values):
        raise GridMismatch("mark connection needs both K curves on one grid")
    pcf_all = pcf(k_all, bandwidth)
    pcf_pq = pcf(k_pq, bandwidth)
    frac = (n_p * n_q) / (n * n)
    with np.errstate(divide="ignore", invalid="ignore"):
        est = frac * pcf_pq.estimate / pcf_all.estimate
    est = np.where(
        np.isnan(pcf_all.estimate) | (pcf_all.estimate <= EPS_DIV), np.nan, est
    )
    return SummaryCurve(name, k_all.r, est, np.ones(k_all.r.count), k_all.correction)


def mark_connection(
    pattern: MarkedPointPattern,
    p: str,
    q: str,
    rgrid: DistanceGrid,
    weighting: str = "isotropic",
    bandwidth: int = 2,
    name: str = "MK.CONN",
) -> SummaryCurve:
    """Probability that a pair at distance r carries marks (p, q).

    Defined as (lambda_p lambda_q / lambda^2) * g_pq(r) / g(r) with g the
    pair correlation of the whole pattern; NaN where g is NaN or smaller
    than the division guard. Equals the mark-share product under random
    labelling, and 1 when p = q = the only type present.
    """
    if pattern.n < 2:
        raise TooFewPoints("mark connection needs at least two points")
    n_p = subset_by_type(pattern, p).n
    n_q = subset_by_type(pattern, q).n
    if n_p == 0:
        raise EmptyType(f"no points of type {p!r}")
    if n_q == 0:
        raise EmptyType(f"no points of type {q!r}")
    k_all = k_function(pattern.points, pattern.window, rgrid, weighting)
    k_pq = k_cross(pattern, p, q, rgrid, weighting)
    return mark_connection_curves(
        k_all, k_pq, pattern.n, n_p, n_q, bandwidth, name=name
    )
