"""Quadrat tessellation and scalar areal indices.

Point patterns are discretized onto a Q-by-Q lattice of quadrats; the
resulting count fields feed global autocorrelation measures (Moran's I,
Geary's C, the lagged cross-correlation lees_l, join counts, the quadrat
chi-squared test) and the count-vector similarity indices (tanimoto,
dice_sorensen, morisita_horn, bhattacharyya, cosine_similarity).
Clark-Evans works on the raw points directly.

Quadrat indexing is row-major with row 0 at the bottom of the window
(smallest y), and points that land exactly on an internal gridline are
assigned to the quadrat on the right / above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse, stats
from scipy.spatial import cKDTree

from .core import ObservationWindow
from .errors import (
    BadQ,
    BothEmpty,
    ConstantField,
    EmptyGrid,
    GridMismatch,
    TooFewPoints,
    ZeroTotal,
    ZeroVector,
)

DEFAULT_Q = 20
MAX_Q = 64


@dataclass(frozen=True)
class QuadratGrid:
    """Counts of points per quadrat, flattened row-major (row 0 = bottom)."""

    q: int
    counts: np.ndarray
    window: ObservationWindow

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or self.q < 2:
            raise BadQ(f"quadrat side count must be an integer >= 2, got {self.q}")
        if self.q > MAX_Q:
            raise BadQ(f"quadrat side count capped at {MAX_Q}, got {self.q}")
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (self.q * self.q,):
            raise BadQ(
                f"expected {self.q * self.q} quadrat counts, got shape {counts.shape}"
            )
        if (counts < 0).any():
            raise BadQ("quadrat counts must be nonnegative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def n_quadrats(self) -> int:
        return self.q * self.q

    def total(self) -> int:
        return int(self.counts.sum())

    def matrix(self) -> np.ndarray:
        return self.counts.reshape(self.q, self.q)


@dataclass(frozen=True)
class SpatialWeights:
    """Binary contiguity weights over the quadrat lattice."""

    q: int
    scheme: str
    matrix: sparse.csr_array = field(repr=False)

    @property
    def s0(self) -> float:
        return float(self.matrix.sum())

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def lag(self, values: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(values, dtype=np.float64)


@dataclass(frozen=True)
class JoinCounts:
    j_pp: float
    j_pq: float
    j_qq: float

    @property
    def total(self) -> float:
        return self.j_pp + self.j_pq + self.j_qq


@dataclass(frozen=True)
class QuadratTestResult:
    statistic: float
    dof: int
    p_upper: float


def quadrat_counts(points: np.ndarray, window: ObservationWindow, q: int = DEFAULT_Q) -> QuadratGrid:
    """Tessellate the window into q*q quadrats and count points per cell.

    Raises BadQ for q outside [2, 64]. The total count is always preserved.
    """
    if not isinstance(q, (int, np.integer)) or q < 2 or q > MAX_Q:
        raise BadQ(f"quadrat side count must be an integer in [2, {MAX_Q}], got {q}")
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    counts = np.zeros(q * q, dtype=np.int64)
    if len(points):
        cols = np.floor((points[:, 0] - window.x_min) * q / window.width).astype(np.int64)
        rows = np.floor((points[:, 1] - window.y_min) * q / window.height).astype(np.int64)
        np.clip(cols, 0, q - 1, out=cols)
        np.clip(rows, 0, q - 1, out=rows)
        np.add.at(counts, rows * q + cols, 1)
    return QuadratGrid(int(q), counts, window)


def build_weights(q: int, scheme: str = "rook") -> SpatialWeights:
    """Contiguity weights on the q*q lattice: rook shares an edge, queen a vertex."""
    if not isinstance(q, (int, np.integer)) or q < 2 or q > MAX_Q:
        raise BadQ(f"quadrat side count must be an integer in [2, {MAX_Q}], got {q}")
    if scheme not in ("rook", "queen"):
        raise ValueError(f"scheme must be 'rook' or 'queen', got {scheme!r}")
    idx = np.arange(q * q).reshape(q, q)
    pairs = []
    # horizontal and vertical edges
    pairs.append((idx[:, :-1].ravel(), idx[:, 1:].ravel()))
    pairs.append((idx[:-1, :].ravel(), idx[1:, :].ravel()))
    if scheme == "queen":
        pairs.append((idx[:-1, :-1].ravel(), idx[1:, 1:].ravel()))
        pairs.append((idx[:-1, 1:].ravel(), idx[1:, :-1].ravel()))
    src = np.concatenate([a for a, _ in pairs])
    dst = np.concatenate([b for _, b in pairs])
    rows = np.concatenate([src, dst])
    cols = np.concatenate([dst, src])
    data = np.ones(len(rows))
    mat = sparse.csr_array((data, (rows, cols)), shape=(q * q, q * q))
    return SpatialWeights(int(q), scheme, mat)


def _centered(grid: QuadratGrid) -> np.ndarray:
    x = grid.counts.astype(np.float64)
    z = x - x.mean()
    if not np.any(z):
        raise ConstantField("all quadrat counts are equal")
    return z


def morans_i(grid: QuadratGrid, w: SpatialWeights) -> float:
    """Global spatial autocorrelation of the quadrat count field.

    Positive for like-near-like clustering, near -1/(N-1) under random
    permutation, negative for checkerboard-style repulsion.
    """
    _check_same_lattice(grid, w)
    z = _centered(grid)
    n = grid.n_quadrats
    return float((n / w.s0) * (z @ w.lag(z)) / (z @ z))


def gearys_c(grid: QuadratGrid, w: SpatialWeights) -> float:
    """Geary's contiguity ratio; 1 under independence, < 1 for clustering."""
    _check_same_lattice(grid, w)
    z = _centered(grid)
    x = grid.counts.astype(np.float64)
    coo = w.matrix.tocoo()
    num = float(np.sum(coo.data * (x[coo.row] - x[coo.col]) ** 2))
    n = grid.n_quadrats
    return float((n - 1) * num / (2.0 * w.s0 * (z @ z)))


def lees_l(grid_p: QuadratGrid, grid_q: QuadratGrid, w: SpatialWeights) -> float:
    """Spatially lagged cross-correlation between two count fields.

    Both fields are lagged through the weights, centered on their raw
    means, and correlated; the prefactor is N over the squared row sums.
    This follows one specific printed form of the statistic: the means
    subtracted from the lag fields are the plain field means, not the
    means of the lag fields themselves.
    """
    _check_same_lattice(grid_p, w)
    if grid_q.q != grid_p.q:
        raise GridMismatch(
            f"count grids disagree on side count: {grid_p.q} vs {grid_q.q}"
        )
    x = grid_p.counts.astype(np.float64)
    y = grid_q.counts.astype(np.float64)
    lag_x = w.lag(x)
    lag_y = w.lag(y)
    if np.ptp(lag_x) == 0.0 or np.ptp(lag_y) == 0.0:
        raise ConstantField("spatially lagged field is constant")
    dx = lag_x - x.mean()
    dy = lag_y - y.mean()
    den = math.sqrt(dx @ dx) * math.sqrt(dy @ dy)
    if den == 0.0:
        raise ConstantField("lagged field has no variation around the raw mean")
    n = grid_p.n_quadrats
    rowsum_sq = float(np.sum(w.row_sums() ** 2))
    return float((n / rowsum_sq) * (dx @ dy) / den)


def quadrat_test(grid: QuadratGrid) -> QuadratTestResult:
    """Chi-squared index-of-dispersion test against a uniform expectation."""
    total = grid.total()
    if total == 0:
        raise EmptyGrid("cannot test an empty quadrat grid")
    n = grid.n_quadrats
    expected = total / n
    observed = grid.counts.astype(np.float64)
    statistic = float(np.sum((observed - expected) ** 2) / expected)
    dof = n - 1
    return QuadratTestResult(statistic, dof, float(stats.chi2.sf(statistic, dof)))


def join_counts(grid_p: QuadratGrid, w: SpatialWeights, presence_threshold: int = 1) -> JoinCounts:
    """Like-like and unlike join counts of the binarized presence field."""
    _check_same_lattice(grid_p, w)
    b = (grid_p.counts >= presence_threshold).astype(np.float64)
    coo = w.matrix.tocoo()
    bi, bj = b[coo.row], b[coo.col]
    j_pp = float(np.sum(coo.data * bi * bj) / 2.0)
    j_pq = float(np.sum(coo.data * (bi - bj) ** 2) / 2.0)
    j_qq = float(np.sum(coo.data * (1.0 - bi) * (1.0 - bj)) / 2.0)
    return JoinCounts(j_pp, j_pq, j_qq)


def _check_same_lattice(grid: QuadratGrid, w: SpatialWeights) -> None:
    if grid.q != w.q:
        raise GridMismatch(
            f"count grid has side {grid.q} but weights were built for side {w.q}"
        )


def _active_pair(v_p, v_q):
    v_p = np.asarray(v_p, dtype=np.float64).ravel()
    v_q = np.asarray(v_q, dtype=np.float64).ravel()
    if v_p.shape != v_q.shape:
        raise GridMismatch(
            f"count vectors differ in length: {v_p.shape[0]} vs {v_q.shape[0]}"
        )
    active = (v_p + v_q) > 0
    if not active.any():
        raise BothEmpty("both count vectors are empty everywhere")
    return v_p[active], v_q[active]


def tanimoto(v_p, v_q) -> float:
    """Continuous Jaccard overlap of two count vectors, on active quadrats."""
    p, q = _active_pair(v_p, v_q)
    dot = float(p @ q)
    return dot / (float(p @ p) + float(q @ q) - dot)


def dice_sorensen(v_p, v_q) -> float:
    """Dice overlap of two count vectors, on active quadrats."""
    p, q = _active_pair(v_p, v_q)
    return 2.0 * float(p @ q) / (float(p @ p) + float(q @ q))


def morisita_horn(v_p, v_q) -> float:
    """Compositional overlap of the total-normalized count vectors."""
    v_p = np.asarray(v_p, dtype=np.float64).ravel()
    v_q = np.asarray(v_q, dtype=np.float64).ravel()
    if v_p.shape != v_q.shape:
        raise GridMismatch(
            f"count vectors differ in length: {v_p.shape[0]} vs {v_q.shape[0]}"
        )
    tp, tq = v_p.sum(), v_q.sum()
    if tp <= 0 or tq <= 0:
        raise ZeroTotal("both count vectors need a positive total")
    p = v_p / tp
    q = v_q / tq
    return 2.0 * float(p @ q) / (float(p @ p) + float(q @ q))


def bhattacharyya(v_p, v_q) -> float:
    """Overlap coefficient of the two normalized count distributions."""
    v_p = np.asarray(v_p, dtype=np.float64).ravel()
    v_q = np.asarray(v_q, dtype=np.float64).ravel()
    if v_p.shape != v_q.shape:
        raise GridMismatch(
            f"count vectors differ in length: {v_p.shape[0]} vs {v_q.shape[0]}"
        )
    tp, tq = v_p.sum(), v_q.sum()
    if tp <= 0 or tq <= 0:
        raise ZeroTotal("both count vectors need a positive total")
    return float(np.sum(np.sqrt((v_p / tp) * (v_q / tq))))


def cosine_similarity(v_p, v_q) -> float:
    v_p = np.asarray(v_p, dtype=np.float64).ravel()
    v_q = np.asarray(v_q, dtype=np.float64).ravel()
    if v_p.shape != v_q.shape:
        raise GridMismatch(
            f"count vectors differ in length: {v_p.shape[0]} vs {v_q.shape[0]}"
        )
    np_, nq = math.sqrt(float(v_p @ v_p)), math.sqrt(float(v_q @ v_q))
    if np_ == 0.0 or nq == 0.0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    return float(v_p @ v_q) / (np_ * nq)


def clark_evans(points: np.ndarray, window: ObservationWindow) -> float:
    """Ratio of observed to expected mean nearest-neighbor distance.

    No edge correction is applied, so values are biased upward for small
    patterns; interpret near-1 values as CSR only for large n.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n = len(points)
    if n < 2:
        raise TooFewPoints(f"nearest-neighbor ratio needs >= 2 points, got {n}")
    dists, _ = cKDTree(points).query(points, k=2)
    r_obs = float(dists[:, 1].mean())
    lam = n / window.area()
    return r_obs * 2.0 * math.sqrt(lam)
