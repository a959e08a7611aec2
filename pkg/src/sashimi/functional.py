"""Functional principal component analysis over ensembles of summary curves.

Curves sampled on a shared distance grid are centered, and the empirical
covariance is eigendecomposed with trapezoidal quadrature weights so that
the eigenfunctions are orthonormal under the integral inner product rather
than the plain Euclidean one. Grid points that are NaN in any curve are
dropped before the decomposition and reinstated as NaN padding in the
outputs, so exported curves stay aligned with the original grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGrid, GridMismatch, TooFewCurves

DEFAULT_VAR_TARGET = 0.90

# minimum spectrum size worth decomposing; fewer grid points than this
# cannot support the two-component output the feature tables expect
MIN_USABLE_COLUMNS = 3


@dataclass(frozen=True)
class CurveEnsemble:
    """A stack of curves, one per image, on a common distance grid.

    ``curves`` has one row per image and one column per grid point; NaN
    entries mark grid points where a curve is undefined (division guards
    in the underlying estimators produce these).
    """

    rgrid: np.ndarray
    curves: np.ndarray

    def __post_init__(self):
        rgrid = np.ascontiguousarray(np.asarray(self.rgrid, dtype=np.float64))
        curves = np.atleast_2d(np.asarray(self.curves, dtype=np.float64))
        if rgrid.ndim != 1:
            raise GridMismatch("rgrid must be one-dimensional")
        if curves.ndim != 2 or curves.shape[1] != rgrid.shape[0]:
            raise GridMismatch(
                f"curves have {curves.shape[-1]} columns but the grid has "
                f"{rgrid.shape[0]} points"
            )
        if rgrid.shape[0] >= 2 and not (np.diff(rgrid) > 0).all():
            raise GridMismatch("rgrid must be strictly increasing")
        rgrid.setflags(write=False)
        curves = np.ascontiguousarray(curves)
        curves.setflags(write=False)
        object.__setattr__(self, "rgrid", rgrid)
        object.__setattr__(self, "curves", curves)

    @property
    def n_curves(self) -> int:
        return self.curves.shape[0]


@dataclass(frozen=True)
class FpcaResult:
    """Decomposition output.

    ``mean_curve`` and ``eigenfunctions`` live on the full input grid with
    NaN at the dropped columns. ``eigenvalues`` and ``variance_explained``
    cover the whole spectrum of the reduced problem; ``scores`` and
    ``eigenfunctions`` hold only the retained leading components.
    """

    rgrid: np.ndarray = field(repr=False)
    mean_curve: np.ndarray = field(repr=False)
    eigenfunctions: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    scores: np.ndarray = field(repr=False)
    variance_explained: np.ndarray = field(repr=False)
    n_retained: int
    kept_columns: np.ndarray = field(repr=False)


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    """Composite trapezoid quadrature weights for a strictly increasing grid."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.shape[0] < 2:
        raise DegenerateGrid("quadrature needs at least two grid points")
    w = np.empty_like(grid)
    w[1:-1] = (grid[2:] - grid[:-2]) / 2.0
    w[0] = (grid[1] - grid[0]) / 2.0
    w[-1] = (grid[-1] - grid[-2]) / 2.0
    return w


def fpca(ensemble: CurveEnsemble, var_target: float = DEFAULT_VAR_TARGET) -> FpcaResult:
    """Karhunen-Loeve decomposition of an ensemble of curves.

    Centers the curves by their pointwise mean, eigendecomposes the
    empirical covariance under trapezoidal quadrature weights, and keeps
    the smallest number of leading components whose cumulative variance
    fraction reaches ``var_target``, never fewer than two so downstream
    feature tables always receive PC1 and PC2.
    """
    if not (0.0 < var_target <= 1.0):
        raise ValueError(f"var_target must lie in (0, 1], got {var_target}")
    curves = ensemble.curves
    n = curves.shape[0]
    if n < 2:
        raise TooFewCurves(f"decomposition needs at least 2 curves, got {n}")

    kept = np.flatnonzero(np.isfinite(curves).all(axis=0))
    if kept.size < MIN_USABLE_COLUMNS:
        raise DegenerateGrid(
            f"only {kept.size} grid points are defined across every curve; "
            f"at least {MIN_USABLE_COLUMNS} are required"
        )
    x = curves[:, kept]
    r = ensemble.rgrid[kept]
    w = trapezoid_weights(r)
    sqrt_w = np.sqrt(w)

    mean = x.mean(axis=0)
    centered = x - mean

    cov = (centered.T @ centered) / (n - 1)
    weighted = cov * sqrt_w[:, None] * sqrt_w[None, :]
    weighted = (weighted + weighted.T) / 2.0
    raw_vals, raw_vecs = np.linalg.eigh(weighted)
    # eigh returns ascending order; tiny negative values are rounding noise
    eigenvalues = np.maximum(raw_vals[::-1], 0.0)
    basis = raw_vecs[:, ::-1]

    cumulative = np.cumsum(eigenvalues)
    total = cumulative[-1]
    if total > 0.0:
        variance_explained = cumulative / total
    else:
        # constant ensemble: nothing to explain, every truncation is exact
        variance_explained = np.ones_like(cumulative)
    reached = np.flatnonzero(variance_explained >= var_target - 1e-12)
    smallest_k = int(reached[0]) + 1 if reached.size else eigenvalues.size
    n_retained = min(max(smallest_k, 2), int(eigenvalues.size))

    # eigenfunctions orthonormal under the quadrature inner product
    phi = basis[:, :n_retained] / sqrt_w[:, None]
    scores = (centered * sqrt_w) @ basis[:, :n_retained]

    # sign convention: each eigenfunction's largest-magnitude entry positive
    for j in range(n_retained):
        peak = int(np.argmax(np.abs(phi[:, j])))
        if phi[peak, j] < 0.0:
            phi[:, j] = -phi[:, j]
            scores[:, j] = -scores[:, j]

    m_full = ensemble.rgrid.shape[0]
    mean_full = np.full(m_full, np.nan)
    mean_full[kept] = mean
    phi_full = np.full((n_retained, m_full), np.nan)
    phi_full[:, kept] = phi.T

    return FpcaResult(
        rgrid=ensemble.rgrid,
        mean_curve=mean_full,
        eigenfunctions=phi_full,
        eigenvalues=eigenvalues,
        scores=scores,
        variance_explained=variance_explained,
        n_retained=n_retained,
        kept_columns=kept,
    )


def score_named_features(stat_name: str, result: FpcaResult) -> dict[str, np.ndarray]:
    """Per-image score columns keyed ``<stat_name>.PC1``, ``<stat_name>.PC2``, ...

    One key per retained component, each holding the score of every image
    for that component, in input order.
    """
    return {
        f"{stat_name}.PC{j + 1}": result.scores[:, j].copy()
        for j in range(result.n_retained)
    }
