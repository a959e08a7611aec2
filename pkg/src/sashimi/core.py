"""Marked point patterns on rectangular observation windows.

Handles the CSV input format (``x,y,type`` with an optional header), window
inference, type subsetting, and the distance grids shared by the summary
statistic estimators.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadBins, EmptyInput, FileTooLarge, MalformedRow

MAX_INPUT_BYTES = 4 * 1024 * 1024
WINDOW_PAD_FRACTION = 0.01
DEFAULT_GRID_BINS = 512


@dataclass(frozen=True)
class ObservationWindow:
    """Axis-aligned rectangle that contains every point of a pattern.

    Parameters
    ----------
    x_min, x_max, y_min, y_max : float
        Rectangle bounds; both sides must have positive length.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (np.isfinite([self.x_min, self.x_max, self.y_min, self.y_max]).all()):
            raise ValueError("window bounds must be finite")
        if self.x_min >= self.x_max or self.y_min >= self.y_max:
            raise ValueError("window must have positive width and height")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def area(self) -> float:
        return self.width * self.height

    def diameter(self) -> float:
        return float(np.hypot(self.width, self.height))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of points inside or on the boundary."""
        x, y = points[:, 0], points[:, 1]
        return (
            (x >= self.x_min) & (x <= self.x_max)
            & (y >= self.y_min) & (y <= self.y_max)
        )

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        """Distance from each point to the nearest window edge."""
        x, y = points[:, 0], points[:, 1]
        return np.minimum.reduce(
            [x - self.x_min, self.x_max - x, y - self.y_min, self.y_max - y]
        )


def infer_window(points: np.ndarray) -> ObservationWindow:
    """Tight bounding box expanded by 1% of the respective side.

    A degenerate axis (all points share one coordinate) is padded by 1% of
    the other side, or of 1.0 when both collapse, so the window always has
    positive area.
    """
    x_min, y_min = points.min(axis=0)
    x_max, y_max = points.max(axis=0)
    width = x_max - x_min
    height = y_max - y_min
    pad_x = WINDOW_PAD_FRACTION * (width if width > 0 else (height if height > 0 else 1.0))
    pad_y = WINDOW_PAD_FRACTION * (height if height > 0 else (width if width > 0 else 1.0))
    return ObservationWindow(x_min - pad_x, x_max + pad_x, y_min - pad_y, y_max + pad_y)


@dataclass(frozen=True, eq=False)
class MarkedPointPattern:
    """Planar points with one categorical mark (the cell type) each.

    ``points`` is an ``(n, 2)`` float array, ``marks`` an ``(n,)`` array of
    trimmed, nonempty strings. Coincident duplicates are retained. Every
    point must lie inside or on the boundary of ``window``.
    """

    points: np.ndarray
    marks: np.ndarray
    window: ObservationWindow

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 2:
            raise ValueError("points must be an (n, 2) array")
        if not np.isfinite(points).all():
            raise ValueError("point coordinates must be finite")
        marks = np.asarray(self.marks, dtype=np.str_)
        if marks.shape != (points.shape[0],):
            raise ValueError("marks must be one string per point")
        if not self.window.contains(points).all():
            raise ValueError("every point must lie inside the window")
        points.setflags(write=False)
        marks.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "marks", marks)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def intensity(self) -> float:
        """Points per unit area."""
        return self.n / self.window.area()

    def type_set(self) -> list[str]:
        """Distinct mark labels in sorted order."""
        return sorted(set(self.marks.tolist()))

    def type_counts(self) -> dict[str, int]:
        labels, counts = np.unique(self.marks, return_counts=True)
        return dict(zip(labels.tolist(), counts.tolist()))


def subset_by_type(pattern: MarkedPointPattern, label: str) -> MarkedPointPattern:
    """Pattern restricted to one mark, keeping the full window.

    Labels are compared case-sensitively after whitespace trimming. An
    unknown label yields an empty pattern on the same window.
    """
    mask = pattern.marks == label.strip()
    return MarkedPointPattern(pattern.points[mask], pattern.marks[mask], pattern.window)


@dataclass(frozen=True, eq=False)
class DistanceGrid:
    """Strictly increasing distances starting at zero.

    All summary curves produced from one configuration share a single grid
    so they can be compared and combined pointwise.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise BadBins("distance grid needs at least two values")
        if values[0] != 0.0:
            raise ValueError("distance grid must start at 0")
        if not (np.diff(values) > 0).all():
            raise ValueError("distance grid must be strictly increasing")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def count(self) -> int:
        return self.values.size

    @property
    def r_max(self) -> float:
        return float(self.values[-1])

    def is_uniform(self, rel_tol: float = 1e-9) -> bool:
        steps = np.diff(self.values)
        return bool(np.ptp(steps) <= rel_tol * steps[0])


def default_rgrid(window: ObservationWindow, bins: int = DEFAULT_GRID_BINS) -> DistanceGrid:
    """Equally spaced grid from 0 to a quarter of the shorter window side."""
    if not isinstance(bins, (int, np.integer)) or bins < 2:
        raise BadBins(f"bins must be an integer >= 2, got {bins!r}")
    r_max = 0.25 * min(window.width, window.height)
    return DistanceGrid(np.linspace(0.0, r_max, bins))


def _split_lines(text: str) -> list[str]:
    # keep raw lines so error messages can cite 1-based file positions
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def _looks_like_header(fields: list[str]) -> bool:
    try:
        float(fields[0])
        float(fields[1])
    except ValueError:
        return True
    return False


def parse_csv(
    data: bytes,
    max_bytes: int = MAX_INPUT_BYTES,
    window: ObservationWindow | None = None,
) -> MarkedPointPattern:
    """Read a ``x,y,type`` byte stream into a pattern.

    A single header row is detected (first line whose leading fields are
    not numeric), never configured. Blank lines are skipped. When no
    window is supplied one is inferred from the tight bounding box padded
    by 1% per side.

    Raises
    ------
    FileTooLarge
        When ``data`` exceeds ``max_bytes``.
    MalformedRow
        On the first row with a wrong column count, a non-numeric or
        non-finite coordinate, or an empty type label.
    EmptyInput
        When no data rows remain.
    """
    if len(data) > max_bytes:
        raise FileTooLarge(f"input is {len(data)} bytes, limit is {max_bytes}")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data[: exc.start].count(b"\n") + 1
        raise MalformedRow(line, "invalid UTF-8") from exc

    xs: list[float] = []
    ys: list[float] = []
    labels: list[str] = []
    header_seen = False
    first_content = True
    for lineno, line in enumerate(_split_lines(text), start=1):
        if not line.strip():
            continue
        fields = line.split(",")
        if first_content:
            first_content = False
            if len(fields) >= 2 and _looks_like_header(fields):
                header_seen = True
                continue
        if len(fields) != 3:
            raise MalformedRow(lineno, f"expected 3 columns, got {len(fields)}")
        try:
            x = float(fields[0])
            y = float(fields[1])
        except ValueError:
            raise MalformedRow(lineno, "coordinates must be numeric") from None
        if not (np.isfinite(x) and np.isfinite(y)):
            raise MalformedRow(lineno, "coordinates must be finite")
        label = fields[2].strip()
        if not label:
            raise MalformedRow(lineno, "empty type label")
        xs.append(x)
        ys.append(y)
        labels.append(label)

    if not xs:
        raise EmptyInput("header only" if header_seen else "no data rows")
    points = np.column_stack([np.asarray(xs), np.asarray(ys)])
    if window is None:
        window = infer_window(points)
    return MarkedPointPattern(points, np.asarray(labels, dtype=np.str_), window)


def serialize_csv(pattern: MarkedPointPattern) -> bytes:
    """Inverse of :func:`parse_csv`; coordinates keep full precision."""
    rows = ["x,y,type"]
    for (x, y), label in zip(pattern.points, pattern.marks):
        rows.append(f"{float(x)!r},{float(y)!r},{label}")
    return ("\n".join(rows) + "\n").encode("utf-8")
