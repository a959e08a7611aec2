"""Witness-complex persistent homology over pairs of cell types.

One cell type provides landmarks (subsampled to a cap by farthest-point
selection when large), the other provides witnesses. A simplex on the
landmarks enters the filtration at the smallest radius at which some
witness sits within that radius of every simplex vertex. Persistence of
the resulting filtration is computed over GF(2) up to dimension 1 and
condensed into per-dimension interval statistics.

The reduction is split the standard way: dimension-0 pairs come from a
union-find sweep over edges (equivalent to reducing the vertex-edge
boundary matrix in filtration order), and dimension-1 pairs come from
reducing edge columns against triangle rows in the anti-transposed
matrix, which keeps the number of reduced columns proportional to the
edge count rather than the (much larger) triangle count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.spatial.distance import cdist

from .errors import InvalidFiltration, NoLandmarks, NoWitnesses

DEFAULT_LANDMARK_CAP = 256
DEFAULT_MAX_DIM = 2


@dataclass(frozen=True)
class FilteredComplex:
    """Simplices (vertex ids, padded with -1), values, and dimensions.

    Stored in canonical filtration order: by value, then dimension, then
    lexicographic vertex tuple. Vertex ids within a simplex ascend.
    """

    verts: np.ndarray
    values: np.ndarray
    dims: np.ndarray
    max_dim: int
    max_eps: float

    def __post_init__(self):
        verts = np.ascontiguousarray(np.asarray(self.verts, dtype=np.int32))
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        dims = np.ascontiguousarray(np.asarray(self.dims, dtype=np.int8))
        if verts.ndim != 2 or verts.shape[1] != 3:
            raise InvalidFiltration("simplex array must have shape (m, 3)")
        if len(values) != len(verts) or len(dims) != len(verts):
            raise InvalidFiltration("simplex arrays disagree on length")
        order = np.lexsort((verts[:, 2], verts[:, 1], verts[:, 0], dims, values))
        verts, values, dims = verts[order], values[order], dims[order]
        for arr in (verts, values, dims):
            arr.setflags(write=False)
        object.__setattr__(self, "verts", verts)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dims", dims)

    @property
    def n_simplices(self) -> int:
        return len(self.values)

    def count_of_dim(self, d: int) -> int:
        return int(np.sum(self.dims == d))


@dataclass(frozen=True)
class PersistenceDiagram:
    """Birth-death intervals for dimensions 0 and 1, sorted by (dim, birth, death)."""

    dims: np.ndarray
    births: np.ndarray
    deaths: np.ndarray
    capped: np.ndarray
    max_eps: float

    def __post_init__(self):
        dims = np.asarray(self.dims, dtype=np.int8)
        births = np.asarray(self.births, dtype=np.float64)
        deaths = np.asarray(self.deaths, dtype=np.float64)
        capped = np.asarray(self.capped, dtype=bool)
        order = np.lexsort((deaths, births, dims))
        dims, births, deaths, capped = (
            dims[order],
            births[order],
            deaths[order],
            capped[order],
        )
        for arr in (dims, births, deaths, capped):
            arr.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "births", births)
        object.__setattr__(self, "deaths", deaths)
        object.__setattr__(self, "capped", capped)

    @property
    def n_intervals(self) -> int:
        return len(self.births)

    def for_dim(self, d: int):
        mask = self.dims == d
        return self.births[mask], self.deaths[mask], self.capped[mask]

    def rows(self):
        for d, b, dd, c in zip(self.dims, self.births, self.deaths, self.capped):
            yield int(d), float(b), float(dd), bool(c)


_SUMMARY_STATS = ("min", "max", "mean", "std")
_SUMMARY_FAMILIES = ("birth", "death", "lifetime")


@dataclass(frozen=True)
class PersistenceSummary:
    name_prefix: str
    dim: int
    n_features: int
    stats: dict = field(default_factory=dict)

    def features(self) -> dict:
        out = {}
        for family in _SUMMARY_FAMILIES:
            for stat in _SUMMARY_STATS:
                key = f"{self.name_prefix}_h{self.dim}_{family}_{stat}"
                out[key] = self.stats[(family, stat)]
        out[f"{self.name_prefix}_h{self.dim}_n_features"] = float(self.n_features)
        return out


def farthest_point_sample(points: np.ndarray, cap: int = DEFAULT_LANDMARK_CAP) -> np.ndarray:
    """Max-min subsample of at most ``cap`` points, returned in lexicographic order.

    Selection starts at the lexicographically smallest point and greedily
    adds the point farthest from the chosen set, breaking distance ties
    lexicographically, so the selected set depends only on the point set
    and never on input order.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n = len(points)
    if n <= cap:
        out = points[np.lexsort((points[:, 1], points[:, 0]))]
        return np.ascontiguousarray(out)
    lex = np.lexsort((points[:, 1], points[:, 0]))
    chosen = np.empty(cap, dtype=np.int64)
    chosen[0] = lex[0]
    min_dist = np.hypot(
        points[:, 0] - points[lex[0], 0], points[:, 1] - points[lex[0], 1]
    )
    for k in range(1, cap):
        top = min_dist.max()
        ties = np.flatnonzero(min_dist == top)
        pick = ties[np.lexsort((points[ties, 1], points[ties, 0]))[0]]
        chosen[k] = pick
        np.minimum(
            min_dist,
            np.hypot(points[:, 0] - points[pick, 0], points[:, 1] - points[pick, 1]),
            out=min_dist,
        )
    selected = points[chosen]
    out = selected[np.lexsort((selected[:, 1], selected[:, 0]))]
    return np.ascontiguousarray(out)


@njit(cache=True)
def _triangle_values(adj, edge_val, edge_wit, lm_dist, D, order, dsort, max_eps, tri_a, tri_b, tri_c, tri_v):
    """Exact min-over-witnesses max-distance values for all candidate triangles.

    For each triangle we start from the best value seen at the witnesses
    that realize its three edges (an upper bound), then finish with a
    scan restricted to witnesses in the distance annulus around one
    vertex that could still improve the bound: a witness closer to
    vertex v than (longest side from v) - best is too close to v to be
    within best of the far vertex, and one farther than best cannot
    improve the max either.
    """
    n_lm = adj.shape[0]
    n_w = D.shape[0]
    count = 0
    for a in range(n_lm):
        for b in range(a + 1, n_lm):
            if not adj[a, b]:
                continue
            for c in range(b + 1, n_lm):
                if not (adj[a, c] and adj[b, c]):
                    continue
                lb = edge_val[a, b]
                if edge_val[a, c] > lb:
                    lb = edge_val[a, c]
                if edge_val[b, c] > lb:
                    lb = edge_val[b, c]
                if lb > max_eps:
                    continue
                best = np.inf
                for w in (edge_wit[a, b], edge_wit[a, c], edge_wit[b, c]):
                    m = D[w, a]
                    if D[w, b] > m:
                        m = D[w, b]
                    if D[w, c] > m:
                        m = D[w, c]
                    if m < best:
                        best = m
                if best > lb:
                    # pick the scan vertex with the longest opposite reach
                    la = lm_dist[a, b] if lm_dist[a, b] > lm_dist[a, c] else lm_dist[a, c]
                    lb_r = lm_dist[a, b] if lm_dist[a, b] > lm_dist[b, c] else lm_dist[b, c]
                    lc = lm_dist[a, c] if lm_dist[a, c] > lm_dist[b, c] else lm_dist[b, c]
                    v, o1, o2, reach = a, b, c, la
                    if lb_r > reach:
                        v, o1, o2, reach = b, a, c, lb_r
                    if lc > reach:
                        v, o1, o2, reach = c, a, b, lc
                    lo_cut = reach - best
                    lo = 0
                    hi = n_w
                    while lo < hi:
                        mid = (lo + hi) // 2
                        if dsort[v, mid] < lo_cut:
                            lo = mid + 1
                        else:
                            hi = mid
                    i = lo
                    while i < n_w:
                        dv = dsort[v, i]
                        if dv >= best:
                            break
                        w = order[v, i]
                        m = D[w, o1]
                        if D[w, o2] > m:
                            m = D[w, o2]
                        if dv > m:
                            m = dv
                        if m < best:
                            best = m
                        i += 1
                if best <= max_eps:
                    tri_a[count] = a
                    tri_b[count] = b
                    tri_c[count] = c
                    tri_v[count] = best
                    count += 1
    return count


def build_witness_complex(
    landmarks: np.ndarray,
    witnesses: np.ndarray,
    max_dim: int = DEFAULT_MAX_DIM,
    max_eps: float | None = None,
) -> FilteredComplex:
    """Filtration of simplices on the landmarks, valued by witness coverage.

    A simplex's value is the smallest radius at which some witness is
    within that radius of all its vertices; simplices whose value
    exceeds ``max_eps`` are omitted. The default cap is half the
    diameter of the landmark bounding box (or, when that is degenerate,
    the largest vertex value so that every landmark still enters).
    """
    landmarks = np.asarray(landmarks, dtype=np.float64).reshape(-1, 2)
    witnesses = np.asarray(witnesses, dtype=np.float64).reshape(-1, 2)
    if len(landmarks) == 0:
        raise NoLandmarks("witness complex needs at least one landmark")
    if len(witnesses) == 0:
        raise NoWitnesses("witness complex needs at least one witness")
    if max_dim not in (1, 2):
        raise ValueError(f"max_dim must be 1 or 2, got {max_dim}")

    n_lm = len(landmarks)
    D = np.ascontiguousarray(cdist(witnesses, landmarks))
    vertex_vals = D.min(axis=0)
    if max_eps is None:
        spread_x = landmarks[:, 0].max() - landmarks[:, 0].min()
        spread_y = landmarks[:, 1].max() - landmarks[:, 1].min()
        diag = math.hypot(spread_x, spread_y)
        max_eps = 0.5 * diag if diag > 0.0 else float(vertex_vals.max())
    max_eps = float(max_eps)

    all_verts = []
    all_vals = []
    all_dims = []

    keep_v = vertex_vals <= max_eps
    v_ids = np.flatnonzero(keep_v).astype(np.int32)
    all_verts.append(
        np.column_stack([v_ids, np.full(len(v_ids), -1, np.int32), np.full(len(v_ids), -1, np.int32)])
    )
    all_vals.append(vertex_vals[keep_v])
    all_dims.append(np.zeros(len(v_ids), np.int8))

    if n_lm >= 2:
        edge_val = np.full((n_lm, n_lm), np.inf)
        edge_wit = np.zeros((n_lm, n_lm), np.int32)
        for a in range(n_lm - 1):
            block = np.maximum(D[:, a][:, None], D[:, a + 1 :])
            idx = np.argmin(block, axis=0)
            vals = block[idx, np.arange(block.shape[1])]
            edge_val[a, a + 1 :] = vals
            edge_val[a + 1 :, a] = vals
            edge_wit[a, a + 1 :] = idx
            edge_wit[a + 1 :, a] = idx
        adj = edge_val <= max_eps
        ea, eb = np.nonzero(np.triu(adj, k=1))
        all_verts.append(
            np.column_stack([ea.astype(np.int32), eb.astype(np.int32), np.full(len(ea), -1, np.int32)])
        )
        all_vals.append(edge_val[ea, eb])
        all_dims.append(np.ones(len(ea), np.int8))

        if max_dim == 2 and len(ea):
            cap_tris = math.comb(n_lm, 3)
            tri_a = np.empty(cap_tris, np.int32)
            tri_b = np.empty(cap_tris, np.int32)
            tri_c = np.empty(cap_tris, np.int32)
            tri_v = np.empty(cap_tris, np.float64)
            order = np.ascontiguousarray(np.argsort(D, axis=0, kind="stable").T.astype(np.int32))
            dsort = np.ascontiguousarray(np.sort(D, axis=0).T)
            lm_dist = cdist(landmarks, landmarks)
            n_tri = _triangle_values(
                adj, edge_val, edge_wit, lm_dist, D, order, dsort, max_eps,
                tri_a, tri_b, tri_c, tri_v,
            )
            all_verts.append(
                np.column_stack([tri_a[:n_tri], tri_b[:n_tri], tri_c[:n_tri]])
            )
            all_vals.append(tri_v[:n_tri].copy())
            all_dims.append(np.full(n_tri, 2, np.int8))

    return FilteredComplex(
        np.vstack(all_verts),
        np.concatenate(all_vals),
        np.concatenate(all_dims),
        max_dim,
        max_eps,
    )


@njit(cache=True)
def _reduce_columns(col_starts, col_rows, n_rows, store_cap):
    """GF(2) column reduction with sorted sparse columns.

    Columns arrive in reduction order; each is XOR-merged against stored
    pivot columns until its smallest row is unclaimed (claim it) or the
    column empties. Returns -1 success or the overflowing cursor demand.
    """
    n_cols = len(col_starts) - 1
    pivot_owner = np.full(n_rows, -1, np.int64)
    paired_row = np.full(n_cols, -1, np.int64)
    store_data = np.empty(store_cap, np.int64)
    store_off = np.zeros(n_cols, np.int64)
    store_len = np.zeros(n_cols, np.int64)
    work = np.empty(n_rows, np.int64)
    work2 = np.empty(n_rows, np.int64)
    cursor = 0
    for j in range(n_cols):
        ln = col_starts[j + 1] - col_starts[j]
        for t in range(ln):
            work[t] = col_rows[col_starts[j] + t]
        while ln > 0:
            p = work[0]
            own = pivot_owner[p]
            if own < 0:
                if cursor + ln > store_cap:
                    return np.int64(cursor + ln), pivot_owner, paired_row
                pivot_owner[p] = j
                paired_row[j] = p
                store_off[j] = cursor
                store_len[j] = ln
                for t in range(ln):
                    store_data[cursor + t] = work[t]
                cursor += ln
                break
            o_off = store_off[own]
            o_ln = store_len[own]
            i1 = 0
            i2 = 0
            k = 0
            while i1 < ln and i2 < o_ln:
                x = work[i1]
                y = store_data[o_off + i2]
                if x == y:
                    i1 += 1
                    i2 += 1
                elif x < y:
                    work2[k] = x
                    k += 1
                    i1 += 1
                else:
                    work2[k] = y
                    k += 1
                    i2 += 1
            while i1 < ln:
                work2[k] = work[i1]
                k += 1
                i1 += 1
            while i2 < o_ln:
                work2[k] = store_data[o_off + i2]
                k += 1
                i2 += 1
            tmp = work
            work = work2
            work2 = tmp
            ln = k
    return np.int64(-1), pivot_owner, paired_row


class _UnionFind:
    """Union-find tracking, per component, its eldest vertex (minimum rank)."""

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x


def persistent_homology(fc: FilteredComplex) -> PersistenceDiagram:
    """Reduce the filtration over GF(2) and report dim-0/dim-1 intervals.

    Unpaired classes die at the filtration cap and carry the capped
    flag; finite intervals of zero length are dropped.
    """
    verts, values, dims = fc.verts, fc.values, fc.dims
    if np.any(values < 0) or np.any(~np.isfinite(values)):
        raise InvalidFiltration("filtration values must be finite and nonnegative")
    if np.any(values > fc.max_eps):
        raise InvalidFiltration("filtration value exceeds the cap")

    v_mask = dims == 0
    e_mask = dims == 1
    t_mask = dims == 2
    v_ids = verts[v_mask, 0].astype(np.int64)
    v_vals = values[v_mask]
    if len(np.unique(v_ids)) != len(v_ids):
        raise InvalidFiltration("duplicate vertex")

    # vertex rank = canonical filtration position among vertices
    id_order = np.argsort(v_ids)
    sorted_ids = v_ids[id_order]
    def vertex_rank(ids):
        pos = np.searchsorted(sorted_ids, ids)
        bad = (pos >= len(sorted_ids)) | (sorted_ids[np.clip(pos, 0, len(sorted_ids) - 1)] != ids)
        if np.any(bad):
            raise InvalidFiltration("edge references a vertex missing from the complex")
        return id_order[pos]

    eu = verts[e_mask, 0].astype(np.int64)
    ev = verts[e_mask, 1].astype(np.int64)
    e_vals = values[e_mask]
    n_edges = len(e_vals)
    key_base = int(verts.max()) + 1 if len(verts) else 1
    if n_edges:
        ru = vertex_rank(eu)
        rv = vertex_rank(ev)
        if np.any(e_vals < np.maximum(v_vals[ru], v_vals[rv])):
            raise InvalidFiltration("edge enters the filtration before one of its endpoints")
        edge_keys = eu * key_base + ev
        if len(np.unique(edge_keys)) != n_edges:
            raise InvalidFiltration("duplicate edge")
    else:
        ru = rv = np.empty(0, np.int64)
        edge_keys = np.empty(0, np.int64)

    dims_out = []
    births = []
    deaths = []
    capped = []

    # dimension 0 by union-find over edges in filtration order
    uf = _UnionFind(len(v_ids))
    positive = np.zeros(n_edges, dtype=bool)
    for j in range(n_edges):
        a = uf.find(int(ru[j]))
        b = uf.find(int(rv[j]))
        if a == b:
            positive[j] = True
            continue
        young, old = (a, b) if a > b else (b, a)
        uf.parent[young] = old
        birth = v_vals[young]
        death = e_vals[j]
        if death != birth:
            dims_out.append(0)
            births.append(birth)
            deaths.append(death)
            capped.append(False)
    roots = {uf.find(i) for i in range(len(v_ids))}
    for r in sorted(roots):
        dims_out.append(0)
        births.append(v_vals[r])
        deaths.append(fc.max_eps)
        capped.append(True)

    # dimension 1 by reducing positive-edge columns against triangle rows
    ta = verts[t_mask, 0].astype(np.int64)
    tb = verts[t_mask, 1].astype(np.int64)
    tc = verts[t_mask, 2].astype(np.int64)
    t_vals = values[t_mask]
    n_tri = len(t_vals)
    if n_tri and n_edges:
        edge_sort = np.argsort(edge_keys)
        sorted_edge_keys = edge_keys[edge_sort]

        def edge_rank(u, v):
            keys = u * key_base + v
            pos = np.searchsorted(sorted_edge_keys, keys)
            bad = (pos >= n_edges) | (sorted_edge_keys[np.clip(pos, 0, n_edges - 1)] != keys)
            if np.any(bad):
                raise InvalidFiltration("triangle references an edge missing from the complex")
            return edge_sort[pos]

        f1 = edge_rank(ta, tb)
        f2 = edge_rank(ta, tc)
        f3 = edge_rank(tb, tc)
        face_max = np.maximum(e_vals[f1], np.maximum(e_vals[f2], e_vals[f3]))
        if np.any(t_vals < face_max):
            raise InvalidFiltration("triangle enters the filtration before one of its edges")
        tri_keys = (ta * key_base + tb) * key_base + tc
        if len(np.unique(tri_keys)) != n_tri:
            raise InvalidFiltration("duplicate triangle")

        # cofacet lists per edge, ordered by triangle filtration position
        edge_of_entry = np.concatenate([f1, f2, f3])
        tri_of_entry = np.tile(np.arange(n_tri, dtype=np.int64), 3)
        order = np.lexsort((tri_of_entry, edge_of_entry))
        edge_of_entry = edge_of_entry[order]
        tri_of_entry = tri_of_entry[order]
        cof_starts = np.searchsorted(edge_of_entry, np.arange(n_edges + 1))

        pos_idx = np.flatnonzero(positive)[::-1]  # reverse filtration order
        col_starts = np.zeros(len(pos_idx) + 1, dtype=np.int64)
        col_lens = cof_starts[pos_idx + 1] - cof_starts[pos_idx]
        np.cumsum(col_lens, out=col_starts[1:])
        col_rows = np.empty(col_starts[-1], dtype=np.int64)
        for i, e in enumerate(pos_idx):
            col_rows[col_starts[i] : col_starts[i + 1]] = tri_of_entry[
                cof_starts[e] : cof_starts[e + 1]
            ]
        store_cap = max(2 * len(col_rows), 1024)
        while True:
            status, _, paired_row = _reduce_columns(col_starts, col_rows, n_tri, store_cap)
            if status < 0:
                break
            store_cap = max(2 * store_cap, int(status) + 1024)
        for i, e in enumerate(pos_idx):
            birth = e_vals[e]
            row = paired_row[i]
            if row >= 0:
                death = t_vals[row]
                if death != birth:
                    dims_out.append(1)
                    births.append(birth)
                    deaths.append(death)
                    capped.append(False)
            else:
                dims_out.append(1)
                births.append(birth)
                deaths.append(fc.max_eps)
                capped.append(True)
    else:
        if n_tri and not n_edges:
            raise InvalidFiltration("triangle present without any edges")
        for e in np.flatnonzero(positive):
            dims_out.append(1)
            births.append(e_vals[e])
            deaths.append(fc.max_eps)
            capped.append(True)

    return PersistenceDiagram(
        np.array(dims_out, dtype=np.int8),
        np.array(births, dtype=np.float64),
        np.array(deaths, dtype=np.float64),
        np.array(capped, dtype=bool),
        fc.max_eps,
    )


def persistence_summaries(diagram: PersistenceDiagram, dim: int, name_prefix: str) -> PersistenceSummary:
    """Interval statistics for one dimension, capped deaths taken at the cap."""
    if dim not in (0, 1):
        raise ValueError(f"dim must be 0 or 1, got {dim}")
    b, d, _ = diagram.for_dim(dim)
    n = len(b)
    stats = {}
    families = {"birth": b, "death": d, "lifetime": d - b}
    for family, arr in families.items():
        if n == 0:
            for stat in _SUMMARY_STATS:
                stats[(family, stat)] = float("nan")
        else:
            stats[(family, "min")] = float(arr.min())
            stats[(family, "max")] = float(arr.max())
            stats[(family, "mean")] = float(arr.mean())
            stats[(family, "std")] = float(arr.std())
    return PersistenceSummary(name_prefix, dim, n, stats)


def witness_persistence(
    landmark_points: np.ndarray,
    witness_points: np.ndarray,
    max_dim: int = DEFAULT_MAX_DIM,
    max_eps: float | None = None,
    landmark_cap: int = DEFAULT_LANDMARK_CAP,
) -> PersistenceDiagram:
    """Landmark subsampling, complex construction, and reduction in one call."""
    landmarks = farthest_point_sample(landmark_points, cap=landmark_cap)
    fc = build_witness_complex(landmarks, witness_points, max_dim=max_dim, max_eps=max_eps)
    return persistent_homology(fc)
