"""Implicit-bias diagnostics: normalized margins, decision boundaries, directions."""
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .model import RELU, predict


def particle_scale(ens):
    """(1/m) sum_j |w_j|^2: 2-homogeneous like the predictor, the mass of nu."""
    return float(np.sum(ens.W * ens.W) / ens.m)


def normalized_margin(ens, ds, act=RELU):
    scale = particle_scale(ens)
    if scale == 0:
        raise ValueError("zero ensemble has no normalized margin")
    return float(np.min(ds.ys * predict(ens, ds.xs, act)) / scale)


@dataclass
class MarginTrace:
    times: list = field(default_factory=list)
    normalized_margin: list = field(default_factory=list)
    scale: str = "(1/m) sum_j |w_j|^2"


def margin_trace(traj, ds, act=RELU):
    from .model import Ensemble

    out = MarginTrace()
    for t, W in zip(traj.times, traj.snapshots):
        ens = Ensemble(W)
        if particle_scale(ens) > 0:
            out.times.append(t)
            out.normalized_margin.append(normalized_margin(ens, ds, act))
    return out


def direction_distance(a, b):
    """1 - cosine similarity, in [0, 2]."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("direction of a zero vector is undefined")
    return float(np.clip(1.0 - (a @ b) / (na * nb), 0.0, 2.0))


# --- marching squares ---------------------------------------------------------

# corner order: 0=(i,j) 1=(i+1,j) 2=(i+1,j+1) 3=(i,j+1); edge e joins corner e and e+1
_EDGE_CORNERS = ((0, 1), (1, 2), (2, 3), (3, 0))


def _edge_key(i, j, e):
    # shared edges get the same key from both neighbouring cells
    if e == 0:
        return ("h", i, j)
    if e == 1:
        return ("v", i + 1, j)
    if e == 2:
        return ("h", i, j + 1)
    return ("v", i, j)


def marching_squares(xs, ys, values, level=0.0):
    """Polylines of ``values == level`` on the lattice ``xs`` x ``ys``.

    ``values[i, j]`` sits at ``(xs[i], ys[j])``. Crossings are linearly
    interpolated along cell edges; saddle cells are resolved with the cell
    mean. Returns a list of (k, 2) arrays; closed loops repeat their first point.
    """
    V = np.asarray(values, dtype=np.float64) - level
    nx, ny = V.shape
    points = {}
    adjacency = defaultdict(list)

    def crossing(i, j, e):
        key = _edge_key(i, j, e)
        if key not in points:
            ca, cb = _EDGE_CORNERS[e]
            (ia, ja), (ib, jb) = _corner(i, j, ca), _corner(i, j, cb)
            va, vb = V[ia, ja], V[ib, jb]
            t = va / (va - vb)
            points[key] = np.array([xs[ia] + t * (xs[ib] - xs[ia]),
                                    ys[ja] + t * (ys[jb] - ys[ja])])
        return key

    for i in range(nx - 1):
        for j in range(ny - 1):
            c = [V[_corner(i, j, q)] for q in range(4)]
            above = [v > 0 for v in c]
            edges = [e for e, (a, b) in enumerate(_EDGE_CORNERS) if above[a] != above[b]]
            if not edges:
                continue
            if len(edges) == 2:
                pairs = [tuple(edges)]
            else:
                # saddle: if the centre sides with corners 0 and 2 they are
                # joined, so the contour cuts off corners 1 and 3 separately
                centre_above = sum(c) / 4.0 > 0
                pairs = [(0, 1), (2, 3)] if centre_above == above[0] else [(3, 0), (1, 2)]
            for ea, eb in pairs:
                ka, kb = crossing(i, j, ea), crossing(i, j, eb)
                adjacency[ka].append(kb)
                adjacency[kb].append(ka)
    return _chain(points, adjacency)


def _corner(i, j, q):
    return ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1))[q]


def _chain(points, adjacency):
    seen_edges = set()
    lines = []
    # open polylines start at degree-1 nodes (domain border)
    starts = [k for k, nb in adjacency.items() if len(nb) == 1] + list(adjacency)
    for start in starts:
        for nxt in adjacency[start]:
            if frozenset((start, nxt)) in seen_edges:
                continue
            path = [start]
            prev, cur = start, nxt
            seen_edges.add(frozenset((prev, cur)))
            path.append(cur)
            while True:
                options = [k for k in adjacency[cur] if frozenset((cur, k)) not in seen_edges]
                if not options:
                    break
                prev, cur = cur, options[0]
                seen_edges.add(frozenset((prev, cur)))
                path.append(cur)
                if cur == start:
                    break
            lines.append(np.array([points[k] for k in path]))
    return lines


@dataclass
class BoundaryGrid:
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray  # (len(xs), len(ys))
    polylines: list


def extract_boundary(ens, act=RELU, resolution=128, bias=False, lo=-0.5, hi=0.5):
    """Evaluate the network on a regular grid of [lo, hi]^2 and trace h = 0.

    With ``bias=True`` each grid point is fed as (x1, x2, 1).
    """
    if ens.d - int(bias) != 2:
        raise ValueError("decision boundaries are only extracted for 2-D inputs")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    xs = np.linspace(lo, hi, resolution)
    ys = np.linspace(lo, hi, resolution)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    if bias:
        pts = np.column_stack([pts, np.ones(len(pts))])
    values = predict(ens, pts, act).reshape(resolution, resolution)
    return BoundaryGrid(xs, ys, values, marching_squares(xs, ys, values))


def turning_angles(polyline, min_length=1e-12):
    """Signed turning angles between consecutive segments of one polyline."""
    p = np.asarray(polyline, dtype=np.float64)
    seg = np.diff(p, axis=0)
    seg = seg[np.linalg.norm(seg, axis=1) > min_length]
    closed = len(p) > 2 and np.allclose(p[0], p[-1])
    if closed and len(seg) > 1:
        seg = np.vstack([seg, seg[:1]])
    if len(seg) < 2:
        return np.zeros(0)
    a, b = seg[:-1], seg[1:]
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = np.sum(a * b, axis=1)
    return np.arctan2(cross, dot)


def turning_angle_variance(polylines):
    """Variance of all consecutive-segment turning angles along the boundary.

    Large when the curve is straight except for a few sharp corners
    (piecewise affine), small when turning is spread evenly (smooth).
    """
    angles = np.concatenate([turning_angles(p) for p in polylines] or [np.zeros(0)])
    return float(np.var(angles)) if angles.size else 0.0
