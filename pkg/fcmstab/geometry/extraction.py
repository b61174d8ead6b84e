"""
Intersection of a boundary curve with a square cell.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from fcmstab.geometry.boundary import Boundary
from fcmstab.geometry.cut import Edge
from fcmstab.utils.constants import MIN_SEGMENT_LENGTH
from fcmstab.utils.logging import global_logger

_BISECTION_STEPS = 60


@dataclass(eq=False)
class CutExtraction:
    """Boundary pieces found inside one cell, in cell coordinates.

    Parameters
    ----------
    A, B : numpy.ndarray or None
        Chord endpoints of the single boundary piece, oriented so the physical
        domain lies on the right of A -> B. None unless segment_count is 1.
    q : float
        Quality ratio |AB| / arclength of the piece, in (0, 1]
    segment_count : int
        Number of disjoint boundary pieces inside the cell
    segments : list
        Oriented chord (A_i, B_i) of every open piece, followed by the polyline
        segments of closed loops
    arclength : float
        Total length of the boundary inside the cell
    closed_loops : int
        Pieces that lie entirely inside the cell and never touch its edges
    """

    A: Optional[np.ndarray]
    B: Optional[np.ndarray]
    q: float
    segment_count: int
    segments: List[Tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    arclength: float = 0.0
    closed_loops: int = 0

    @property
    def is_single_chord(self) -> bool:
        return self.segment_count == 1 and self.closed_loops == 0 and self.A is not None


def cell_box(center, side):
    center = np.asarray(center, dtype=float)
    return center - side / 2, center + side / 2


def _clip(P0, P1, lo, hi):
    """Liang-Barsky clipping of many segments against one box"""
    d = P1 - P0
    n = len(P0)
    u0, u1 = np.zeros(n), np.ones(n)
    enter, leave = np.full(n, -1), np.full(n, -1)
    keep = np.ones(n, dtype=bool)
    constraints = (
        (Edge.LEFT, -d[:, 0], P0[:, 0] - lo[0]),
        (Edge.RIGHT, d[:, 0], hi[0] - P0[:, 0]),
        (Edge.BOTTOM, -d[:, 1], P0[:, 1] - lo[1]),
        (Edge.TOP, d[:, 1], hi[1] - P0[:, 1]),
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        for edge, p, q in constraints:
            keep &= ~((p == 0) & (q < 0))
            u = q / p
            entering = (p < 0) & (u > u0)
            u0 = np.where(entering, u, u0)
            enter = np.where(entering, edge.value, enter)
            leaving = (p > 0) & (u < u1)
            u1 = np.where(leaving, u, u1)
            leave = np.where(leaving, edge.value, leave)
    keep &= u0 <= u1
    return keep, u0, u1, enter, leave


def _outside_distance(points, edge, lo, hi):
    points = np.asarray(points)
    if edge is Edge.LEFT:
        return lo[0] - points[..., 0]
    if edge is Edge.RIGHT:
        return points[..., 0] - hi[0]
    if edge is Edge.BOTTOM:
        return lo[1] - points[..., 1]
    return points[..., 1] - hi[1]


def _snap(point, edge, lo, hi):
    point = np.array(point, dtype=float)
    point = np.clip(point, lo, hi)
    if edge is Edge.LEFT:
        point[0] = lo[0]
    elif edge is Edge.RIGHT:
        point[0] = hi[0]
    elif edge is Edge.BOTTOM:
        point[1] = lo[1]
    else:
        point[1] = hi[1]
    return point


def _crossing(boundary, t_out, t_in, edge, lo, hi):
    """Bisect the curve parameter between an outside and an inside sample"""
    for _ in range(_BISECTION_STEPS):
        t_mid = 0.5 * (t_out + t_in)
        if t_mid in (t_out, t_in):
            break
        if _outside_distance(boundary.point(t_mid), edge, lo, hi) > 0:
            t_out = t_mid
        else:
            t_in = t_mid
    return _snap(boundary.point(0.5 * (t_out + t_in)), edge, lo, hi)


def _nearest_edge(point, lo, hi):
    gaps = [point[0] - lo[0], hi[0] - point[0], point[1] - lo[1], hi[1] - point[1]]
    return [Edge.LEFT, Edge.RIGHT, Edge.BOTTOM, Edge.TOP][int(np.argmin(np.abs(gaps)))]


def _pieces(kept, u1, n):
    """Group clipped polyline segments into connected runs"""
    kept_set = set(kept.tolist())

    def continues(i):
        return u1[i] >= 1.0 and (i + 1) % n in kept_set

    starts = [
        i for i in kept if not ((i - 1) % n in kept_set and continues((i - 1) % n))
    ]
    if not starts:
        return [], [list(kept)]
    runs = []
    for i in starts:
        run = [i]
        while continues(run[-1]):
            run.append((run[-1] + 1) % n)
        runs.append(run)
    return runs, []


def segments_near(boundary: Boundary, center, side):
    """Polyline segments whose bounding boxes overlap the cell"""
    lo, hi = cell_box(center, side)
    _, P = boundary.polyline()
    P1 = np.roll(P, -1, axis=0)
    above = np.all(np.maximum(P, P1) >= lo, axis=1)
    below = np.all(np.minimum(P, P1) <= hi, axis=1)
    near = above & below
    return P[near], P1[near]


def crosses_cell(boundary: Boundary, center, side) -> bool:
    """True when the boundary polyline enters or touches the closed cell"""
    P0, P1 = segments_near(boundary, center, side)
    if len(P0) == 0:
        return False
    lo, hi = cell_box(center, side)
    return bool(_clip(P0, P1, lo, hi)[0].any())


def polygon_orientation(points) -> float:
    """Sign of the shoelace area: +1 for counter-clockwise polygons"""
    x, y = points[:, 0], points[:, 1]
    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    return 1.0 if area >= 0 else -1.0


def extract_cut(center, side, boundary: Boundary) -> Optional[CutExtraction]:
    """Find the pieces of a boundary curve inside a square cell.

    Parameters
    ----------
    center : tuple
        Cell center
    side : float
        Cell side length l
    boundary : Boundary
        Closed, non self-intersecting boundary curve

    Returns
    -------
    CutExtraction or None
        None when the curve does not enter the cell, or only grazes it.
    """
    lo, hi = cell_box(center, side)
    t, P = boundary.polyline()
    n = len(P)
    t_next = np.append(t[1:], 1.0)
    P1 = np.roll(P, -1, axis=0)

    seg_lo = np.minimum(P, P1)
    seg_hi = np.maximum(P, P1)
    near = np.all(seg_hi >= lo, axis=1) & np.all(seg_lo <= hi, axis=1)
    candidates = np.flatnonzero(near)
    if len(candidates) == 0:
        return None

    keep, u0, u1, enter, leave = _clip(P[candidates], P1[candidates], lo, hi)
    full_u0, full_u1 = np.zeros(n), np.zeros(n)
    full_enter, full_leave = np.full(n, -1), np.full(n, -1)
    full_u0[candidates], full_u1[candidates] = u0, u1
    full_enter[candidates], full_leave[candidates] = enter, leave
    kept = candidates[keep]
    if len(kept) == 0:
        return None

    runs, loops = _pieces(kept, full_u1, n)
    ccw = polygon_orientation(P) > 0
    segments, lengths = [], []
    for run in runs:
        first, last = run[0], run[-1]
        entry_edge = (
            Edge(full_enter[first])
            if full_enter[first] >= 0
            else _nearest_edge(P[first], lo, hi)
        )
        exit_edge = (
            Edge(full_leave[last])
            if full_leave[last] >= 0
            else _nearest_edge(P1[last], lo, hi)
        )
        entry = _crossing(boundary, t[first], t_next[first], entry_edge, lo, hi)
        exit_ = _crossing(boundary, t_next[last], t[last], exit_edge, lo, hi)
        path = np.vstack([entry] + [P1[i] for i in run[:-1]] + [exit_])
        length = float(np.sum(np.linalg.norm(np.diff(path, axis=0), axis=1)))
        if length <= MIN_SEGMENT_LENGTH:
            global_logger.warning(
                "Boundary grazes cell centered at %s, piece ignored", tuple(center)
            )
            continue
        # interior lies left of the travel direction of a counter-clockwise curve
        A, B = (exit_, entry) if ccw else (entry, exit_)
        segments.append((A, B))
        lengths.append(length)

    loop_length = 0.0
    for loop in loops:
        loop_length += float(np.sum(np.linalg.norm(P1[loop] - P[loop], axis=1)))
        for i in loop:
            segments.append((P1[i], P[i]) if ccw else (P[i], P1[i]))

    if not segments and not loops:
        return None
    total = float(sum(lengths)) + loop_length
    if len(lengths) == 1 and not loops:
        A, B = segments[0]
        q = min(1.0, float(np.linalg.norm(B - A)) / lengths[0])
        return CutExtraction(A, B, q, 1, segments, total)
    return CutExtraction(
        None, None, 0.0, len(lengths) + len(loops), segments, total, len(loops)
    )
