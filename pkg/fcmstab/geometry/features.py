"""
Cut-distance features of a cut configuration.

A feature layout is an ordered list of feature points T_i in the standard cell.
The feature vector of a configuration holds the distance of every T_i to the
infinite cut line, clamped from below so that its logarithm stays finite.
"""
import re
from dataclasses import dataclass, field
from typing import List

import numpy as np

from fcmstab.geometry.cut import CutConfig, Edge, StandardCell, edge_of
from fcmstab.utils.common import ValidationError
from fcmstab.utils.constants import DEFAULT_LAYOUT, DISTANCE_CUTOFF

MAX_DISTANCE = 2 * np.sqrt(2)

_TERM_PATTERNS = {
    "vertices": re.compile(r"^Tv$"),
    "near_vertex": re.compile(r"^T\|\(?([0-9.eE+-]+)\)?$"),
    "point": re.compile(r"^T\(\s*([0-9.eE+-]+)\s*,\s*([0-9.eE+-]+)\s*\)$"),
    "linear": re.compile(r"^Tlin\^(\d+)$"),
    "gauss": re.compile(r"^TG\^(\d+)$"),
}


@dataclass
class FeatureLayout:
    """Ordered feature points of the cut-distance representation.

    Boundary points are listed clockwise starting at the top-left vertex, edge
    by edge, sorted by their arc coordinate along the edge. Interior points
    (cell center, Gauss points) follow, row by row from the top.

    Parameters
    ----------
    layout_id : str
        Layout identifier made of terms joined by ``+``:
        ``Tv`` (the four vertices), ``T|d`` (one point at distance d from each
        vertex on each adjacent edge), ``Tlin^k`` (k linearly spaced points per
        edge), ``TG^n`` (n x n Gauss points) and ``T(x,y)`` (a single point).
        By default ``Tv+T|0.002``, 12 points.
    """

    layout_id: str = DEFAULT_LAYOUT
    points: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.points = _build_points(self.layout_id)
        if len(self.points) == 0:
            raise ValidationError(f"Feature layout {self.layout_id!r} has no points")

    @property
    def size(self) -> int:
        return len(self.points)

    def __len__(self):
        return self.size


def _parse_terms(layout_id):
    terms = [t.strip() for t in layout_id.split("+") if t.strip()]
    parsed = []
    for term in terms:
        for kind, pattern in _TERM_PATTERNS.items():
            match = pattern.match(term)
            if match:
                parsed.append((kind, match.groups()))
                break
        else:
            raise ValidationError(
                f"Unknown feature layout term {term!r} in {layout_id!r}"
            )
    return parsed


def _build_points(layout_id) -> np.ndarray:
    arc = set()
    interior: List[np.ndarray] = []
    for kind, args in _parse_terms(layout_id):
        if kind == "vertices":
            arc.add(0.0)
        elif kind == "near_vertex":
            d = float(args[0])
            if not 0 < d < 1:
                raise ValidationError(
                    f"Near-vertex distance must be in (0, 1), got {d}"
                )
            arc.update((d, 2.0 - d))
        elif kind == "linear":
            k = int(args[0])
            arc.update(2.0 * i / (k + 1) for i in range(1, k + 1))
        elif kind == "gauss":
            nodes, _ = np.polynomial.legendre.leggauss(int(args[0]))
            xs = np.sort(nodes)
            for y in xs[::-1]:
                for x in xs:
                    interior.append(np.array([x, y]))
        else:
            p = np.array([float(args[0]), float(args[1])])
            if np.max(np.abs(p)) > 1:
                raise ValidationError(f"Feature point {tuple(p)} is outside the cell")
            interior.append(p)
    ts = sorted(arc)
    boundary = [StandardCell.edge_point(edge, t) for edge in Edge for t in ts]
    return np.array(boundary + interior, dtype=float).reshape(-1, 2)


def line_distances(A, B, points) -> np.ndarray:
    """Distances of points to the infinite lines through A[i], B[i].

    Parameters
    ----------
    A, B : array of shape (n, 2)
        Line endpoints
    points : array of shape (m, 2)

    Returns
    -------
    array of shape (n, m)
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    d = B - A
    length = np.hypot(d[:, 0], d[:, 1])[:, None]
    cross = d[:, 0:1] * (points[None, :, 1] - A[:, 1:2]) - d[:, 1:2] * (
        points[None, :, 0] - A[:, 0:1]
    )
    return np.abs(cross) / length


def cut_distances_batch(A, B, layout: FeatureLayout = None) -> np.ndarray:
    """Clamped cut distances for many normalized configurations at once"""
    layout = layout or FeatureLayout()
    return np.maximum(line_distances(A, B, layout.points), DISTANCE_CUTOFF)


def cut_distances(c: CutConfig, layout: FeatureLayout = None) -> np.ndarray:
    """Feature vector of a normalized configuration.

    Parameters
    ----------
    c : CutConfig
        Configuration with its start point on the top edge
    layout : FeatureLayout, optional
        Feature points, by default the 12-point ``Tv+T|0.002`` layout

    Returns
    -------
    numpy.ndarray
        x_i = max(dist(T_i, line AB), 1e-10), in layout order
    """
    if edge_of(c.A) is not Edge.TOP:
        raise ValidationError(
            f"Configuration must be normalized (start on TOP), got start {c.A}"
        )
    return cut_distances_batch([c.A], [c.B], layout)[0]


def check_feature_vector(x, size=None):
    """Validate the invariants of a feature vector"""
    x = np.asarray(x, dtype=float)
    if size is not None and x.shape[-1] != size:
        raise ValidationError(f"Expected {size} features, got {x.shape[-1]}")
    if np.any(x < DISTANCE_CUTOFF) or np.any(x > MAX_DISTANCE + 1e-12):
        raise ValidationError("Cut distances must lie in [1e-10, 2*sqrt(2)]")
    return x
