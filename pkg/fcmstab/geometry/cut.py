"""
Cut configurations on the standard cell.

The standard cell is the square [-1, 1] x [-1, 1]. A cut configuration is the
oriented chord A -> B of the physical boundary inside a cell, with the physical
region on the right of A -> B.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from fcmstab.utils.common import DegenerateCutError, ValidationError
from fcmstab.utils.constants import MIN_SEGMENT_LENGTH, STANDARD_SIDE, VERTEX_TOL

BOUNDARY_TOL = 1e-12


class Edge(Enum):
    """Edges of the standard cell, in clockwise order starting at the top"""

    TOP = 0
    RIGHT = 1
    BOTTOM = 2
    LEFT = 3


class Side(Enum):
    PHYSICAL = "physical"
    FICTITIOUS = "fictitious"


class StandardCell:
    """The reference square every cut configuration is expressed on"""

    side = STANDARD_SIDE
    half = STANDARD_SIDE / 2
    # clockwise from the top-left vertex
    vertices = np.array([[-1.0, 1.0], [1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]])

    @staticmethod
    def edge_point(edge: Edge, t):
        """Point at arc coordinate t in [0, 2] along an edge, walking clockwise"""
        t = np.asarray(t, dtype=float)
        if edge is Edge.TOP:
            return np.stack([-1.0 + t, np.ones_like(t)], axis=-1)
        if edge is Edge.RIGHT:
            return np.stack([np.ones_like(t), 1.0 - t], axis=-1)
        if edge is Edge.BOTTOM:
            return np.stack([1.0 - t, -np.ones_like(t)], axis=-1)
        return np.stack([-np.ones_like(t), -1.0 + t], axis=-1)


def boundary_distance(p) -> float:
    """Distance of a point inside the standard cell to the cell boundary"""
    x, y = p
    return min(1 - abs(x), 1 - abs(y))


def edge_of(p, tol=VERTEX_TOL) -> Edge:
    """Edge a boundary point lies on.

    A point within `tol` of a vertex belongs to the edge that starts at that
    vertex when walking clockwise, so the top-left vertex belongs to TOP and
    the top-right vertex belongs to RIGHT.
    """
    x, y = p
    if abs(y - 1) <= tol and x < 1 - tol:
        return Edge.TOP
    if abs(x - 1) <= tol and y > -1 + tol:
        return Edge.RIGHT
    if abs(y + 1) <= tol and x > -1 + tol:
        return Edge.BOTTOM
    if abs(x + 1) <= tol and y < 1 - tol:
        return Edge.LEFT
    raise ValidationError(f"Point {tuple(p)} is not on the standard cell boundary")


@dataclass(frozen=True)
class CutConfig:
    """Oriented cut line A -> B on the standard cell.

    Parameters
    ----------
    A : tuple
        Start point, on the cell boundary
    B : tuple
        End point, on the cell boundary and not on the edge of A
    validate : bool
        Whether to check the invariants, by default True. Rotated or mirrored
        copies of a valid configuration skip the check.
    """

    A: Tuple[float, float]
    B: Tuple[float, float]
    validate: bool = True

    def __post_init__(self):
        object.__setattr__(self, "A", (float(self.A[0]), float(self.A[1])))
        object.__setattr__(self, "B", (float(self.B[0]), float(self.B[1])))
        if self.validate:
            self._validate()

    def _validate(self):
        for name, p in (("A", self.A), ("B", self.B)):
            if max(abs(p[0]), abs(p[1])) > 1 + BOUNDARY_TOL:
                raise ValidationError(f"{name}={p} lies outside the standard cell")
            if boundary_distance(p) > BOUNDARY_TOL:
                raise ValidationError(f"{name}={p} is not on the cell boundary")
        if self.length <= MIN_SEGMENT_LENGTH:
            raise DegenerateCutError(f"Cut segment {self.A} -> {self.B} is degenerate")
        if edge_of(self.A) is edge_of(self.B):
            raise ValidationError(
                f"A={self.A} and B={self.B} lie on the same edge "
                f"({edge_of(self.A).name})"
            )

    @property
    def a(self) -> np.ndarray:
        return np.array(self.A)

    @property
    def b(self) -> np.ndarray:
        return np.array(self.B)

    @property
    def length(self) -> float:
        return float(np.hypot(self.B[0] - self.A[0], self.B[1] - self.A[1]))

    @property
    def start_edge(self) -> Edge:
        return edge_of(self.A)

    @property
    def key(self) -> Tuple[float, float, float, float]:
        return (*self.A, *self.B)

    def signed_area(self, points) -> np.ndarray:
        """cross(B - A, p - A); negative on the physical (right) side"""
        points = np.asarray(points, dtype=float)
        dx, dy = self.B[0] - self.A[0], self.B[1] - self.A[1]
        return dx * (points[..., 1] - self.A[1]) - dy * (points[..., 0] - self.A[0])

    def is_physical(self, points) -> np.ndarray:
        """Vectorized right-of test; points on the line count as physical"""
        return self.signed_area(points) <= 0.0


def physical_side(p, c: CutConfig) -> Side:
    """Classify a point against a cut configuration"""
    return Side.PHYSICAL if bool(c.is_physical(p)) else Side.FICTITIOUS


def _rotate_point(p, k):
    x, y = p
    for _ in range(k % 4):
        x, y = -y, x
    return (x, y)


def rotate_config(c: CutConfig, k: int) -> CutConfig:
    """Rotate a configuration by k quarter turns counter-clockwise about the origin"""
    return CutConfig(_rotate_point(c.A, k), _rotate_point(c.B, k), validate=False)


def mirror_config(c: CutConfig) -> CutConfig:
    """Reflect across the vertical axis x = 0.

    Reflection flips orientation, so the endpoints are swapped to keep the
    mirrored physical region on the right of the new A -> B.
    """
    return CutConfig((-c.B[0], c.B[1]), (-c.A[0], c.A[1]), validate=False)


def normalize_config(c: CutConfig) -> Tuple[CutConfig, int]:
    """Rotate a configuration so that its start point lies on the top edge.

    Returns
    -------
    tuple
        The normalized configuration and the number k of counter-clockwise
        quarter turns applied.
    """
    # quarter turns that bring each edge to the top: RIGHT -> TOP is one turn
    k = {Edge.TOP: 0, Edge.RIGHT: 1, Edge.BOTTOM: 2, Edge.LEFT: 3}[edge_of(c.A)]
    if k == 0:
        return c, 0
    return rotate_config(c, k), k


def to_standard_cell(points, center, side):
    """Affine map from a cell of the given center and side to the standard cell"""
    points = np.asarray(points, dtype=float)
    return (points - np.asarray(center, dtype=float)) * (STANDARD_SIDE / side)


def from_standard_cell(points, center, side):
    points = np.asarray(points, dtype=float)
    return points * (side / STANDARD_SIDE) + np.asarray(center, dtype=float)
