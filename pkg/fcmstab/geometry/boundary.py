"""
Closed boundary curves of the physical domain.

Every boundary is a closed parametric curve gamma(t), t in [0, 1), together
with a vectorized inside predicate. A polyline approximation, refined where the
curve bends, is cached for clipping against cells.
"""
from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np
from matplotlib.path import Path

from fcmstab.utils.common import ValidationError


class Boundary(ABC):
    """Base class for closed boundary curves

    Parameters
    ----------
    name : str
        Label of the boundary, used in reports
    polyline_tol : float
        Maximum deviation between the curve and its cached polyline, relative
        to the diameter of the curve, by default 1e-7
    """

    def __init__(self, name: str, polyline_tol: float = 1e-7):
        self.name = name
        self.polyline_tol = polyline_tol
        self._polyline = None

    @abstractmethod
    def point(self, t) -> np.ndarray:
        """Curve points for parameters t in [0, 1), shape (..., 2)"""
        pass

    @abstractmethod
    def inside(self, points) -> np.ndarray:
        """Boolean mask of points inside the physical domain"""
        pass

    @property
    @abstractmethod
    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        pass

    def outward_normal(self, t) -> np.ndarray:
        """Unit outward normal, assuming a counter-clockwise parametrization"""
        h = 1e-7
        tangent = self.point(np.asarray(t) + h) - self.point(np.asarray(t) - h)
        tangent /= np.linalg.norm(tangent, axis=-1, keepdims=True)
        return np.stack([tangent[..., 1], -tangent[..., 0]], axis=-1)

    def polyline(self) -> Tuple[np.ndarray, np.ndarray]:
        """Parameters and points of the cached polyline (closed, last != first)"""
        if self._polyline is None:
            self._polyline = self._sample()
        return self._polyline

    def _sample(self, n_start=1024, max_points=2**18):
        lo, hi = self.bounding_box
        tol = self.polyline_tol * float(np.max(hi - lo))
        t = np.linspace(0.0, 1.0, n_start, endpoint=False)
        while True:
            t_next = np.append(t[1:], 1.0)
            mid = 0.5 * (t + t_next)
            p0, p1, pm = self.point(t), self.point(t_next), self.point(mid)
            deviation = np.linalg.norm(pm - 0.5 * (p0 + p1), axis=-1)
            refine = deviation > tol
            if not refine.any() or 2 * len(t) > max_points:
                break
            t = np.sort(np.concatenate([t, mid[refine]]))
        return t, self.point(t)


class CircleBoundary(Boundary):
    def __init__(self, center=(0.0, 0.0), radius=0.5, name="circle"):
        super().__init__(name)
        if radius <= 0:
            raise ValidationError("Circle radius must be positive")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def point(self, t):
        theta = 2 * np.pi * np.asarray(t, dtype=float)
        return self.center + self.radius * np.stack([np.cos(theta), np.sin(theta)], -1)

    def inside(self, points):
        d = np.asarray(points, dtype=float) - self.center
        return np.hypot(d[..., 0], d[..., 1]) < self.radius

    @property
    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius


class FlowerBoundary(Boundary):
    """Star-shaped curve r(theta) = r0 + amplitude * cos(petals * theta)

    Parameters
    ----------
    center : tuple
        Center of the flower, by default the origin
    r0 : float
        Mean radius, by default 0.7
    amplitude : float
        Petal amplitude, must be smaller than r0, by default 0.12
    petals : int
        Number of petals, by default 5
    """

    def __init__(
        self, center=(0.0, 0.0), r0=0.7, amplitude=0.12, petals=5, name="flower"
    ):
        super().__init__(name)
        if not 0 <= amplitude < r0:
            raise ValidationError("Flower amplitude must lie in [0, r0)")
        self.center = np.asarray(center, dtype=float)
        self.r0 = float(r0)
        self.amplitude = float(amplitude)
        self.petals = int(petals)

    def radius(self, theta):
        return self.r0 + self.amplitude * np.cos(self.petals * theta)

    def point(self, t):
        theta = 2 * np.pi * np.asarray(t, dtype=float)
        r = self.radius(theta)
        return self.center + np.stack([r * np.cos(theta), r * np.sin(theta)], -1)

    def inside(self, points):
        d = np.asarray(points, dtype=float) - self.center
        theta = np.arctan2(d[..., 1], d[..., 0])
        return np.hypot(d[..., 0], d[..., 1]) < self.radius(theta)

    @property
    def bounding_box(self):
        r = self.r0 + self.amplitude
        return self.center - r, self.center + r


class PolygonBoundary(Boundary):
    """Closed polygon, vertices in counter-clockwise order"""

    def __init__(self, vertices, name="polygon"):
        super().__init__(name)
        self.vertices = np.asarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or len(self.vertices) < 3:
            raise ValidationError("A polygon needs at least three vertices")
        closed = np.vstack([self.vertices, self.vertices[:1]])
        lengths = np.linalg.norm(np.diff(closed, axis=0), axis=1)
        self._knots = np.concatenate([[0.0], np.cumsum(lengths)]) / lengths.sum()
        self._closed = closed
        self._path = Path(closed, closed=True)

    def point(self, t):
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        x = np.interp(t, self._knots, self._closed[:, 0])
        y = np.interp(t, self._knots, self._closed[:, 1])
        return np.stack([x, y], axis=-1)

    def inside(self, points):
        points = np.asarray(points, dtype=float)
        flat = points.reshape(-1, 2)
        return self._path.contains_points(flat).reshape(points.shape[:-1])

    @property
    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def _sample(self, n_start=None, max_points=None):
        # the polygon is its own polyline
        return self._knots[:-1].copy(), self.vertices.copy()
