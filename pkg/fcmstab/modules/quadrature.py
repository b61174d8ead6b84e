"""
Gauss quadrature on segments and adaptive quadtree quadrature on cut cells.

Leaves are processed breadth-first in vectorized batches. A batch holds the
lower-left corners of leaves of one level; CUT leaves are split into four
children until the maximum depth ``n_ai`` is reached. Batches are popped from a
stack in a fixed order, so the summation order (and the result) is
bit-reproducible for a given cell and predicate.
"""
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from fcmstab.utils.common import DegenerateCutError, ValidationError
from fcmstab.utils.constants import ALPHA_FICT, MIN_SEGMENT_LENGTH, REFERENCE_N_AI

MAX_LEAVES_PER_BATCH = 2**15


class LeafStatus(IntEnum):
    INSIDE = 0
    OUTSIDE = 1
    CUT = 2


@dataclass(frozen=True)
class IntegrationParams:
    """Adaptive integration settings

    Parameters
    ----------
    n_ai : int
        Number of adaptive integration levels, in [0, 24], by default 20
    n_gauss : int
        Gauss points per direction on each leaf, in [1, 10], by default 2
    n_gauss_seg : int
        Gauss points on boundary segments, by default 3
    alpha_fict : float
        Weight of the fictitious domain, in (0, 1e-4]. The value 1 is also
        accepted and switches the penalization off. By default 1e-10.
    """

    n_ai: int = REFERENCE_N_AI
    n_gauss: int = 2
    n_gauss_seg: int = 3
    alpha_fict: float = ALPHA_FICT

    def __post_init__(self):
        if not (isinstance(self.n_ai, (int, np.integer)) and 0 <= self.n_ai <= 24):
            raise ValidationError(
                f"n_ai must be an integer in [0, 24], got {self.n_ai}"
            )
        if not 1 <= self.n_gauss <= 10:
            raise ValidationError(f"n_gauss must be in [1, 10], got {self.n_gauss}")
        if not 1 <= self.n_gauss_seg <= 10:
            raise ValidationError(
                f"n_gauss_seg must be in [1, 10], got {self.n_gauss_seg}"
            )
        if not (0 < self.alpha_fict <= 1e-4 or self.alpha_fict == 1.0):
            raise ValidationError(
                f"alpha_fict must be in (0, 1e-4] or exactly 1, got {self.alpha_fict}"
            )

    def with_n_ai(self, n_ai):
        return IntegrationParams(n_ai, self.n_gauss, self.n_gauss_seg, self.alpha_fict)


@lru_cache(maxsize=None)
def gauss_rule(n):
    """Gauss-Legendre nodes and weights on [-1, 1]"""
    nodes, weights = roots_legendre(n)
    return nodes, weights


@lru_cache(maxsize=None)
def tensor_gauss_rule(n):
    """Tensor-product Gauss rule on [-1, 1]^2, points ordered row by row"""
    nodes, weights = gauss_rule(n)
    x, y = np.meshgrid(nodes, nodes, indexing="xy")
    wx, wy = np.meshgrid(weights, weights, indexing="xy")
    points = np.column_stack([x.ravel(), y.ravel()])
    return points, (wx * wy).ravel()


def _leaf_points(x0, y0, h, ref_points):
    px = x0[:, None] + 0.5 * h * (1.0 + ref_points[None, :, 0])
    py = y0[:, None] + 0.5 * h * (1.0 + ref_points[None, :, 1])
    return np.stack([px, py], axis=-1)


def _evaluate(f, points):
    n_leaves, n_points = points.shape[:2]
    values = np.asarray(f(points.reshape(-1, 2)), dtype=float)
    return values.reshape(n_leaves, n_points, -1), values.ndim == 1


def line_cut_predicate(config):
    """Leaf classifier for the half plane right of a cut line.

    The signed form s(p) = cross(B - A, p - A) is linear, so its extreme values
    over a leaf are attained at corners. Leaves touching the line from the
    fictitious side are OUTSIDE, points on the line count as physical.
    """
    ax, ay = config.A
    dx, dy = config.B[0] - ax, config.B[1] - ay
    a, b, c = -dy, dx, dy * ax - dx * ay

    def predicate(x0, y0, h):
        s0 = a * x0 + b * y0 + c
        s_min = s0 + min(0.0, a * h) + min(0.0, b * h)
        s_max = s0 + max(0.0, a * h) + max(0.0, b * h)
        status = np.full(len(x0), LeafStatus.CUT, dtype=np.int8)
        status[s_min >= 0] = LeafStatus.OUTSIDE
        status[s_max <= 0] = LeafStatus.INSIDE
        return status

    return predicate


def curve_cut_predicate(inside, segments):
    """Leaf classifier for an arbitrary domain.

    A leaf is CUT when its corners disagree under `inside` or when one of the
    boundary polyline segments crosses it. Corner tests alone miss thin slivers.

    Parameters
    ----------
    inside : callable
        Vectorized predicate on points of shape (n, 2)
    segments : tuple of numpy.ndarray
        Start and end points of the boundary polyline segments near the cell
    """
    P0, P1 = (np.asarray(s, dtype=float).reshape(-1, 2) for s in segments)
    seg_lo, seg_hi = np.minimum(P0, P1), np.maximum(P0, P1)
    d = P1 - P0

    def predicate(x0, y0, h):
        corners = np.stack(
            [
                np.column_stack([x0, y0]),
                np.column_stack([x0 + h, y0]),
                np.column_stack([x0, y0 + h]),
                np.column_stack([x0 + h, y0 + h]),
            ],
            axis=1,
        )
        flags = inside(corners.reshape(-1, 2)).reshape(-1, 4)
        all_in, all_out = flags.all(axis=1), ~flags.any(axis=1)
        crossed = np.zeros(len(x0), dtype=bool)
        if len(P0):
            overlap = (
                (seg_hi[None, :, 0] >= x0[:, None])
                & (seg_lo[None, :, 0] <= x0[:, None] + h)
                & (seg_hi[None, :, 1] >= y0[:, None])
                & (seg_lo[None, :, 1] <= y0[:, None] + h)
            )
            side = d[None, None, :, 0] * (
                corners[:, :, None, 1] - P0[None, None, :, 1]
            ) - d[None, None, :, 1] * (corners[:, :, None, 0] - P0[None, None, :, 0])
            straddle = ~((side > 0).all(axis=1) | (side < 0).all(axis=1))
            crossed = (overlap & straddle).any(axis=1)
        status = np.full(len(x0), LeafStatus.CUT, dtype=np.int8)
        status[all_in & ~crossed] = LeafStatus.INSIDE
        status[all_out & ~crossed] = LeafStatus.OUTSIDE
        return status

    return predicate


def integrate_cell(f, cell, classify, cut_predicate, p: IntegrationParams = None):
    """Adaptive quadtree integration of an alpha-weighted integrand.

    Parameters
    ----------
    f : callable
        Vectorized integrand, maps points of shape (n, 2) to values of shape
        (n,) or (n, k)
    cell : tuple
        (center, side) of the square cell
    classify : callable
        Maps points of shape (n, 2) to a boolean array, True on the physical side
    cut_predicate : callable
        Maps leaf corners (x0, y0) and leaf side h to LeafStatus codes
    p : IntegrationParams, optional
        By default ``IntegrationParams()``

    Returns
    -------
    float or numpy.ndarray
        The integral, a float for scalar integrands
    """
    p = p or IntegrationParams()
    center, side = cell
    ref_points, ref_weights = tensor_gauss_rule(p.n_gauss)
    alpha = p.alpha_fict

    total = 0.0
    scalar = True
    stack = [(0, np.array([center[0] - side / 2]), np.array([center[1] - side / 2]))]
    while stack:
        level, x0, y0 = stack.pop()
        h = side / 2**level
        status = cut_predicate(x0, y0, h)
        leaf_weights = ref_weights * (0.5 * h) ** 2
        for code, scale in ((LeafStatus.INSIDE, 1.0), (LeafStatus.OUTSIDE, alpha)):
            mask = status == code
            if mask.any():
                points = _leaf_points(x0[mask], y0[mask], h, ref_points)
                values, scalar = _evaluate(f, points)
                total = total + scale * np.einsum("lgk,g->k", values, leaf_weights)
        cut = status == LeafStatus.CUT
        if not cut.any():
            continue
        cx, cy = x0[cut], y0[cut]
        if level >= p.n_ai:
            points = _leaf_points(cx, cy, h, ref_points)
            values, scalar = _evaluate(f, points)
            physical = np.asarray(classify(points.reshape(-1, 2))).reshape(len(cx), -1)
            weights = np.where(physical, 1.0, alpha) * leaf_weights[None, :]
            total = total + np.einsum("lgk,lg->k", values, weights)
            continue
        half = h / 2
        children_x = np.concatenate([cx, cx + half, cx, cx + half])
        children_y = np.concatenate([cy, cy, cy + half, cy + half])
        starts = range(0, len(children_x), MAX_LEAVES_PER_BATCH)
        for start in reversed(starts):
            stop = start + MAX_LEAVES_PER_BATCH
            stack.append((level + 1, children_x[start:stop], children_y[start:stop]))
    total = np.atleast_1d(np.asarray(total, dtype=float))
    return float(total[0]) if scalar else total


def integrate_segment(f, A, B, n=3):
    """n-point Gauss-Legendre integral of f along the segment A -> B

    >>> round(integrate_segment(lambda p: np.ones(len(p)), (0, 0), (3, 4)), 12)
    5.0
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    length = float(np.linalg.norm(B - A))
    if length <= MIN_SEGMENT_LENGTH:
        raise DegenerateCutError(f"Segment {tuple(A)} -> {tuple(B)} is degenerate")
    nodes, weights = gauss_rule(n)
    points = 0.5 * (A + B) + 0.5 * nodes[:, None] * (B - A)
    values = np.asarray(f(points), dtype=float)
    if values.ndim == 1:
        return float(0.5 * length * np.dot(weights, values))
    return 0.5 * length * np.einsum("g,gk->k", weights, values.reshape(n, -1))
