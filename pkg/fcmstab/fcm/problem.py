"""Poisson model problems on embedded domains"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from fcmstab.geometry.boundary import Boundary, FlowerBoundary
from fcmstab.utils.common import ValidationError

Field = Callable[[np.ndarray], np.ndarray]


def _constant(value) -> Field:
    def field(points):
        return np.full(len(points), float(value))

    return field


@dataclass
class PoissonProblem:
    """-laplace(u) = f in the physical domain, Dirichlet data g on the boundary

    Parameters
    ----------
    box_center : tuple
        Center of the square embedding domain
    box_side : float
        Side of the embedding domain
    boundary : Boundary
        Closed boundary of the physical domain, strictly inside the box
    f : callable
        Source term, vectorized over points of shape (n, 2)
    g : callable
        Dirichlet data
    h : callable, optional
        Neumann data, used on boundary pieces selected by `neumann`
    neumann : callable, optional
        Maps boundary points to True where the Neumann condition holds;
        by default the whole boundary is Dirichlet
    u_exact : callable, optional
        Exact solution, needed for error measurement
    name : str
    """

    box_center: tuple
    box_side: float
    boundary: Boundary
    f: Field
    g: Field
    h: Optional[Field] = None
    neumann: Optional[Callable[[np.ndarray], np.ndarray]] = None
    u_exact: Optional[Field] = None
    name: str = "poisson"

    def __post_init__(self):
        self.box_center = tuple(float(c) for c in self.box_center)
        if self.box_side <= 0:
            raise ValidationError("box_side must be positive")
        lo, hi = self.boundary.bounding_box
        box_lo = np.asarray(self.box_center) - self.box_side / 2
        box_hi = np.asarray(self.box_center) + self.box_side / 2
        if not (np.all(lo > box_lo) and np.all(hi < box_hi)):
            raise ValidationError(
                "The boundary must lie strictly inside the embedding box"
            )
        if (self.neumann is None) != (self.h is None):
            raise ValidationError("Neumann data h and the Neumann selector go together")

    def is_neumann(self, points) -> np.ndarray:
        if self.neumann is None:
            return np.zeros(len(points), dtype=bool)
        return np.asarray(self.neumann(points), dtype=bool)


def manufactured_solution(points):
    return points[:, 0] ** 2 + points[:, 1] ** 2


def flower_problem(
    kind: str = "manufactured", boundary: Boundary = None
) -> PoissonProblem:
    """Flower domain r = 0.7 + 0.12 cos(5 theta) embedded in [-1.2, 1.2]^2

    Parameters
    ----------
    kind : str
        "manufactured" for u = x^2 + y^2, f = -4, or "constant" for u = 1, f = 0
    boundary : Boundary, optional
        Replaces the flower curve
    """
    boundary = boundary or FlowerBoundary()
    if kind == "manufactured":
        return PoissonProblem(
            (0.0, 0.0),
            2.4,
            boundary,
            f=_constant(-4.0),
            g=manufactured_solution,
            u_exact=manufactured_solution,
            name=f"{boundary.name}_manufactured",
        )
    if kind == "constant":
        return PoissonProblem(
            (0.0, 0.0),
            2.4,
            boundary,
            f=_constant(0.0),
            g=_constant(1.0),
            u_exact=_constant(1.0),
            name=f"{boundary.name}_constant",
        )
    raise ValidationError(f"Unknown problem kind {kind!r}")
