"""Alpha-weighted L2 norms of finite cell solutions"""
import numpy as np

from fcmstab.fcm.assembly import cut_region
from fcmstab.geometry.cut import from_standard_cell
from fcmstab.modules.eig_oracle import STANDARD_CELL, q1_basis_values
from fcmstab.modules.quadrature import (
    IntegrationParams,
    LeafStatus,
    integrate_cell,
    tensor_gauss_rule,
)
from fcmstab.utils.common import ValidationError


def _squared_norm(mesh, problem, u, reference, p):
    u = np.asarray(u, dtype=float)
    if len(u) != len(mesh.nodes):
        raise ValidationError(f"Expected {len(mesh.nodes)} nodal values, got {len(u)}")

    def field(points):
        if reference is None:
            return np.zeros(len(points))
        return np.asarray(reference(points), dtype=float)

    total = 0.0
    uncut = np.flatnonzero(mesh.status != LeafStatus.CUT)
    if len(uncut):
        ref_points, ref_weights = tensor_gauss_rule(max(p.n_gauss, 3))
        centers, sides = mesh.cell_centers[uncut], mesh.cell_sides[uncut]
        offsets = 0.5 * sides[:, None, None] * ref_points[None, :, :]
        points = centers[:, None, :] + offsets
        uh = u[mesh.cell_nodes[uncut]] @ q1_basis_values(ref_points).T
        diff = uh - field(points.reshape(-1, 2)).reshape(len(uncut), -1)
        weight = np.where(mesh.status[uncut] == LeafStatus.INSIDE, 1.0, p.alpha_fict)
        per_cell = (diff**2) @ ref_weights * (0.5 * sides) ** 2
        total += float(np.sum(weight * per_cell))

    for k in mesh.cut_cells:
        center, side = mesh.cell(k)
        region = cut_region(mesh.extractions[k], center, side, problem.boundary)
        u_local = u[mesh.cell_nodes[k]]

        def integrand(xi):
            uh = q1_basis_values(xi) @ u_local
            return (uh - field(from_standard_cell(xi, center, side))) ** 2

        squared = integrate_cell(
            integrand, STANDARD_CELL, region.classify, region.predicate, p
        )
        total += squared * (0.5 * side) ** 2
    return total


def l2_error(u, problem, mesh, p: IntegrationParams = None) -> float:
    """sqrt of the alpha-weighted integral of (u_h - u_exact)^2 over the embedding box.

    Parameters
    ----------
    u : numpy.ndarray
        Values at every node of `mesh`, hanging nodes included
    problem : PoissonProblem
        Must carry `u_exact`
    mesh : QuadtreeMesh
    p : IntegrationParams, optional
        Quadrature of the cut cells, the same geometry as the assembly
    """
    if problem.u_exact is None:
        raise ValidationError(f"Problem {problem.name} has no exact solution")
    p = p or IntegrationParams()
    return float(np.sqrt(_squared_norm(mesh, problem, u, problem.u_exact, p)))


def l2_norm(u, problem, mesh, p: IntegrationParams = None) -> float:
    p = p or IntegrationParams()
    return float(np.sqrt(_squared_norm(mesh, problem, u, None, p)))


def relative_l2_difference(u, v, problem, mesh, p: IntegrationParams = None) -> float:
    """||u - v|| / ||v|| in the alpha-weighted L2 norm"""
    reference = l2_norm(v, problem, mesh, p)
    difference = l2_norm(np.asarray(u) - np.asarray(v), problem, mesh, p)
    return difference / reference if reference > 0 else difference
