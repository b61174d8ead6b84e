"""
Eigenvalue oracle for the Nitsche stabilization parameter of one cutcell.

The local pencil (K, M) is built for the four bilinear shape functions of the
cell: K from the normal gradients along the cut segment, M from the
alpha-weighted stiffness over the cell. The stabilization lower bound is the
largest generalized eigenvalue of K v = lambda M v, restricted to the range of M.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from fcmstab.geometry.cut import CutConfig, to_standard_cell
from fcmstab.geometry.extraction import CutExtraction, segments_near
from fcmstab.modules.quadrature import (
    IntegrationParams,
    curve_cut_predicate,
    integrate_cell,
    integrate_segment,
    line_cut_predicate,
)
from fcmstab.utils.common import DegenerateCutError, SingularPencilError
from fcmstab.utils.constants import MIN_SEGMENT_LENGTH, REFERENCE_N_AI, STANDARD_SIDE
from fcmstab.utils.logging import global_logger

# local node i sits at (NODE_SIGNS[i, 0], NODE_SIGNS[i, 1]) of the reference square
NODE_SIGNS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
STANDARD_CELL = ((0.0, 0.0), STANDARD_SIDE)


@dataclass(eq=False)
class EigenPencil:
    """Local generalized eigenvalue pencil of one cutcell

    Parameters
    ----------
    K : numpy.ndarray
        4x4 boundary normal-gradient matrix
    M : numpy.ndarray
        4x4 alpha-weighted stiffness matrix
    """

    K: np.ndarray
    M: np.ndarray

    def symmetry_error(self) -> float:
        scale = max(np.abs(self.K).max(), np.abs(self.M).max(), 1e-300)
        asymmetry = max(
            np.abs(self.K - self.K.T).max(), np.abs(self.M - self.M.T).max()
        )
        return asymmetry / scale

    def null_space_residual(self) -> float:
        """Relative row sums, zero when constants lie in both null spaces"""
        ones = np.ones(4)
        return max(
            np.abs(self.K @ ones).max() / max(np.abs(self.K).max(), 1e-300),
            np.abs(self.M @ ones).max() / max(np.abs(self.M).max(), 1e-300),
        )


@dataclass(eq=False)
class OracleResult:
    lam: float
    n_ai_used: int
    pencil: EigenPencil


def q1_basis_values(xi) -> np.ndarray:
    """Bilinear nodal shape functions at reference points, shape (..., 4)

    >>> q1_basis_values([0.0, 0.0]).tolist()
    [0.25, 0.25, 0.25, 0.25]
    """
    xi = np.asarray(xi, dtype=float)
    x = 1.0 + xi[..., None, 0] * NODE_SIGNS[:, 0]
    y = 1.0 + xi[..., None, 1] * NODE_SIGNS[:, 1]
    return 0.25 * x * y


def q1_basis_gradients(xi, side=STANDARD_SIDE) -> np.ndarray:
    """Gradients of the bilinear shape functions, shape (..., 4, 2)

    Parameters
    ----------
    xi : array-like
        Points of the reference square [-1, 1]^2
    side : float
        Side of the physical cell, gradients are scaled by 2 / side

    >>> q1_basis_gradients([-1.0, -1.0])[0].tolist()
    [-0.5, -0.5]
    """
    xi = np.asarray(xi, dtype=float)
    dx = 0.25 * NODE_SIGNS[:, 0] * (1.0 + xi[..., None, 1] * NODE_SIGNS[:, 1])
    dy = 0.25 * NODE_SIGNS[:, 1] * (1.0 + xi[..., None, 0] * NODE_SIGNS[:, 0])
    return np.stack([dx, dy], axis=-1) * (STANDARD_SIDE / side)


def monomials(points) -> np.ndarray:
    """[1, x, y, x^2, y^2], enough to integrate products of bilinear gradients"""
    x, y = points[:, 0], points[:, 1]
    return np.column_stack([np.ones_like(x), x, y, x * x, y * y])


def stiffness_from_moments(moments) -> np.ndarray:
    """Reference-cell stiffness matrix of the bilinear basis from region moments.

    With phi_i = (1 + s_i x)(1 + t_i y) / 4 every gradient product is a
    combination of 1, x, y, x^2 and y^2.
    """
    m1, mx, my, mxx, myy = moments
    s, t = NODE_SIGNS[:, 0], NODE_SIGNS[:, 1]
    ss, tt = np.outer(s, s), np.outer(t, t)
    s_sum, t_sum = s[:, None] + s[None, :], t[:, None] + t[None, :]
    x_part = ss * (m1 + t_sum * my + tt * myy)
    y_part = tt * (m1 + s_sum * mx + ss * mxx)
    return (x_part + y_part) / 16.0


def uncut_stiffness() -> np.ndarray:
    """Bilinear stiffness matrix of the full square, independent of its size"""
    return stiffness_from_moments([4.0, 0.0, 0.0, 4.0 / 3.0, 4.0 / 3.0])


def reference_mass() -> np.ndarray:
    """Bilinear mass matrix of the standard cell"""
    base = np.array(
        [[4, 2, 1, 2], [2, 4, 2, 1], [1, 2, 4, 2], [2, 1, 2, 4]], dtype=float
    )
    return base / 9.0


def _normal_gradient_matrix(A, B, n_gauss):
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    tangent = (B - A) / np.linalg.norm(B - A)
    normal = np.array([-tangent[1], tangent[0]])

    def integrand(points):
        gn = q1_basis_gradients(points) @ normal
        return (gn[:, :, None] * gn[:, None, :]).reshape(len(points), 16)

    return integrate_segment(integrand, A, B, n_gauss).reshape(4, 4)


def _symmetrize(matrix):
    return 0.5 * (matrix + matrix.T)


def assemble_pencil(
    c: CutConfig, cell_side: float = STANDARD_SIDE, p: IntegrationParams = None
) -> EigenPencil:
    """Local pencil of a straight cut on a cell of side `cell_side`.

    The configuration is given on the standard cell. M does not depend on the
    cell size, K scales with 2 / cell_side.

    Raises
    ------
    DegenerateCutError
        If |AB| <= 1e-12
    """
    p = p or IntegrationParams()
    if c.length <= MIN_SEGMENT_LENGTH:
        raise DegenerateCutError(f"Cut segment {c.A} -> {c.B} is degenerate")
    K = _normal_gradient_matrix(c.A, c.B, p.n_gauss_seg) * (STANDARD_SIDE / cell_side)
    moments = integrate_cell(
        monomials, STANDARD_CELL, c.is_physical, line_cut_predicate(c), p
    )
    M = stiffness_from_moments(moments)
    return EigenPencil(_symmetrize(K), _symmetrize(M))


def curved_region(center, side, boundary):
    """Inside test and leaf classifier of a boundary, in standard-cell coordinates"""

    def inside(points_std):
        return boundary.inside(points_std * (side / STANDARD_SIDE) + np.asarray(center))

    P0, P1 = segments_near(boundary, center, side)
    predicate = curve_cut_predicate(
        inside, (to_standard_cell(P0, center, side), to_standard_cell(P1, center, side))
    )
    return inside, predicate


def assemble_pencil_curved(
    center, side, boundary, extraction: CutExtraction, p: IntegrationParams = None
) -> EigenPencil:
    """Local pencil of a cell cut by an arbitrary boundary.

    M integrates over the true physical region given by the boundary's inside
    predicate, K sums the normal-gradient terms over the chords of every
    boundary piece inside the cell.
    """
    p = p or IntegrationParams()
    inside, predicate = curved_region(center, side, boundary)
    moments = integrate_cell(monomials, STANDARD_CELL, inside, predicate, p)
    M = stiffness_from_moments(moments)
    K = np.zeros((4, 4))
    for A, B in extraction.segments:
        A_std, B_std = to_standard_cell([A, B], center, side)
        if np.linalg.norm(B_std - A_std) <= MIN_SEGMENT_LENGTH:
            continue
        K += _normal_gradient_matrix(A_std, B_std, p.n_gauss_seg)
    K *= STANDARD_SIDE / side
    return EigenPencil(_symmetrize(K), _symmetrize(M))


def max_gen_eig(pencil: EigenPencil, tau_abs: float = None) -> float:
    """Largest generalized eigenvalue of K v = lambda M v on the range of M.

    M is diagonalized as Q diag(w) Q^T; modes with w <= tau_abs are dropped and
    the kept subspace is whitened before taking the largest eigenvalue of the
    projected K.

    Parameters
    ----------
    pencil : EigenPencil
    tau_abs : float, optional
        Spectral cut-off, by default 1e-14 * max(diag(M))

    Raises
    ------
    SingularPencilError
        If every mode of M falls below the cut-off

    >>> max_gen_eig(EigenPencil(np.diag([2.0, 0, 0, 0]), np.eye(4)))
    2.0
    """
    K, M = np.asarray(pencil.K, dtype=float), np.asarray(pencil.M, dtype=float)
    if tau_abs is None:
        tau_abs = 1e-14 * max(float(np.max(np.diag(M))), 0.0)
    w, Q = np.linalg.eigh(M)
    keep = w > tau_abs
    if not keep.any():
        raise SingularPencilError("Stiffness matrix is numerically zero")
    scale = 1.0 / np.sqrt(w[keep])
    Qk = Q[:, keep]
    S = (Qk.T @ K @ Qk) * scale[:, None] * scale[None, :]
    largest = float(np.linalg.eigvalsh(_symmetrize(S))[-1])
    return max(largest, 0.0)


def lambda_oracle(
    c: CutConfig,
    cell_side: float = STANDARD_SIDE,
    n_ai: int = REFERENCE_N_AI,
    params: IntegrationParams = None,
) -> OracleResult:
    """Ground-truth stabilization lower bound of a straight cut.

    Parameters
    ----------
    c : CutConfig
        Cut configuration on the standard cell
    cell_side : float
        Side l of the actual cell; the result scales with 2 / l
    n_ai : int
        Adaptive integration depth, by default 20
    params : IntegrationParams, optional
        Remaining integration settings; its n_ai is replaced by `n_ai`
    """
    p = (params or IntegrationParams()).with_n_ai(n_ai)
    pencil = assemble_pencil(c, cell_side, p)
    return OracleResult(max_gen_eig(pencil), n_ai, pencil)


def lambda_oracle_curved(
    center, side, boundary, extraction, n_ai=REFERENCE_N_AI, params=None
) -> OracleResult:
    """Oracle on the actual cell for cuts that are not a single straight chord"""
    p = (params or IntegrationParams()).with_n_ai(n_ai)
    pencil = assemble_pencil_curved(center, side, boundary, extraction, p)
    return OracleResult(max_gen_eig(pencil), n_ai, pencil)


def lambda_converged(
    c: CutConfig,
    rel_tol: float = 0.01,
    n_ref: int = REFERENCE_N_AI,
    n_start: int = 3,
    cell_side: float = STANDARD_SIDE,
    params: IntegrationParams = None,
):
    """Smallest depth whose lambda is within `rel_tol` of the reference depth.

    Returns
    -------
    tuple
        (lambda at n_ref, first n_ai >= n_start meeting the tolerance)
    """
    reference = lambda_oracle(c, cell_side, n_ref, params).lam
    for n_ai in range(n_start, n_ref):
        lam = lambda_oracle(c, cell_side, n_ai, params).lam
        if abs(lam - reference) < rel_tol * reference:
            return reference, n_ai
    return reference, max(n_start, n_ref)


def sliver_config(d: float) -> CutConfig:
    """Vertical cut leaving the physical sliver {x > 1 - d}"""
    return CutConfig((1.0 - d, -1.0), (1.0 - d, 1.0))


def sliver_study(
    ks: Sequence[int],
    n_ai_ref: int = REFERENCE_N_AI,
    rel_tol: float = 0.01,
    n_start: int = 3,
) -> pd.DataFrame:
    """Lambda and required integration depth for slivers of width d = 2^-k"""
    rows = []
    for k in ks:
        d = 2.0 ** (-k)
        lam, required = lambda_converged(sliver_config(d), rel_tol, n_ai_ref, n_start)
        rows.append({"k": k, "d": d, "lambda": lam, "n_ai_required": required})
        global_logger.info("sliver d=2^-%d: lambda=%.6e, n_ai=%d", k, lam, required)
    study = pd.DataFrame(rows, columns=["k", "d", "lambda", "n_ai_required"])
    study.name = "sliver_study"
    return study
