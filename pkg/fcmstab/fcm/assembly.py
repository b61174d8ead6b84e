"""
Finite cell assembly of the Poisson problem with Nitsche boundary terms.

Volume terms are alpha-weighted: plain Gauss quadrature on uncut cells and
adaptive quadrature on cut cells. Every boundary piece inside a cut cell is
replaced by its chord, which carries the consistency, symmetric consistency
and stabilization terms. Hanging nodes are eliminated by P^T A P.
"""
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, List

import numpy as np
import pandas as pd
import scipy.sparse as sp
from joblib import Parallel, delayed

from fcmstab.estimator.estimator import (
    EstimatePolicy,
    EstimateResult,
    Method,
    estimate_batch,
    local_config,
)
from fcmstab.geometry.cut import from_standard_cell, to_standard_cell
from fcmstab.geometry.extraction import CutExtraction
from fcmstab.modules.eig_oracle import (
    STANDARD_CELL,
    curved_region,
    lambda_oracle,
    lambda_oracle_curved,
    monomials,
    q1_basis_gradients,
    q1_basis_values,
    stiffness_from_moments,
    uncut_stiffness,
)
from fcmstab.modules.quadrature import (
    IntegrationParams,
    LeafStatus,
    integrate_cell,
    integrate_segment,
    line_cut_predicate,
    tensor_gauss_rule,
)
from fcmstab.utils import global_logger
from fcmstab.utils.common import (
    LambdaProviderError,
    ValidationError,
    check_positive,
    chunked,
)
from fcmstab.utils.constants import MIN_SEGMENT_LENGTH, REFERENCE_N_AI, SAFETY_FACTOR


########################################
# Cut geometry
########################################


def chord_config(extraction: CutExtraction, center, side):
    """Standard-cell chord of a single-piece cut, None when the cell needs the curve"""
    if not extraction.is_single_chord:
        return None
    try:
        return local_config(extraction, center, side)
    except ValidationError:
        return None


@dataclass(eq=False)
class CutRegion:
    """Physical part of a cut cell in standard-cell coordinates

    Parameters
    ----------
    classify : callable
        Point-wise physical test
    predicate : callable
        Leaf classifier for adaptive quadrature
    segments : list
        Oriented chords (A, B), physical domain on the right
    """

    classify: Callable
    predicate: Callable
    segments: list


def cut_region(extraction: CutExtraction, center, side, boundary) -> CutRegion:
    config = chord_config(extraction, center, side)
    if config is not None:
        predicate = line_cut_predicate(config)
        return CutRegion(config.is_physical, predicate, [(config.a, config.b)])
    inside, predicate = curved_region(center, side, boundary)
    segments = [
        tuple(to_standard_cell([A, B], center, side)) for A, B in extraction.segments
    ]
    return CutRegion(inside, predicate, segments)


########################################
# Stabilization parameter providers
########################################


class LambdaProvider(ABC):
    """Source of the raw stabilization parameter of every cut cell"""

    def __init__(self, name: str = None):
        self.name = name or type(self).__name__
        self.logger = global_logger

    @abstractmethod
    def estimate(self, mesh, boundary) -> List:
        """One EstimateResult, or the exception raised, per cell of mesh.cut_cells"""
        pass


def _oracle_cell(center, side, extraction, boundary, n_ai, params):
    try:
        config = chord_config(extraction, center, side)
        if config is not None:
            lam = lambda_oracle(config, side, n_ai, params).lam
        else:
            lam = lambda_oracle_curved(
                center, side, boundary, extraction, n_ai, params
            ).lam
        return EstimateResult(lam, Method.ORACLE, extraction.q)
    except Exception as e:
        return e


def _oracle_chunk(items, boundary, n_ai, params):
    return [_oracle_cell(*item, boundary, n_ai, params) for item in items]


class OracleProvider(LambdaProvider):
    """Eigenvalue oracle on every cut cell

    Parameters
    ----------
    n_ai : int
        Adaptive integration depth, by default 20
    params : IntegrationParams, optional
    n_jobs : int
        joblib workers
    """

    def __init__(self, n_ai=REFERENCE_N_AI, params=None, n_jobs=1, chunk_size=64):
        super().__init__("oracle")
        self.n_ai = n_ai
        self.params = params
        self.n_jobs = n_jobs
        self.chunk_size = chunk_size

    def estimate(self, mesh, boundary):
        items = [(*mesh.cell(k), mesh.extractions[k]) for k in mesh.cut_cells]
        results = Parallel(n_jobs=self.n_jobs)(
            delayed(_oracle_chunk)(chunk, boundary, self.n_ai, self.params)
            for chunk in chunked(items, self.chunk_size)
        )
        return [r for chunk in results for r in chunk]


class SurrogateProvider(LambdaProvider):
    """Surrogate network with eigenvalue fallback, see `estimate_batch`"""

    def __init__(self, model, policy: EstimatePolicy = None):
        super().__init__("nn")
        self.model = model
        self.policy = policy or EstimatePolicy()

    def estimate(self, mesh, boundary):
        cells = [mesh.cell(k) for k in mesh.cut_cells]
        return estimate_batch(cells, boundary, self.model, self.policy)


class ConstantProvider(LambdaProvider):
    """The same raw parameter on every cut cell"""

    def __init__(self, value: float):
        super().__init__("constant")
        self.value = float(value)

    def estimate(self, mesh, boundary):
        return [
            EstimateResult(self.value, Method.CONSTANT, mesh.extractions[k].q)
            for k in mesh.cut_cells
        ]


########################################
# Local contributions
########################################


def nitsche_terms(A, B, center, side, lam, g, n_gauss=3):
    """Boundary matrix and load of one chord.

    Parameters
    ----------
    A, B : numpy.ndarray
        Chord on the standard cell, physical domain on the right of A -> B
    center, side :
        The actual cell
    lam : float
        Stabilization parameter already multiplied by the safety factor
    g : callable
        Dirichlet data on physical points

    Returns
    -------
    tuple
        4x4 matrix -phi_i dn(phi_j) - phi_j dn(phi_i) + lam phi_i phi_j and the
        load -g dn(phi_i) + lam phi_i g, integrated along the chord
    """
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    tangent = (B - A) / np.linalg.norm(B - A)
    normal = np.array([-tangent[1], tangent[0]])

    def integrand(xi):
        phi = q1_basis_values(xi)
        dn = q1_basis_gradients(xi) @ normal
        gv = np.asarray(g(from_standard_cell(xi, center, side)), dtype=float)
        n = len(xi)
        return np.column_stack(
            [
                (phi[:, :, None] * dn[:, None, :]).reshape(n, 16),
                (phi[:, :, None] * phi[:, None, :]).reshape(n, 16),
                -gv[:, None] * dn,
                gv[:, None] * phi,
            ]
        )

    # gradients carry 2 / side and the line element side / 2, which cancel
    values = integrate_segment(integrand, A, B, n_gauss)
    consistency, mass = values[:16].reshape(4, 4), values[16:32].reshape(4, 4)
    scale = 0.5 * side
    matrix = -consistency - consistency.T + lam * scale * mass
    load = values[32:36] + lam * scale * values[36:40]
    return matrix, load


def _neumann_load(A, B, center, side, h, n_gauss):
    def integrand(xi):
        hv = np.asarray(h(from_standard_cell(xi, center, side)), dtype=float)
        return hv[:, None] * q1_basis_values(xi)

    return 0.5 * side * integrate_segment(integrand, A, B, n_gauss)


def cut_cell_system(center, side, extraction, lam, problem, p: IntegrationParams):
    """Local stiffness matrix and load vector of one cut cell"""
    region = cut_region(extraction, center, side, problem.boundary)

    def integrand(xi):
        f = np.asarray(problem.f(from_standard_cell(xi, center, side)), dtype=float)
        return np.column_stack([monomials(xi), f[:, None] * q1_basis_values(xi)])

    values = integrate_cell(
        integrand, STANDARD_CELL, region.classify, region.predicate, p
    )
    matrix = stiffness_from_moments(values[:5])
    load = values[5:] * (0.5 * side) ** 2
    for A, B in region.segments:
        A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
        if np.linalg.norm(B - A) <= MIN_SEGMENT_LENGTH:
            continue
        midpoint = from_standard_cell(0.5 * (A + B), center, side)[None, :]
        if problem.is_neumann(midpoint)[0]:
            load = load + _neumann_load(A, B, center, side, problem.h, p.n_gauss_seg)
            continue
        boundary_matrix, boundary_load = nitsche_terms(
            A, B, center, side, lam, problem.g, p.n_gauss_seg
        )
        matrix = matrix + boundary_matrix
        load = load + boundary_load
    return matrix, load


def _cut_chunk(items, problem, p):
    return [cut_cell_system(*item, problem, p) for item in items]


def uncut_loads(centers, sides, f, n_gauss):
    """Source loads of whole cells, shape (cells, 4)"""
    ref_points, ref_weights = tensor_gauss_rule(n_gauss)
    points = centers[:, None, :] + 0.5 * sides[:, None, None] * ref_points[None, :, :]
    values = np.asarray(f(points.reshape(-1, 2)), dtype=float).reshape(len(centers), -1)
    phi = q1_basis_values(ref_points)
    loads = np.einsum("cg,g,gi->ci", values, ref_weights, phi)
    return loads * (0.5 * sides[:, None]) ** 2


########################################
# Global system
########################################


@dataclass(eq=False)
class FcmSystem:
    """Assembled system on the free degrees of freedom

    Parameters
    ----------
    A : scipy.sparse.csr_matrix
        Symmetric matrix P^T A_nodes P
    b : numpy.ndarray
        Load vector P^T b_nodes
    prolongation : scipy.sparse.csr_matrix
        P, maps free values to all node values
    lambdas : pandas.DataFrame
        One record per cut cell: cell, x, y, side, lambda_raw, lambda, method, q
    safety : float
    lambda_seconds : float
        Wall-clock of the stabilization parameter pass
    """

    A: sp.csr_matrix
    b: np.ndarray
    prolongation: sp.csr_matrix
    lambdas: pd.DataFrame
    safety: float
    lambda_seconds: float = 0.0

    @property
    def n_dofs(self) -> int:
        return self.A.shape[0]

    def expand(self, u_free) -> np.ndarray:
        """Values at every node, hanging nodes interpolated"""
        return self.prolongation @ np.asarray(u_free, dtype=float)


def _lambda_records(mesh, provider, boundary, safety):
    cut = mesh.cut_cells
    start = time.perf_counter()
    results = provider.estimate(mesh, boundary)
    seconds = time.perf_counter() - start
    if len(results) != len(cut):
        raise ValidationError(
            f"{provider.name} returned {len(results)} estimates "
            f"for {len(cut)} cut cells"
        )
    rows = []
    for k, result in zip(cut, results):
        if isinstance(result, Exception):
            raise LambdaProviderError(mesh.cell(k), result)
        center, side = mesh.cell(k)
        rows.append(
            (
                int(k),
                center[0],
                center[1],
                side,
                result.lambda_raw,
                result.lambda_raw * safety,
                result.method.value,
                result.q,
            )
        )
    records = pd.DataFrame(
        rows, columns=["cell", "x", "y", "side", "lambda_raw", "lambda", "method", "q"]
    )
    records.name = "lambda_records"
    return records, seconds


def assemble(
    mesh,
    problem,
    provider: LambdaProvider,
    safety: float = SAFETY_FACTOR,
    p: IntegrationParams = None,
    n_jobs: int = 1,
    chunk_size: int = 64,
) -> FcmSystem:
    """Assemble the finite cell system of `problem` on `mesh`.

    Parameters
    ----------
    mesh : QuadtreeMesh
    problem : PoissonProblem
    provider : LambdaProvider
        Raw stabilization parameter per cut cell
    safety : float
        Multiplier applied to every raw parameter, by default 2
    p : IntegrationParams, optional
        Volume and boundary quadrature settings
    n_jobs : int
        joblib workers for the cut cells; the result does not depend on it

    Raises
    ------
    LambdaProviderError
        If the provider fails on a cut cell
    """
    p = p or IntegrationParams()
    check_positive(safety, "safety")
    records, seconds = _lambda_records(mesh, provider, problem.boundary, safety)
    n_nodes = len(mesh.nodes)
    rows, cols, vals = [], [], []
    load = np.zeros(n_nodes)

    def scatter(nodes, matrices, loads):
        rows.append(np.repeat(nodes, 4, axis=1).ravel())
        cols.append(np.tile(nodes, (1, 4)).ravel())
        vals.append(np.asarray(matrices).ravel())
        np.add.at(load, nodes.ravel(), np.asarray(loads).ravel())

    uncut = np.flatnonzero(mesh.status != LeafStatus.CUT)
    if len(uncut):
        weight = np.where(mesh.status[uncut] == LeafStatus.INSIDE, 1.0, p.alpha_fict)
        matrices = weight[:, None, None] * uncut_stiffness()[None, :, :]
        loads = weight[:, None] * uncut_loads(
            mesh.cell_centers[uncut],
            mesh.cell_sides[uncut],
            problem.f,
            max(p.n_gauss, 2),
        )
        scatter(mesh.cell_nodes[uncut], matrices, loads)

    cut = mesh.cut_cells
    if len(cut):
        items = [
            (*mesh.cell(k), mesh.extractions[k], lam)
            for k, lam in zip(cut, records["lambda"].to_numpy())
        ]
        chunks = Parallel(n_jobs=n_jobs)(
            delayed(_cut_chunk)(chunk, problem, p)
            for chunk in chunked(items, chunk_size)
        )
        local = [entry for chunk in chunks for entry in chunk]
        scatter(
            mesh.cell_nodes[cut],
            np.stack([m for m, _ in local]),
            np.stack([b for _, b in local]),
        )

    A_nodes = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_nodes, n_nodes),
    ).tocsr()
    P = mesh.prolongation()
    A = (P.T @ A_nodes @ P).tocsr()
    A = ((A + A.T) * 0.5).tocsr()
    b = P.T @ load
    global_logger.info(
        "Assembled %d dofs, %d cut cells, %s lambda pass in %.3f s",
        A.shape[0],
        len(cut),
        provider.name,
        seconds,
    )
    return FcmSystem(A, b, P, records, safety, seconds)
