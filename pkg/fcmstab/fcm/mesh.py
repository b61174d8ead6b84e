"""
Quadtree mesh of the embedding box with refinement towards the boundary.

Leaves are integer triples (level, i, j): the cell of the uniform grid of
level `level` in column i and row j. Nodes live on the grid of the finest
level, so every corner has integer coordinates (I, J) in [0, 2^l_max].
"""
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
import scipy.sparse as sp

from fcmstab.geometry.extraction import CutExtraction, crosses_cell, extract_cut
from fcmstab.modules.quadrature import LeafStatus
from fcmstab.utils import global_logger
from fcmstab.utils.common import ValidationError
from fcmstab.utils.constants import VERTEX_TOL

MAX_LEVEL = 24
CHILD_OFFSETS = ((0, 0), (1, 0), (0, 1), (1, 1))
FACE_OFFSETS = ((-1, 0), (1, 0), (0, -1), (0, 1))
# corner offsets in the local node order of the bilinear basis
CORNER_OFFSETS = np.array([[0, 0], [1, 0], [1, 1], [0, 1]])
# (edge midpoint offset in half sides, local parent nodes)
EDGE_MIDPOINTS = (
    ((1, 0), (0, 1)),
    ((2, 1), (1, 2)),
    ((1, 2), (3, 2)),
    ((0, 1), (0, 3)),
)

Leaf = Tuple[int, int, int]


def children(leaf: Leaf) -> List[Leaf]:
    level, i, j = leaf
    return [(level + 1, 2 * i + di, 2 * j + dj) for di, dj in CHILD_OFFSETS]


@dataclass(eq=False)
class QuadtreeMesh:
    """Balanced quadtree with bilinear nodes and hanging-node constraints

    Parameters
    ----------
    center : tuple
        Center of the root box
    side : float
        Side of the root box
    l_min, l_max : int
        Uniform and maximum refinement levels
    leaves : numpy.ndarray
        (n, 3) integer array of (level, i, j), sorted
    status : numpy.ndarray
        LeafStatus code of every leaf
    extractions : dict
        Boundary pieces of every CUT leaf, keyed by leaf index
    nodes : numpy.ndarray
        (m, 2) integer node coordinates on the finest grid
    cell_nodes : numpy.ndarray
        (n, 4) node ids of every leaf in local basis order
    constraints : dict
        Hanging node id -> {free node id: weight}, already resolved
    """

    center: tuple
    side: float
    l_min: int
    l_max: int
    leaves: np.ndarray
    status: np.ndarray
    extractions: Dict[int, CutExtraction]
    nodes: np.ndarray
    cell_nodes: np.ndarray
    constraints: Dict[int, Dict[int, float]] = field(default_factory=dict)

    def __len__(self):
        return len(self.leaves)

    @property
    def cell_sides(self) -> np.ndarray:
        return self.side / 2.0 ** self.leaves[:, 0]

    @property
    def cell_centers(self) -> np.ndarray:
        sides = self.cell_sides
        origin = np.asarray(self.center) - self.side / 2
        return origin + (self.leaves[:, 1:] + 0.5) * sides[:, None]

    def cell(self, k):
        """(center, side) of leaf k"""
        center, side = _cell_of(tuple(self.leaves[k]), self.center, self.side)
        return (float(center[0]), float(center[1])), float(side)

    @property
    def node_coordinates(self) -> np.ndarray:
        h = self.side / 2**self.l_max
        return np.asarray(self.center) - self.side / 2 + self.nodes * h

    @property
    def cut_cells(self) -> np.ndarray:
        return np.flatnonzero(self.status == LeafStatus.CUT)

    @property
    def free_nodes(self) -> np.ndarray:
        hanging = np.zeros(len(self.nodes), dtype=bool)
        hanging[list(self.constraints)] = True
        return np.flatnonzero(~hanging)

    @property
    def n_dofs(self) -> int:
        return len(self.nodes) - len(self.constraints)

    def prolongation(self) -> sp.csr_matrix:
        """Sparse P with u_nodes = P u_free"""
        free = self.free_nodes
        column = np.full(len(self.nodes), -1)
        column[free] = np.arange(len(free))
        rows, cols, vals = list(free), list(range(len(free))), [1.0] * len(free)
        for node in sorted(self.constraints):
            for parent, weight in sorted(self.constraints[node].items()):
                rows.append(node)
                cols.append(column[parent])
                vals.append(weight)
        return sp.csr_matrix((vals, (rows, cols)), shape=(len(self.nodes), len(free)))

    def is_balanced(self) -> bool:
        """Face neighbors differ by at most one level"""
        keys = set(map(tuple, self.leaves.tolist()))
        for level, i, j in keys:
            for di, dj in FACE_OFFSETS:
                ni, nj = i + di, j + dj
                if not (0 <= ni < 2**level and 0 <= nj < 2**level):
                    continue
                covering = _covering_leaf(keys, level, ni, nj)
                if covering is not None and covering[0] < level - 1:
                    return False
        return True

    def statistics(self) -> dict:
        levels = self.leaves[:, 0]
        return {
            "cells": len(self),
            "inside": int(np.sum(self.status == LeafStatus.INSIDE)),
            "outside": int(np.sum(self.status == LeafStatus.OUTSIDE)),
            "cutcells": int(np.sum(self.status == LeafStatus.CUT)),
            "nodes": len(self.nodes),
            "hanging_nodes": len(self.constraints),
            "dofs": self.n_dofs,
            "min_level": int(levels.min()),
            "max_level": int(levels.max()),
        }


def _covering_leaf(keys, level, i, j):
    """Leaf containing the level-`level` cell (i, j), None if that cell is refined"""
    for up in range(level + 1):
        key = (level - up, i >> up, j >> up)
        if key in keys:
            return key
    return None


def _cell_of(leaf, center, side):
    level, i, j = leaf
    h = side / 2**level
    origin = np.asarray(center) - side / 2
    return origin + (np.array([i, j]) + 0.5) * h, h


def _crossed_cells(boundary, center, side, l_max):
    """Cells crossed by the boundary polyline, per level"""
    root = (0, 0, 0)
    root_crossed = crosses_cell(boundary, *_cell_of(root, center, side))
    crossed = [{root} if root_crossed else set()]
    for _ in range(l_max):
        level_set = set()
        for leaf in sorted(crossed[-1]):
            for child in children(leaf):
                if crosses_cell(boundary, *_cell_of(child, center, side)):
                    level_set.add(child)
        crossed.append(level_set)
    return crossed


def _balance(keys: set) -> int:
    """Refine leaves until face neighbors differ by at most one level"""
    splits = 0
    stack = sorted(keys, reverse=True)
    while stack:
        leaf = stack.pop()
        if leaf not in keys:
            continue
        level, i, j = leaf
        for di, dj in FACE_OFFSETS:
            ni, nj = i + di, j + dj
            if not (0 <= ni < 2**level and 0 <= nj < 2**level):
                continue
            while True:
                covering = _covering_leaf(keys, level, ni, nj)
                if covering is None or covering[0] >= level - 1:
                    break
                keys.remove(covering)
                new = children(covering)
                keys.update(new)
                stack.extend(new)
                splits += 1
    return splits


def _on_one_edge(A, B, lo, hi, tol):
    for k in range(2):
        for bound in (lo[k], hi[k]):
            if abs(A[k] - bound) <= tol and abs(B[k] - bound) <= tol:
                return True
    return False


def _resolve(node, parents, memo):
    if node not in parents:
        return {node: 1.0}
    if node not in memo:
        weights = {}
        for parent in parents[node]:
            for free, w in _resolve(parent, parents, memo).items():
                weights[free] = weights.get(free, 0.0) + 0.5 * w
        memo[node] = weights
    return memo[node]


def build_mesh(problem, l_min: int, l_max: int) -> QuadtreeMesh:
    """Refine the embedding box of `problem` towards its boundary.

    The box is refined uniformly to `l_min`, every cell crossed by the
    boundary is refined to `l_max`, and the tree is 2:1 balanced across faces.
    Cells the boundary only grazes are classified by their center.

    Parameters
    ----------
    problem : PoissonProblem
    l_min, l_max : int
        0 <= l_min <= l_max <= 24

    Returns
    -------
    QuadtreeMesh
    """
    if not 0 <= l_min <= l_max <= MAX_LEVEL:
        raise ValidationError(
            f"Levels must satisfy 0 <= l_min <= l_max <= {MAX_LEVEL}, "
            f"got {l_min}, {l_max}"
        )
    center, side, boundary = problem.box_center, problem.box_side, problem.boundary
    crossed = _crossed_cells(boundary, center, side, l_max)

    keys = set()
    for i in range(2**l_min):
        for j in range(2**l_min):
            leaf = (l_min, i, j)
            if leaf not in crossed[l_min] or l_min == l_max:
                keys.add(leaf)
    for level in range(l_min, l_max):
        for leaf in crossed[level]:
            for child in children(leaf):
                if child not in crossed[level + 1] or level + 1 == l_max:
                    keys.add(child)
    splits = _balance(keys)

    leaves = np.array(sorted(keys), dtype=np.int64).reshape(-1, 3)
    mesh_h = side / 2**l_max
    origin = np.asarray(center) - side / 2
    scale = 2 ** (l_max - leaves[:, 0])
    centers = origin + (leaves[:, 1:] + 0.5) * (scale * mesh_h)[:, None]
    sides = scale * mesh_h

    status = np.where(boundary.inside(centers), LeafStatus.INSIDE, LeafStatus.OUTSIDE)
    status = status.astype(np.int8)
    extractions = {}
    crossed_leaves = crossed[l_max]
    for k, leaf in enumerate(map(tuple, leaves.tolist())):
        if leaf not in crossed_leaves:
            continue
        extraction = extract_cut(centers[k], sides[k], boundary)
        if extraction is None:
            continue
        if extraction.is_single_chord:
            lo, hi = centers[k] - sides[k] / 2, centers[k] + sides[k] / 2
            tol = VERTEX_TOL * max(1.0, sides[k])
            # a piece running along an edge belongs to the neighbor on its physical side
            if _on_one_edge(extraction.A, extraction.B, lo, hi, tol):
                continue
        status[k] = LeafStatus.CUT
        extractions[k] = extraction

    # nodes on the finest grid
    corners = (leaves[:, None, 1:] + CORNER_OFFSETS[None, :, :]) * scale[:, None, None]
    stride = 2**l_max + 1
    corner_keys = (corners[..., 0] * stride + corners[..., 1]).reshape(-1)
    node_keys, inverse = np.unique(corner_keys, return_inverse=True)
    cell_nodes = np.asarray(inverse).reshape(-1, 4)
    nodes = np.column_stack([node_keys // stride, node_keys % stride])

    parents = {}
    for offset, (a, b) in EDGE_MIDPOINTS:
        coarse = scale >= 2
        half = scale[coarse] // 2
        mid = leaves[coarse, 1:] * scale[coarse, None] + np.outer(half, offset)
        mid_keys = mid[:, 0] * stride + mid[:, 1]
        position = np.searchsorted(node_keys, mid_keys)
        position = np.minimum(position, len(node_keys) - 1)
        hit = node_keys[position] == mid_keys
        owners = np.flatnonzero(coarse)[hit]
        for node, owner in zip(position[hit].tolist(), owners.tolist()):
            parents[node] = (int(cell_nodes[owner, a]), int(cell_nodes[owner, b]))
    memo = {}
    constraints = {node: _resolve(node, parents, memo) for node in sorted(parents)}

    mesh = QuadtreeMesh(
        tuple(center),
        float(side),
        l_min,
        l_max,
        leaves,
        status,
        extractions,
        nodes,
        cell_nodes,
        constraints,
    )
    stats = mesh.statistics()
    global_logger.info(
        "Mesh %s: %d cells (%d cut), %d nodes, %d hanging, %d balance splits",
        problem.name,
        stats["cells"],
        stats["cutcells"],
        stats["nodes"],
        stats["hanging_nodes"],
        splits,
    )
    return mesh
