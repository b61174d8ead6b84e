"""
Stabilization parameter provider for cutcells.

Cells whose boundary piece is well approximated by one straight chord are
estimated by the surrogate network on the standard cell and scaled by 2 / l.
Every other cutcell falls back to the eigenvalue oracle on the actual cell.
"""
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Union

import numpy as np

from fcmstab.geometry.cut import CutConfig, normalize_config, to_standard_cell
from fcmstab.geometry.extraction import CutExtraction, extract_cut
from fcmstab.geometry.features import FeatureLayout, cut_distances
from fcmstab.modules.eig_oracle import lambda_oracle_curved
from fcmstab.modules.quadrature import IntegrationParams
from fcmstab.utils import global_logger
from fcmstab.utils.common import NotACutcellError, ValidationError
from fcmstab.utils.constants import (
    QUALITY_THRESHOLD,
    REFERENCE_N_AI,
    SAFETY_FACTOR,
    STANDARD_SIDE,
)


class Method(Enum):
    """How the stabilization parameter of a cell was obtained"""

    DATA_DRIVEN = "data_driven"
    EIGEN_FALLBACK = "eigen_fallback"
    ORACLE = "oracle"
    CONSTANT = "constant"


@dataclass(frozen=True)
class EstimatePolicy:
    """Fallback and batching rules of the estimator

    Parameters
    ----------
    quality_threshold : float
        Smallest chord/arclength ratio estimated by the network, by default 0.995
    safety_factor : float
        Multiplier applied by the consumer (the assembly), never by the
        estimator itself, by default 2
    fallback_n_ai : int
        Integration depth of the fallback oracle, by default 20
    batch_size : int
        Rows per inference call, by default 8192
    """

    quality_threshold: float = QUALITY_THRESHOLD
    safety_factor: float = SAFETY_FACTOR
    fallback_n_ai: int = REFERENCE_N_AI
    batch_size: int = 8192
    alpha_fict: float = IntegrationParams().alpha_fict

    def __post_init__(self):
        if not 0 < self.quality_threshold <= 1:
            raise ValidationError("quality_threshold must be in (0, 1]")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be at least 1")
        if self.safety_factor <= 0:
            raise ValidationError("safety_factor must be positive")

    @property
    def fallback_params(self) -> IntegrationParams:
        return IntegrationParams(n_ai=self.fallback_n_ai, alpha_fict=self.alpha_fict)


@dataclass(frozen=True)
class EstimateResult:
    """Stabilization lower bound of one cell, scaled to the cell, no safety factor"""

    lambda_raw: float
    method: Method
    q: float


def _snap(p):
    """Put a mapped endpoint exactly on the nearest edge of the standard cell"""
    p = np.clip(p, -1.0, 1.0)
    k = int(np.argmax(np.abs(p)))
    p[k] = np.sign(p[k])
    return (float(p[0]), float(p[1]))


def local_config(extraction: CutExtraction, center, side) -> CutConfig:
    """Chord of a single-chord extraction on the standard cell, not rotated"""
    mapped = to_standard_cell([extraction.A, extraction.B], center, side)
    return CutConfig(_snap(mapped[0]), _snap(mapped[1]))


def standard_config(extraction: CutExtraction, center, side) -> CutConfig:
    """Normalized standard-cell configuration of a single-chord extraction"""
    config, _ = normalize_config(local_config(extraction, center, side))
    return config


def _chord_features(extraction, center, side, layout, policy):
    if not extraction.is_single_chord or extraction.q < policy.quality_threshold:
        return None
    try:
        return cut_distances(standard_config(extraction, center, side), layout)
    except ValidationError as e:
        global_logger.debug("Chord of cell %s rejected: %s", tuple(center), e)
        return None


def estimate_batch(
    cells: Sequence, boundary, model, policy: EstimatePolicy = None
) -> List[Union[EstimateResult, Exception]]:
    """Estimate lambda for many cells, preserving their order.

    Parameters
    ----------
    cells : sequence of (center, side)
    boundary : Boundary
    model : MlpModel
        Any object with a ``predict(features)`` method and a ``layout`` id
    policy : EstimatePolicy, optional

    Returns
    -------
    list
        One EstimateResult per cell. A cell that fails (e.g. NotACutcellError)
        gets the exception instance instead, the other cells are still estimated.
    """
    policy = policy or EstimatePolicy()
    layout = FeatureLayout(getattr(model, "layout", FeatureLayout().layout_id))
    results: List = [None] * len(cells)
    rows, features = [], []
    for i, (center, side) in enumerate(cells):
        try:
            extraction = extract_cut(center, side, boundary)
            if extraction is None:
                raise NotACutcellError(f"Cell {tuple(center)} (side {side}) is not cut")
            x = _chord_features(extraction, center, side, layout, policy)
            if x is not None:
                rows.append((i, extraction.q))
                features.append(x)
                continue
            oracle = lambda_oracle_curved(
                center,
                side,
                boundary,
                extraction,
                policy.fallback_n_ai,
                policy.fallback_params,
            )
            results[i] = EstimateResult(oracle.lam, Method.EIGEN_FALLBACK, extraction.q)
        except Exception as e:
            results[i] = e

    if rows:
        X = np.vstack(features)
        try:
            predictions = np.concatenate(
                [
                    model.predict(X[start : start + policy.batch_size])
                    for start in range(0, len(X), policy.batch_size)
                ]
            )
        except Exception as e:
            predictions = [e] * len(rows)
        for (i, q), lam in zip(rows, predictions):
            if isinstance(lam, Exception):
                results[i] = lam
                continue
            scale = STANDARD_SIDE / cells[i][1]
            results[i] = EstimateResult(float(lam) * scale, Method.DATA_DRIVEN, q)
    n_fallback = sum(
        isinstance(r, EstimateResult) and r.method is Method.EIGEN_FALLBACK
        for r in results
    )
    n_failed = sum(isinstance(r, Exception) for r in results)
    global_logger.debug(
        "Estimated %d cells: %d data-driven, %d fallback, %d failed",
        len(cells),
        len(rows),
        n_fallback,
        n_failed,
    )
    return results


def estimate_cell(
    cell, boundary, model, policy: EstimatePolicy = None
) -> EstimateResult:
    """Estimate lambda of one cutcell.

    Raises
    ------
    NotACutcellError
        If the boundary does not cut the cell
    """
    result = estimate_batch([cell], boundary, model, policy)[0]
    if isinstance(result, Exception):
        raise result
    return result
