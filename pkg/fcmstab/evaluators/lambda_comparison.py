from dataclasses import dataclass

import numpy as np
import pandas as pd

from fcmstab.estimator.estimator import EstimatePolicy, Method
from fcmstab.evaluators.evaluator import Evaluator
from fcmstab.evaluators.utils.validation import check_instance, check_predictor
from fcmstab.fcm.assembly import OracleProvider, SurrogateProvider, assemble
from fcmstab.fcm.error_norms import l2_error, relative_l2_difference
from fcmstab.fcm.mesh import QuadtreeMesh, build_mesh
from fcmstab.fcm.problem import PoissonProblem
from fcmstab.fcm.solver import solve
from fcmstab.modules.quadrature import IntegrationParams
from fcmstab.utils import global_logger
from fcmstab.utils.constants import REFERENCE_N_AI, SAFETY_FACTOR


@dataclass(eq=False)
class LambdaComparison:
    """Outcome of solving one problem with oracle and surrogate parameters

    Parameters
    ----------
    cells : pandas.DataFrame
        Per cut cell: both raw parameters, their relative difference and the
        surrogate's method
    summary : pandas.DataFrame
        metric/value table
    solutions : dict
        Nodal solutions keyed by "oracle" and "nn"
    mesh : QuadtreeMesh
    """

    cells: pd.DataFrame
    summary: pd.DataFrame
    solutions: dict
    mesh: QuadtreeMesh

    def metric(self, name):
        return float(self.summary.set_index("metric").loc[name, "value"])


def compare_lambda_sources(
    problem: PoissonProblem,
    l_min: int,
    l_max: int,
    model,
    policy: EstimatePolicy = None,
    n_ai: int = REFERENCE_N_AI,
    safety: float = SAFETY_FACTOR,
    p: IntegrationParams = None,
    n_jobs: int = 1,
    rel_tol: float = 1e-10,
    mesh: QuadtreeMesh = None,
) -> LambdaComparison:
    """Solve `problem` with oracle and surrogate stabilization and compare.

    Parameters
    ----------
    problem : PoissonProblem
    l_min, l_max : int
        Mesh levels
    model : MlpModel
        Surrogate used by the estimator
    policy : EstimatePolicy, optional
    n_ai : int
        Integration depth of the oracle pass, by default 20
    safety : float
        Applied to both sources, by default 2
    p : IntegrationParams, optional
        Assembly quadrature
    mesh : QuadtreeMesh, optional
        Built from the levels when omitted
    """
    p = p or IntegrationParams()
    if mesh is None:
        mesh = build_mesh(problem, l_min, l_max)
    providers = {
        "oracle": OracleProvider(n_ai, p, n_jobs),
        "nn": SurrogateProvider(model, policy),
    }
    systems, solutions, errors = {}, {}, {}
    for key, provider in providers.items():
        systems[key] = assemble(mesh, problem, provider, safety, p, n_jobs)
        solutions[key] = solve(systems[key], rel_tol).u
        if problem.u_exact is not None:
            errors[key] = l2_error(solutions[key], problem, mesh, p)

    oracle, nn = systems["oracle"].lambdas, systems["nn"].lambdas
    cells = oracle[["cell", "x", "y", "side"]].copy()
    cells["lambda_oracle"] = oracle["lambda_raw"].to_numpy()
    cells["lambda_nn"] = nn["lambda_raw"].to_numpy()
    reference = cells["lambda_oracle"]
    cells["rel_diff"] = (cells["lambda_nn"] - reference) / reference
    cells["method"] = nn["method"].to_numpy()
    cells["q"] = nn["q"].to_numpy()
    cells.name = "lambda_comparison_cells"

    fallback = cells["method"] == Method.EIGEN_FALLBACK.value
    magnitude = np.abs(cells["rel_diff"].to_numpy())
    oracle_seconds = systems["oracle"].lambda_seconds
    nn_seconds = systems["nn"].lambda_seconds
    same_pattern = bool(
        np.array_equal(systems["oracle"].A.indptr, systems["nn"].A.indptr)
        and np.array_equal(systems["oracle"].A.indices, systems["nn"].A.indices)
    )
    rows = [
        ("cutcells", float(len(cells))),
        ("fallback_count", float(np.sum(fallback))),
        ("max_abs_rel_diff", float(magnitude.max()) if len(magnitude) else 0.0),
        (
            "median_abs_rel_diff",
            float(np.median(magnitude)) if len(magnitude) else 0.0,
        ),
        (
            "solution_rel_l2_diff",
            relative_l2_difference(
                solutions["nn"], solutions["oracle"], problem, mesh, p
            ),
        ),
        ("oracle_lambda_seconds", oracle_seconds),
        ("nn_lambda_seconds", nn_seconds),
        (
            "lambda_time_ratio",
            oracle_seconds / nn_seconds if nn_seconds > 0 else np.inf,
        ),
        ("same_sparsity", float(same_pattern)),
    ]
    rows += [(f"l2_error_{key}", value) for key, value in errors.items()]
    summary = pd.DataFrame(rows, columns=["metric", "value"])
    summary.name = "lambda_comparison"
    global_logger.info(
        "Lambda source comparison:\n%s", summary.to_string(index=False)
    )
    return LambdaComparison(cells, summary, solutions, mesh)


class LambdaSourceComparison(Evaluator):
    """
    Oracle versus surrogate stabilization on a finite cell problem.

    Required Artifacts
    ------------------
        - model: :class:`fcmstab.artifacts.MlpModel`
        - problem: :class:`fcmstab.fcm.PoissonProblem`

    Parameters
    ----------
    l_min, l_max : int
        Mesh levels
    n_ai : int
        Oracle integration depth
    kwargs
        Forwarded to :func:`compare_lambda_sources`
    """

    required_artifacts = {"model", "problem"}

    def __init__(self, l_min=3, l_max=6, n_ai=REFERENCE_N_AI, **kwargs):
        super().__init__()
        self.l_min = l_min
        self.l_max = l_max
        self.n_ai = n_ai
        self.kwargs = kwargs
        self.comparison = None

    def _validate_arguments(self):
        check_predictor(self.model)
        check_instance(self.problem, PoissonProblem)

    def _setup(self):
        self.metadata.update(
            {"l_min": self.l_min, "l_max": self.l_max, "n_ai": self.n_ai}
        )

    def evaluate(self):
        self.comparison = compare_lambda_sources(
            self.problem,
            self.l_min,
            self.l_max,
            self.model,
            n_ai=self.n_ai,
            **self.kwargs,
        )
        self.results = [self.comparison.summary, self.comparison.cells]
        return self
