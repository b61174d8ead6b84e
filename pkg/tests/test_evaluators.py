"""
Testing of the evaluators: surrogate accuracy, runtime and the comparison of
stabilization sources on a finite cell problem.
"""
import numpy as np
import pytest

from fcmstab.artifacts import PrecomputedModel
from fcmstab.estimator import EstimatePolicy, standard_config
from fcmstab.evaluators import (
    LambdaSourceComparison,
    RuntimeBenchmark,
    SurrogateAccuracy,
)
from fcmstab.evaluators.runtime import surrogate_timing
from fcmstab.geometry import cut_distances, extract_cut
from fcmstab.modules import lambda_oracle
from fcmstab.utils.common import NotRunError, ValidationError
from tests.fixtures.problems import FAST_PARAMS

FAST_POLICY = EstimatePolicy(fallback_n_ai=FAST_PARAMS.n_ai)


class ScaledModel:
    """Predicts a fixed multiple of another model"""

    def __init__(self, model, factor):
        self.model = model
        self.factor = factor
        self.name = f"{model.name}_x{factor}"

    def predict(self, X):
        return self.factor * self.model.predict(X)


def oracle_table_model(mesh, problem, policy):
    """Standard-cell oracle lambdas of every chord the estimator will query"""
    rows, outputs = [], []
    for k in mesh.cut_cells:
        center, side = mesh.cell(k)
        extraction = extract_cut(center, side, problem.boundary)
        if not extraction.is_single_chord or extraction.q < policy.quality_threshold:
            continue
        try:
            config = standard_config(extraction, center, side)
            rows.append(cut_distances(config))
        except ValidationError:
            continue
        lam = lambda_oracle(config, n_ai=FAST_PARAMS.n_ai, params=FAST_PARAMS).lam
        outputs.append(lam)
    return PrecomputedModel("oracle_table", rows, outputs)


########################################
# Surrogate accuracy
########################################


def test_exact_surrogate(exact_model, oracle_val_data):
    evaluator = SurrogateAccuracy()(model=exact_model, assessment_data=oracle_val_data)
    results = evaluator.evaluate().get_results()
    summary = results["surrogate_accuracy"].set_index("metric")["value"]
    pytest.assume(summary["mse_log"] == 0.0)
    pytest.assume(summary["outlier_rate"] == 0.0)
    pytest.assume(summary["within_threshold"] == 1.0)
    pytest.assume(summary["samples"] == len(oracle_val_data))
    pytest.assume(summary["abs_er_p100"] == 0.0)
    errors = results["relative_errors"]
    pytest.assume(list(errors.columns[-3:]) == ["lambda", "lambda_pred", "e_r"])
    pytest.assume(np.all(errors["e_r"] == 0.0))


def test_biased_surrogate(exact_model, oracle_val_data):
    biased = ScaledModel(exact_model, 1.1)
    evaluator = SurrogateAccuracy(threshold=0.05, batch_size=4)
    evaluator(model=biased, assessment_data=oracle_val_data).evaluate()
    report = evaluator.report
    pytest.assume(report.outlier_rate == 1.0)
    pytest.assume(report.percentiles[100] == pytest.approx(0.1, rel=1e-9))
    pytest.assume(report.mse == pytest.approx(np.log(1.1) ** 2, rel=1e-9))
    # a looser threshold accepts every sample
    loose = SurrogateAccuracy(threshold=0.2)
    loose(model=biased, assessment_data=oracle_val_data).evaluate()
    pytest.assume(loose.report.outlier_rate == 0.0)


def test_results_require_evaluation(exact_model, oracle_val_data):
    evaluator = SurrogateAccuracy()(model=exact_model, assessment_data=oracle_val_data)
    with pytest.raises(NotRunError):
        evaluator.results


def test_accuracy_artifact_validation(exact_model, oracle_val_data):
    with pytest.raises(ValidationError):
        SurrogateAccuracy()(model=exact_model, assessment_data=oracle_val_data.frame)
    with pytest.raises(ValidationError):
        SurrogateAccuracy()(model=object(), assessment_data=oracle_val_data)


def test_artifact_keywords(exact_model, oracle_val_data):
    with pytest.raises(ValidationError, match="assessment_data"):
        SurrogateAccuracy()(model=exact_model)
    with pytest.raises(ValidationError, match="unknown"):
        SurrogateAccuracy()(
            model=exact_model,
            assessment_data=oracle_val_data,
            training_data=oracle_val_data,
        )


def test_report_info(exact_model, oracle_val_data):
    evaluator = SurrogateAccuracy()(model=exact_model, assessment_data=oracle_val_data)
    info = evaluator.get_info(labels={"run": "test"})
    pytest.assume(info["labels"] == {"evaluator": "SurrogateAccuracy", "run": "test"})
    pytest.assume(info["metadata"]["model_name"] == "exact")
    pytest.assume(info["metadata"]["assessment_dataset_name"] == "val")
    pytest.assume(info["metadata"]["split"] == "val")
    pytest.assume(info["metadata"]["source"].startswith("fcmstab_"))


########################################
# Runtime
########################################


def test_runtime_benchmark(tiny_dataset, zero_model):
    benchmark = RuntimeBenchmark(
        "both", n_ai_values=(3, 4), batch_sizes=(1, 4), n_configs=3, repeat=1
    )
    results = benchmark(data=tiny_dataset, model=zero_model).evaluate().get_results()
    pytest.assume(set(results) == {"oracle_timing", "nn_timing", "speed_ratio"})
    oracle = results["oracle_timing"]
    pytest.assume(oracle["n_ai"].tolist() == [3, 4])
    pytest.assume(np.all(oracle["estimates"] == 3))
    nn = results["nn_timing"]
    pytest.assume(nn["batch_size"].tolist() == [1, 4])
    pytest.assume(np.all(nn["estimates"] == len(tiny_dataset)))
    ratio = results["speed_ratio"]
    pytest.assume(len(ratio) == 2)
    pytest.assume(np.all(ratio["ratio"] > 0))
    for frame in (oracle, nn):
        per_estimate = frame["median_seconds"] / frame["estimates"]
        np.testing.assert_allclose(frame["per_estimate_seconds"], per_estimate)
        pytest.assume(np.all(frame["per_estimate_seconds"] > 0))


def test_larger_batches_are_faster_per_estimate(zero_model, rng):
    X = rng.uniform(0.01, 2.0, size=(16, 12))
    timing = surrogate_timing(zero_model, X, batch_sizes=(1, 2048), repeat=3)
    per_estimate = timing.set_index("batch_size")["per_estimate_seconds"]
    pytest.assume(timing["estimates"].tolist() == [2048, 2048])
    pytest.assume(per_estimate[2048] < per_estimate[1])


def test_oracle_only_benchmark(tiny_dataset):
    benchmark = RuntimeBenchmark("oracle", n_ai_values=(3,), n_configs=2, repeat=1)
    results = benchmark(data=tiny_dataset).evaluate().results
    pytest.assume([frame.name for frame in results] == ["oracle_timing"])


def test_benchmark_validation(tiny_dataset):
    with pytest.raises(ValidationError):
        RuntimeBenchmark("fastest")
    with pytest.raises(ValidationError):
        RuntimeBenchmark("nn")(data=tiny_dataset)
    with pytest.raises(ValidationError):
        RuntimeBenchmark("oracle", repeat=0)(data=tiny_dataset)


########################################
# Stabilization sources
########################################


@pytest.fixture(scope="module")
def comparison(graded_mesh, manufactured_problem):
    model = oracle_table_model(graded_mesh, manufactured_problem, FAST_POLICY)
    evaluator = LambdaSourceComparison(
        2,
        4,
        n_ai=FAST_PARAMS.n_ai,
        p=FAST_PARAMS,
        policy=FAST_POLICY,
        mesh=graded_mesh,
    )
    return evaluator(model=model, problem=manufactured_problem).evaluate()


def test_comparison_results(comparison, graded_mesh):
    results = comparison.get_results()
    pytest.assume(set(results) == {"lambda_comparison", "lambda_comparison_cells"})
    cells = results["lambda_comparison_cells"]
    pytest.assume(len(cells) == len(graded_mesh.cut_cells))
    pytest.assume(set(cells["method"]) <= {"data_driven", "eigen_fallback"})
    metrics = comparison.comparison
    pytest.assume(metrics.metric("cutcells") == len(graded_mesh.cut_cells))
    pytest.assume(metrics.metric("same_sparsity") == 1.0)
    fallback = int(np.sum(cells["method"] == "eigen_fallback"))
    pytest.assume(metrics.metric("fallback_count") == fallback)


def test_matching_sources_agree(comparison):
    cells = comparison.comparison.cells
    data_driven = cells[cells["method"] == "data_driven"]
    pytest.assume(len(data_driven) > 0)
    pytest.assume(np.all(np.abs(data_driven["rel_diff"]) < 1e-6))
    metrics = comparison.comparison
    pytest.assume(metrics.metric("solution_rel_l2_diff") < 0.05)
    error_oracle = metrics.metric("l2_error_oracle")
    error_nn = metrics.metric("l2_error_nn")
    pytest.assume(0 < error_oracle < 1)
    pytest.assume(error_nn == pytest.approx(error_oracle, rel=0.05))


def test_comparison_validation(zero_model, tiny_dataset):
    with pytest.raises(ValidationError):
        LambdaSourceComparison()(model=zero_model, problem=tiny_dataset)
