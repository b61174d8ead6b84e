"""
Command line entry point: ``fcmstab <command> [flags]``

Commands
--------
gen-data  build a stabilization dataset with the eigenvalue oracle
train     fit the surrogate network on train/val datasets
eval      accuracy report of a saved model on a dataset
bench     oracle and surrogate timings, or the sliver study
solve     finite cell solve of the flower problem

Exit codes are 0 on success, 2 for invalid input and 1 for runtime failures.
"""
import argparse
import sys
from pathlib import Path

import pandas as pd

from fcmstab._version import __version__
from fcmstab.artifacts.model.mlp_model import (
    init_model,
    load_model,
    parse_hidden,
    save_model,
)
from fcmstab.datasets.generation import (
    EndpointDistribution,
    generate,
    to_training_arrays,
)
from fcmstab.datasets.io import read_csv, write_csv
from fcmstab.estimator.estimator import EstimatePolicy, Method
from fcmstab.evaluators.lambda_comparison import compare_lambda_sources
from fcmstab.evaluators.runtime import RuntimeBenchmark
from fcmstab.evaluators.surrogate_accuracy import SurrogateAccuracy
from fcmstab.fcm.assembly import OracleProvider, SurrogateProvider, assemble
from fcmstab.fcm.error_norms import l2_error
from fcmstab.fcm.export import mesh_statistics, solution_frame, write_frame
from fcmstab.fcm.mesh import build_mesh
from fcmstab.fcm.problem import flower_problem
from fcmstab.fcm.solver import solve
from fcmstab.geometry.features import FeatureLayout
from fcmstab.modules.eig_oracle import sliver_study
from fcmstab.modules.quadrature import IntegrationParams
from fcmstab.training.trainer import TrainConfig, train
from fcmstab.utils import global_logger, set_logging_level, setup_logger
from fcmstab.utils.common import (
    CorruptFileError,
    DivergedError,
    LambdaProviderError,
    NoConvergenceError,
    NotRunError,
    SingularPencilError,
    ValidationError,
    VersionMismatchError,
)
from fcmstab.utils.config import (
    BENCH_MODES,
    LAMBDA_SOURCES,
    PROBLEM_KINDS,
    RunConfig,
    load_config,
)

RUNTIME_ERRORS = (
    CorruptFileError,
    DivergedError,
    LambdaProviderError,
    NoConvergenceError,
    NotRunError,
    SingularPencilError,
    VersionMismatchError,
)


def _with_suffix(path, suffix: str) -> Path:
    """report.csv -> report_<suffix>.csv"""
    path = Path(path)
    return path.with_name(f"{path.stem}_{suffix}{path.suffix or '.csv'}")


def _metric_frame(rows, name) -> pd.DataFrame:
    frame = pd.DataFrame(rows, columns=["metric", "value"])
    frame.name = name
    return frame


########################################
# Commands
########################################


def cmd_gen_data(config: RunConfig) -> int:
    out = config.out or "dataset.csv"
    config.validate_outputs("out")
    dist = EndpointDistribution(config.n_per_edge, config.d_min, config.spacing)
    dataset = generate(
        dist,
        config.n_ai,
        layout=FeatureLayout(config.layout),
        name=Path(out).stem,
        n_jobs=config.threads,
        seed=config.seed,
    )
    write_csv(dataset, out)
    if len(dataset):
        print(
            f"{len(dataset)} samples, lambda in "
            f"[{dataset.y.min():.6e}, {dataset.y.max():.6e}] -> {out}"
        )
    else:
        print(f"0 samples -> {out}")
    return 0


def cmd_train(config: RunConfig) -> int:
    config.validate_inputs("train", "val")
    if config.test is not None:
        config.validate_inputs("test")
    config.validate_outputs("model_out")
    train_data, val_data = read_csv(config.train), read_csv(config.val)
    X_train, y_train, stats = to_training_arrays(train_data)
    X_val, y_val, _ = to_training_arrays(val_data, stats)
    model = init_model(
        parse_hidden(config.hidden),
        stats.mean,
        stats.std,
        seed=config.seed,
        layout=train_data.metadata["layout"],
    )
    cfg = TrainConfig(
        epochs=config.epochs,
        batch_size=config.batch,
        lr0=config.lr0,
        halving_divisor=config.halving_divisor,
        seed=config.seed,
    )
    best, history = train(model, (X_train, y_train), (X_val, y_val), cfg)
    save_model(best, config.model_out)
    write_frame(history, _with_suffix(config.model_out, "history"))
    print(
        f"best validation MSE {history['best_val_loss'].iloc[-1]:.6e} "
        f"-> {config.model_out}"
    )
    if config.test is not None:
        return _report_accuracy(best, config.test, config)
    return 0


def _report_accuracy(model, data_path, config: RunConfig) -> int:
    dataset = read_csv(data_path)
    evaluator = SurrogateAccuracy(config.threshold)
    evaluator(model=model, assessment_data=dataset).evaluate()
    results = evaluator.get_results()
    summary = results["surrogate_accuracy"]
    print(summary.to_string(index=False))
    report = config.report or "eval_report.csv"
    write_frame(summary, report)
    write_frame(results["relative_errors"], _with_suffix(report, "samples"))
    return 0


def cmd_eval(config: RunConfig) -> int:
    config.validate_inputs("model", "test")
    config.validate_outputs("report")
    layout = read_csv(config.test).metadata["layout"]
    return _report_accuracy(load_model(config.model, layout), config.test, config)


def cmd_bench(config: RunConfig) -> int:
    out_dir = Path(config.out or ".")
    if not out_dir.is_dir():
        raise ValidationError(f"bench writes into an existing directory: {out_dir}")
    if config.mode == "sliver":
        frames = [sliver_study(RunConfig.int_list(config.sliver_ks), config.n_ai)]
    else:
        config.validate_inputs("data")
        artifacts = {"data": read_csv(config.data)}
        if config.mode != "oracle":
            config.validate_inputs("model")
            artifacts["model"] = load_model(config.model)
        benchmark = RuntimeBenchmark(
            config.mode,
            RunConfig.int_list(config.n_ai_values),
            RunConfig.int_list(config.batch_sizes),
            config.configs,
            config.repeat,
        )
        frames = benchmark(**artifacts).evaluate().get_results().values()
    for frame in frames:
        print(f"{frame.name}:\n{frame.to_string(index=False)}")
        write_frame(frame, out_dir / f"{frame.name}.csv")
    return 0


def cmd_solve(config: RunConfig) -> int:
    if config.lambda_source != "oracle":
        config.validate_inputs("model")
    config.validate_outputs("out", "report")
    problem = flower_problem(config.problem)
    mesh = build_mesh(problem, config.lmin, config.lmax)
    statistics = mesh_statistics(mesh)
    print(statistics.to_string(index=False))
    solution_path = config.out or "solution.csv"
    report = config.report or "solve_report.csv"
    p = IntegrationParams(n_ai=config.quadrature_n_ai)
    policy = EstimatePolicy(safety_factor=config.safety, fallback_n_ai=config.n_ai)

    if config.lambda_source == "both":
        comparison = compare_lambda_sources(
            problem,
            config.lmin,
            config.lmax,
            load_model(config.model),
            policy,
            n_ai=config.n_ai,
            safety=config.safety,
            p=p,
            n_jobs=config.threads,
            rel_tol=config.rel_tol,
            mesh=mesh,
        )
        summary = comparison.summary
        u = comparison.solutions["nn"]
        write_frame(comparison.cells, _with_suffix(report, "cells"))
    else:
        if config.lambda_source == "oracle":
            provider = OracleProvider(config.n_ai, p, config.threads)
        else:
            provider = SurrogateProvider(load_model(config.model), policy)
        system = assemble(mesh, problem, provider, config.safety, p, config.threads)
        solution = solve(system, config.rel_tol)
        u = solution.u
        fallback = system.lambdas["method"] == Method.EIGEN_FALLBACK.value
        rows = [
            ("cutcells", float(len(system.lambdas))),
            ("fallback_count", float(fallback.sum())),
            ("dofs", float(system.n_dofs)),
            ("iterations", float(solution.iterations)),
            ("residual", solution.residual),
            ("lambda_seconds", system.lambda_seconds),
        ]
        if problem.u_exact is not None:
            rows.append(("l2_error", l2_error(u, problem, mesh, p)))
        summary = _metric_frame(rows, f"solve_{config.lambda_source}")
        write_frame(system.lambdas, _with_suffix(report, "lambdas"))

    print(summary.to_string(index=False))
    write_frame(summary, report)
    write_frame(statistics, _with_suffix(report, "mesh"))
    write_frame(solution_frame(mesh, u, problem), solution_path)
    return 0


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "eval": cmd_eval,
    "bench": cmd_bench,
    "solve": cmd_solve,
}


########################################
# Parser
########################################


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(
        add_help=False, argument_default=argparse.SUPPRESS
    )
    common.add_argument("--config", help="key=value settings file")
    common.add_argument("--threads", type=int, help="worker processes, -1 for all")
    common.add_argument("--seed", type=int, help="seed of every random draw")
    common.add_argument(
        "--log-dir", dest="log_dir", help="also log to <dir>/fcmstab.log"
    )
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument(
        "-v", "--verbose", dest="log_level", action="store_const", const="DEBUG"
    )
    verbosity.add_argument(
        "-q", "--quiet", dest="log_level", action="store_const", const="WARNING"
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="fcmstab",
        description="Data-driven Nitsche stabilization for the finite cell method",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    def command(name, help):
        return commands.add_parser(
            name, help=help, parents=[common], argument_default=argparse.SUPPRESS
        )

    gen = command("gen-data", "build a dataset with the eigenvalue oracle")
    gen.add_argument("--n-per-edge", dest="n_per_edge", type=int, help="odd, >= 3")
    gen.add_argument("--d-min", dest="d_min", type=float)
    gen.add_argument("--n-ai", dest="n_ai", type=int, help="oracle integration depth")
    gen.add_argument("--spacing", choices=("log", "linear"))
    gen.add_argument("--layout", help="feature layout id")
    gen.add_argument("--out", help="dataset CSV, its .meta sidecar goes next to it")

    fit = command("train", "train the surrogate network")
    fit.add_argument("--train")
    fit.add_argument("--val")
    fit.add_argument("--test", help="also evaluate the best model on this dataset")
    fit.add_argument("--hidden", help='e.g. "256x6" or "64,32"')
    fit.add_argument("--epochs", type=int)
    fit.add_argument("--batch", type=int)
    fit.add_argument("--lr0", type=float)
    fit.add_argument("--halving-divisor", dest="halving_divisor", type=int)
    fit.add_argument("--model-out", dest="model_out")
    fit.add_argument("--report")

    check = command("eval", "accuracy of a saved model")
    check.add_argument("--model")
    check.add_argument("--test")
    check.add_argument("--threshold", type=float)
    check.add_argument("--report", help="summary CSV, per-sample errors beside it")

    bench = command("bench", "runtime of the oracle and the surrogate")
    bench.add_argument("--mode", choices=BENCH_MODES)
    bench.add_argument("--data", help="dataset whose configurations are timed")
    bench.add_argument("--model")
    bench.add_argument("--n-ai", dest="n_ai_values", help='e.g. "6,10,14,20"')
    bench.add_argument("--batch", dest="batch_sizes", help='e.g. "1,8,64"')
    bench.add_argument("--configs", type=int, help="configurations per oracle pass")
    bench.add_argument("--repeat", type=int)
    bench.add_argument("--sliver-ks", dest="sliver_ks", help='e.g. "1,2,4"')
    bench.add_argument("--out", help="output directory")

    run = command("solve", "finite cell solve of the flower problem")
    run.add_argument("--lambda-source", dest="lambda_source", choices=LAMBDA_SOURCES)
    run.add_argument("--lmin", type=int)
    run.add_argument("--lmax", type=int)
    run.add_argument("--model")
    run.add_argument("--problem", choices=PROBLEM_KINDS)
    run.add_argument("--n-ai", dest="n_ai", type=int)
    run.add_argument("--safety", type=float)
    run.add_argument("--rel-tol", dest="rel_tol", type=float)
    run.add_argument(
        "--quadrature-n-ai",
        dest="quadrature_n_ai",
        type=int,
        help="adaptive depth of the volume quadrature on cut cells",
    )
    run.add_argument("--report")
    run.add_argument("--out", help="solution CSV")
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = COMMANDS[args.pop("command")]
    try:
        config = load_config(args.pop("config", None), args)
        if config.log_dir is not None:
            config.validate_inputs("log_dir")
            setup_logger(path=config.log_dir, logging_level=config.log_level)
        set_logging_level(config.log_level)
        return command(config)
    except ValidationError as e:
        global_logger.error("%s", e)
        print(f"fcmstab: error: {e}", file=sys.stderr)
        return 2
    except RUNTIME_ERRORS as e:
        global_logger.error("%s", e)
        print(f"fcmstab: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
