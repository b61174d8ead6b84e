"""
Evaluate surrogate accuracy, runtime and the effect of the stabilization source
"""
from .evaluator import Evaluator
from .lambda_comparison import (
    LambdaComparison,
    LambdaSourceComparison,
    compare_lambda_sources,
)
from .runtime import RuntimeBenchmark, oracle_timing, speed_ratios, surrogate_timing
from .surrogate_accuracy import EvalReport, SurrogateAccuracy, evaluate
