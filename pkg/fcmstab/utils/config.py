"""
Run settings of the command line: a key=value file merged with flag overrides
"""
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional, Union, get_args, get_origin, get_type_hints

from fcmstab.utils.common import ValidationError, check_path_exists
from fcmstab.utils.constants import (
    DEFAULT_LAYOUT,
    OUTLIER_THRESHOLD,
    REFERENCE_N_AI,
    SAFETY_FACTOR,
)

LAMBDA_SOURCES = ("oracle", "nn", "both")
BENCH_MODES = ("oracle", "nn", "both", "sliver")
PROBLEM_KINDS = ("manufactured", "constant")


@dataclass(frozen=True)
class RunConfig:
    """Every setting a command can read

    Keys of a config file are the field names. Paths are kept as strings and
    checked by `validate_inputs` before any work starts.
    """

    # global
    threads: int = 1
    seed: int = 0
    log_dir: Optional[str] = None
    log_level: str = "INFO"
    # gen-data
    n_per_edge: int = 399
    d_min: float = 1e-4
    n_ai: int = REFERENCE_N_AI
    spacing: str = "log"
    layout: str = DEFAULT_LAYOUT
    out: Optional[str] = None
    # train / eval
    train: Optional[str] = None
    val: Optional[str] = None
    test: Optional[str] = None
    hidden: str = "256x6"
    epochs: int = 2000
    batch: Optional[int] = None
    lr0: float = 5e-4
    halving_divisor: int = 4
    model: Optional[str] = None
    model_out: str = "model.json"
    threshold: float = OUTLIER_THRESHOLD
    # bench
    mode: str = "both"
    data: Optional[str] = None
    n_ai_values: str = "6,10,14,20"
    batch_sizes: str = "1,8,64,512,8192"
    configs: Optional[int] = None
    repeat: int = 3
    sliver_ks: str = "1,2,4,6,8,10"
    # solve
    lambda_source: str = "both"
    lmin: int = 3
    lmax: int = 6
    problem: str = "manufactured"
    safety: float = SAFETY_FACTOR
    rel_tol: float = 1e-10
    quadrature_n_ai: int = 10
    report: Optional[str] = None

    def __post_init__(self):
        if self.threads == 0:
            raise ValidationError("threads must not be 0")
        if self.lambda_source not in LAMBDA_SOURCES:
            raise ValidationError(
                f"lambda_source must be one of {LAMBDA_SOURCES}, "
                f"got {self.lambda_source!r}"
            )
        if self.mode not in BENCH_MODES:
            raise ValidationError(
                f"mode must be one of {BENCH_MODES}, got {self.mode!r}"
            )
        if self.problem not in PROBLEM_KINDS:
            raise ValidationError(
                f"problem must be one of {PROBLEM_KINDS}, got {self.problem!r}"
            )
        if self.repeat < 1:
            raise ValidationError("repeat must be at least 1")

    def merge(self, overrides: dict) -> "RunConfig":
        """Copy with the non-None `overrides` applied"""
        overrides = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(overrides) - field_names()
        if unknown:
            raise ValidationError(f"Unknown settings: {sorted(unknown)}")
        return replace(self, **overrides)

    def validate_inputs(self, *keys):
        """Check that the paths stored under `keys` are set and exist"""
        for key in keys:
            value = getattr(self, key)
            if value is None:
                raise ValidationError(f"{key} is required")
            check_path_exists(value, key)

    def validate_outputs(self, *keys):
        """Check that the parent directory of every output path exists"""
        for key in keys:
            value = getattr(self, key)
            if value is not None:
                check_path_exists(Path(value).resolve().parent, f"directory of {key}")

    @staticmethod
    def int_list(value: str):
        """Parse "6,10,14" into a tuple of ints

        >>> RunConfig.int_list("6, 10,14")
        (6, 10, 14)
        """
        try:
            return tuple(int(v) for v in value.split(",") if v.strip())
        except ValueError:
            raise ValidationError(f"Expected comma separated integers, got {value!r}")


def field_names():
    return {f.name for f in fields(RunConfig)}


def _base_type(annotation):
    if get_origin(annotation) is Union:
        return next(arg for arg in get_args(annotation) if arg is not type(None))
    return annotation


def coerce(key: str, value: str):
    """Convert the text of a setting to the type of its field

    >>> coerce("epochs", "10")
    10
    >>> coerce("batch", "none") is None
    True
    """
    hints = get_type_hints(RunConfig)
    if key not in hints:
        raise ValidationError(f"Unknown setting {key!r}")
    annotation = hints[key]
    optional = get_origin(annotation) is Union
    if optional and value.lower() in ("", "none"):
        return None
    kind = _base_type(annotation)
    try:
        return kind(value)
    except ValueError:
        raise ValidationError(f"{key} expects {kind.__name__}, got {value!r}")


def parse_config(text: str) -> dict:
    """Settings of a config file: one key=value per line, # starts a comment"""
    settings = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"Config line {number}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        settings[key] = coerce(key, value)
    return settings


def load_config(path=None, overrides: Optional[dict] = None) -> RunConfig:
    """Defaults, then the config file, then the overrides; later wins"""
    config = RunConfig()
    if path is not None:
        check_path_exists(path, "config")
        config = config.merge(parse_config(Path(path).read_text()))
    return config.merge(overrides or {})
