"""CSV persistence of stabilization datasets with a key=value metadata sidecar"""
import re
from pathlib import Path

import numpy as np
import pandas as pd

from fcmstab.artifacts.data.stabilization_data import Dataset, dataset_columns
from fcmstab.geometry.features import FeatureLayout
from fcmstab.utils import global_logger
from fcmstab.utils.common import CorruptFileError, ValidationError, VersionMismatchError
from fcmstab.utils.constants import DEFAULT_LAYOUT

FLOAT_FORMAT = "%.17g"
META_TYPES = {"n_per_edge": int, "n_ai": int, "seed": int, "d_min": float}


def meta_path(path) -> Path:
    return Path(path).with_suffix(".meta")


def write_meta(metadata: dict, path):
    lines = [f"{key}={value}" for key, value in metadata.items()]
    meta_path(path).write_text("\n".join(lines) + "\n")


def read_meta(path) -> dict:
    """Parse the sidecar of a dataset file, empty when there is none"""
    sidecar = meta_path(path)
    if not sidecar.exists():
        return {}
    metadata = {}
    for number, line in enumerate(sidecar.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CorruptFileError(f"{sidecar}: expected key=value", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            metadata[key] = META_TYPES.get(key, str)(value)
        except ValueError:
            raise CorruptFileError(f"{sidecar}: bad value for {key}", line=number)
    return metadata


def write_csv(d: Dataset, path):
    """Write a dataset with 17 significant digits and its metadata sidecar"""
    path = Path(path)
    d.frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    write_meta({"split": d.split, **d.metadata}, path)
    global_logger.info("Wrote %d samples to %s", len(d), path)


def _line_of(message):
    match = re.search(r"line (\d+)", str(message))
    return int(match.group(1)) if match else None


def read_csv(path, name=None) -> Dataset:
    """Read a dataset written by `write_csv`.

    Raises
    ------
    VersionMismatchError
        If the header does not match the feature layout of the file
    CorruptFileError
        If a row is malformed; the error carries the 1-based line number
    """
    path = Path(path)
    metadata = read_meta(path)
    layout = metadata.get("layout", DEFAULT_LAYOUT)
    try:
        expected = dataset_columns(FeatureLayout(layout).size)
    except ValidationError as e:
        raise VersionMismatchError(f"{path}: unknown layout {layout!r} ({e})")
    with open(path) as f:
        header = f.readline().rstrip("\r\n").split(",")
    if header != expected:
        raise VersionMismatchError(
            f"{path}: header {','.join(header)!r} does not match {','.join(expected)!r}"
        )
    try:
        frame = pd.read_csv(path, float_precision="round_trip", skip_blank_lines=False)
    except pd.errors.ParserError as e:
        raise CorruptFileError(f"{path}: {e}", line=_line_of(e))
    for column in frame.columns:
        values = pd.to_numeric(frame[column], errors="coerce")
        bad = np.flatnonzero(values.isna().to_numpy())
        if len(bad):
            # header is line 1
            raise CorruptFileError(
                f"{path}: malformed value in column {column}", line=int(bad[0]) + 2
            )
        frame[column] = values.astype(float)
    split = metadata.pop("split", "none")
    return Dataset(name or path.stem, frame, split, metadata)
