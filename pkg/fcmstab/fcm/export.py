"""CSV export of nodal solutions and mesh statistics"""
from pathlib import Path

import numpy as np
import pandas as pd

from fcmstab.utils import global_logger

FLOAT_FORMAT = "%.17g"


def solution_frame(mesh, u, problem) -> pd.DataFrame:
    """Nodal values with a flag for nodes inside the physical domain"""
    coordinates = mesh.node_coordinates
    frame = pd.DataFrame(
        {
            "x": coordinates[:, 0],
            "y": coordinates[:, 1],
            "u": np.asarray(u, dtype=float),
            "physical": problem.boundary.inside(coordinates).astype(int),
        }
    )
    frame.name = "solution"
    return frame


def mesh_statistics(mesh) -> pd.DataFrame:
    frame = pd.DataFrame([mesh.statistics()])
    frame.name = "mesh_statistics"
    return frame


def write_frame(frame: pd.DataFrame, path):
    path = Path(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    name = getattr(frame, "name", "frame")
    global_logger.info("Wrote %s (%d rows) to %s", name, len(frame), path)
