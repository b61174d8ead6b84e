"""
Contains all fixtures related to cut configurations and boundaries.

Any fixture added to the file will be immediately available due to
addition of this module as plugin in the project level `conftest.py`.
"""
from pytest import fixture

from fcmstab.geometry import (
    CircleBoundary,
    CutConfig,
    FlowerBoundary,
    PolygonBoundary,
)

### Cut configurations ########################


@fixture(scope="session")
def vertical_config():
    """x = 0.5 from top to bottom, the physical side is x <= 0.5"""
    return CutConfig((0.5, 1.0), (0.5, -1.0))


@fixture(scope="session")
def top_edge_config():
    """Chord along the whole top edge, the entire cell is physical"""
    return CutConfig((-1.0, 1.0), (1.0, 1.0))


@fixture(scope="session")
def diagonal_config():
    """Generic cut from the top edge to the right edge"""
    return CutConfig((-0.3, 1.0), (1.0, -0.2))


### Boundaries ########################


@fixture(scope="session")
def big_square():
    """Square [-3, 3]^2, its right edge is the line x = 3"""
    return PolygonBoundary([(-3, -3), (3, -3), (3, 3), (-3, 3)], name="big_square")


@fixture(scope="session")
def strip():
    """Thin vertical strip, every cell around x = 0 is cut twice"""
    return PolygonBoundary(
        [(-0.1, -3), (0.1, -3), (0.1, 3), (-0.1, 3)], name="strip"
    )


@fixture(scope="session")
def big_circle():
    return CircleBoundary(radius=10.0, name="big_circle")


@fixture(scope="session")
def unit_circle():
    return CircleBoundary(radius=1.0, name="unit_circle")


@fixture(scope="session")
def flower():
    return FlowerBoundary()
