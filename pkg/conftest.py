"""
Handler of local plugins.

A plugin is simply a python file within a python module.

The plugins with the `tests.fixtures` contain thematically grouped fixtures:

- geometry -> cut configurations and boundary curves.
- datasets -> small stabilization datasets and their CSV files.
- models -> surrogate networks, in memory and saved to file.
- problems -> Poisson problems and quadtree meshes.
"""

pytest_plugins = [
    "tests.fixtures.geometry",
    "tests.fixtures.datasets",
    "tests.fixtures.models",
    "tests.fixtures.problems",
]
