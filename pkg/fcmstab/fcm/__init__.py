"""
Finite cell Poisson solver with Nitsche boundary conditions on quadtree meshes.
"""
from .assembly import (
    ConstantProvider,
    FcmSystem,
    LambdaProvider,
    OracleProvider,
    SurrogateProvider,
    assemble,
    cut_region,
    nitsche_terms,
)
from .error_norms import l2_error, l2_norm, relative_l2_difference
from .export import mesh_statistics, solution_frame, write_frame
from .mesh import QuadtreeMesh, build_mesh
from .problem import PoissonProblem, flower_problem, manufactured_solution
from .solver import Solution, pcg, solve
