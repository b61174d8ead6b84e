"""
Numerical building blocks: adaptive quadrature and the eigenvalue oracle.
"""
from .eig_oracle import (
    EigenPencil,
    OracleResult,
    assemble_pencil,
    assemble_pencil_curved,
    curved_region,
    lambda_converged,
    lambda_oracle,
    lambda_oracle_curved,
    max_gen_eig,
    q1_basis_gradients,
    q1_basis_values,
    sliver_study,
)
from .quadrature import IntegrationParams, LeafStatus, integrate_cell, integrate_segment
