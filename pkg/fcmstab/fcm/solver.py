"""Jacobi-preconditioned conjugate gradients for the assembled system"""
from dataclasses import dataclass

import numpy as np

from fcmstab.utils import global_logger
from fcmstab.utils.common import NoConvergenceError, ValidationError


@dataclass(eq=False)
class Solution:
    """Solver output

    Parameters
    ----------
    u_free : numpy.ndarray
        Coefficients of the free degrees of freedom
    u : numpy.ndarray
        Values at every mesh node, hanging nodes reconstructed
    iterations : int
    residual : float
        Final relative residual ||b - A u|| / ||b||
    """

    u_free: np.ndarray
    u: np.ndarray
    iterations: int
    residual: float


def pcg(A, b, rel_tol=1e-10, max_iter=None, x0=None):
    """Solve A x = b for symmetric positive definite A.

    Returns
    -------
    tuple
        (x, iterations, relative residual)

    Raises
    ------
    NoConvergenceError
        After `max_iter` iterations, or as soon as a search direction has
        non-positive curvature (A is not positive definite)
    """
    b = np.asarray(b, dtype=float)
    n = len(b)
    if A.shape != (n, n):
        raise ValidationError(f"Matrix of shape {A.shape} does not match {n} unknowns")
    if max_iter is None:
        max_iter = max(1000, 10 * n)
    diagonal = np.asarray(A.diagonal(), dtype=float)
    positive = diagonal > 0
    inv_diagonal = np.where(positive, 1.0 / np.where(positive, diagonal, 1.0), 1.0)

    b_norm = np.linalg.norm(b)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if b_norm == 0:
        return np.zeros(n), 0, 0.0
    k = 0
    while True:
        # restart from the true residual
        r = b - A @ x
        residual = np.linalg.norm(r) / b_norm
        if residual <= rel_tol:
            return x, k, residual
        z = inv_diagonal * r
        d = z.copy()
        rz = r @ z
        while residual > rel_tol:
            if k >= max_iter:
                raise NoConvergenceError(k, residual)
            Ad = A @ d
            curvature = d @ Ad
            if not curvature > 0:
                raise NoConvergenceError(k, residual)
            alpha = rz / curvature
            x += alpha * d
            r -= alpha * Ad
            z = inv_diagonal * r
            rz_next = r @ z
            d = z + (rz_next / rz) * d
            rz = rz_next
            residual = np.linalg.norm(r) / b_norm
            k += 1


def solve(system, rel_tol=1e-10, max_iter=None) -> Solution:
    """Solve an assembled FcmSystem and reconstruct the hanging nodes"""
    u_free, iterations, residual = pcg(system.A, system.b, rel_tol, max_iter)
    global_logger.info(
        "CG converged in %d iterations, relative residual %.3e", iterations, residual
    )
    return Solution(u_free, system.expand(u_free), iterations, residual)
