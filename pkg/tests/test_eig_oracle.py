"""
Testing of the local eigenvalue pencil and the stabilization oracle.
"""
import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from fcmstab.geometry import (
    CutConfig,
    Edge,
    StandardCell,
    mirror_config,
    rotate_config,
)
from fcmstab.modules import (
    EigenPencil,
    IntegrationParams,
    assemble_pencil,
    lambda_converged,
    lambda_oracle,
    max_gen_eig,
    q1_basis_values,
    sliver_study,
)
from fcmstab.modules.eig_oracle import (
    reference_mass,
    sliver_config,
    stiffness_from_moments,
    uncut_stiffness,
)
from fcmstab.utils.common import DegenerateCutError, SingularPencilError

ALPHA = IntegrationParams().alpha_fict
N_AI = 6

# chords from the top edge that keep a sizeable region on both sides
mid_arc = st.floats(min_value=0.5, max_value=1.5)
end_edges = st.sampled_from([Edge.RIGHT, Edge.BOTTOM, Edge.LEFT])


def config_from(t_start, edge, t_end):
    A = StandardCell.edge_point(Edge.TOP, t_start)
    return CutConfig(A, StandardCell.edge_point(edge, t_end))


def random_configs(n, seed):
    rng = np.random.default_rng(seed)
    edges = [Edge.RIGHT, Edge.BOTTOM, Edge.LEFT]
    configs = []
    for _ in range(n):
        t_start, t_end = rng.uniform(0.5, 1.5, size=2)
        configs.append(config_from(t_start, edges[rng.integers(3)], t_end))
    return configs


def complement_basis():
    """Orthonormal basis of the vectors orthogonal to the constants"""
    return scipy.linalg.null_space(np.ones((1, 4)))


########################################
# Basis and reference matrices
########################################


def test_basis_is_a_partition_of_unity(rng):
    xi = rng.uniform(-1, 1, size=(20, 2))
    np.testing.assert_allclose(q1_basis_values(xi).sum(axis=1), 1.0, rtol=1e-14)


def test_reference_matrices():
    K = uncut_stiffness()
    np.testing.assert_allclose(np.diag(K), 2.0 / 3.0, rtol=1e-14)
    np.testing.assert_allclose(K @ np.ones(4), 0.0, atol=1e-14)
    np.testing.assert_allclose(reference_mass().sum(), 4.0, rtol=1e-14)


########################################
# Pencil
########################################


def test_full_top_edge_pencil(top_edge_config):
    pencil = assemble_pencil(top_edge_config)
    np.testing.assert_allclose(pencil.M, uncut_stiffness(), atol=1e-14)
    pytest.assume(pencil.symmetry_error() < 1e-14)
    pytest.assume(pencil.null_space_residual() < 1e-12)


def test_aligned_cut_pencil(vertical_config):
    pencil = assemble_pencil(vertical_config)
    inside = np.array([3.0, -0.75, 0.0, 0.75, 1.0])
    outside = np.array([1.0, 0.75, 0.0, 7.0 / 12.0, 1.0 / 3.0])
    expected = stiffness_from_moments(inside + ALPHA * outside)
    np.testing.assert_allclose(pencil.M, expected, atol=1e-13)
    pytest.assume(pencil.null_space_residual() < 1e-12)


def test_degenerate_pencil():
    config = CutConfig((0.5, 1.0), (0.5, 1.0), validate=False)
    with pytest.raises(DegenerateCutError):
        assemble_pencil(config)


########################################
# Largest generalized eigenvalue
########################################


def test_max_gen_eig_examples():
    pencil = EigenPencil(np.diag([3.0, 1.0, 0.0, 0.0]), np.diag([1.0, 2.0, 1.0, 1.0]))
    pytest.assume(max_gen_eig(pencil) == pytest.approx(3.0, rel=1e-14))
    # the first mode lies in the null space of M and is dropped
    pencil = EigenPencil(np.diag([5.0, 1.0, 0.0, 0.0]), np.diag([0.0, 2.0, 1.0, 1.0]))
    pytest.assume(max_gen_eig(pencil) == pytest.approx(0.5, rel=1e-14))


def test_max_gen_eig_of_a_zero_stiffness():
    with pytest.raises(SingularPencilError):
        max_gen_eig(EigenPencil(np.eye(4), np.zeros((4, 4))))


def test_max_gen_eig_matches_a_dense_solver(diagonal_config):
    pencil = assemble_pencil(diagonal_config, p=IntegrationParams(n_ai=N_AI))
    Q = complement_basis()
    reference = scipy.linalg.eigh(
        Q.T @ pencil.K @ Q, Q.T @ pencil.M @ Q, eigvals_only=True
    )[-1]
    pytest.assume(max_gen_eig(pencil) == pytest.approx(reference, rel=1e-8))


def test_max_gen_eig_bounds_every_rayleigh_quotient(diagonal_config, rng):
    pencil = assemble_pencil(diagonal_config, p=IntegrationParams(n_ai=N_AI))
    lam = max_gen_eig(pencil)
    v = rng.normal(size=(1000, 4))
    quotients = np.einsum("ni,ij,nj->n", v, pencil.K, v) / np.einsum(
        "ni,ij,nj->n", v, pencil.M, v
    )
    pytest.assume(np.all(quotients <= lam * (1 + 1e-8)))
    pytest.assume(quotients.max() > 0)


@pytest.mark.parametrize("config", random_configs(4, seed=11))
def test_max_gen_eig_is_reached_by_a_random_scan(config):
    pencil = assemble_pencil(config, p=IntegrationParams(n_ai=N_AI))
    lam = max_gen_eig(pencil)
    rng = np.random.default_rng(5)
    # constants are in the null space of both matrices
    v = rng.normal(size=(10**6, 3)) @ complement_basis().T
    quotients = np.einsum("ni,ij,nj->n", v, pencil.K, v) / np.einsum(
        "ni,ij,nj->n", v, pencil.M, v
    )
    scan = quotients.max()
    pytest.assume(scan <= lam * (1 + 1e-10))
    pytest.assume(lam <= 1.005 * scan, (lam, scan))


########################################
# Oracle
########################################


def test_oracle_scales_with_the_cell_side(diagonal_config):
    standard = lambda_oracle(diagonal_config, 2.0, N_AI).lam
    small = lambda_oracle(diagonal_config, 0.5, N_AI).lam
    pytest.assume(small == pytest.approx(4 * standard, rel=1e-12))
    pytest.assume(standard > 0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_oracle_is_rotation_invariant(diagonal_config, k):
    reference = lambda_oracle(diagonal_config, n_ai=N_AI).lam
    rotated = lambda_oracle(rotate_config(diagonal_config, k), n_ai=N_AI).lam
    assert rotated == pytest.approx(reference, rel=1e-9)


def test_oracle_is_mirror_invariant(diagonal_config):
    reference = lambda_oracle(diagonal_config, n_ai=N_AI).lam
    mirrored = lambda_oracle(mirror_config(diagonal_config), n_ai=N_AI).lam
    assert mirrored == pytest.approx(reference, rel=1e-9)


@settings(max_examples=20, deadline=None)
@given(mid_arc, end_edges, mid_arc, st.integers(min_value=1, max_value=3))
def test_random_configs_are_rotation_invariant(t_start, edge, t_end, k):
    config = config_from(t_start, edge, t_end)
    reference = lambda_oracle(config, n_ai=N_AI).lam
    rotated = lambda_oracle(rotate_config(config, k), n_ai=N_AI).lam
    assert rotated == pytest.approx(reference, rel=1e-9)


@settings(max_examples=20, deadline=None)
@given(mid_arc, end_edges, mid_arc)
def test_random_configs_are_mirror_invariant(t_start, edge, t_end):
    config = config_from(t_start, edge, t_end)
    reference = lambda_oracle(config, n_ai=N_AI).lam
    mirrored = lambda_oracle(mirror_config(config), n_ai=N_AI).lam
    assert mirrored == pytest.approx(reference, rel=1e-9)


def test_oracle_result_carries_its_depth(vertical_config):
    result = lambda_oracle(vertical_config, n_ai=4)
    pytest.assume(result.n_ai_used == 4)
    pytest.assume(result.lam == pytest.approx(max_gen_eig(result.pencil)))


def test_converged_depth_with_loose_tolerance(vertical_config):
    lam, n_ai = lambda_converged(vertical_config, rel_tol=1.0, n_ref=8)
    pytest.assume(n_ai == 3)
    pytest.assume(lam == pytest.approx(lambda_oracle(vertical_config, n_ai=8).lam))


def test_sliver_configuration():
    config = sliver_config(0.25)
    pytest.assume(config.A == (0.75, -1.0))
    pytest.assume(bool(config.is_physical((0.9, 0.0))))
    pytest.assume(not bool(config.is_physical((0.5, 0.0))))


def test_thinner_slivers_need_larger_lambda():
    study = sliver_study(range(1, 7), n_ai_ref=10)
    pytest.assume(list(study.columns) == ["k", "d", "lambda", "n_ai_required"])
    pytest.assume(study["lambda"].is_monotonic_increasing)
    pytest.assume(study["lambda"].min() > 0)
    # a sliver of width 2^-k is resolved exactly from depth k + 1 on
    bound = np.maximum(3, study["k"].to_numpy() + 1)
    pytest.assume(np.all(study["n_ai_required"].to_numpy() <= bound))
    pytest.assume(np.all(study["n_ai_required"].to_numpy() >= 3))
    pytest.assume(np.all(np.diff(study["n_ai_required"].to_numpy()) >= 0))
    # lambda scales with the inverse sliver width
    ratios = study["lambda"].to_numpy()[1:] / study["lambda"].to_numpy()[:-1]
    pytest.assume(np.all(np.abs(ratios - 2.0) < 0.1), str(ratios))
