from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from parakahler.exceptions import DegenerateSubspaceError
from parakahler.linear import (
    AdaptedBasis,
    PseudoEuclideanSpace,
    cubic_form,
    decompose_S_prolongation,
    invariant_subspace,
    make_standard_basis,
    pseudo_orthonormalize,
    q_element,
    q_norm,
    random_s_prolongation,
    rotate_basis,
    s_prolongation_basis,
    s_prolongation_residuals,
    signature,
    tilt_basis,
    total_symmetry_residual,
)
from parakahler.submanifold import cubic_transform_check


def slice_frame(n, eps, k=None):
    """Columns spanning the standard maximal epsilon-complex slice."""
    k = n if k is None else k
    unit = 1 if eps == -1 else 2
    cols = sorted([4 * i for i in range(k)] + [4 * i + unit for i in range(k)])
    return np.eye(4 * n)[:, cols]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_standard_basis(n, eps):
    space, basis = make_standard_basis(n, eps)
    assert space.signature() == (2 * n, 2 * n)
    assert basis.eps == ((-1, 1, 1) if eps == -1 else (1, 1, -1))
    assert max(basis.residuals(space.g).values()) == 0.0


@given(st.floats(-2.5, 2.5))
def test_rotations_keep_basis_adapted(theta):
    for eps in (-1, 1):
        space, basis = make_standard_basis(2, eps)
        rot = rotate_basis(basis, theta)
        rot.check(space.g, tol=1e-10)
        assert np.array_equal(rot.J1, basis.J1)


@given(st.floats(-1.5, 1.5))
def test_tilts_keep_basis_adapted(phi):
    for eps in (-1, 1):
        space, basis = make_standard_basis(1, eps)
        tilt_basis(basis, phi).check(space.g, tol=1e-10)


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_q_norm_squares(coeffs):
    for eps in (-1, 1):
        space, basis = make_standard_basis(1, eps)
        L = q_element(coeffs, basis)
        assert np.allclose(L @ L, -q_norm(coeffs, eps) * np.eye(4), atol=1e-10)


def test_q_norm_signature():
    assert q_norm([1, 0, 0], -1) == 1.0
    assert q_norm([0, 1, 0], -1) == -1.0
    assert q_norm([1, 0, 0], 1) == -1.0
    assert q_norm([0, 0, 1], 1) == 1.0


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        make_standard_basis(0)
    with pytest.raises(ValueError):
        AdaptedBasis(np.eye(2), np.eye(2), np.eye(2), (1, 1, 1))
    with pytest.raises(DegenerateSubspaceError):
        PseudoEuclideanSpace(np.diag([1.0, 0.0]))
    with pytest.raises(ValueError):
        PseudoEuclideanSpace(np.array([[1.0, 2.0], [0.0, 1.0]]))
    space, basis = make_standard_basis(1, -1)
    bad = AdaptedBasis(basis.J1, basis.J2, basis.J2, basis.eps)
    with pytest.raises(ValueError):
        bad.check(space.g)


def test_signature_counts():
    assert signature(np.diag([2.0, -1.0, 0.0, 3.0])) == (2, 1, 1)


def test_pseudo_orthonormalize(rng):
    g = np.diag([1.0, 1.0, -1.0, -1.0])
    W = rng.normal(size=(4, 3))
    E, mu = pseudo_orthonormalize(W, g)
    assert np.allclose(E.T @ g @ E, np.diag(mu), atol=1e-12)
    assert np.linalg.matrix_rank(np.column_stack([E, W]), tol=1e-9) == 3


def test_pseudo_orthonormalize_keeps_orthonormal_input():
    g = np.diag([1.0, 1.0, -1.0, -1.0])
    E, mu = pseudo_orthonormalize(np.eye(4), g)
    # every output column is +-e_j, each e_j used once
    assert np.array_equal(np.count_nonzero(E, axis=0), [1, 1, 1, 1])
    assert sorted(np.abs(E).argmax(axis=0)) == [0, 1, 2, 3]
    assert np.allclose(np.abs(E).max(axis=0), 1.0)
    assert np.allclose(mu, np.diag(g)[np.abs(E).argmax(axis=0)])


def test_pseudo_orthonormalize_null_pair_is_rescued():
    # e1+e3 and e1-e3 are null but pair to -2... combined they span a nondegenerate plane
    g = np.diag([1.0, 1.0, -1.0, -1.0])
    W = np.array([[1, 1], [0, 0], [1, -1], [0, 0]], dtype=float)
    E, mu = pseudo_orthonormalize(W, g)
    assert np.allclose(E.T @ g @ E, np.diag(mu))
    assert sorted(mu) == [-1, 1]


def test_pseudo_orthonormalize_degenerate_witness():
    g = np.diag([1.0, 1.0, -1.0, -1.0])
    W = np.array([[1, 0], [0, 1], [1, 0], [0, 0]], dtype=float)  # span{e1+e3, e2}
    with pytest.raises(DegenerateSubspaceError) as info:
        pseudo_orthonormalize(W, g)
    w = info.value.witness
    assert abs(w @ g @ w) < 1e-12
    assert np.allclose(W.T @ g @ w, 0, atol=1e-12)
    assert info.value.signature == (1, 0, 1)


def test_invariant_subspace_examples(eps):
    space, basis = make_standard_basis(2, eps)
    g = space.g
    tbar, rest = invariant_subspace(np.eye(8), basis, g)
    assert tbar.shape[1] == 8 and rest.shape[1] == 0
    tbar, rest = invariant_subspace(slice_frame(2, eps), basis, g)
    assert tbar.shape[1] == 0 and rest.shape[1] == 4
    tbar, rest = invariant_subspace(np.eye(8)[:, :4], basis, g)
    assert tbar.shape[1] == 4


@pytest.mark.parametrize("k", [1, 2, 3])
def test_prolongation_dimension(k, eps):
    space, basis = make_standard_basis(k, eps)
    T = slice_frame(k, eps)
    gT = T.T @ space.g @ T
    Jc = np.linalg.solve(gT, T.T @ space.g) @ basis.J1 @ T
    # symmetric cubic forms in k epsilon-complex variables: 2 * C(k + 2, 3) real dimensions
    assert len(s_prolongation_basis(gT, Jc)) == 2 * comb(k + 2, 3)


def test_random_prolongation_properties(eps, rng):
    space, basis = make_standard_basis(2, eps)
    T = slice_frame(2, eps)
    gT = T.T @ space.g @ T
    Jc = np.linalg.solve(gT, T.T @ space.g) @ basis.J1 @ T
    C = random_s_prolongation(gT, Jc, rng)
    assert max(s_prolongation_residuals(C, gT, Jc).values()) < 1e-12
    assert total_symmetry_residual(cubic_form(C, gT)) < 1e-12
    dec = decompose_S_prolongation(C, gT, Jc, eps)
    assert np.allclose((dec.plus + dec.minus).real, cubic_form(C, gT), atol=1e-12)
    assert np.allclose((dec.plus + dec.minus).imag, 0, atol=1e-12)
    with pytest.raises(ValueError):
        decompose_S_prolongation(C + rng.normal(size=C.shape), gT, Jc, eps)


def test_cubic_transform_laws(eps, rng):
    space, basis = make_standard_basis(2, eps)
    T = slice_frame(2, eps)
    gT = T.T @ space.g @ T
    Jc = np.linalg.solve(gT, T.T @ space.g) @ basis.J1 @ T
    C = random_s_prolongation(gT, Jc, rng)
    res = cubic_transform_check(C, gT, Jc, eps, np.linspace(-1.5, 1.5, 7))
    assert max(res.values()) < 1e-10


def test_zero_cubic_form(eps):
    space, basis = make_standard_basis(1, eps)
    T = slice_frame(1, eps)
    gT = T.T @ space.g @ T
    Jc = np.linalg.solve(gT, T.T @ space.g) @ basis.J1 @ T
    dec = decompose_S_prolongation(np.zeros((2, 2, 2)), gT, Jc, eps)
    assert not np.any(dec.plus) and not np.any(dec.minus)
