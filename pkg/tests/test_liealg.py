import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from suslov.liealg import (
    InertiaSpec,
    commutator,
    d_matrix,
    embed,
    frame_with_last_row,
    h_basis,
    inertia_apply,
    killing_inner,
    orthogonality_error,
    random_rotation,
    reorthonormalize,
    skew,
    split,
    wedge,
)

# Indices below are zero based: wedge(0, 1, 3) is E_1 ^ E_2.


def test_wedge_entries_and_antisymmetry():
    np.testing.assert_array_equal(wedge(0, 1, 3), [[0, 1, 0], [-1, 0, 0], [0, 0, 0]])
    np.testing.assert_array_equal(wedge(1, 0, 3), -wedge(0, 1, 3))


def test_wedge_maps_last_axis_to_first():
    np.testing.assert_array_equal(wedge(0, 2, 3) @ np.array([0, 0, 1.0]), [1, 0, 0])


@pytest.mark.parametrize("args, exc", [((0, 3, 3), IndexError), ((-1, 1, 3), IndexError), ((1, 1, 3), ValueError)])
def test_wedge_rejects_bad_indices(args, exc):
    with pytest.raises(exc):
        wedge(*args)


def test_killing_normalization():
    assert killing_inner(wedge(0, 1, 3), wedge(0, 1, 3)) == 1.0
    assert killing_inner(wedge(0, 1, 4), wedge(2, 3, 4)) == 0.0


def test_killing_dimension_mismatch():
    with pytest.raises(ValueError):
        killing_inner(wedge(0, 1, 3), wedge(0, 1, 4))


def test_inertia_quadratic_form():
    spec = InertiaSpec.physical((1, 2, 3))
    X = wedge(0, 2, 3)
    assert killing_inner(inertia_apply(spec, X), X) == pytest.approx(4.0, abs=1e-15)


@pytest.mark.parametrize("n", [3, 4, 6])
def test_wedges_to_last_axis_are_eigenvectors(n):
    masses = np.arange(1.0, n + 1)
    spec = InertiaSpec.physical(masses)
    for i in range(n - 1):
        W = wedge(i, n - 1, n)
        np.testing.assert_allclose(inertia_apply(spec, W), (masses[i] + masses[-1]) * W, atol=0)
    np.testing.assert_array_equal(inertia_apply(spec, np.zeros((n, n))), 0)


def test_split_examples():
    n = 4
    h, d = split(wedge(0, n - 1, n))
    np.testing.assert_array_equal(h, 0)
    np.testing.assert_array_equal(d, [1, 0, 0])
    h, d = split(wedge(0, 1, n))
    np.testing.assert_array_equal(h, wedge(0, 1, n))
    np.testing.assert_array_equal(d, 0)


def test_embed_inverts_split():
    rng = np.random.default_rng(1)
    X = skew(rng.normal(size=(5, 5)))
    np.testing.assert_allclose(embed(*split(X)), X, atol=0)
    np.testing.assert_array_equal(d_matrix([1.0, 2.0]), wedge(0, 2, 3) + 2 * wedge(1, 2, 3))


def test_commutator_examples():
    X = wedge(0, 1, 3)
    np.testing.assert_array_equal(commutator(X, X), 0)
    np.testing.assert_array_equal(commutator(wedge(0, 2, 3), wedge(1, 2, 3)), -wedge(0, 1, 3))


def test_h_basis_spans_block():
    assert len(h_basis(5)) == 6
    for b in h_basis(5):
        np.testing.assert_array_equal(split(b)[1], 0)


def test_reorthonormalize_examples():
    np.testing.assert_array_equal(reorthonormalize(np.eye(4)), np.eye(4))
    R = random_rotation(4, np.random.default_rng(3))
    np.testing.assert_allclose(reorthonormalize(1.001 * R), R, atol=1e-14)


def test_reorthonormalize_rejects_far_matrices():
    with pytest.raises(ValueError):
        reorthonormalize(2 * np.eye(3))
    with pytest.raises(ValueError):
        reorthonormalize(np.diag([1.0, 1.0, -1.0]))


def test_block_inertia_validation():
    with pytest.raises(ValueError):
        InertiaSpec.block([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        InertiaSpec.block([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(ValueError):
        InertiaSpec.physical((1.0, 0.0, 2.0))
    spec = InertiaSpec.block([[2.0, 0.5], [0.5, 1.0]])
    assert spec.n == 3
    np.testing.assert_allclose(spec.A @ spec.J, np.eye(2), atol=1e-15)


def test_symmetric_top_detection():
    assert InertiaSpec.physical((1, 1, 1, 2)).is_symmetric_top()
    assert not InertiaSpec.physical((1, 2, 1, 2)).is_symmetric_top()


dims = st.integers(min_value=3, max_value=6)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=50, deadline=None)
@given(dims, seeds)
def test_ad_invariance_property(n, seed):
    rng = np.random.default_rng(seed)
    X, Y, Z = (skew(rng.normal(size=(n, n))) for _ in range(3))
    assert abs(killing_inner(commutator(X, Y), Z) + killing_inner(Y, commutator(X, Z))) < 1e-12


@settings(max_examples=50, deadline=None)
@given(dims, seeds)
def test_symmetric_pair_property(n, seed):
    rng = np.random.default_rng(seed)
    H1, H2 = (split(skew(rng.normal(size=(n, n))))[0] for _ in range(2))
    D1, D2 = (d_matrix(rng.normal(size=n - 1)) for _ in range(2))
    assert np.abs(split(commutator(D1, D2))[1]).max() == 0  # [D, D] in so(n-1)
    assert np.abs(split(commutator(H1, D1))[0]).max() < 1e-14  # [h, D] in D
    assert np.abs(split(commutator(H1, H2))[1]).max() == 0


@settings(max_examples=50, deadline=None)
@given(dims, seeds)
def test_inertia_self_adjoint_property(n, seed):
    rng = np.random.default_rng(seed)
    spec = InertiaSpec.physical(rng.uniform(0.2, 5.0, size=n))
    X, Y = (skew(rng.normal(size=(n, n))) for _ in range(2))
    lhs = killing_inner(inertia_apply(spec, X), Y)
    assert lhs == pytest.approx(killing_inner(X, inertia_apply(spec, Y)), abs=1e-12)
    assert killing_inner(inertia_apply(spec, X), X) > 0


@settings(max_examples=50, deadline=None)
@given(dims, seeds)
def test_frame_with_last_row_property(n, seed):
    rng = np.random.default_rng(seed)
    q = rng.normal(size=n)
    q /= np.linalg.norm(q)
    g = frame_with_last_row(q)
    np.testing.assert_allclose(g[-1], q, atol=1e-15)
    assert orthogonality_error(g) < 1e-14
    assert np.linalg.det(g) == pytest.approx(1.0, abs=1e-12)


def test_frame_with_last_row_on_coordinate_axes():
    for k in range(4):
        g = frame_with_last_row(np.eye(4)[k])
        assert orthogonality_error(g) < 1e-15 and np.linalg.det(g) > 0


def test_block_inertia_acts_on_both_parts():
    J = [[2.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 3.0]]
    K = np.diag([1.0, 2.0, 3.0])
    spec = InertiaSpec.block(J, K)
    X = d_matrix([1.0, 0.0, 0.0]) + 2.0 * wedge(0, 2, 4)
    out = inertia_apply(spec, X)
    np.testing.assert_allclose(split(out)[1], [2.0, 0.5, 0.0])
    # (0, 2) is the second so(3) basis element, scaled by 2
    np.testing.assert_allclose(split(out)[0], 4.0 * wedge(0, 2, 4))
