import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dapb.cxlinalg import (
    eig_hermitian,
    inv_sqrt,
    numerical_rank,
    project_onto_null,
    project_onto_range,
)
from dapb.exceptions import RankError, ValidationError


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_hermitian(rng, m, rank=None):
    rank = m if rank is None else rank
    x = crandn(rng, m, rank)
    return x @ x.conj().T


def test_identity():
    d = eig_hermitian(np.eye(2))
    np.testing.assert_allclose(d.eigenvalues, [1, 1])
    np.testing.assert_allclose(d.eigenvectors.conj().T @ d.eigenvectors, np.eye(2), atol=1e-12)


def test_diagonal_sorted_descending():
    d = eig_hermitian(np.diag([1.0, 3.0]))
    np.testing.assert_allclose(d.eigenvalues, [3, 1])
    np.testing.assert_allclose(np.abs(d.eigenvectors), [[0, 1], [1, 0]], atol=1e-12)


def test_rank_one(rng):
    h = crandn(rng, 4)
    h *= np.sqrt(5) / np.linalg.norm(h)
    d = eig_hermitian(np.outer(h, h.conj()))
    np.testing.assert_allclose(d.eigenvalues, [5, 0, 0, 0], atol=1e-12)
    assert d.rank == 1


def test_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        eig_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValidationError):
        eig_hermitian(np.ones((2, 3)))
    with pytest.raises(ValidationError):
        eig_hermitian(np.array([[np.nan, 0], [0, 1]]))


@pytest.mark.parametrize("m", [1, 2, 4, 8, 16])
def test_decomposition_invariants(rng, m):
    for _ in range(20):
        a = random_hermitian(rng, m, rank=rng.integers(1, m + 1))
        lam, u = eig_hermitian(a)
        assert np.all(np.diff(lam) <= 0)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(m), atol=1e-10)
        rec = (u * lam) @ u.conj().T
        assert np.linalg.norm(rec - a) <= 1e-9 * np.linalg.norm(a)


def test_numerical_rank_threshold():
    assert numerical_rank([2.0, 1e-9, 1e-11]) == 2
    assert numerical_rank([1e-3, 1e-11]) == 1  # cutoff floors at 1e-10
    assert numerical_rank([]) == 0
    assert numerical_rank(np.zeros(3)) == 0


def test_inv_sqrt_examples():
    np.testing.assert_allclose(inv_sqrt(np.eye(3)), np.eye(3), atol=1e-14)
    np.testing.assert_allclose(inv_sqrt(np.diag([4.0, 1.0])), np.diag([0.5, 1.0]), atol=1e-14)


@pytest.mark.parametrize("m", [2, 4, 8, 16])
def test_inv_sqrt_whitens(rng, m):
    for _ in range(25):
        a = random_hermitian(rng, m) + 0.1 * np.eye(m)
        r = inv_sqrt(a)
        np.testing.assert_allclose(r @ a @ r, np.eye(m), atol=1e-8)


def test_inv_sqrt_singular(rng):
    with pytest.raises(RankError):
        inv_sqrt(random_hermitian(rng, 4, rank=2))
    with pytest.raises(RankError):
        inv_sqrt(np.diag([1.0, -1.0]))


def test_projection_trivial_ranks(rng):
    a = random_hermitian(rng, 4)
    d = eig_hermitian(a)
    v = crandn(rng, 4)
    np.testing.assert_allclose(project_onto_range(d, 4, v), v, atol=1e-12)
    np.testing.assert_allclose(project_onto_range(d, 0, v), 0, atol=0)
    np.testing.assert_allclose(project_onto_null(d, 0, v), v, atol=0)
    np.testing.assert_allclose(project_onto_null(d, 4, v), 0, atol=1e-12)
    with pytest.raises(ValidationError):
        project_onto_range(d, 5, v)


def test_rank_one_projector(rng):
    h = crandn(rng, 4)
    v = crandn(rng, 4)
    d = eig_hermitian(np.outer(h, h.conj()))
    expect = (np.vdot(h, v) / np.vdot(h, h)) * h
    np.testing.assert_allclose(project_onto_range(d, 1, v), expect, atol=1e-12)
    np.testing.assert_allclose(project_onto_null(d, 1, v), v - expect, atol=1e-12)
    u1 = d.eigenvectors[:, :1]
    np.testing.assert_allclose(project_onto_range(d, 1, v), u1 @ u1.conj().T @ v, atol=1e-12)


@given(
    m=st.integers(1, 8),
    seed=st.integers(0, 2**32 - 1),
    data=st.data(),
)
def test_projection_properties(m, seed, data):
    rng = np.random.default_rng(seed)
    r = data.draw(st.integers(0, m))
    d = eig_hermitian(random_hermitian(rng, m, rank=max(r, 1)))
    v = crandn(rng, m) * 10 ** rng.uniform(-3, 3)
    p = project_onto_range(d, r, v)
    q = project_onto_null(d, r, v)
    vv = float(np.vdot(v, v).real)
    np.testing.assert_allclose(p + q, v, atol=1e-10 * max(1.0, np.sqrt(vv)))
    assert abs(np.vdot(p, q)) <= 1e-10 * max(vv, 1e-300)
    np.testing.assert_allclose(project_onto_range(d, r, p), p, atol=1e-10 * max(1.0, np.sqrt(vv)))
