import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from qlight.errors import NumericalError, SizeError
from qlight.field import annihilation
from qlight.operators import (OperatorMatrix, anticommutator, commutator, hermitian_function, identity,
                              partial_trace, tensor, tensor_product)

from conftest import random_density, random_hermitian

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def cmat(n):
    return arrays(complex, (n, n), elements=st.complex_numbers(max_magnitude=10, allow_nan=False,
                                                                 allow_infinity=False))


def test_identity_kron():
    assert tensor_product(identity(2), identity(3)).allclose(np.eye(6))
    assert tensor_product(identity(2), identity(3)).dims == (2, 3)


def test_sigma_z_kron():
    sz = OperatorMatrix(np.diag([1.0, -1.0]))
    assert tensor_product(sz, identity(2)).allclose(np.diag([1, 1, -1, -1]))


def test_mixed_product_rule(rng):
    a, b, c, d = (OperatorMatrix(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) for _ in range(4))
    lhs = tensor_product(a, b) @ tensor_product(c, d)
    assert lhs.allclose(tensor_product(a @ c, b @ d).data, atol=1e-12)


def test_size_cap():
    with pytest.raises(SizeError) as exc:
        tensor_product(identity(64), identity(65))
    assert exc.value.dim == 64 * 65


def test_non_square_and_non_finite():
    with pytest.raises(ValueError):
        OperatorMatrix(np.zeros((2, 3)))
    with pytest.raises(NumericalError):
        OperatorMatrix(np.array([[np.nan, 0], [0, 1]]))
    with pytest.raises(ValueError):
        OperatorMatrix(np.eye(4), (2, 3))


def test_data_is_read_only():
    op = OperatorMatrix(np.eye(2))
    with pytest.raises(ValueError):
        op.data[0, 0] = 5


def test_partial_trace_product_state(rng):
    ra, rb = random_density(rng, 2), random_density(rng, 3)
    x = tensor_product(OperatorMatrix(ra), OperatorMatrix(rb))
    assert partial_trace(x, 0).allclose(ra, atol=1e-12)
    assert partial_trace(x, {1}).allclose(rb, atol=1e-12)


def test_partial_trace_preserves_trace(rng):
    h = OperatorMatrix(random_hermitian(rng, 6), (2, 3))
    for keep in (0, 1):
        assert abs(partial_trace(h, keep).trace() - h.trace()) < 1e-12


def test_partial_trace_maximally_mixed():
    x = OperatorMatrix(np.eye(4) / 4, (2, 2))
    assert partial_trace(x, 1).allclose(np.eye(2) / 2)


def test_partial_trace_three_factors_keeps_order(rng):
    ops = [random_density(rng, n) for n in (2, 3, 2)]
    x = tensor(*[OperatorMatrix(o) for o in ops])
    kept = partial_trace(x, [0, 2])
    assert kept.dims == (2, 2)
    assert kept.allclose(np.kron(ops[0], ops[2]), atol=1e-12)


def test_partial_trace_errors():
    with pytest.raises(ValueError):
        partial_trace(identity(4), 0)
    with pytest.raises(ValueError):
        partial_trace(identity((2, 2)), [])
    with pytest.raises(ValueError):
        partial_trace(identity((2, 2)), 3)


def test_ladder_commutator_truncation_edge():
    a = OperatorMatrix(annihilation(4))
    assert commutator(a, a.dag()).allclose(np.diag([1, 1, 1, -3]))


def test_anticommutator_has_half():
    sx = OperatorMatrix(np.array([[0, 1], [1, 0]]))
    # V_+ X = (VX + XV)/2, so {sx, sx} with the half is I, twice of it is 2I
    assert (2 * anticommutator(sx, sx)).allclose(2 * np.eye(2))


def test_commutator_is_traceless(rng):
    a = OperatorMatrix(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    b = OperatorMatrix(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    assert abs(commutator(a, b).trace()) < 1e-12 * a.norm() * b.norm()


def test_hermitian_function_examples(rng):
    h = OperatorMatrix(random_hermitian(rng, 4))
    assert hermitian_function(h, lambda x: x).allclose(h.data, atol=1e-12)
    d = OperatorMatrix(np.diag([0.0, 1.0]))
    assert hermitian_function(d, lambda x: np.exp(-x)).allclose(np.diag([1, np.exp(-1)]), atol=1e-15)


def test_hermitian_function_unitary(rng):
    h = OperatorMatrix(random_hermitian(rng, 6))
    u = hermitian_function(h, lambda x: np.exp(-1j * x * 2.0))
    assert np.linalg.norm(u.dag().data @ u.data - np.eye(6)) < 1e-10


def test_hermitian_function_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_function(OperatorMatrix(np.array([[0, 1], [0, 0]])), np.exp)


@settings(max_examples=50, deadline=None)
@given(cmat(4), cmat(4))
def test_trace_of_commutator_vanishes(a, b):
    a, b = OperatorMatrix(a), OperatorMatrix(b)
    assert abs(commutator(a, b).trace()) <= 1e-12 * max(a.norm() * b.norm(), 1.0)


@settings(max_examples=50, deadline=None)
@given(cmat(2), cmat(3))
def test_kron_dagger(a, b):
    a, b = OperatorMatrix(a), OperatorMatrix(b)
    assert tensor_product(a, b).dag().allclose(tensor_product(a.dag(), b.dag()).data, atol=0)


@settings(max_examples=50, deadline=None)
@given(cmat(6), cmat(6), finite)
def test_partial_trace_linear(x, y, s):
    x, y = OperatorMatrix(x, (2, 3)), OperatorMatrix(y, (2, 3))
    lhs = partial_trace(x + s * y, 1)
    rhs = partial_trace(x, 1) + s * partial_trace(y, 1)
    scale = max(x.norm() + abs(s) * y.norm(), 1.0)
    assert lhs.allclose(rhs.data, atol=1e-12 * scale)
    assert abs(partial_trace(x, 0).trace() - x.trace()) <= 1e-12 * max(x.norm(), 1.0)


@settings(max_examples=30, deadline=None)
@given(arrays(float, (4, 4), elements=st.floats(-3, 3, allow_nan=False)))
def test_exp_times_inverse_exp(m):
    h = OperatorMatrix(0.5 * (m + m.T))
    prod = hermitian_function(h, np.exp) @ hermitian_function(h, lambda x: np.exp(-x))
    assert prod.allclose(np.eye(4), atol=1e-9)
