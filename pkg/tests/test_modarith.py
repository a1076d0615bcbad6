import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectral_hecke.modarith import (ModularMatrix, Ring, cokernel, inverse, is_invertible, kernel,
                                     normal_form, solve, subquotient, vp)


def matrices(max_rows=4, max_cols=4, primes=(2, 3, 5), max_m=3):
    @st.composite
    def build(draw):
        p = draw(st.sampled_from(primes))
        m = draw(st.integers(1, max_m))
        r = draw(st.integers(1, max_rows))
        c = draw(st.integers(1, max_cols))
        R = Ring(p, m)
        vals = draw(st.lists(st.integers(0, R.mod - 1), min_size=r * c, max_size=r * c))
        return ModularMatrix(R, np.array(vals, dtype=np.int64).reshape(r, c))
    return build()


def brute_quotient(R, M):
    """Order of Λ^rows / im(M) and the number of its p-torsion elements, by enumeration."""
    rows, cols = M.shape
    span = set()
    for x in itertools.product(range(R.mod), repeat=cols):
        span.add(tuple(M @ np.array(x, dtype=np.int64) % R.mod))
    order = R.mod ** rows // len(span)
    killed = 0
    for v in itertools.product(range(R.mod), repeat=rows):
        if tuple(R.p * np.array(v) % R.mod) in span:
            killed += 1
    return order, killed // len(span)


# -- normal form

def test_zero_one_by_one_is_fixed():
    R = Ring(3, 2)
    D, U, V = normal_form(ModularMatrix(R, [[0]]))
    assert D.a.tolist() == [[0]]
    assert U.a.tolist() == [[1]] and V.a.tolist() == [[1]]


def test_diagonal_input_is_kept_up_to_order():
    R = Ring(3, 2)
    D, _, _ = normal_form(ModularMatrix(R, [[1, 0], [0, 3]]))
    assert sorted(np.diag(D.a).tolist()) == [1, 3]
    assert not (D.a - np.diag(np.diag(D.a))).any()


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_normal_form_reconstructs(M):
    D, U, V = normal_form(M)
    assert (U @ M @ V) == D
    assert is_invertible(U) and is_invertible(V)
    diag = np.diag(D.a)
    off = D.a.copy()
    np.fill_diagonal(off, 0)
    assert not off.any()
    for d in diag:
        assert d == 0 or d == M.ring.p ** vp(int(d), M.ring.p)


def test_random_3x3_over_z27_against_product_oracle():
    rng = np.random.default_rng(7)
    R = Ring(3, 3)
    for _ in range(20):
        M = ModularMatrix(R, rng.integers(0, 27, size=(3, 3)))
        D, U, V = normal_form(M)
        prod = U.a @ M.a @ V.a % 27
        assert np.array_equal(prod, D.a)


# -- cokernel

@pytest.mark.parametrize("p,m", [(2, 2), (3, 2), (5, 3)])
def test_cokernel_of_p(p, m):
    Q = cokernel(ModularMatrix(Ring(p, m), [[p]]))
    assert Q.factors == [p]


@pytest.mark.parametrize("p,m", [(2, 1), (3, 2)])
def test_cokernel_of_zero_map(p, m):
    Q = cokernel(ModularMatrix(Ring(p, m), np.zeros((2, 1), dtype=np.int64)))
    assert Q.factors == [p ** m, p ** m]


@pytest.mark.parametrize("p", [2, 3])
def test_cokernel_against_enumeration(p):
    R = Ring(p, 2)
    M = ModularMatrix(R, [[p, 1], [0, p]])
    Q = cokernel(M)
    order, ptors = brute_quotient(R, M.a)
    assert Q.order == order
    assert p ** Q.rank == ptors


@settings(max_examples=40, deadline=None)
@given(matrices(max_rows=2, max_cols=2, primes=(2, 3), max_m=2))
def test_cokernel_order_property(M):
    Q = cokernel(M)
    order, ptors = brute_quotient(M.ring, M.a)
    assert Q.order == order
    assert M.ring.p ** Q.rank == ptors


# -- solve

@settings(max_examples=40, deadline=None)
@given(matrices(), st.data())
def test_identity_solve(M, data):
    R = M.ring
    b = np.array(data.draw(st.lists(st.integers(0, R.mod - 1), min_size=M.rows, max_size=M.rows)))
    x = solve(ModularMatrix.identity(R, M.rows), b)
    assert np.array_equal(x, b % R.mod)


def test_no_solution_for_unit_in_pz():
    assert solve(ModularMatrix(Ring(3, 2), [[3]]), [1]) is None


@settings(max_examples=60, deadline=None)
@given(matrices(primes=(3,), max_m=3), st.data())
def test_construct_then_solve(M, data):
    R = M.ring
    x0 = np.array(data.draw(st.lists(st.integers(0, R.mod - 1), min_size=M.cols, max_size=M.cols)))
    b = M.a @ x0 % R.mod
    x = solve(M, b)
    assert x is not None
    assert np.array_equal(M.a @ x % R.mod, b)


def test_solve_shape_error():
    with pytest.raises(ValueError):
        solve(ModularMatrix(Ring(3, 1), [[1, 0]]), [1, 2])


# -- kernels, inverses, subquotients

@settings(max_examples=40, deadline=None)
@given(matrices())
def test_kernel_is_annihilated(M):
    K = kernel(M)
    assert not (M.a @ K.a % M.ring.mod).any()


@settings(max_examples=40, deadline=None)
@given(matrices(max_rows=3, max_cols=3))
def test_inverse_when_invertible(M):
    if M.rows != M.cols:
        return
    Minv = inverse(M)
    if is_invertible(M):
        assert (M @ Minv) == ModularMatrix.identity(M.ring, M.rows)
    else:
        assert Minv is None


def test_subquotient_coordinates_round_trip():
    R = Ring(5, 2)
    Z = np.eye(3, dtype=np.int64)
    B = np.array([[5, 0], [0, 0], [0, 25 % 25]], dtype=np.int64)
    Q = subquotient(R, Z, B)
    assert sorted(Q.factors) == [5, 25, 25]
    for i in range(Q.rank):
        e = np.zeros(Q.rank, dtype=np.int64)
        e[i] = 1
        assert np.array_equal(Q.coords(Q.element(e)), e)


def test_subquotient_empty():
    R = Ring(3, 1)
    Q = subquotient(R, np.zeros((0, 0), dtype=np.int64), np.zeros((0, 0), dtype=np.int64))
    assert Q.rank == 0 and Q.order == 1
