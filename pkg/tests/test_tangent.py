import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectral_hecke.chains import cone, homology
from spectral_hecke.groups import FiniteAbelianPGroup
from spectral_hecke.modarith import Ring
from spectral_hecke.tangent import (aq_cohomology_free_model, fib_tangent_table, hurewicz_iso_check,
                                    hurewicz_pairing, inflation, tame_model, unramified_model)


def test_free_model_ranks():
    R = Ring(3, 1)
    assert aq_cohomology_free_model(1, R, 1).factors == [3]
    assert aq_cohomology_free_model(2, R, 2).factors == [3, 3]
    assert aq_cohomology_free_model(0, R, 1).rank == 0
    with pytest.raises(ValueError):
        aq_cohomology_free_model(1, R, 3)


@pytest.mark.parametrize("p,N,m", [(3, 1, 1), (3, 2, 1), (5, 2, 2), (2, 2, 1)])
def test_gram1_cyclic(p, N, m):
    P = hurewicz_pairing(FiniteAbelianPGroup(p, (N,)), Ring(p, m))
    assert P.gram1.tolist() == [[1]]


@pytest.mark.parametrize("p,N,m", [(3, 1, 1), (5, 2, 1), (3, 3, 2)])
def test_gram1_square(p, N, m):
    P = hurewicz_pairing(FiniteAbelianPGroup(p, (N, N)), Ring(p, m))
    assert np.array_equal(P.gram1, np.eye(2, dtype=np.int64))


def test_trivial_group_pairing():
    P = hurewicz_pairing(FiniteAbelianPGroup(3, ()), Ring(3, 1))
    assert P.gram1.shape == (0, 0) and P.gram2_prim.shape == (0, 0)


@pytest.mark.parametrize("p,exps,m", [(3, (1,), 1), (5, (2, 2), 1)])
def test_hurewicz_iso(p, exps, m):
    v = hurewicz_iso_check(FiniteAbelianPGroup(p, exps), Ring(p, m))
    assert v.ok, v.detail


def test_hurewicz_p2_is_recorded():
    v = hurewicz_iso_check(FiniteAbelianPGroup(2, (1,)), Ring(2, 1))
    assert not v.ok
    assert "i = 2" in v.detail


@pytest.mark.parametrize("p,N,m", [(3, 1, 1), (3, 3, 2), (5, 2, 1)])
def test_tangent_cyclic(p, N, m):
    T = fib_tangent_table(FiniteAbelianPGroup(p, (N,)), Ring(p, m))
    assert T.t0.rank == 0
    assert T.t1.factors == [p ** m] and T.t2.factors == [p ** m]
    assert T.les_exact


def test_tangent_rank_two():
    T = fib_tangent_table(FiniteAbelianPGroup(3, (2, 2)), Ring(3, 1))
    assert T.t1.rank == 2 and T.t2.rank == 2
    assert all(ok for _, ok in T.checks)


@st.composite
def odd_groups(draw):
    p = draw(st.sampled_from([3, 5]))
    r = draw(st.integers(1, 2))
    exps = tuple(draw(st.lists(st.integers(1, 3), min_size=r, max_size=r)))
    m = draw(st.integers(1, min(exps)))
    return FiniteAbelianPGroup(p, exps), Ring(p, m)


@settings(max_examples=12, deadline=None)
@given(odd_groups())
def test_tangent_identifications(GR):
    G, R = GR
    T = fib_tangent_table(G, R)
    assert T.t0.rank == 0
    assert all(ok for _, ok in T.checks), T.checks
    assert T.les_exact


def test_p2_failures_are_the_primitive_ones():
    T = fib_tangent_table(FiniteAbelianPGroup(2, (1,)), Ring(2, 1))
    failed = [name for name, ok in T.checks if not ok]
    assert failed and all("prim" in name for name in failed)


def test_inflation_cone_on_explicit_complexes():
    """With q - 1 = p and Λ = Z/p², the tame differential is nonzero and the LES still closes up."""
    R = Ring(3, 2)
    U = unramified_model(R, 1)
    T = tame_model(R, 1, 3)
    K, les = cone(inflation(R, 1, U, T))
    assert les.is_exact()
    assert homology(K, 0).rank == 0
