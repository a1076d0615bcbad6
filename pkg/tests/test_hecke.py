import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectral_hecke import hecke, torext
from spectral_hecke.groups import FiniteAbelianPGroup
from spectral_hecke.hecke import (FiniteAlgebra, FiniteRModule, NotRegular, RootDatum, StrongRegularCharacter,
                                  TorusHeckeElement, TruncatedLocalRing, derived_satake_graded,
                                  flat_degeneration_check, framed_ring_models, localize_at_character,
                                  root_datum, satake_split_check, spectral_hecke_homotopy, weyl_invariants)
from spectral_hecke.modarith import Ring


# -- framed ring models

def test_depth_one_truncation_is_lambda():
    M = framed_ring_models(3, (1,), 1, 1, 1)
    assert M.unramified.rank == 1


@pytest.mark.parametrize("p,exps,m,D", [(3, (1,), 1, 2), (3, (1, 2), 1, 3), (5, (1,), 1, 3), (2, (2, 1), 1, 2)])
def test_full_rank_counts(p, exps, m, D):
    r = len(exps)
    M = framed_ring_models(p, exps, m, r, D)
    assert M.unramified.rank * M.tame.rank == comb(D - 1 + r, r) * p ** sum(exps)
    assert M.full.rank == M.unramified.rank * M.tame.rank
    assert M.bridge_ok


def test_augmentation_kills_generators():
    M = framed_ring_models(3, (1, 1), 1, 2, 2)
    U, T = M.unramified, M.tame
    assert M.augmentation_full(np.kron(U.one(), T.one())) == 1
    for i in range(2):
        assert M.augmentation_full(np.kron(U.var(i), T.one())) == 0
        y = np.zeros(T.rank, dtype=np.int64)
        y[3 if i == 0 else 1] = 1      # Y_1 ⊗ 1 and 1 ⊗ Y_2 in the tensor basis
        assert M.augmentation_full(np.kron(U.one(), y)) == 0


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_augmentation_is_multiplicative(data):
    M = framed_ring_models(3, (1,), 1, 1, 3)
    S = M.full
    a = np.array(data.draw(st.lists(st.integers(0, 2), min_size=S.rank, max_size=S.rank)))
    b = np.array(data.draw(st.lists(st.integers(0, 2), min_size=S.rank, max_size=S.rank)))
    lhs = M.augmentation_full(S.mul(a, b))
    assert lhs == M.augmentation_full(a) * M.augmentation_full(b) % 3


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([(3, 2), (5, 1), (2, 3)]), st.integers(1, 2), st.integers(1, 4), st.data())
def test_truncated_ring_inverse(pm, r, D, data):
    R = Ring(*pm)
    T = TruncatedLocalRing(R, r, D)
    a = np.array(data.draw(st.lists(st.integers(0, R.mod - 1), min_size=T.rank, max_size=T.rank)))
    inv = T.inverse(a)
    if R.is_unit(int(a[0])):
        assert np.array_equal(T.mul(a, inv), T.one())
    else:
        assert inv is None


def test_truncated_ring_axioms():
    T = TruncatedLocalRing(Ring(3, 2), 2, 3)
    assert T.is_commutative() and T.is_associative()


# -- the spectral Hecke homotopy

def test_cyclic_ranks():
    SH = spectral_hecke_homotopy(3, (1,), 1, 1, 2, 4)
    assert SH.lambda_ranks() == [2] * 5
    assert all(ok for _, ok, _ in SH.verdicts)


def test_trivial_torus():
    SH = spectral_hecke_homotopy(3, (), 1, 0, 2, 3)
    assert SH.lambda_ranks() == [1, 0, 0, 0]


@pytest.mark.parametrize("D", [2, 3])
def test_rank_two(D):
    SH = spectral_hecke_homotopy(3, (1, 1), 1, 2, D, 4)
    base = comb(D + 1, 2)
    assert SH.lambda_ranks() == [base * k for k in (1, 2, 3, 4, 5)]
    assert all(ok for _, ok, _ in SH.verdicts)


def test_p2_coproduct_discrepancy_is_reported():
    SH = spectral_hecke_homotopy(2, (1,), 1, 1, 2, 4)
    verdicts = {name: ok for name, ok, _ in SH.verdicts}
    assert verdicts["route ranks"]
    assert not verdicts["route coproducts"]


# -- flatness

def test_free_module_is_flat():
    R = framed_ring_models(3, (1,), 1, 1, 2).unramified
    A = FiniteRModule.free(R, 2)
    v = flat_degeneration_check(A, A, 3, expected_tensor_order=3 ** (R.rank * 4))
    assert v.ok, v.detail


def test_torsion_counterexample():
    R = FiniteAlgebra.coefficients(Ring(3, 2))
    A = FiniteRModule.quotient(R, [[3]])
    v = flat_degeneration_check(A, A, 2)
    assert not v.ok
    assert "not flat" in v.detail
    assert v.data["tor_exponents"][1] == [1]


# -- torus derived Hecke algebra

@pytest.fixture(scope="module")
def coh():
    return torext.group_cohomology(FiniteAbelianPGroup(3, (1, 1)), Ring(3, 1), 2, 2)


def test_convolution_unit(coh):
    one = TorusHeckeElement.delta(coh, (0, 0))
    f = TorusHeckeElement.delta(coh, (1, -1), 1, [1, 2])
    assert one * f == f and f * one == f


def test_degree_zero_is_group_algebra(coh):
    pts = list(itertools.product(range(-1, 2), repeat=2))
    for a in pts:
        for b in pts:
            prod = TorusHeckeElement.delta(coh, a) * TorusHeckeElement.delta(coh, b)
            assert prod == TorusHeckeElement.delta(coh, (a[0] + b[0], a[1] + b[1]))


def test_degree_one_anticommute(coh):
    f = TorusHeckeElement.delta(coh, (1, 0), 1, [1, 0])
    g = TorusHeckeElement.delta(coh, (0, 2), 1, [0, 1])
    assert not (f * g).is_zero()
    assert f * g == -(g * f)


def _span(K, mod):
    out = set()
    for c in itertools.product(range(mod), repeat=K.shape[1]):
        out.add(tuple(K @ np.array(c, dtype=np.int64) % mod))
    return out


def test_weyl_invariants_degree_zero():
    sup, K = weyl_invariants(root_datum("A1"), FiniteAbelianPGroup(3, (1,)), Ring(3, 1), 0, 1)
    assert sup == [(-1,), (0,), (1,)]
    # fixed points found by enumerating all functions on the support
    brute = {v for v in itertools.product(range(3), repeat=3) if v[0] == v[2]}
    assert _span(K, 3) == brute


def test_weyl_invariants_degree_one():
    sup, K = weyl_invariants(root_datum("A1"), FiniteAbelianPGroup(3, (1,)), Ring(3, 1), 1, 1)
    # w = -1 acts by -1 on H¹, so fixed vectors are δ_λ⊗a + δ_{-λ}⊗(-a)
    brute = {v for v in itertools.product(range(3), repeat=3) if v[0] == (-v[2]) % 3 and v[1] == 0}
    assert _span(K, 3) == brute


def test_trivial_weyl_group_fixes_everything():
    datum = RootDatum("T1", 1, [], [[[1]]], [{(1,): 1}])
    sup, K = weyl_invariants(datum, FiniteAbelianPGroup(3, (1,)), Ring(3, 1), 1, 1)
    assert K.shape == (3, 3)


# -- localization and splitting

def test_localization_substitution():
    chi = StrongRegularCharacter(root_datum("A1"), Ring(5, 2), (2,))
    loc = localize_at_character(chi, 3)
    assert loc({(1,): 1}).tolist() == [2, 2, 0]
    # x^{-1} ↦ 2^{-1}(1 - X + X²)
    inv2 = pow(2, -1, 25)
    assert loc({(-1,): 1}).tolist() == [inv2, (-inv2) % 25, inv2]


@pytest.mark.parametrize("u", [1, 2, 8])
def test_non_regular_rejected_over_z9(u):
    chi = StrongRegularCharacter(root_datum("A1"), Ring(3, 2), (u,))
    with pytest.raises(NotRegular) as exc:
        localize_at_character(chi, 3)
    assert exc.value.root == (2,)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3, 7, 8, 12]), st.dictionaries(st.integers(-3, 3), st.integers(-5, 5), max_size=4),
       st.dictionaries(st.integers(-3, 3), st.integers(-5, 5), max_size=4))
def test_localization_is_a_ring_map(u, f, g):
    chi = StrongRegularCharacter(root_datum("A1"), Ring(5, 2), (u,))
    loc = localize_at_character(chi, 4)
    F = {(k,): v for k, v in f.items()}
    Gd = {(k,): v for k, v in g.items()}
    prod = hecke._laurent_mul(F, Gd, 25)
    assert np.array_equal(loc(prod), loc.target.mul(loc(F), loc(Gd)))
    # degree-0 compatibility: augmentation after completion is χ
    assert loc.target.augmentation(loc(F)) == sum(c * chi(lam) for lam, c in F.items()) % 25


@pytest.mark.parametrize("u", [2, 3, 7, 8, 12, 13, 17, 18])
def test_satake_splits_for_regular_units(u):
    chi = StrongRegularCharacter(root_datum("A1"), Ring(5, 2), (u,))
    v = satake_split_check(root_datum("A1"), chi, 4)
    assert v.ok, v.detail


@pytest.mark.parametrize("pm,u", [((3, 2), 8), ((3, 2), 1), ((5, 2), 24), ((5, 2), 1)])
def test_satake_fails_when_u_squared_is_one(pm, u):
    chi = StrongRegularCharacter(root_datum("A1"), Ring(*pm), (u,))
    v = satake_split_check(root_datum("A1"), chi, 4)
    assert not v.ok
    assert v.detail.startswith("non-regular split failure")
    assert v.data["rank_deficit_mod_p"] > 0


def test_satake_truncation_one_is_identity():
    chi = StrongRegularCharacter(root_datum("A1"), Ring(5, 1), (2,))
    v = satake_split_check(root_datum("A1"), chi, 1)
    assert v.ok and v.data["matrix_size"] == 1


# -- graded comparison

@pytest.mark.parametrize("p,r,name,u", [(5, 1, "A1", (2,)), (5, 2, "A1xA1", (2, 3)), (3, 2, "GL2", (1, 2))])
def test_derived_satake(p, r, name, u):
    datum = root_datum(name)
    chi = StrongRegularCharacter(datum, Ring(p, 1), u)
    res = derived_satake_graded(p, (1,) * r, 1, r, datum, chi, 2, 2)
    assert res.verdict.ok, res.verdict.detail
    assert not res.sign_twists
    deg0 = [row for row in res.table if row["deg_a"] == row["deg_b"] == 0]
    assert deg0 and all(row["left"] == row["right"] for row in deg0)


def test_derived_satake_needs_regular_character():
    chi = StrongRegularCharacter(root_datum("A1"), Ring(3, 1), (2,))
    with pytest.raises(NotRegular):
        derived_satake_graded(3, (1,), 1, 1, root_datum("A1"), chi, 2, 2)
