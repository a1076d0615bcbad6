"""The acceptance criteria, one test each, on the desk-scale grid.

Grid: p in {3, 5}, 1 <= m <= N <= 3, r in {1, 2}, D in {2, 3}, degrees <= 6
(<= 4 for structure constants).  The p = 2 family is run alongside: additive
checks must pass there, algebra-structure checks are only recorded.
"""

import io
import time

import numpy as np

from spectral_hecke import cli, hecke, tangent, torext
from spectral_hecke.groupalg import augmentation_quotient
from spectral_hecke.groups import FiniteAbelianPGroup
from spectral_hecke.modarith import Ring

GRID = [(p, N, m, r) for p in (3, 5) for N in (1, 2, 3) for m in range(1, N + 1) for r in (1, 2)]
P2 = [(2, N, m, r) for N in (1, 2) for m in range(1, N + 1) for r in (1, 2)]
TRUNCS = (2, 3)
MAX_DEG, STRUCT_DEG = 6, 4


def group(p, N, m, r):
    return FiniteAbelianPGroup(p, (N,) * r), Ring(p, m)


def kunneth_ranks(r, top):
    seq = [1] + [0] * top
    for _ in range(r):
        seq = [sum(seq[: n + 1]) for n in range(top + 1)]
    return seq


def summarize(bad, total):
    return f"{total - len(bad)}/{total} points" + (f"; first failure {bad[0]}" if bad else "")


def test_criterion_01_route_ranks(acceptance):
    t0 = time.perf_counter()
    bad, total = [], 0
    for p, N, m, r in GRID + P2:
        for D in TRUNCS:
            total += 1
            SH = hecke.spectral_hecke_homotopy(p, (N,) * r, m, r, D, MAX_DEG, STRUCT_DEG)
            routes = {name: ok for name, ok, _ in SH.verdicts}
            expect = [SH.base.rank * k for k in kunneth_ranks(r, MAX_DEG)]
            if not routes["route ranks"] or SH.lambda_ranks() != expect:
                bad.append((p, N, m, r, D))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60
    acceptance(1, "two routes give equal per-degree ranks; runtime < 60 s", ok,
               summarize(bad, total) + f"; {elapsed:.1f} s")
    assert ok


def test_criterion_02_model(acceptance):
    bad, total = [], 0
    for p, N, m, r in GRID + P2:
        G, R = group(p, N, m, r)
        total += 1
        H = torext.group_homology(G, R, MAX_DEG, STRUCT_DEG)
        model = torext.ExteriorDividedModel(r, R, MAX_DEG)
        if H.ranks() != model.ranks() or any(not H.modules[n].is_free() for n in range(MAX_DEG + 1)):
            bad.append(("ranks", p, N, m, r))
        if p % 2:
            v = torext.compare_to_model(G, R, MAX_DEG, STRUCT_DEG)
            if not v.ok:
                bad.append(("structure", p, N, m, r, v.detail))
            if r == 1 and H.multiply(2, [1], 2, [1]).tolist() != [2]:
                bad.append(("y·y = 2y^(2)", p, N, m))
    acceptance(2, "homology matches the exterior ⊗ divided-power model", not bad, summarize(bad, total))
    assert not bad


def test_criterion_03_duality(acceptance):
    bad = []
    for p, N, m, r in GRID:
        v = torext.duality_check(*group(p, N, m, r), 4)
        if not v.ok:
            bad.append((p, N, m, r, v.detail))
    acceptance(3, "Ext product is the transpose of the Tor coproduct (degrees <= 4)", not bad,
               summarize(bad, len(GRID)))
    assert not bad


def test_criterion_04_bockstein(acceptance):
    bad, proper = [], 0
    for p, N, m, r in GRID:
        B = torext.bockstein_suite(*group(p, N, m, r))
        ok = (B.square_zero and B.derivation and B.integral and B.exactness and B.lift_independent
              and B.scaled_equality and B.surjective == (N == m))
        proper += not B.surjective
        if not ok:
            bad.append((p, N, m, r, B))
    acceptance(4, "β² = 0, derivation, β(H¹) = p^(N-m)·H²_ind, integral factorization", not bad,
               summarize(bad, len(GRID)) + f"; proper subgroup at {proper} points with N > m")
    assert not bad


def test_criterion_05_hurewicz(acceptance):
    bad = []
    for p, N, m, r in GRID:
        G, R = group(p, N, m, r)
        v = tangent.hurewicz_iso_check(G, R)
        P = tangent.hurewicz_pairing(G, R)
        if not v.ok or not np.array_equal(P.gram1, np.eye(r, dtype=np.int64)):
            bad.append((p, N, m, r, v.detail))
    acceptance(5, "Hurewicz Gram matrices invertible, i = 1 is the identity", not bad, summarize(bad, len(GRID)))
    assert not bad


def test_criterion_06_augmentation_ideal(acceptance):
    bad = []
    for p, N, m, r in GRID + P2:
        G, R = group(p, N, m, r)
        aq = augmentation_quotient(G, R)
        img = aq.comparison @ aq.generator_coords % R.mod
        if not aq.is_iso or not np.array_equal(img, np.eye(r, dtype=np.int64)):
            bad.append((p, N, m, r, aq.reason))
    acceptance(6, "I/I² -> T_q ⊗ Λ is an isomorphism with [t]-[e] ↦ t⊗1", not bad,
               summarize(bad, len(GRID + P2)))
    assert not bad


def test_criterion_07_tangent_table(acceptance):
    bad = []
    for p, N, m, r in GRID:
        T = tangent.fib_tangent_table(*group(p, N, m, r))
        if T.t0.rank or not T.les_exact or not all(ok for _, ok in T.checks):
            bad.append((p, N, m, r, [n for n, ok in T.checks if not ok]))
    recorded = sum(not all(ok for _, ok in tangent.fib_tangent_table(*group(*pt)).checks) for pt in P2)
    acceptance(7, "t_0 = 0, t_1 ≅ H¹, t_2 ≅ (H_2,prim)^*", not bad,
               summarize(bad, len(GRID)) + f"; p = 2 expected-fail at {recorded}/{len(P2)} points")
    assert not bad


def test_criterion_08_flat_degeneration(acceptance):
    bad = []
    for p, N, m, r in [(3, 1, 1, 1), (3, 2, 1, 2), (5, 1, 1, 2)]:
        for D in TRUNCS:
            SH = hecke.spectral_hecke_homotopy(p, (N,) * r, m, r, D, 2, 2)
            base = SH.base
            k = sum(SH.ranks)
            A = hecke.FiniteRModule.free(base, k)
            v = hecke.flat_degeneration_check(A, A, 2, expected_tensor_order=free_order(base, k * k))
            if not v.ok or not SH.is_free():
                bad.append((p, N, m, r, D, v.detail))
    R = hecke.FiniteAlgebra.coefficients(Ring(3, 2))
    torsion = hecke.flat_degeneration_check(hecke.FiniteRModule.quotient(R, [[3]]),
                                            hecke.FiniteRModule.quotient(R, [[3]]), 2)
    ok = not bad and not torsion.ok
    acceptance(8, "higher Tor over the base vanishes; Λ/p over Z/p² is reported non-flat", ok,
               f"{6 - len(bad)}/6 free instances; torsion case: {torsion.detail}")
    assert ok


def free_order(base, n):
    return base.ring.mod ** (base.rank * n)


def test_criterion_09_satake_splitting(acceptance):
    datum = hecke.root_datum("A1")
    lines, ok = [], True
    for p, m in [(3, 2), (5, 2)]:
        R = Ring(p, m)
        split_regular, involutions_split = [], []
        for u in R.units():
            chi = hecke.StrongRegularCharacter(datum, R, (u,))
            v = hecke.satake_split_check(datum, chi, 4)
            if chi.is_strongly_regular() and v.ok:
                split_regular.append(u)
            if u * u % R.mod == 1 and v.data["invertible"]:
                involutions_split.append(u)
        good = len(split_regular) >= 5 and not involutions_split
        ok &= good
        lines.append(f"Z/{R.mod}: {len(split_regular)} regular split units, "
                     f"{len(involutions_split)} units with u² = 1 that split")
    acceptance(9, "A1 completion map is an isomorphism mod m^4 for >= 5 regular u per modulus", ok, "; ".join(lines))
    assert ok


def test_criterion_10_derived_satake(acceptance):
    bad, total, twists = [], 0, []
    cases = [(5, N, m, r, name, u) for N in (1, 2, 3) for m in range(1, N + 1)
             for r, name, u in [(1, "A1", (2,)), (2, "A1xA1", (2, 3))]]
    cases += [(3, 1, 1, 2, "GL2", (1, 2))]
    for p, N, m, r, name, u in cases:
        datum = hecke.root_datum(name)
        chi = hecke.StrongRegularCharacter(datum, Ring(p, m), u)
        for D in TRUNCS:
            total += 1
            res = hecke.derived_satake_graded(p, (N,) * r, m, r, datum, chi, D, 2)
            if res.sign_twists:
                twists.append((p, N, m, r, D, res.sign_twists))
            if not res.verdict.ok or res.sign_twists:
                bad.append((p, N, m, r, D, res.verdict.detail))
    acceptance(10, "graded derived Satake comparison in degrees <= 2", not bad,
               summarize(bad, total) + f"; sign twists reported: {len(twists)}")
    assert not bad


def test_criterion_11_determinism(acceptance):
    outs = []
    for _ in range(2):
        buf = io.BytesIO()
        code = cli.run_subcommand(["verify-all", "--grid", "default"], buf)
        outs.append((code, buf.getvalue()))
    same = outs[0][1] == outs[1][1]
    ok = same and outs[0][0] == 0
    acceptance(11, "verify-all twice gives byte-identical JSON", ok,
               f"exit {outs[0][0]}, {len(outs[0][1])} bytes, identical={same}")
    assert ok
