"""Hurewicz pairings and tangent tables, computed through finite models.

* D^i of the free model on r degree-1 and r degree-2 generators is Λ^r,
  coordinatized by the images of the generators of degree i.
* π_1 is paired with D^1 through I/I²: a degree-1 cycle e_{δ_j} maps to
  d(e_{δ_j}) = [t_j] - [e] in I, and a functional on I/I² is read off through
  the comparison I/I² -> G ⊗ Λ.
* π_2 is paired with D^2 through the exterior ⊗ divided-power coordinates of
  H_2: y_i pairs with the i-th generator, decomposables pair to zero.
* The tangent table of the fiber functor is the cohomology of the cone of
  inflation from an unramified to a tame cochain model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chains import ChainMap, FreeComplex, cone, homology
from .groupalg import augmentation_quotient, multi_indices
from .groups import FiniteAbelianPGroup, GroupRing
from .modarith import (ModuleDecomposition, ModularMatrix, Ring, cokernel, free_module, is_invertible,
                       matmul, subquotient)
from . import torext
from .torext import Verdict


def aq_cohomology_free_model(r: int, ring: Ring, i: int) -> ModuleDecomposition:
    """D^i of the free model with r generators in degrees 1 and 2.

    A derivation is determined by the images of the degree-i generators, and
    these can be chosen freely, so D^i ≅ Λ^r with coordinates the generator
    images.  Decomposable elements impose no condition.
    """
    if i not in (1, 2):
        raise ValueError("only i = 1, 2 are modelled")
    # relations among generator images: none for a free model
    return subquotient(ring, np.eye(r, dtype=np.int64), np.zeros((r, 0), dtype=np.int64))


@dataclass
class HurewiczPairing:
    gram1: np.ndarray          # r x rank H_1: <f_i, image of basis class j>
    gram2_full: np.ndarray     # r x rank H_2
    gram2_prim: np.ndarray     # r x rank H_{2,prim}
    prim_gens: np.ndarray
    labels2: list


def _i_over_i2_coordinates(aq, x: np.ndarray) -> np.ndarray:
    """G ⊗ Λ coordinates of the class in I/I² of a dense group-algebra vector x in I."""
    G = aq.group
    mod = aq.ring.mod
    if aq.method == "tree":
        # [g] - [e] ≡ sum_i g_i ([t_i] - [e]) modulo I², and the comparison is the identity
        out = np.zeros(G.rank, dtype=np.int64)
        for g in G.elements():
            c = int(x[g]) % mod
            if c:
                out = (out + c * np.array(g, dtype=np.int64)) % mod
        return out
    elems = list(G.elements())[1:]
    v = np.array([x[g] for g in elems], dtype=np.int64) % mod
    return matmul(aq.comparison, v.reshape(-1, 1), mod)[:, 0]


def hurewicz_pairing(G: FiniteAbelianPGroup, ring: Ring) -> HurewiczPairing:
    r = G.rank
    mod = ring.mod
    if r == 0:
        z = np.zeros((0, 0), dtype=np.int64)
        return HurewiczPairing(z, z.copy(), z.copy(), z.copy(), [])
    if ring.m > min(G.exponents):
        raise ValueError("need m <= min N_i")
    H = torext.group_homology(G, ring, 2, 2)
    F = torext.resolution(G, ring, 3)
    aq = augmentation_quotient(G, ring)
    # i = 1: homology basis of H_1 is made of chain-level cycles on F_1 ⊗ Λ;
    # a degree-1 chain e_k lifts to F_1 and d(e_k) lies in I
    H1 = H.modules[1]
    gram1 = np.zeros((r, H1.rank), dtype=np.int64)
    for j in range(H1.rank):
        x = np.zeros((F.rank(1),) + F.base.shape, dtype=np.int64)
        x[(slice(None),) + G.identity()] = H1.basis[:, j]
        dx = F.apply_d(1, x)[0]
        gram1[:, j] = _i_over_i2_coordinates(aq, dx)
    # i = 2: model coordinates of the H_2 basis
    H2 = H.modules[2]
    labels2 = F.labels[2]
    if not np.array_equal(H2.basis % mod, np.eye(H2.rank, dtype=np.int64)):
        raise ValueError("H_2 basis is not the standard chain basis")
    gram2 = np.zeros((r, H2.rank), dtype=np.int64)
    for j, k in enumerate(labels2):
        for i in range(r):
            if k == tuple(2 if t == i else 0 for t in range(r)):
                gram2[i, j] = 1
    D = torext.decompose_degree2(G, ring)
    prim = D.prim_homology.basis % mod
    # express primitive generators (in H_2 coordinates) and pair
    gram2p = matmul(gram2, prim, mod)
    return HurewiczPairing(gram1 % mod, gram2, gram2p, prim, labels2)


def hurewicz_iso_check(G: FiniteAbelianPGroup, ring: Ring) -> Verdict:
    """Both Gram matrices invertible over Λ, and the i = 1 matrix is the identity."""
    P = hurewicz_pairing(G, ring)
    r = G.rank
    data = {"gram1": P.gram1.tolist(), "gram2_prim": P.gram2_prim.tolist()}
    if r == 0:
        return Verdict(True, "trivial group: empty pairings", data)
    if P.gram1.shape != (r, r) or not is_invertible(ModularMatrix(ring, P.gram1)):
        return Verdict(False, "i = 1 Gram matrix is not invertible", data)
    ident = np.array_equal(P.gram1, np.eye(r, dtype=np.int64))
    if P.gram2_prim.shape != (r, r) or not is_invertible(ModularMatrix(ring, P.gram2_prim)):
        return Verdict(False, f"i = 2 Gram matrix on primitives is not invertible "
                              f"(shape {P.gram2_prim.shape})", data)
    if not ident:
        return Verdict(False, "i = 1 Gram matrix is invertible but not the identity", data)
    return Verdict(True, "Gram matrices invertible for i = 1, 2; i = 1 is the identity", data)


# ---------------------------------------------------------------------------
# tangent table of the fiber functor


def _lam_complex(ring: Ring, ranks: dict, diffs: dict) -> FreeComplex:
    return FreeComplex(GroupRing.coefficients(ring), ranks,
                       {n: np.asarray(d, dtype=np.int64) % ring.mod for n, d in diffs.items()},
                       cohomological=True)


def unramified_model(ring: Ring, r: int) -> FreeComplex:
    """Cochains of the procyclic group generated by Frobenius on Λ^r (trivial action): Λ^r -0-> Λ^r."""
    return _lam_complex(ring, {0: r, 1: r}, {0: np.zeros((r, r), dtype=np.int64)})


def tame_model(ring: Ring, r: int, q_minus_one: int) -> FreeComplex:
    """Cochains of the tame group <σ, τ | σ τ σ^{-1} = τ^q> on Λ^r with trivial action.

    Degrees 0, 1, 2 with ranks r, 2r, r; degree-1 coordinates are (a_σ, a_τ)
    per torus coordinate and d^1(a_σ, a_τ) = (1 - q) a_τ.
    """
    Z = np.zeros((2 * r, r), dtype=np.int64)
    d1 = np.zeros((r, 2 * r), dtype=np.int64)
    for i in range(r):
        d1[i, r + i] = -q_minus_one
    return _lam_complex(ring, {0: r, 1: 2 * r, 2: r}, {0: Z, 1: d1})


def inflation(ring: Ring, r: int, src: FreeComplex, tgt: FreeComplex) -> ChainMap:
    """a ↦ (a, 0): Frobenius values go to σ, nothing to τ."""
    f1 = np.zeros((2 * r, r), dtype=np.int64)
    f1[:r, :r] = np.eye(r, dtype=np.int64)
    return ChainMap(src, tgt, {0: np.eye(r, dtype=np.int64), 1: f1})


@dataclass
class TangentTable:
    t0: ModuleDecomposition
    t1: ModuleDecomposition
    t2: ModuleDecomposition
    hom_tq: ModuleDecomposition            # Hom(T_q, Λ)
    hom_tq_torsion: ModuleDecomposition    # Hom(T_q[p^m], Λ)
    t1_to_hom: np.ndarray                  # t_1 -> Hom(T_q, Λ)
    hom_to_h1: np.ndarray                  # Hom(T_q, Λ) -> H^1(T_q; Λ)
    t2_to_hom: np.ndarray                  # t_2 -> Hom(T_q[p^m], Λ)
    hom_to_prim_dual: np.ndarray           # Hom(T_q[p^m], Λ) -> (H_{2,prim})^*
    boundary: np.ndarray                   # H_{2,prim} -> T_q[p^m] in generator coordinates
    les_exact: bool
    checks: list = field(default_factory=list)


def _hom_cyclic(ring: Ring, exps) -> ModuleDecomposition:
    """Hom(⊕ Z/p^{e}, Λ) = ⊕ Λ[p^e], coordinatized by the values on generators."""
    m = ring.m
    rel = np.diag([ring.p ** min(e, m) for e in exps]).astype(np.int64).reshape(len(exps), len(exps))
    return subquotient(ring, np.eye(len(exps), dtype=np.int64), rel)


def homology_boundary(G: FiniteAbelianPGroup, ring: Ring, cycles: np.ndarray) -> np.ndarray:
    """Boundary H_2(G; Z/p^m) -> H_1(G; Z)[p^m] = G[p^m] on chain-level cycles.

    Lift a cycle to integers, apply the integral differential, divide by p^m;
    the result is an integral 1-cycle, read as a group element.  Returned in
    the coordinates of the generators t_i^{p^{N_i - m}} of G[p^m].
    """
    m, p = ring.m, ring.p
    pm = ring.mod
    d2 = torext.integral_cochain_differential(G, 1).T      # F_2 ⊗ Z -> F_1 ⊗ Z
    out = []
    for z in np.asarray(cycles, dtype=np.int64).T:
        w = d2 @ z
        if np.any(w % pm):
            raise ValueError("not a cycle mod p^m")
        w = w // pm
        coords = []
        for i, N in enumerate(G.exponents):
            e = max(N - m, 0)
            gi = int(w[i]) % p ** N
            if gi % p ** e:
                raise ValueError("boundary does not land in G[p^m]")
            coords.append((gi // p ** e) % p ** min(N, m))
        out.append(coords)
    return np.array(out, dtype=np.int64).T.reshape(G.rank, -1)


def fib_tangent_table(G: FiniteAbelianPGroup, ring: Ring) -> TangentTable:
    r = G.rank
    m = ring.m
    if r and m > min(G.exponents):
        raise ValueError("need m <= min N_i")
    mod = ring.mod
    # q - 1 has p-adic valuation N; with N >= m it vanishes in Λ.  The model
    # only sees q - 1 modulo p^m, so one representative per coordinate is enough.
    qm1 = ring.p ** min(G.exponents) if r else 0
    U = unramified_model(ring, r)
    T = tame_model(ring, r, qm1)
    f = inflation(ring, r, U, T)
    K, les = cone(f)
    # Cone^n = U^{n+1} ⊕ T^n; t_i = H^i(Cone)
    t = {}
    for n in (0, 1, 2):
        t[n] = homology(K, n) if n in K.ranks else free_module(ring, 0)
    checks = []
    # t_1: a cone 1-cycle (u, a) with u in U^2 = 0 and a = (a_σ, a_τ); a_τ is the
    # inertia value, which is a homomorphism T_q -> Λ
    hom = _hom_cyclic(ring, G.exponents)
    cr1 = U.rank(2)
    t1_basis = t[1].basis[cr1:]                         # (a_σ, a_τ) parts
    t1_to_hom = hom.coords(t1_basis[r:2 * r]).reshape(hom.rank, t[1].rank) if r else np.zeros((0, 0), dtype=np.int64)
    # Hom(T_q, Λ) -> H^1(T_q; Λ): f ↦ the cocycle with value f(t_i) on e_{δ_i}
    Hc = torext.group_cohomology(G, ring, 2, 0)
    H1 = Hc.modules[1]
    F1_labels = torext.resolution(G, ring, 2).labels[1]
    cochains = np.zeros((len(F1_labels), hom.rank), dtype=np.int64)
    for j in range(hom.rank):
        for a, k in enumerate(F1_labels):
            i = k.index(1)
            cochains[a, j] = hom.basis[i, j]
    hom_to_h1 = H1.coords(cochains).reshape(H1.rank, hom.rank) if r else np.zeros((0, 0), dtype=np.int64)
    # t_2: cone 2-cycles (u, b) with u in U^3 = 0, b in T^2 = Λ^r, dual to the generators of T_q[p^m]
    tors = _hom_cyclic(ring, G.torsion_exponents(m))
    cr2 = U.rank(3)
    t2_to_hom = tors.coords(t[2].basis[cr2:]).reshape(tors.rank, t[2].rank) if r else np.zeros((0, 0), dtype=np.int64)
    # Hom(T_q[p^m], Λ) -> (H_{2,prim})^*: transpose of the boundary on primitives
    if r:
        Hh = torext.group_homology(G, ring, 2, 2)
        D = torext.decompose_degree2(G, ring)
        prim_cycles = matmul(Hh.modules[2].basis, D.prim_homology.basis, mod)
        bd = homology_boundary(G, ring, prim_cycles) % mod
        hom_to_prim_dual = bd.T % mod
    else:
        bd = np.zeros((0, 0), dtype=np.int64)
        hom_to_prim_dual = bd
    checks.append(("t0 = 0", t[0].rank == 0))
    inv = lambda M: M.shape[0] == M.shape[1] and (M.shape[0] == 0 or is_invertible(ModularMatrix(ring, M)))
    checks.append(("t1 -> Hom(T_q, Λ) iso", inv(t1_to_hom)))
    checks.append(("Hom(T_q, Λ) -> H^1 iso", inv(hom_to_h1)))
    checks.append(("t2 -> Hom(T_q[p^m], Λ) iso", inv(t2_to_hom)))
    checks.append(("Hom(T_q[p^m], Λ) -> H_2,prim^* iso", inv(hom_to_prim_dual)))
    checks.append(("t1 ≅ H^1 as modules", sorted(t[1].exps) == sorted(H1.exps)))
    prim_exps = torext.decompose_degree2(G, ring).prim_homology.exps if r else ()
    checks.append(("t2 ≅ H_2,prim^* as modules", sorted(t[2].exps) == sorted(prim_exps)))
    return TangentTable(t[0], t[1], t[2], hom, tors, t1_to_hom, hom_to_h1, t2_to_hom,
                        hom_to_prim_dual, bd, les.is_exact(), checks)
