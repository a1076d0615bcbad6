"""Tor and Ext of Λ over Λ[G] as graded algebras and coalgebras.

Everything is computed from the resolution F of Λ over Λ[G]:

* H_n = homology of F ⊗_{Λ[G]} Λ, H^n = cohomology of Hom_{Λ[G]}(F, Λ).
* Pontryagin product and Tor coproduct come from chain maps lifting the
  multiplication G x G -> G and the diagonal G -> G x G.  For a cyclic
  factor these are lifted directly; for a product of cyclic groups the
  factor maps are combined by the Künneth shuffle with Koszul signs.  A
  direct lift over G x G is kept for small groups as an independent check.
* The cup product is the Yoneda product: for a cocycle b of degree l lift
  η∘b to a chain map f^b : F_{l+*} -> F_*, then a·b = a ∘ f^b.

With these conventions the cup product is dual to the coproduct with no
extra sign: (a·b)(z) = sum a(z') b(z'') where Δz = sum z' ⊗ z''.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Optional

import numpy as np

from .chains import ChainMap, FreeComplex, homology, lift_chain_map
from .groupalg import Resolution, multi_indices
from .groups import FiniteAbelianPGroup, GroupHom
from .modarith import (ModuleDecomposition, ModularMatrix, Ring, _kernel, _normal_form,
                       cokernel, matmul, preimage_kernel, same_submodule, submodule_order,
                       subquotient)


# ---------------------------------------------------------------------------
# cached resolutions


@functools.lru_cache(maxsize=64)
def _resolution(p: int, exponents: tuple, m: int, top: int) -> Resolution:
    return Resolution(FiniteAbelianPGroup(p, exponents), Ring(p, m), top)


def resolution(G: FiniteAbelianPGroup, ring: Ring, top: int) -> Resolution:
    return _resolution(G.p, G.exponents, ring.m, top)


def _mult_hom(G: FiniteAbelianPGroup) -> GroupHom:
    r = G.rank
    return GroupHom(G.product(G), G, np.concatenate([np.eye(r), np.eye(r)], axis=1))


def _diag_hom(G: FiniteAbelianPGroup) -> GroupHom:
    r = G.rank
    return GroupHom(G, G.product(G), np.concatenate([np.eye(r), np.eye(r)], axis=0))


def koszul_shuffle_sign(a, b) -> int:
    """Sign of (x_1..x_r) ⊗ (y_1..y_r) -> (x_1 ⊗ y_1) ⊗ ... ⊗ (x_r ⊗ y_r), degrees a, b."""
    s = 0
    for i in range(len(a)):
        for j in range(i):
            s += a[i] * b[j]
    return -1 if s % 2 else 1


@functools.lru_cache(maxsize=64)
def cyclic_structure(p: int, N: int, m: int, top: int):
    """Chain-level product and diagonal for Z/p^N, reduced to numbers.

    Returns (mu, delta): mu[(a, b)] is the coefficient of e_{a+b} in e_a·e_b,
    delta[(k, a)] the coefficient of e_a ⊗ e_{k-a} in Δ(e_k).
    """
    C = FiniteAbelianPGroup(p, (N,))
    R = Ring(p, m)
    F = _resolution(p, (N,), m, top + 1)
    FF = _resolution(p, (N, N), m, top + 1)
    f0 = F.unit().reshape(1, 1, *F.base.shape)
    mu_map = lift_chain_map(FF, F, f0, top=top, phi=_mult_hom(C), contract=F.contract)
    g0 = FF.unit().reshape(1, 1, *FF.base.shape)
    delta_map = lift_chain_map(F, FF, g0, top=top, phi=_diag_hom(C), contract=FF.contract)
    mu, delta = {}, {}
    for n in range(top + 1):
        A = mu_map.maps[n].reshape(1, FF.rank(n), -1).sum(axis=2) % R.mod
        for j, (a, b) in enumerate(FF.labels[n]):
            mu[(a, b)] = int(A[0, j])
        B = delta_map.maps[n].reshape(FF.rank(n), 1, -1).sum(axis=2) % R.mod
        for j, (a, b) in enumerate(FF.labels[n]):
            delta[(n, a)] = int(B[j, 0])
    return mu, delta


def kunneth_product(G: FiniteAbelianPGroup, ring: Ring, top: int):
    """Chain-level Pontryagin product on F ⊗ Λ assembled from cyclic factors.

    Returns a dict (a, b) -> coefficient of e_{a+b} in e_a·e_b, over all
    multi-indices with |a| + |b| <= top.
    """
    facs = [cyclic_structure(G.p, N, ring.m, top)[0] for N in G.exponents]
    r = G.rank
    out = {}
    for n in range(top + 1):
        for da in range(n + 1):
            for a in multi_indices(r, da):
                for b in multi_indices(r, n - da):
                    c = koszul_shuffle_sign(a, b)
                    for i in range(r):
                        c *= facs[i][(a[i], b[i])]
                    out[(a, b)] = c % ring.mod
    return out


def kunneth_coproduct(G: FiniteAbelianPGroup, ring: Ring, top: int):
    """Chain-level Tor coproduct: dict (k, a) -> coefficient of e_a ⊗ e_{k-a} in Δ(e_k)."""
    facs = [cyclic_structure(G.p, N, ring.m, top)[1] for N in G.exponents]
    r = G.rank
    out = {}
    for n in range(top + 1):
        for k in multi_indices(r, n):
            for a in itertools.product(*[range(ki + 1) for ki in k]):
                b = tuple(ki - ai for ki, ai in zip(k, a))
                c = koszul_shuffle_sign(a, b)
                for i in range(r):
                    c *= facs[i][(k[i], a[i])]
                out[(k, a)] = c % ring.mod
    return out


def direct_product(G: FiniteAbelianPGroup, ring: Ring, top: int, contract=True):
    """Pontryagin product by lifting G x G -> G on the resolution of G x G itself."""
    F = resolution(G, ring, top + 1)
    FF = Resolution(G.product(G), ring, top)
    f0 = F.unit().reshape(1, 1, *F.base.shape)
    fm = lift_chain_map(FF, F, f0, top=top, phi=_mult_hom(G),
                        contract=F.contract if contract else None)
    out = {}
    r = G.rank
    for n in range(top + 1):
        A = fm.maps[n].reshape(F.rank(n), FF.rank(n), -1).sum(axis=2) % ring.mod
        for j, lab in enumerate(FF.labels[n]):
            a, b = lab[:r], lab[r:]
            out[(a, b)] = int(A[F.index[n][tuple(x + y for x, y in zip(a, b))], j])
            assert not np.delete(A[:, j], F.index[n][tuple(x + y for x, y in zip(a, b))]).any()
    return out, fm


def direct_coproduct(G: FiniteAbelianPGroup, ring: Ring, top: int, contract=True):
    """Tor coproduct by lifting the diagonal into the resolution of G x G itself."""
    F = resolution(G, ring, top)
    FF = Resolution(G.product(G), ring, top + 1)
    g0 = FF.unit().reshape(1, 1, *FF.base.shape)
    fm = lift_chain_map(F, FF, g0, top=top, phi=_diag_hom(G),
                        contract=FF.contract if contract else None)
    r = G.rank
    out = {}
    for n in range(top + 1):
        B = fm.maps[n].reshape(FF.rank(n), F.rank(n), -1).sum(axis=2) % ring.mod
        for j, k in enumerate(F.labels[n]):
            for i, lab in enumerate(FF.labels[n]):
                a, b = lab[:r], lab[r:]
                if B[i, j]:
                    out[(k, a)] = int(B[i, j])
    return out, fm


# ---------------------------------------------------------------------------
# graded algebra data


@dataclass
class GradedAlgebraData:
    """A graded Λ-module through `max_deg` with product and optional coproduct.

    modules[n] decomposes the degree-n piece inside the chain-level coordinate
    space.  product[(i, j)] has shape (rank_{i+j}, rank_i, rank_j): entry
    [k, a, b] is the coefficient of basis k in (basis a)·(basis b).
    coproduct[(i, j)] has shape (rank_i, rank_j, rank_{i+j}): entry [a, b, k]
    is the coefficient of (basis a) ⊗ (basis b) in Δ(basis k).
    """

    ring: Ring
    max_deg: int
    struct_deg: int
    modules: list
    labels: list
    product: dict
    coproduct: dict = field(default_factory=dict)
    kind: str = "homology"

    def rank(self, n: int) -> int:
        return self.modules[n].rank

    def ranks(self):
        return [self.rank(n) for n in range(self.max_deg + 1)]

    def moduli(self, n):
        return self.modules[n].moduli()

    def unit(self) -> np.ndarray:
        return self.modules[0].coords(np.array([1]))

    def multiply(self, i, x, j, y) -> np.ndarray:
        P = self.product[(i, j)]
        out = np.einsum("kab,a,b->k", P, np.asarray(x) % self.ring.mod, np.asarray(y) % self.ring.mod)
        return self.reduce(i + j, out)

    def reduce(self, n, v):
        v = np.asarray(v, dtype=np.int64) % self.ring.mod
        if self.rank(n):
            v = v % self.moduli(n)
        return v

    def comultiply(self, k, z):
        """Δ(z) for z of degree k, as {(i, j): matrix rank_i x rank_j}."""
        out = {}
        for i in range(k + 1):
            C = self.coproduct[(i, k - i)]
            out[(i, k - i)] = np.einsum("abk,k->ab", C, np.asarray(z)) % self.ring.mod
        return out

    def structure_constants(self):
        """Nonzero product constants as a sorted list of dicts."""
        rows = []
        for (i, j), P in sorted(self.product.items()):
            for c, a, b in zip(*np.nonzero(P)):
                rows.append({"deg_a": i, "idx_a": int(a), "deg_b": j, "idx_b": int(b),
                             "deg_c": i + j, "idx_c": int(c), "value": int(P[c, a, b])})
        return rows

    # -- axioms
    def check_unit(self) -> bool:
        u = self.unit()
        for n in range(self.struct_deg + 1):
            for a in range(self.rank(n)):
                e = np.zeros(self.rank(n), dtype=np.int64)
                e[a] = 1
                if not np.array_equal(self.multiply(0, u, n, e), e):
                    return False
                if not np.array_equal(self.multiply(n, e, 0, u), e):
                    return False
        return True

    def check_associative(self) -> bool:
        D = self.struct_deg
        for i in range(D + 1):
            for j in range(D + 1 - i):
                for k in range(D + 1 - i - j):
                    A = self.product[(i, j)]
                    B = self.product[(i + j, k)]
                    lhs = np.einsum("xab,yxc->yabc", A, B)
                    A2 = self.product[(j, k)]
                    B2 = self.product[(i, j + k)]
                    rhs = np.einsum("xbc,yax->yabc", A2, B2)
                    n = i + j + k
                    if self.rank(n):
                        mods = self.moduli(n)[:, None, None, None]
                        if not np.array_equal(lhs % self.ring.mod % mods, rhs % self.ring.mod % mods):
                            return False
        return True

    def check_graded_commutative(self) -> bool:
        D = self.struct_deg
        for i in range(D + 1):
            for j in range(D + 1 - i):
                s = -1 if (i * j) % 2 else 1
                lhs = self.product[(i, j)]
                rhs = s * self.product[(j, i)].transpose(0, 2, 1)
                n = i + j
                if self.rank(n):
                    mods = self.moduli(n)[:, None, None]
                    if not np.array_equal(lhs % self.ring.mod % mods, rhs % self.ring.mod % mods):
                        return False
        return True

    def check_coassociative(self) -> bool:
        if not self.coproduct:
            return False
        D = self.struct_deg
        mod = self.ring.mod
        for n in range(D + 1):
            for i in range(n + 1):
                for j in range(n + 1 - i):
                    k = n - i - j
                    # (Δ ⊗ 1)Δ vs (1 ⊗ Δ)Δ on every basis element of degree n
                    lhs = np.einsum("xkz,abx->abkz", self.coproduct[(i + j, k)],
                                    self.coproduct[(i, j)]) % mod
                    rhs = np.einsum("ayz,bky->abkz", self.coproduct[(i, j + k)],
                                    self.coproduct[(j, k)]) % mod
                    if not np.array_equal(lhs, rhs):
                        return False
        return True

    def check_cocommutative(self) -> bool:
        D = self.struct_deg
        mod = self.ring.mod
        for n in range(D + 1):
            for i in range(n + 1):
                j = n - i
                s = -1 if (i * j) % 2 else 1
                if not np.array_equal(self.coproduct[(i, j)] % mod,
                                      s * self.coproduct[(j, i)].transpose(1, 0, 2) % mod):
                    return False
        return True

    def check_counit(self) -> bool:
        D = self.struct_deg
        u = self.unit()
        mod = self.ring.mod
        for n in range(D + 1):
            r = self.rank(n)
            left = np.einsum("a,abk->bk", u, self.coproduct[(0, n)]) % mod
            right = np.einsum("b,abk->ak", u, self.coproduct[(n, 0)]) % mod
            if not (np.array_equal(left, np.eye(r, dtype=np.int64))
                    and np.array_equal(right, np.eye(r, dtype=np.int64))):
                return False
        return True


@dataclass
class TorClass:
    degree: int
    coords: np.ndarray


@dataclass
class ExtClass:
    degree: int
    coords: np.ndarray


def _chain_decompositions(C: FreeComplex, top: int):
    return [homology(C, n) for n in range(top + 1)]


def _tensor_coords(Ha: ModuleDecomposition, Hb: ModuleDecomposition, T: np.ndarray) -> np.ndarray:
    """Coordinates in Ha ⊗ Hb of a chain-level tensor T (rank_a x rank_b)."""
    if Ha.rank == 0 or Hb.rank == 0:
        return np.zeros((Ha.rank, Hb.rank), dtype=np.int64)
    X = Ha.coords(T)                       # rank Ha x chain_b
    Y = Hb.coords(X.T)                     # rank Hb x rank Ha
    return Y.T


# ---------------------------------------------------------------------------
# homology and cohomology


@functools.lru_cache(maxsize=64)
def _group_homology(p, exponents, m, max_deg, struct_deg, method):
    G = FiniteAbelianPGroup(p, exponents)
    R = Ring(p, m)
    F = resolution(G, R, max_deg + 1)
    C = F.tensor_down()
    mods = _chain_decompositions(C, max_deg)
    labels = [F.labels[n] for n in range(max_deg + 1)]
    if method == "kunneth":
        mu = kunneth_product(G, R, struct_deg)
        delta = kunneth_coproduct(G, R, struct_deg)
    else:
        mu, _ = direct_product(G, R, struct_deg)
        delta, _ = direct_coproduct(G, R, struct_deg)
    mod = R.mod
    product, coproduct = {}, {}
    for i in range(struct_deg + 1):
        for j in range(struct_deg + 1 - i):
            n = i + j
            # chain-level product tensor C_i x C_j -> C_n
            T = np.zeros((F.rank(n), F.rank(i), F.rank(j)), dtype=np.int64)
            for ia, a in enumerate(labels[i]):
                for ib, b in enumerate(labels[j]):
                    c = mu.get((a, b), 0)
                    if c:
                        T[F.index[n][tuple(x + y for x, y in zip(a, b))], ia, ib] = c
            Hi, Hj, Hn = mods[i], mods[j], mods[n]
            X = np.einsum("kab,ax,by->kxy", T, Hi.basis, Hj.basis) % mod
            P = np.zeros((Hn.rank, Hi.rank, Hj.rank), dtype=np.int64)
            if Hn.rank and Hi.rank and Hj.rank:
                P = Hn.coords(X.reshape(F.rank(n), -1)).reshape(Hn.rank, Hi.rank, Hj.rank)
            product[(i, j)] = P
            # chain-level coproduct C_n -> C_i ⊗ C_j
            D = np.zeros((F.rank(i), F.rank(j), F.rank(n)), dtype=np.int64)
            for ik, k in enumerate(labels[n]):
                for ia, a in enumerate(labels[i]):
                    b = tuple(x - y for x, y in zip(k, a))
                    if min(b, default=0) < 0:
                        continue
                    c = delta.get((k, a), 0)
                    if c:
                        D[ia, F.index[j][b], ik] = c
            Q = np.zeros((Hi.rank, Hj.rank, Hn.rank), dtype=np.int64)
            for z in range(Hn.rank):
                T2 = np.einsum("abk,k->ab", D, Hn.basis[:, z]) % mod
                Q[:, :, z] = _tensor_coords(Hi, Hj, T2)
            coproduct[(i, j)] = Q
    return GradedAlgebraData(R, max_deg, struct_deg, mods, labels, product, coproduct, "homology")


def group_homology(G: FiniteAbelianPGroup, ring: Ring, max_deg: int, struct_deg: Optional[int] = None,
                   method: str = "kunneth") -> GradedAlgebraData:
    """H_*(G; Λ) with Pontryagin product and Tor coproduct.

    Ranks through max_deg, structure constants through struct_deg
    (default min(max_deg, 4)).  method="direct" lifts over G x G instead of
    combining cyclic factors; it is only feasible for small groups.
    """
    if struct_deg is None:
        struct_deg = min(max_deg, 4)
    return _group_homology(G.p, G.exponents, ring.m, max_deg, min(struct_deg, max_deg), method)


def cochain_complex(G: FiniteAbelianPGroup, ring: Ring, top: int) -> FreeComplex:
    return resolution(G, ring, top + 1).tensor_down().dual()


def yoneda_lift(F: Resolution, cocycle: np.ndarray, deg: int, top: int, contract=True) -> ChainMap:
    """Chain map F_{deg + *} -> F_* lifting η∘cocycle, filled up to source degree top."""
    f0 = np.zeros((1, F.rank(deg)) + F.base.shape, dtype=np.int64)
    idx = (0, slice(None)) + F.group.identity()
    f0[idx] = np.asarray(cocycle, dtype=np.int64) % F.ring.mod
    return lift_chain_map(F, F, f0, src_bottom=deg, tgt_bottom=0, top=top,
                          contract=F.contract if contract else None)


def yoneda_product_cochain(F: Resolution, a: np.ndarray, k: int, b: np.ndarray, l: int,
                           lift: ChainMap = None) -> np.ndarray:
    """Cochain a·b on F_{k+l}: evaluate a on the lift of b."""
    if lift is None:
        lift = yoneda_lift(F, b, l, k + l)
    M = lift.maps[k + l]
    A = M.reshape(M.shape[0], M.shape[1], -1).sum(axis=2) % F.ring.mod   # rank_k x rank_{k+l}
    return matmul(np.asarray(a, dtype=np.int64).reshape(1, -1), A, F.ring.mod)[0]


@functools.lru_cache(maxsize=64)
def _group_cohomology(p, exponents, m, max_deg, struct_deg, contract):
    G = FiniteAbelianPGroup(p, exponents)
    R = Ring(p, m)
    F = resolution(G, R, max_deg + 1)
    K = F.tensor_down().dual()
    mods = _chain_decompositions(K, max_deg)
    labels = [F.labels[n] for n in range(max_deg + 1)]
    mod = R.mod
    product = {(i, j): np.zeros((mods[i + j].rank, mods[i].rank, mods[j].rank), dtype=np.int64)
               for i in range(struct_deg + 1) for j in range(struct_deg + 1 - i)}
    for l in range(struct_deg + 1):
        for bi in range(mods[l].rank):
            b = mods[l].basis[:, bi]
            lift = yoneda_lift(F, b, l, struct_deg, contract)
            for k in range(struct_deg + 1 - l):
                Hk, Hn = mods[k], mods[k + l]
                if Hk.rank == 0 or Hn.rank == 0:
                    continue
                M = lift.maps[k + l]
                A = M.reshape(M.shape[0], M.shape[1], -1).sum(axis=2) % mod
                vals = matmul(Hk.basis.T, A, mod)           # rank Hk x rank F_{k+l}
                product[(k, l)][:, :, bi] = Hn.coords(vals.T).reshape(Hn.rank, Hk.rank)
    return GradedAlgebraData(R, max_deg, struct_deg, mods, labels, product, {}, "cohomology")


def group_cohomology(G: FiniteAbelianPGroup, ring: Ring, max_deg: int, struct_deg: Optional[int] = None,
                     contract: bool = True) -> GradedAlgebraData:
    """H^*(G; Λ) with the Yoneda (cup) product."""
    if struct_deg is None:
        struct_deg = min(max_deg, 4)
    return _group_cohomology(G.p, G.exponents, ring.m, max_deg, min(struct_deg, max_deg), contract)


def tor_coproduct(H: GradedAlgebraData, z: TorClass) -> dict:
    return H.comultiply(z.degree, z.coords)


# ---------------------------------------------------------------------------
# duality


def pairing_matrix(Hc: GradedAlgebraData, Hh: GradedAlgebraData, n: int) -> np.ndarray:
    """<cohomology basis a, homology basis z> in degree n."""
    return matmul(Hc.modules[n].basis.T, Hh.modules[n].basis, Hc.ring.mod)


@dataclass
class Verdict:
    ok: bool
    detail: str
    data: dict = field(default_factory=dict)


def duality_check(G: FiniteAbelianPGroup, ring: Ring, max_deg: int) -> Verdict:
    """Ext product against the transpose of the Tor coproduct.

    Compares <a·b, z> with sum <a, z'><b, z''> over Δz = sum z' ⊗ z'' for all
    basis classes a, b, z with |a| + |b| = |z| <= max_deg.  In the standard
    dual bases this is equality of the two structure tensors.
    """
    Hh = group_homology(G, ring, max_deg, max_deg)
    Hc = group_cohomology(G, ring, max_deg, max_deg)
    mod = ring.mod
    for n in range(max_deg + 1):
        if Hh.rank(n) != Hc.rank(n):
            return Verdict(False, f"ranks differ in degree {n}")
    pair = [pairing_matrix(Hc, Hh, n) for n in range(max_deg + 1)]
    for i in range(max_deg + 1):
        for j in range(max_deg + 1 - i):
            n = i + j
            cup = Hc.product[(i, j)]                     # [c, a, b]
            lhs = np.einsum("cab,cz->abz", cup, pair[n]) % mod
            cop = Hh.coproduct[(i, j)]                   # [x, y, z]
            rhs = np.einsum("xyz,ax,by->abz", cop, pair[i], pair[j]) % mod
            if not np.array_equal(lhs, rhs):
                bad = np.argwhere(lhs != rhs)[0]
                return Verdict(False, f"mismatch at degrees ({i},{j}), basis {tuple(int(t) for t in bad)}: "
                                      f"product gives {int(lhs[tuple(bad)])}, coproduct gives {int(rhs[tuple(bad)])}")
    return Verdict(True, f"Ext product equals transpose of Tor coproduct through degree {max_deg}")


# ---------------------------------------------------------------------------
# Bockstein


def integral_cochain_differential(G: FiniteAbelianPGroup, n: int) -> np.ndarray:
    """δ : C^n -> C^{n+1} with integer entries (transpose of ε(d_{n+1}))."""
    K = max(G.exponents, default=0) + 3
    F = Resolution(G, Ring(G.p, K), n + 1, check=False)
    A = F.d(n + 1).augmented()
    half = F.ring.mod // 2
    A = np.where(A > half, A - F.ring.mod, A)
    return A.T.astype(np.int64)


def cochain_differential(G: FiniteAbelianPGroup, ring: Ring, n: int) -> np.ndarray:
    return integral_cochain_differential(G, n) % ring.mod


def bockstein_cochain(G: FiniteAbelianPGroup, ring: Ring, cocycle: np.ndarray, n: int,
                      lift_shift: Optional[np.ndarray] = None) -> np.ndarray:
    """β at cochain level: lift to Z/p^{2m}, apply δ, divide by p^m."""
    pm = ring.mod
    big = pm * pm
    c = np.asarray(cocycle, dtype=np.int64) % pm
    if lift_shift is not None:
        c = (c + pm * np.asarray(lift_shift, dtype=np.int64)) % big
    d = integral_cochain_differential(G, n) % big
    dc = matmul(d, c, big)
    if np.any(dc % pm):
        raise ValueError("not a cocycle")
    return (dc // pm) % pm


def bockstein(G: FiniteAbelianPGroup, ring: Ring, a: ExtClass, Hc: GradedAlgebraData = None) -> ExtClass:
    if Hc is None:
        Hc = group_cohomology(G, ring, a.degree + 1, 0)
    cocycle = Hc.modules[a.degree].element(a.coords)
    b = bockstein_cochain(G, ring, cocycle, a.degree)
    return ExtClass(a.degree + 1, Hc.modules[a.degree + 1].coords(b))


def bockstein_matrix(G, ring, Hc: GradedAlgebraData, n: int) -> np.ndarray:
    """Matrix of β : H^n -> H^{n+1} in the chosen bases."""
    Hn, Hn1 = Hc.modules[n], Hc.modules[n + 1]
    cols = [Hn1.coords(bockstein_cochain(G, ring, Hn.basis[:, i], n)) for i in range(Hn.rank)]
    if not cols:
        return np.zeros((Hn1.rank, 0), dtype=np.int64)
    return np.stack(cols, axis=1).reshape(Hn1.rank, Hn.rank)


@dataclass
class BocksteinReport:
    square_zero: bool
    lift_independent: bool
    derivation: bool
    derivation_failure: str
    exactness: bool
    integral: bool
    index_exponents: list      # elementary divisor exponents of β(H¹) inside H²_ind
    scaled_equality: bool      # β(H¹) = p^{N-m} H²_ind (uniform exponent N)
    surjective: bool           # β(H¹) = H²_ind


def bockstein_suite(G: FiniteAbelianPGroup, ring: Ring, max_deg: int = 4, deriv_deg: int = 3,
                    seed: int = 0) -> BocksteinReport:
    p, m, mod = ring.p, ring.m, ring.mod
    max_deg = max(max_deg, deriv_deg + 1)
    Hc = group_cohomology(G, ring, max_deg, max(deriv_deg + 1, 2))
    rng = np.random.default_rng(seed)
    betas = [bockstein_matrix(G, ring, Hc, n) for n in range(max_deg)]
    # β∘β = 0
    sq = all(not (matmul(betas[n + 1], betas[n], mod) % np.maximum(Hc.moduli(n + 2), 1)[:, None]).any()
             if Hc.rank(n + 2) and Hc.rank(n) else True for n in range(max_deg - 1))
    # independence of the lift
    indep = True
    for n in range(max_deg):
        Hn, Hn1 = Hc.modules[n], Hc.modules[n + 1]
        for i in range(Hn.rank):
            w = rng.integers(0, mod, Hn.ambient_dim)
            b2 = bockstein_cochain(G, ring, Hn.basis[:, i], n, lift_shift=w)
            if not np.array_equal(Hn1.coords(b2), betas[n][:, i] % Hn1.moduli()):
                indep = False
    # derivation identity β(ab) = β(a)b + (-1)^{|a|} a β(b)
    deriv, why = True, ""
    for i in range(deriv_deg + 1):
        for j in range(deriv_deg + 1 - i):
            if i + j + 1 > max_deg:
                continue
            for a in range(Hc.rank(i)):
                for b in range(Hc.rank(j)):
                    ea = np.eye(Hc.rank(i), dtype=np.int64)[a]
                    eb = np.eye(Hc.rank(j), dtype=np.int64)[b]
                    ab = Hc.multiply(i, ea, j, eb)
                    lhs = Hc.reduce(i + j + 1, betas[i + j] @ ab)
                    t1 = Hc.multiply(i + 1, betas[i] @ ea, j, eb)
                    t2 = Hc.multiply(i, ea, j + 1, betas[j] @ eb)
                    rhs = Hc.reduce(i + j + 1, t1 + (-1) ** i * t2)
                    if not np.array_equal(lhs, rhs):
                        deriv = False
                        why = f"fails for basis classes ({i},{a}), ({j},{b})"
    # exactness: im β = ker(H^{n+1}(Z/p^m) -> H^{n+1}(Z/p^{2m})) induced by x ↦ p^m x
    R2 = ring.lift(2 * m)
    K2 = cochain_complex(G, R2, max_deg)
    exact = True
    for n in range(max_deg - 1):
        Hn1 = Hc.modules[n + 1]
        if Hn1.rank == 0:
            continue
        H2 = homology(K2, n + 1)
        iota = H2.coords((Hn1.basis * mod) % R2.mod).reshape(H2.rank, Hn1.rank) if H2.rank else \
            np.zeros((0, Hn1.rank), dtype=np.int64)
        # coordinates from Z/p^{2m} must be compared modulo p^{2m}; work in that ring
        ker = preimage_kernel(R2, iota, H2.exps) if H2.rank else np.eye(Hn1.rank, dtype=np.int64)
        ker = ker % mod
        if not same_submodule(ring, betas[n], ker, Hn1.exps):
            exact = False
    # integral factorization: β_Z(a) = δ_Z(ã)/p^m is an integral cocycle, p^m β_Z(a) = δ_Z ã,
    # and its reduction is β(a)
    integral = True
    for n in range(max_deg - 1):
        dZ = integral_cochain_differential(G, n)
        dZ1 = integral_cochain_differential(G, n + 1)
        Hn = Hc.modules[n]
        for i in range(Hn.rank):
            lift = Hn.basis[:, i] % mod
            dl = dZ @ lift
            if np.any(dl % mod):
                integral = False
                continue
            bz = dl // mod
            if np.any(dZ1 @ bz) or not np.array_equal(mod * bz, dl):
                integral = False
            if not np.array_equal(Hc.modules[n + 1].coords(bz % mod), betas[n][:, i] % Hc.moduli(n + 1)):
                integral = False
    # index of β(H¹) in H²_ind = H² / (H¹·H¹)
    H1, H2m = Hc.modules[1], Hc.modules[2]
    wedge = np.einsum("kab->kab", Hc.product[(1, 1)]).reshape(H2m.rank, -1)
    rel = np.concatenate([wedge, np.diag(H2m.moduli())], axis=1) % mod
    img = np.concatenate([betas[1], wedge, np.diag(H2m.moduli())], axis=1) % mod
    Q = cokernel(ModularMatrix(ring, rel))
    Qimg = cokernel(ModularMatrix(ring, img))
    # exponents: Q / β(H¹) has factors p^{e_i}
    idx_exps = sorted(Qimg.exps)
    Ns = set(G.exponents)
    scaled = False
    if len(Ns) == 1:
        N = Ns.pop()
        e = N - m
        scaled_gens = np.concatenate([(p ** e) * np.eye(H2m.rank, dtype=np.int64), wedge,
                                      np.diag(H2m.moduli())], axis=1) % mod if e >= 0 else None
        if scaled_gens is not None:
            scaled = same_submodule(ring, img, scaled_gens, H2m.exps)
    surjective = Qimg.rank == 0
    return BocksteinReport(sq, indep, deriv, why, exact, integral, idx_exps, scaled, surjective)


# ---------------------------------------------------------------------------
# degree-two decomposition


@dataclass
class Degree2Decomposition:
    wedge_cohomology: ModuleDecomposition     # image of H¹·H¹ in H² (coordinates of H²)
    ind_cohomology: ModuleDecomposition       # primitives for the coproduct dual to Pontryagin
    wedge_homology: ModuleDecomposition
    prim_homology: ModuleDecomposition
    prim_homology_gens: np.ndarray            # generators of H_{2,prim} in H_2 coordinates
    direct_sum_cohomology: bool
    direct_sum_homology: bool


def _span_module(ring, gens, exps) -> ModuleDecomposition:
    k = len(exps)
    rel = np.diag([ring.p ** a for a in exps]).astype(np.int64).reshape(k, k)
    gens = np.asarray(gens, dtype=np.int64).reshape(k, -1)
    return subquotient(ring, np.concatenate([gens, rel], axis=1), rel)


def _is_direct_sum(ring, A, B, exps) -> bool:
    total = ring.p ** sum(exps)
    oa = submodule_order(ring, A, exps)
    ob = submodule_order(ring, B, exps)
    oab = submodule_order(ring, np.concatenate([A, B], axis=1), exps)
    return oa * ob == total and oab == total


def decompose_degree2(G: FiniteAbelianPGroup, ring: Ring) -> Degree2Decomposition:
    Hh = group_homology(G, ring, 2, 2)
    Hc = group_cohomology(G, ring, 2, 2)
    mod = ring.mod
    r1h, r2h = Hh.rank(1), Hh.rank(2)
    r1c, r2c = Hc.rank(1), Hc.rank(2)
    # homology: wedge = image of the Pontryagin product, prim = kernel of reduced coproduct
    wedge_h = Hh.product[(1, 1)].reshape(r2h, -1)
    red = Hh.coproduct[(1, 1)].reshape(r1h * r1h, r2h)
    tgt = [a + b for a in Hh.modules[1].exps for b in Hh.modules[1].exps]
    tgt = [min(a, b) for a in Hh.modules[1].exps for b in Hh.modules[1].exps]
    prim_h = preimage_kernel(ring, red, tgt) if len(tgt) else np.eye(r2h, dtype=np.int64)
    # cohomology: wedge = image of cup on H¹ x H¹; primitives for the dual of the Pontryagin product
    wedge_c = Hc.product[(1, 1)].reshape(r2c, -1)
    pair1 = pairing_matrix(Hc, Hh, 1)
    pair2 = pairing_matrix(Hc, Hh, 2)
    # reduced coproduct of a cohomology class c: (x, y) ↦ <c, x·y> for x, y in H_1
    red_c = np.einsum("kxy,ck->cxy", Hh.product[(1, 1)], pair2).reshape(r2c, -1).T % mod
    tgt_c = [min(a, b) for a in Hh.modules[1].exps for b in Hh.modules[1].exps]
    prim_c = preimage_kernel(ring, red_c, tgt_c) if len(tgt_c) else np.eye(r2c, dtype=np.int64)
    ex_h, ex_c = Hh.modules[2].exps, Hc.modules[2].exps
    return Degree2Decomposition(
        _span_module(ring, wedge_c, ex_c), _span_module(ring, prim_c, ex_c),
        _span_module(ring, wedge_h, ex_h), _span_module(ring, prim_h, ex_h), prim_h % mod,
        _is_direct_sum(ring, wedge_c, prim_c, ex_c), _is_direct_sum(ring, wedge_h, prim_h, ex_h))


# ---------------------------------------------------------------------------
# the exterior ⊗ divided power model


class ExteriorDividedModel:
    """∧[x_1..x_r] ⊗ Γ[y_1..y_r], |x_i| = 1, |y_i| = 2.

    Basis monomials x_S ∏ y_i^{(k_i)} are labelled by the multi-index κ with
    κ_i = 2 k_i + [i in S], matching the labels of the tensor resolution.
    """

    def __init__(self, r: int, ring: Ring, max_deg: int):
        self.r = r
        self.ring = ring
        self.max_deg = max_deg
        self.labels = [multi_indices(r, n) for n in range(max_deg + 1)]
        self.index = [{k: i for i, k in enumerate(L)} for L in self.labels]

    def rank(self, n):
        return len(self.labels[n])

    def ranks(self):
        return [self.rank(n) for n in range(self.max_deg + 1)]

    def mul_monomials(self, a, b):
        """(coefficient, label) of the product of basis monomials a, b."""
        r = self.r
        # the odd letters x_i are reordered into increasing index
        sign = 0
        for i in range(r):
            for j in range(i + 1, r):
                if a[j] % 2 and b[i] % 2:
                    sign += 1
        c = -1 if sign % 2 else 1
        out = []
        for i in range(r):
            if a[i] % 2 and b[i] % 2:
                return 0, None
            c *= comb(a[i] // 2 + b[i] // 2, a[i] // 2)
            out.append(a[i] + b[i])
        return c % self.ring.mod, tuple(out)

    def coproduct_monomial(self, k):
        """Δ(x_S y^{(k)}) as {(a, b): coefficient} with a + b = k."""
        # Δ is multiplicative; each letter contributes x ⊗ 1 + 1 ⊗ x or sum y^{(s)} ⊗ y^{(t)}
        out = {}
        r = self.r
        for a in itertools.product(*[range(ki + 1) for ki in k]):
            b = tuple(ki - ai for ki, ai in zip(k, a))
            ok = True
            c = 1
            for i in range(r):
                if k[i] % 2 == 0 and (a[i] % 2 or b[i] % 2):
                    ok = False
                    break
            if not ok:
                continue
            # Koszul sign from assembling per-letter tensors (x_i' ⊗ x_i'') into (∏x') ⊗ (∏x'')
            s = 0
            for i in range(r):
                for j in range(i):
                    s += (a[i] % 2) * (b[j] % 2)
            c = -1 if s % 2 else 1
            out[(a, b)] = c % self.ring.mod
        return out

    def product_tensor(self, i, j):
        P = np.zeros((self.rank(i + j), self.rank(i), self.rank(j)), dtype=np.int64)
        for ia, a in enumerate(self.labels[i]):
            for ib, b in enumerate(self.labels[j]):
                c, k = self.mul_monomials(a, b)
                if k is not None and c:
                    P[self.index[i + j][k], ia, ib] = c
        return P

    def coproduct_tensor(self, i, j):
        Q = np.zeros((self.rank(i), self.rank(j), self.rank(i + j)), dtype=np.int64)
        for ik, k in enumerate(self.labels[i + j]):
            for (a, b), c in self.coproduct_monomial(k).items():
                if sum(a) == i:
                    Q[self.index[i][a], self.index[j][b], ik] = c
        return Q


def compare_to_model(G: FiniteAbelianPGroup, ring: Ring, max_deg: int = 6, struct_deg: int = 4) -> Verdict:
    """Group homology against ∧ ⊗ Γ: ranks, products and coproducts."""
    H = group_homology(G, ring, max_deg, struct_deg)
    M = ExteriorDividedModel(G.rank, ring, max_deg)
    if H.ranks() != M.ranks():
        return Verdict(False, f"rank mismatch: homology {H.ranks()} vs model {M.ranks()}",
                       {"stage": "ranks"})
    for n in range(max_deg + 1):
        if not H.modules[n].is_free():
            return Verdict(False, f"homology in degree {n} is not free", {"stage": "ranks"})
        if not np.array_equal(H.modules[n].basis % ring.mod, np.eye(H.rank(n), dtype=np.int64)):
            return Verdict(False, f"basis in degree {n} is not the standard one", {"stage": "ranks"})
    mod = ring.mod
    for i in range(struct_deg + 1):
        for j in range(struct_deg + 1 - i):
            a = H.product[(i, j)] % mod
            b = M.product_tensor(i, j) % mod
            if not np.array_equal(a, b):
                k, x, y = np.argwhere(a != b)[0]
                return Verdict(False, f"product {M.labels[i][x]}·{M.labels[j][y]}: coefficient of "
                                      f"{M.labels[i + j][k]} is {a[k, x, y]}, model says {b[k, x, y]}",
                               {"stage": "product"})
    for i in range(struct_deg + 1):
        for j in range(struct_deg + 1 - i):
            a = H.coproduct[(i, j)] % mod
            b = M.coproduct_tensor(i, j) % mod
            if not np.array_equal(a, b):
                x, y, k = np.argwhere(a != b)[0]
                return Verdict(False, f"coproduct of {M.labels[i + j][k]}: coefficient of "
                                      f"{M.labels[i][x]}⊗{M.labels[j][y]} is {a[x, y, k]}, "
                                      f"model says {b[x, y, k]}", {"stage": "coproduct"})
    return Verdict(True, f"ranks through degree {max_deg} and structure through degree {struct_deg} match",
                   {"stage": "all"})
