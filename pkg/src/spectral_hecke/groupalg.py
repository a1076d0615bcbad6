"""Free resolutions of Λ over Λ[G], the augmentation ideal, and the polynomial presentation.

For a cyclic group Z/n with generator t the periodic resolution is

    ... -> F_3 --(t-1)--> F_2 --N--> F_1 --(t-1)--> F_0 -> Λ

with N = 1 + t + ... + t^{n-1}.  For a product of cyclic groups we take the
tensor product over Λ, whose basis in degree n is the set of multi-indices
k with |k| = n:

    d e_k = sum_i (-1)^{k_1 + ... + k_{i-1}} θ_i(k_i) e_{k - δ_i},

θ_i(odd) = t_i - 1, θ_i(even > 0) = N_i.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .chains import BaseMatrix, FreeComplex
from .groups import FiniteAbelianPGroup, GroupAlgebraElement, GroupRing
from .modarith import (ModuleDecomposition, Ring, cokernel, ModularMatrix,
                       presented_map_is_iso)


def multi_indices(r: int, n: int):
    """Multi-indices of length r summing to n, largest first coordinate first."""
    if r == 0:
        return [()] if n == 0 else []
    out = []
    for a in range(n, -1, -1):
        for rest in multi_indices(r - 1, n - a):
            out.append((a,) + rest)
    return out


class Resolution(FreeComplex):
    """The tensor product of periodic resolutions, with its contracting homotopy."""

    def __init__(self, group: FiniteAbelianPGroup, ring: Ring, top: int, check=True):
        self.group = group
        base = GroupRing(group, ring)
        r = group.rank
        labels = {n: multi_indices(r, n) for n in range(top + 1)}
        self.index = {n: {k: j for j, k in enumerate(labels[n])} for n in labels}
        theta_odd = [GroupAlgebraElement.t_minus_one(group, ring, i) for i in range(r)]
        theta_even = [GroupAlgebraElement.norm(group, ring, i) for i in range(r)]
        ranks = {n: len(labels[n]) for n in labels}
        diffs = {}
        for n in range(1, top + 1):
            ent = {}
            for j, k in enumerate(labels[n]):
                sign = 1
                for i in range(r):
                    if k[i] > 0:
                        th = theta_odd[i] if k[i] % 2 else theta_even[i]
                        k2 = k[:i] + (k[i] - 1,) + k[i + 1:]
                        ent[(self.index[n - 1][k2], j)] = th.scale(sign)
                    if k[i] % 2:
                        sign = -sign
            diffs[n] = BaseMatrix(base, ranks[n - 1], ranks[n], ent)
        super().__init__(base, ranks, diffs, False, labels, check=check)

    def augmentation(self, x: np.ndarray) -> int:
        """ε : F_0 -> Λ."""
        return int(x.sum() % self.ring.mod)

    def unit(self, c=1) -> np.ndarray:
        """η(c) = c e_0 at the identity."""
        return self.base.unit_vector(1, 0, c)

    def contract(self, n: int, y: np.ndarray) -> np.ndarray:
        """Contracting homotopy h : F_n -> F_{n+1} with dh + hd = 1 - ηε.

        On a tensor x_1 ⊗ ... ⊗ x_r it is sum_i ηε(x_1) ⊗ ... ⊗ ηε(x_{i-1}) ⊗ s(x_i) ⊗ x_{i+1} ⊗ ...,
        where s is the cyclic homotopy: for even degree s(t^a e) = (1 + ... + t^{a-1}) e',
        for odd degree s(t^a e) = [a = n - 1] e'.
        """
        G = self.group
        r = G.rank
        mod = self.ring.mod
        out = self.base.zeros(self.rank(n + 1))
        for j, k in enumerate(self.labels[n]):
            z = y[j]
            if not z.any():
                continue
            for i in range(r):
                if i > 0:
                    if k[i - 1] != 0:
                        break
                    z = z.sum(axis=i - 1, keepdims=True) % mod
                if k[i] % 2 == 0:
                    s = np.flip(np.cumsum(np.flip(z, axis=i), axis=i), axis=i) - z
                else:
                    s = np.zeros_like(z)
                    idx = [slice(None)] * r
                    idx[i] = slice(0, 1)
                    src = [slice(None)] * r
                    src[i] = slice(G.orders[i] - 1, G.orders[i])
                    s[tuple(idx)] = z[tuple(src)]
                k2 = k[:i] + (k[i] + 1,) + k[i + 1:]
                t = self.index[n + 1][k2]
                sl = tuple(slice(0, 1) for _ in range(i)) + (Ellipsis,)
                out[t][sl] = (out[t][sl] + s) % mod
        return out


def periodic_resolution(N: int, ring: Ring, top: int) -> Resolution:
    return Resolution(FiniteAbelianPGroup(ring.p, (N,)), ring, top)


def group_resolution(G: FiniteAbelianPGroup, ring: Ring, top: int) -> Resolution:
    return Resolution(G, ring, top)


# ---------------------------------------------------------------------------
# the augmentation ideal


@dataclass
class AugmentationQuotient:
    """I/I² with its comparison map to G ⊗ Λ.

    `module` decomposes I/I² inside its coordinate space, `relations` are the
    relation columns used there, `comparison` is the matrix of [g] - [e] ↦ g ⊗ 1
    into Λ^r (where G ⊗ Λ = Λ^r / diag(p^{N_i})), and `coordinates` gives the
    coordinate vector of [t_i] - [e] for each generator.
    """

    group: FiniteAbelianPGroup
    ring: Ring
    module: ModuleDecomposition
    relations: np.ndarray
    comparison: np.ndarray
    generator_coords: np.ndarray
    is_iso: bool
    reason: str
    method: str

    def target_relations(self) -> np.ndarray:
        return np.diag([self.ring.p ** n for n in self.group.exponents]).astype(np.int64) % self.ring.mod


def _aug_relations_dense(G: FiniteAbelianPGroup, ring: Ring, full=False):
    """Relations of I/I² in the basis [g] - [e], g != e.

    With full=True every product ([g]-[e])([h]-[e]) is used; otherwise only
    products with generators, which already span I² as a Λ-module.
    """
    elems = list(G.elements())[1:]
    pos = {g: i for i, g in enumerate(elems)}
    n = len(elems)

    def vec(g):
        v = np.zeros(n, dtype=np.int64)
        if any(g):
            v[pos[g]] = 1
        return v

    cols = []
    second = elems if full else [G.generator(i) for i in range(G.rank)]
    for g in elems:
        for h in second:
            cols.append(vec(G.add(g, h)) - vec(g) - vec(h))
    rel = np.stack(cols, axis=1) if cols else np.zeros((n, 0), dtype=np.int64)
    comparison = np.array([list(g) for g in elems], dtype=np.int64).T.reshape(G.rank, n)
    gens = np.stack([vec(G.generator(i)) for i in range(G.rank)], axis=1) if G.rank else \
        np.zeros((n, 0), dtype=np.int64)
    return rel % ring.mod, comparison % ring.mod, gens


def _aug_relations_tree(G: FiniteAbelianPGroup, ring: Ring):
    """Relations of I/I² after eliminating along a spanning tree of the Cayley graph.

    Along the tree that reaches g = (a_1, ..., a_r) by raising coordinates
    one at a time, the relation [g + t_i] = [g] + [t_i] lets [g] be replaced
    by the vector (a_1, ..., a_r) in the span of the [t_i].  The relations
    coming from the remaining edges are what survives.
    """
    r = G.rank
    orders = np.array(G.orders, dtype=np.int64)
    pts = np.array(list(np.ndindex(*G.orders)), dtype=np.int64).reshape(-1, r)
    cols = []
    for i in range(r):
        step = np.zeros(r, dtype=np.int64)
        step[i] = 1
        moved = (pts + step) % orders
        c = moved - pts - step
        cols.append(np.unique(c, axis=0))
    rel = np.unique(np.concatenate(cols, axis=0), axis=0).T if r else np.zeros((0, 0), dtype=np.int64)
    rel = rel[:, np.any(rel % ring.mod, axis=0)] if rel.size else rel.reshape(r, 0)
    return rel % ring.mod, np.eye(r, dtype=np.int64), np.eye(r, dtype=np.int64)


def augmentation_quotient(G: FiniteAbelianPGroup, ring: Ring, method: str = "auto") -> AugmentationQuotient:
    if method == "auto":
        method = "dense" if G.size <= 128 else "tree"
    if method == "dense":
        rel, comp, gens = _aug_relations_dense(G, ring)
    elif method == "full":
        rel, comp, gens = _aug_relations_dense(G, ring, full=True)
    elif method == "tree":
        rel, comp, gens = _aug_relations_tree(G, ring)
    else:
        raise ValueError(method)
    mod = cokernel(ModularMatrix(ring, rel)) if rel.shape[0] else cokernel(ModularMatrix(ring, np.zeros((0, 1))))
    tgt = np.diag([ring.p ** n for n in G.exponents]).astype(np.int64).reshape(G.rank, G.rank) % ring.mod
    if G.rank == 0:
        ok, why = True, "both sides are zero"
    else:
        ok, why = presented_map_is_iso(ring, comp, rel, tgt)
    return AugmentationQuotient(G, ring, mod, rel, comp, gens, ok, why, method)


# ---------------------------------------------------------------------------
# the polynomial presentation


@dataclass(frozen=True)
class PolynomialPresentation:
    """Λ[Y_1, ..., Y_r] / ((1 + Y_i)^{p^{N_i}} - 1)."""

    ring: Ring
    exponents: tuple

    @property
    def p(self):
        return self.ring.p

    def relation(self, i: int) -> list:
        """Integer coefficients of (1 + Y)^{p^{N_i}} - 1, constant term first."""
        n = self.p ** self.exponents[i]
        return [comb(n, k) if k else 0 for k in range(n + 1)]

    def quotient_by_y(self, i: int) -> list:
        """Coefficients of g(Y) = ((1 + Y)^{p^{N_i}} - 1) / Y."""
        return self.relation(i)[1:]

    def factor_rank(self, i: int) -> int:
        return self.p ** self.exponents[i]

    def rank(self) -> int:
        return int(np.prod([self.factor_rank(i) for i in range(len(self.exponents))], dtype=np.int64))

    def mul_by_y(self, i: int) -> np.ndarray:
        """Matrix of multiplication by Y on Λ[Y]/(rel) in the basis 1, Y, ..., Y^{n-1}."""
        n = self.factor_rank(i)
        rel = self.relation(i)
        M = np.zeros((n, n), dtype=np.int64)
        for k in range(n - 1):
            M[k + 1, k] = 1
        # Y^n = -(sum_{k<n} rel_k Y^k), using that rel is monic of degree n
        for k in range(n):
            M[k, n - 1] = (-rel[k]) % self.ring.mod
        return M % self.ring.mod


@dataclass
class BridgeData:
    presentation: PolynomialPresentation
    group: FiniteAbelianPGroup
    matrices: list          # per factor: columns are images of Y^k in the group basis
    relations_vanish: bool
    multiplicative: bool
    invertible: bool
    rank_match: bool

    @property
    def ok(self) -> bool:
        return self.relations_vanish and self.multiplicative and self.invertible and self.rank_match


def presentation_bridge(G: FiniteAbelianPGroup, ring: Ring) -> BridgeData:
    """Check that 1 + Y_i ↦ t_i gives Λ[Y]/(relations) ≅ Λ[G].

    Both sides are tensor products of their cyclic factors, so the check is
    done factor by factor: relation maps to zero, Y·Y^k maps to (t-1)·image,
    and the matrix of Y^k ↦ (t - 1)^k is invertible.
    """
    P = PolynomialPresentation(ring, G.exponents)
    mats = []
    rel_ok = mult_ok = inv_ok = True
    mod = ring.mod
    for i, N in enumerate(G.exponents):
        Ci = FiniteAbelianPGroup(ring.p, (N,))
        n = Ci.size
        tm1 = GroupAlgebraElement.t_minus_one(Ci, ring, 0)
        powers = [GroupAlgebraElement.one(Ci, ring)]
        for _ in range(n):
            powers.append(powers[-1] * tm1)
        B = np.stack([powers[k].dense() for k in range(n)], axis=1) % mod
        mats.append(B)
        # the relation polynomial evaluated at Y = t - 1
        img = GroupAlgebraElement.zero(Ci, ring)
        for k, c in enumerate(P.relation(i)):
            if c:
                img = img + powers[k].scale(c)
        rel_ok &= img.is_zero()
        # multiplicativity on the spanning set {Y * Y^k}
        lhs = B @ P.mul_by_y(i) % mod
        rhs = tm1.regular_matrix() @ B % mod
        mult_ok &= bool(np.array_equal(lhs, rhs))
        # B is unitriangular
        inv_ok &= bool(np.all(np.diag(B) % ring.p != 0)) and not np.tril(B, -1).any()
    rank_ok = P.rank() == G.size
    return BridgeData(P, G, mats, rel_ok, mult_ok, inv_ok, rank_ok)
