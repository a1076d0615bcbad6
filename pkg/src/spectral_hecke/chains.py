"""Bounded complexes of finite free modules over Λ or Λ[G].

Chain vectors in degree n are dense arrays of shape (rank_n, *G), the
trailing axes indexing group elements (no trailing axes when the base is Λ).
Differentials are sparse matrices with group algebra entries.

Sign rule for tensor products: d(x ⊗ y) = dx ⊗ y + (-1)^{|x|} x ⊗ dy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .groups import GroupAlgebraElement, GroupHom, GroupRing
from .modarith import (ModularMatrix, ModuleDecomposition, Ring, _normal_form, _solve,
                       free_module, matmul, subquotient)


class NoLift(Exception):
    """Raised when a lifting problem has no solution."""


class BaseMatrix:
    """Sparse matrix with entries in a group ring; entries[(i, j)] is row i, column j."""

    def __init__(self, base: GroupRing, rows: int, cols: int, entries=None):
        self.base = base
        self.rows = rows
        self.cols = cols
        self.entries = {}
        for (i, j), a in (entries or {}).items():
            if not isinstance(a, GroupAlgebraElement):
                a = base.one(int(a))
            if not a.is_zero():
                self.entries[(i, j)] = a
        self._cols = None

    @classmethod
    def from_dense(cls, ring: Ring, a) -> "BaseMatrix":
        """Matrix over Λ from an integer array."""
        base = GroupRing.coefficients(ring)
        a = np.asarray(a, dtype=np.int64) % ring.mod
        ent = {(int(i), int(j)): base.one(int(a[i, j])) for i, j in zip(*np.nonzero(a))}
        return cls(base, a.shape[0], a.shape[1], ent)

    def columns(self):
        """For each column j, the list of (i, entry)."""
        if self._cols is None:
            cols = [[] for _ in range(self.cols)]
            for (i, j), a in sorted(self.entries.items()):
                cols[j].append((i, a))
            self._cols = cols
        return self._cols

    def compose(self, other: "BaseMatrix") -> "BaseMatrix":
        """self ∘ other."""
        out = {}
        ocols = other.columns()
        for k in range(other.cols):
            for j, b in ocols[k]:
                for (i, jj), a in self.entries.items():
                    if jj != j:
                        continue
                    c = a * b
                    out[(i, k)] = out[(i, k)] + c if (i, k) in out else c
        return BaseMatrix(self.base, self.rows, other.cols, out)

    def is_zero(self) -> bool:
        return not self.entries

    def apply(self, x: np.ndarray) -> np.ndarray:
        out = self.base.zeros(self.rows)
        mod = self.base.ring.mod
        for (i, j), a in self.entries.items():
            out[i] = (out[i] + a.act(x[j])) % mod
        return out

    def dense(self) -> np.ndarray:
        """Integer matrix (base Λ only)."""
        assert self.base.is_trivial
        a = np.zeros((self.rows, self.cols), dtype=np.int64)
        for (i, j), e in self.entries.items():
            a[i, j] = e.terms.get((), 0)
        return a

    def lam_matrix(self) -> np.ndarray:
        """The Λ-linear matrix obtained by expanding in the group basis."""
        n = self.base.size
        out = np.zeros((self.rows * n, self.cols * n), dtype=np.int64)
        for (i, j), a in self.entries.items():
            out[i * n:(i + 1) * n, j * n:(j + 1) * n] = a.regular_matrix()
        return out

    def augmented(self) -> np.ndarray:
        """Apply the augmentation Λ[G] -> Λ entrywise."""
        a = np.zeros((self.rows, self.cols), dtype=np.int64)
        for (i, j), e in self.entries.items():
            a[i, j] = e.augmentation()
        return a % self.base.ring.mod

    def pushforward(self, phi: GroupHom, base: GroupRing) -> "BaseMatrix":
        return BaseMatrix(base, self.rows, self.cols,
                          {k: a.pushforward(phi) for k, a in self.entries.items()})


class FreeComplex:
    """A bounded complex of finite free modules.

    `ranks[n]` is the rank in degree n; `diffs[n]` is the BaseMatrix of the
    differential leaving degree n (to n-1, or to n+1 for a cochain complex).
    """

    def __init__(self, base: GroupRing, ranks: dict, diffs: dict, cohomological=False,
                 labels=None, check=True):
        self.base = base
        self.ring = base.ring
        self.ranks = {int(n): int(r) for n, r in ranks.items()}
        self.lo = min(self.ranks) if self.ranks else 0
        self.hi = max(self.ranks) if self.ranks else -1
        self.cohomological = cohomological
        self.labels = labels or {n: list(range(r)) for n, r in self.ranks.items()}
        self.diffs = {}
        for n in self.ranks:
            t = self.target_degree(n)
            d = diffs.get(n)
            if t not in self.ranks:
                self.diffs[n] = BaseMatrix(base, 0, self.ranks[n])
                continue
            if d is None:
                d = BaseMatrix(base, self.ranks[t], self.ranks[n])
            elif not isinstance(d, BaseMatrix):
                d = BaseMatrix.from_dense(self.ring, d)
            if (d.rows, d.cols) != (self.ranks[t], self.ranks[n]):
                raise ValueError(f"differential out of degree {n} has shape "
                                 f"{(d.rows, d.cols)}, expected {(self.ranks[t], self.ranks[n])}")
            self.diffs[n] = d
        if check:
            self.check_d2()

    def __repr__(self):
        return f"FreeComplex({self.base}, ranks={self.ranks})"

    def target_degree(self, n: int) -> int:
        return n + 1 if self.cohomological else n - 1

    def source_degree(self, n: int) -> int:
        """Degree whose differential lands in degree n."""
        return n - 1 if self.cohomological else n + 1

    def rank(self, n: int) -> int:
        return self.ranks.get(n, 0)

    def d(self, n: int) -> BaseMatrix:
        if n in self.diffs:
            return self.diffs[n]
        t = self.target_degree(n)
        return BaseMatrix(self.base, self.rank(t), self.rank(n))

    def check_d2(self):
        """Assert d∘d = 0.

        d is Λ[G]-linear, so it suffices to push each basis generator through
        twice; for very large groups the entries are multiplied symbolically.
        """
        dense = self.base.size <= 100000
        for n in self.ranks:
            t = self.target_degree(n)
            if t not in self.ranks or self.target_degree(t) not in self.ranks:
                continue
            if dense:
                for j in range(self.rank(n)):
                    x = self.base.unit_vector(self.rank(n), j)
                    if self.apply_d(t, self.apply_d(n, x)).any():
                        raise ValueError(f"d∘d != 0 on generator {j} of degree {n}")
            elif not self.d(t).compose(self.d(n)).is_zero():
                raise ValueError(f"d∘d != 0 starting in degree {n}")

    def apply_d(self, n: int, x: np.ndarray) -> np.ndarray:
        return self.d(n).apply(x)

    def zeros(self, n):
        return self.base.zeros(self.rank(n))

    def tensor_down(self) -> "FreeComplex":
        """Apply - ⊗_{Λ[G]} Λ, giving a complex over Λ."""
        lam = GroupRing.coefficients(self.ring)
        diffs = {n: BaseMatrix.from_dense(self.ring, d.augmented()) for n, d in self.diffs.items()}
        return FreeComplex(lam, self.ranks, diffs, self.cohomological, self.labels)

    def dual(self) -> "FreeComplex":
        """Hom_Λ(-, Λ) of a complex over Λ, as a cochain complex (or chain if already cochain)."""
        assert self.base.is_trivial
        diffs = {}
        for n in self.ranks:
            s = self.source_degree(n)
            if s in self.ranks:
                diffs[n] = BaseMatrix.from_dense(self.ring, self.d(s).dense().T)
        return FreeComplex(self.base, self.ranks, diffs, not self.cohomological, self.labels)

    def restrict_to_lambda(self) -> "FreeComplex":
        """Regard a complex over Λ[G] as a complex over Λ via the group basis."""
        if self.base.is_trivial:
            return self
        n = self.base.size
        lam = GroupRing.coefficients(self.ring)
        diffs = {k: BaseMatrix.from_dense(self.ring, d.lam_matrix()) for k, d in self.diffs.items()}
        return FreeComplex(lam, {k: r * n for k, r in self.ranks.items()}, diffs,
                           self.cohomological, check=False)

    def with_ring(self, ring: Ring) -> "FreeComplex":
        """Same integral differentials read modulo a different power of p."""
        base = GroupRing(self.base.group, ring)
        diffs = {n: BaseMatrix(base, d.rows, d.cols,
                               {k: a.with_ring(ring) for k, a in d.entries.items()})
                 for n, d in self.diffs.items()}
        return FreeComplex(base, self.ranks, diffs, self.cohomological, self.labels, check=False)


def unit_complex(ring: Ring, degree: int = 0) -> FreeComplex:
    return FreeComplex(GroupRing.coefficients(ring), {degree: 1}, {})


# ---------------------------------------------------------------------------
# homology


def cycles_and_boundaries(C: FreeComplex, n: int):
    """Ambient generator matrices for the cycles and boundaries in degree n."""
    if n not in C.ranks:
        raise ValueError(f"degree {n} outside [{C.lo}, {C.hi}]")
    if not C.base.is_trivial:
        C = C.restrict_to_lambda()
    R = C.ring
    if C.rank(n) == 0:
        return np.zeros((0, 0), dtype=np.int64), np.zeros((0, 0), dtype=np.int64)
    dn = C.d(n).dense().reshape(-1, C.rank(n))
    s = C.source_degree(n)
    if s in C.ranks:
        B = C.d(s).dense().reshape(C.rank(n), -1)
    else:
        B = np.zeros((C.rank(n), 0), dtype=np.int64)
    if dn.shape[0] == 0:
        Z = np.eye(C.rank(n), dtype=np.int64)
    else:
        from .modarith import _kernel
        Z = _kernel(R, _normal_form(R, dn))
    return Z, B


def homology(C: FreeComplex, n: int) -> ModuleDecomposition:
    """ker(d out of n) / im(d into n), with representatives that are genuine cycles."""
    Z, B = cycles_and_boundaries(C, n)
    rk = C.rank(n) * (1 if C.base.is_trivial else C.base.size)
    if Z.shape[1] == 0:
        return subquotient(C.ring, np.zeros((rk, 0), dtype=np.int64), B)
    return subquotient(C.ring, Z, B)


# ---------------------------------------------------------------------------
# tensor products


def tensor(C: FreeComplex, D: FreeComplex) -> FreeComplex:
    """C ⊗ D over a common commutative base, with the Koszul sign rule."""
    if C.base != D.base:
        raise ValueError("base mismatch")
    if C.cohomological != D.cohomological:
        raise ValueError("cannot tensor a chain complex with a cochain complex")
    base = C.base
    ranks, index, labels = {}, {}, {}
    for i in sorted(C.ranks):
        for j in sorted(D.ranks):
            n = i + j
            for a in range(C.rank(i)):
                for b in range(D.rank(j)):
                    k = ranks.get(n, 0)
                    index[(i, a, j, b)] = (n, k)
                    labels.setdefault(n, []).append((C.labels[i][a], D.labels[j][b]))
                    ranks[n] = k + 1
    diffs = {n: {} for n in ranks}
    step = 1 if C.cohomological else -1
    for (i, a, j, b), (n, k) in index.items():
        ent = diffs[n]
        # dx ⊗ y
        if C.target_degree(i) in C.ranks:
            for r, e in C.d(i).columns()[a]:
                t = index[(i + step, r, j, b)][1]
                ent[(t, k)] = ent[(t, k)] + e if (t, k) in ent else e
        # (-1)^{|x|} x ⊗ dy
        if D.target_degree(j) in D.ranks:
            sgn = -1 if i % 2 else 1
            for r, e in D.d(j).columns()[b]:
                t = index[(i, a, j + step, r)][1]
                e2 = e.scale(sgn)
                ent[(t, k)] = ent[(t, k)] + e2 if (t, k) in ent else e2
    bm = {}
    for n, ent in diffs.items():
        t = n + step
        if t in ranks:
            bm[n] = BaseMatrix(base, ranks[t], ranks[n], ent)
    return FreeComplex(base, ranks, bm, C.cohomological, labels)


# ---------------------------------------------------------------------------
# chain maps


@dataclass
class ChainMap:
    """A map of complexes, possibly semilinear along a group homomorphism.

    maps[n] is an array of shape (rank_target(n + shift), rank_source(n), *Gt):
    column j is the image of the j-th source generator.  The map is extended
    to all of degree n by g·e ↦ phi(g)·f(e).
    """

    source: FreeComplex
    target: FreeComplex
    maps: dict
    shift: int = 0
    phi: GroupHom = None
    sign: int = 1  # d f = sign * f d; lifts of degree-shifting cocycles are honest chain maps

    def degrees(self):
        return sorted(self.maps)

    def image(self, n: int, j: int) -> np.ndarray:
        return self.maps[n][:, j]

    def apply_sparse(self, n: int, col):
        """Image of a sum of entry*generator, col = [(j, GroupAlgebraElement)]."""
        T = self.target
        out = T.zeros(n + self.shift)
        mod = T.ring.mod
        for j, a in col:
            if self.phi is not None:
                a = a.pushforward(self.phi)
            out = (out + a.act(self.maps[n][:, j])) % mod
        return out

    def check(self) -> bool:
        """d_T ∘ f = f ∘ d_S on every generator where both sides are defined."""
        S, T = self.source, self.target
        for n in self.degrees():
            sn = S.target_degree(n)
            if sn not in self.maps:
                continue
            for j in range(S.rank(n)):
                lhs = T.apply_d(n + self.shift, self.maps[n][:, j])
                rhs = self.apply_sparse(sn, S.d(n).columns()[j])
                if not np.array_equal(lhs % T.ring.mod, rhs * self.sign % T.ring.mod):
                    return False
        return True


def lift_chain_map(C: FreeComplex, D: FreeComplex, f0: np.ndarray, src_bottom=None,
                   tgt_bottom=None, top=None, phi: GroupHom = None, contract=None) -> ChainMap:
    """Extend f0 : C_{src_bottom} -> D_{tgt_bottom} to a chain map, degree by degree.

    f0 has shape (rank D_{tgt_bottom}, rank C_{src_bottom}, *G_D).  When a
    contracting homotopy `contract(n, y)` of D is supplied, each step is
    f(e) = contract(f(de)); otherwise a linear system over Λ is solved.
    `top` is the last source degree to fill in.
    """
    if C.cohomological or D.cohomological:
        raise ValueError("lifting is implemented for chain complexes")
    c0 = C.lo if src_bottom is None else src_bottom
    d0 = D.lo if tgt_bottom is None else tgt_bottom
    shift = d0 - c0
    if top is None:
        top = min(C.hi, D.hi - shift)
    mod = D.ring.mod
    maps = {c0: np.asarray(f0, dtype=np.int64) % mod}
    fm = ChainMap(C, D, maps, shift, phi)
    for n in range(c0 + 1, top + 1):
        tn = n + shift
        out = np.zeros((D.rank(tn), C.rank(n)) + D.base.shape, dtype=np.int64)
        cols = C.d(n).columns()
        for j in range(C.rank(n)):
            y = fm.apply_sparse(n - 1, cols[j])
            if not y.any():
                continue
            if contract is not None:
                x = contract(tn - 1, y)
                if not np.array_equal(D.apply_d(tn, x) % mod, y % mod):
                    raise NoLift(f"contraction failed to lift in degree {n}")
            else:
                x = _solve_preimage(D, tn, y)
            out[:, j] = x
        maps[n] = out
    return fm


def _solve_preimage(D: FreeComplex, n: int, y: np.ndarray) -> np.ndarray:
    """Find x in D_n with d x = y by solving over Λ."""
    M = D.d(n).lam_matrix()
    R = D.ring
    x, ok = _solve(R, _normal_form(R, M), y.reshape(-1))
    if not ok:
        raise NoLift(f"no preimage in degree {n}")
    return x.reshape((D.rank(n),) + D.base.shape)


def induced_on_homology(f: ChainMap, n: int, Hs: ModuleDecomposition,
                        Ht: ModuleDecomposition) -> np.ndarray:
    """Matrix of the map H_n(source ⊗ Λ) -> H_{n+shift}(target ⊗ Λ) in the chosen bases."""
    A = augmented_matrix(f, n)
    imgs = matmul(A, Hs.basis, f.target.ring.mod)
    if Ht.rank == 0:
        return np.zeros((0, Hs.rank), dtype=np.int64)
    return Ht.coords(imgs).reshape(Ht.rank, Hs.rank)


def augmented_matrix(f: ChainMap, n: int) -> np.ndarray:
    T = f.target
    a = f.maps[n]
    rt, rs = a.shape[0], a.shape[1]
    if T.base.is_trivial:
        return a.reshape(rt, rs) % T.ring.mod
    return a.reshape(rt, rs, -1).sum(axis=2) % T.ring.mod


# ---------------------------------------------------------------------------
# mapping cones


@dataclass
class LongExactSequence:
    """Homology LES of a cone: ... H_n(C) -> H_n(D) -> H_n(Cone) -> H_{n-1}(C) ...

    Entries of `nodes` are (label, degree, ModuleDecomposition); `maps[i]` is
    the matrix from nodes[i] to nodes[i + 1] in the chosen bases.
    """

    nodes: list
    maps: list = field(default_factory=list)

    def exact_at(self, i: int) -> bool:
        from .modarith import preimage_kernel, same_submodule
        _, _, M = self.nodes[i]
        if M.rank == 0:
            return True
        R = M.ring
        a = self.maps[i - 1]
        b = self.maps[i]
        _, _, N = self.nodes[i + 1]
        ker = preimage_kernel(R, b, N.exps) if N.rank else np.eye(M.rank, dtype=np.int64)
        return same_submodule(R, a, ker, M.exps)

    def is_exact(self) -> bool:
        return all(self.exact_at(i) for i in range(1, len(self.nodes) - 1))


def cone(f: ChainMap):
    """Mapping cone of a degree-0 chain map of complexes over Λ, with its LES.

    Cone_n = C_{n-1} ⊕ D_n and d(c, x) = (-dc, f c + dx).  Cochain complexes
    are handled by the same formula with degrees read cohomologically:
    Cone^n = C^{n+1} ⊕ D^n.
    """
    C, D = f.source, f.target
    if f.shift != 0 or not C.base.is_trivial:
        raise ValueError("cone needs a degree-0 map of complexes over Λ")
    R = C.ring
    mod = R.mod
    step = -1 if not C.cohomological else 1
    # Cone degree n holds C in degree n + step and D in degree n
    degrees = sorted(set(n - step for n in C.ranks) | set(D.ranks))
    ranks = {n: C.rank(n + step) + D.rank(n) for n in degrees}
    diffs = {}
    for n in degrees:
        t = n + step
        if t not in ranks:
            continue
        cr, dr = C.rank(n + step), D.rank(n)
        ct, dt = C.rank(t + step), D.rank(t)
        M = np.zeros((ct + dt, cr + dr), dtype=np.int64)
        if cr and ct:
            M[:ct, :cr] = -C.d(n + step).dense()
        if cr and dt and (n + step) in f.maps:
            M[ct:, :cr] = augmented_matrix(f, n + step)
        if dr and dt:
            M[ct:, cr:] = D.d(n).dense()
        diffs[n] = M % mod
    K = FreeComplex(C.base, ranks, diffs, C.cohomological)
    return K, cone_les(f, K)


def cone_les(f: ChainMap, K: FreeComplex) -> LongExactSequence:
    C, D = f.source, f.target
    R = C.ring
    degs = sorted(set(C.ranks) | set(D.ranks) | set(K.ranks))
    if C.cohomological:
        order = degs
    else:
        order = list(reversed(degs))

    def H(X, n):
        if n in X.ranks:
            return homology(X, n)
        return free_module(R, 0)

    les = LongExactSequence([])
    for n in order:
        HC, HD, HK = H(C, n), H(D, n), H(K, n)
        les.nodes += [("C", n, HC), ("D", n, HD), ("Cone", n, HK)]
    nodes = les.nodes
    for i in range(len(nodes) - 1):
        (la, na, A), (lb, nb, B) = nodes[i], nodes[i + 1]
        les.maps.append(_les_map(f, K, la, na, A, lb, nb, B))
    return les


def _les_map(f, K, la, na, A, lb, nb, B):
    C, D = f.source, f.target
    R = C.ring
    mod = R.mod
    if A.rank == 0 or B.rank == 0:
        return np.zeros((B.rank, A.rank), dtype=np.int64)
    step = -1 if not C.cohomological else 1
    if la == "C":
        img = matmul(augmented_matrix(f, na), A.basis, mod) if na in f.maps else \
            np.zeros((D.rank(na), A.rank), dtype=np.int64)
    elif la == "D":
        cr = C.rank(na + step)
        img = np.concatenate([np.zeros((cr, A.rank), dtype=np.int64), A.basis], axis=0)
    else:
        # connecting map: project a cone cycle (c, x) to c, up to the sign -1
        cr = C.rank(na + step)
        img = A.basis[:cr]
    return B.coords(img % mod).reshape(B.rank, A.rank)
