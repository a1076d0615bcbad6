"""Exact linear algebra over Z/p^m.

Z/p^m is a local ring: every element is a unit times a power of p.  That
makes a Smith-type normal form available by plain pivoting on the entry of
least p-adic valuation, which is all the homology code downstream needs.

Matrices are numpy int64 arrays reduced into [0, p^m).  The moduli used in
this package stay far below the range where products could overflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class Ring:
    """The coefficient ring Z/p^m."""

    __slots__ = ("p", "m", "mod")

    def __init__(self, p: int, m: int):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if m < 1:
            raise ValueError("exponent m must be >= 1")
        self.p = int(p)
        self.m = int(m)
        self.mod = self.p ** self.m

    def __repr__(self):
        return f"Ring(Z/{self.p}^{self.m})"

    def __eq__(self, other):
        return isinstance(other, Ring) and (self.p, self.m) == (other.p, other.m)

    def __hash__(self):
        return hash((self.p, self.m))

    def __reduce__(self):
        return (Ring, (self.p, self.m))

    def lift(self, m2: int) -> "Ring":
        return Ring(self.p, m2)

    def reduce(self, a):
        return np.asarray(a, dtype=np.int64) % self.mod

    def valuation(self, x: int) -> int:
        x %= self.mod
        if x == 0:
            return self.m
        return vp(x, self.p)

    def valuations(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64) % self.mod
        v = np.zeros(a.shape, dtype=np.int64)
        q = 1
        for _ in range(self.m):
            q *= self.p
            v += (a % q == 0)
        return v

    def is_unit(self, x: int) -> bool:
        return x % self.p != 0

    def inv(self, x: int) -> int:
        return pow(int(x) % self.mod, -1, self.mod)

    def elements(self):
        return range(self.mod)

    def units(self):
        return [u for u in range(self.mod) if u % self.p]


@dataclass(frozen=True)
class Coefficient:
    """A single residue modulo p^m."""

    p: int
    m: int
    value: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        object.__setattr__(self, "value", self.value % self.p ** self.m)

    @property
    def ring(self) -> Ring:
        return Ring(self.p, self.m)

    def _other(self, o) -> int:
        if isinstance(o, Coefficient):
            if (o.p, o.m) != (self.p, self.m):
                raise ValueError("coefficients over different rings")
            return o.value
        return int(o)

    def __add__(self, o):
        return Coefficient(self.p, self.m, self.value + self._other(o))

    __radd__ = __add__

    def __sub__(self, o):
        return Coefficient(self.p, self.m, self.value - self._other(o))

    def __rsub__(self, o):
        return Coefficient(self.p, self.m, self._other(o) - self.value)

    def __mul__(self, o):
        return Coefficient(self.p, self.m, self.value * self._other(o))

    __rmul__ = __mul__

    def __neg__(self):
        return Coefficient(self.p, self.m, -self.value)

    def __int__(self):
        return self.value

    def valuation(self) -> int:
        return self.ring.valuation(self.value)

    def inverse(self) -> "Coefficient":
        return Coefficient(self.p, self.m, self.ring.inv(self.value))


class ModularMatrix:
    """Dense matrix over Z/p^m."""

    __slots__ = ("ring", "a")

    def __init__(self, ring: Ring, entries):
        a = np.array(entries, dtype=np.int64)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        if a.ndim != 2:
            raise ValueError("matrix must be 2-dimensional")
        self.ring = ring
        self.a = a % ring.mod

    @classmethod
    def identity(cls, ring, n):
        return cls(ring, np.eye(n, dtype=np.int64))

    @classmethod
    def zeros(cls, ring, rows, cols):
        return cls(ring, np.zeros((rows, cols), dtype=np.int64))

    @property
    def rows(self):
        return self.a.shape[0]

    @property
    def cols(self):
        return self.a.shape[1]

    @property
    def shape(self):
        return self.a.shape

    @property
    def T(self):
        return ModularMatrix(self.ring, self.a.T)

    def __matmul__(self, other):
        if isinstance(other, ModularMatrix):
            return ModularMatrix(self.ring, matmul(self.a, other.a, self.ring.mod))
        return ModularMatrix(self.ring, matmul(self.a, np.asarray(other), self.ring.mod))

    def __add__(self, other):
        return ModularMatrix(self.ring, self.a + other.a)

    def __sub__(self, other):
        return ModularMatrix(self.ring, self.a - other.a)

    def __mul__(self, c):
        return ModularMatrix(self.ring, self.a * int(c))

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, ModularMatrix) and self.ring == other.ring
                and self.a.shape == other.a.shape and bool(np.all(self.a == other.a)))

    def __repr__(self):
        return f"ModularMatrix({self.ring}, {self.a.tolist()})"

    def entry(self, i, j) -> Coefficient:
        return Coefficient(self.ring.p, self.ring.m, int(self.a[i, j]))


def matmul(a, b, mod):
    """Matrix product reduced mod `mod`, chunked so int64 never overflows."""
    a = np.asarray(a, dtype=np.int64) % mod
    b = np.asarray(b, dtype=np.int64) % mod
    inner = a.shape[-1]
    step = max(1, (2 ** 62) // (mod * mod))
    if inner <= step:
        return (a @ b) % mod
    out = (a[..., :step] @ b[:step]) % mod
    for s in range(step, inner, step):
        out = (out + (a[..., s:s + step] @ b[s:s + step])) % mod
    return out


class NormalForm(NamedTuple):
    """U @ M @ V = D with D diagonal; Uinv, Vinv are the inverses."""

    D: np.ndarray
    U: np.ndarray
    V: np.ndarray
    Uinv: np.ndarray
    Vinv: np.ndarray
    exps: tuple  # p-adic valuations of the diagonal, m meaning zero
    rank: int    # number of nonzero diagonal entries


def _normal_form(ring: Ring, M: np.ndarray) -> NormalForm:
    p, m, mod = ring.p, ring.m, ring.mod
    A = np.array(M, dtype=np.int64) % mod
    r, c = A.shape
    U = np.eye(r, dtype=np.int64)
    Uinv = np.eye(r, dtype=np.int64)
    V = np.eye(c, dtype=np.int64)
    Vinv = np.eye(c, dtype=np.int64)
    exps = []
    for k in range(min(r, c)):
        sub = A[k:, k:]
        if not sub.any():
            break
        vals = ring.valuations(sub)
        vmin = int(vals.min())
        i, j = np.argwhere(vals == vmin)[0]
        i += k
        j += k
        if i != k:
            A[[k, i]] = A[[i, k]]
            U[[k, i]] = U[[i, k]]
            Uinv[:, [k, i]] = Uinv[:, [i, k]]
        if j != k:
            A[:, [k, j]] = A[:, [j, k]]
            V[:, [k, j]] = V[:, [j, k]]
            Vinv[[k, j]] = Vinv[[j, k]]
        pv = p ** vmin
        u = int(A[k, k]) // pv
        ui = pow(u, -1, mod)
        A[k] = A[k] * ui % mod
        U[k] = U[k] * ui % mod
        Uinv[:, k] = Uinv[:, k] * u % mod
        # clear the pivot column below
        q = A[k + 1:, k] // pv
        if q.any():
            A[k + 1:] = (A[k + 1:] - np.outer(q, A[k])) % mod
            U[k + 1:] = (U[k + 1:] - np.outer(q, U[k])) % mod
            Uinv[:, k] = (Uinv[:, k] + Uinv[:, k + 1:] @ q) % mod
        # clear the pivot row to the right
        q = A[k, k + 1:] // pv
        if q.any():
            A[:, k + 1:] = (A[:, k + 1:] - np.outer(A[:, k], q)) % mod
            V[:, k + 1:] = (V[:, k + 1:] - np.outer(V[:, k], q)) % mod
            Vinv[k] = (Vinv[k] + q @ Vinv[k + 1:]) % mod
        exps.append(vmin)
    rank = len(exps)
    exps = tuple(exps) + (m,) * (min(r, c) - rank)
    return NormalForm(A, U, V, Uinv, Vinv, exps, rank)


def normal_form(M: ModularMatrix):
    """Return (D, U, V) with U @ M @ V = D diagonal, entries powers of p or 0."""
    nf = _normal_form(M.ring, M.a)
    R = M.ring
    return ModularMatrix(R, nf.D), ModularMatrix(R, nf.U), ModularMatrix(R, nf.V)


def normal_form_full(M: ModularMatrix) -> NormalForm:
    return _normal_form(M.ring, M.a)


# ---------------------------------------------------------------------------
# solving and kernels


def _solve(ring: Ring, nf: NormalForm, b: np.ndarray):
    """Solve M x = b for every column of b.  Returns (x, ok) with ok a bool array."""
    p, mod = ring.p, ring.mod
    b = np.asarray(b, dtype=np.int64)
    vec = b.ndim == 1
    if vec:
        b = b.reshape(-1, 1)
    r, c = nf.D.shape
    y = nf.U @ b % mod
    x = np.zeros((c, b.shape[1]), dtype=np.int64)
    ok = np.ones(b.shape[1], dtype=bool)
    for i in range(nf.rank):
        pa = p ** nf.exps[i]
        ok &= (y[i] % pa == 0)
        x[i] = y[i] // pa
    if r > nf.rank:
        ok &= ~(y[nf.rank:] % mod).any(axis=0)
    x = nf.V @ x % mod
    if vec:
        return x[:, 0], bool(ok[0])
    return x, ok


def solve(M: ModularMatrix, b) -> Optional[np.ndarray]:
    """One solution of M x = b, or None when the system is inconsistent."""
    b = np.asarray(b, dtype=np.int64) % M.ring.mod
    if b.shape[0] != M.rows:
        raise ValueError(f"dimension mismatch: {M.shape} vs rhs of length {b.shape[0]}")
    nf = _normal_form(M.ring, M.a)
    x, ok = _solve(M.ring, nf, b)
    if np.ndim(ok) == 0:
        return x if ok else None
    return x if ok.all() else None


def _kernel(ring: Ring, nf: NormalForm) -> np.ndarray:
    p, m = ring.p, ring.m
    r, c = nf.D.shape
    cols = []
    for i in range(c):
        a = nf.exps[i] if i < min(r, c) else m
        if a == 0:
            continue
        cols.append(nf.V[:, i] * p ** (m - a) % ring.mod)
    if not cols:
        return np.zeros((c, 0), dtype=np.int64)
    return np.stack(cols, axis=1)


def kernel(M: ModularMatrix) -> ModularMatrix:
    """Generators (columns) of {x : M x = 0}."""
    return ModularMatrix(M.ring, _kernel(M.ring, _normal_form(M.ring, M.a)).reshape(M.cols, -1))


def inverse(M: ModularMatrix) -> Optional[ModularMatrix]:
    if M.rows != M.cols:
        return None
    nf = _normal_form(M.ring, M.a)
    if nf.rank < M.rows or any(nf.exps):
        return None
    return ModularMatrix(M.ring, nf.V @ nf.U % M.ring.mod)


def is_invertible(M: ModularMatrix) -> bool:
    return inverse(M) is not None


# ---------------------------------------------------------------------------
# module decompositions


@dataclass
class ModuleDecomposition:
    """A finitely generated Λ-module written as a sum of cyclic factors.

    `exps[i]` is the exponent a_i of the i-th factor Z/p^{a_i}; `basis[:, i]`
    is a representative of its generator in the ambient free module.
    `coords` takes an ambient vector lying in the cycle space and returns its
    coordinates, each reduced modulo its factor order.
    """

    ring: Ring
    exps: tuple
    basis: np.ndarray
    _Z: np.ndarray = field(repr=False)
    _Znf: NormalForm = field(repr=False)
    _Urows: np.ndarray = field(repr=False)

    @property
    def factors(self):
        return [self.ring.p ** a for a in self.exps]

    @property
    def rank(self):
        return len(self.exps)

    def __len__(self):
        return len(self.exps)

    @property
    def order(self) -> int:
        return self.ring.p ** sum(self.exps)

    @property
    def ambient_dim(self):
        return self._Z.shape[0]

    def is_free(self) -> bool:
        return all(a == self.ring.m for a in self.exps)

    def moduli(self) -> np.ndarray:
        return np.array([self.ring.p ** a for a in self.exps], dtype=np.int64)

    def coords(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.int64) % self.ring.mod
        vec = v.ndim == 1
        if vec:
            v = v.reshape(-1, 1)
        c, ok = _solve(self.ring, self._Znf, v)
        if not np.all(ok):
            raise ValueError("vector does not lie in the cycle module")
        out = self._Urows @ c % self.ring.mod
        if len(self.exps):
            out = out % self.moduli()[:, None]
        return out[:, 0] if vec else out

    def contains(self, v) -> bool:
        v = np.asarray(v, dtype=np.int64) % self.ring.mod
        _, ok = _solve(self.ring, self._Znf, v)
        return bool(np.all(ok))

    def element(self, coords) -> np.ndarray:
        return self.basis @ np.asarray(coords, dtype=np.int64) % self.ring.mod


def subquotient(ring: Ring, Z, B) -> ModuleDecomposition:
    """Decompose span(Z) / span(B), assuming span(B) lies in span(Z).

    Z and B are ambient matrices whose columns generate the two submodules.
    """
    mod = ring.mod
    Z = np.asarray(Z, dtype=np.int64)
    Z = (Z if Z.ndim == 2 else Z.reshape(Z.shape[0], -1)) % mod
    n, z = Z.shape
    B = np.asarray(B, dtype=np.int64)
    B = (B if B.ndim == 2 else B.reshape(n, -1)) % mod
    Znf = _normal_form(ring, Z)
    # relations among the Z-coefficients: c with Z c in span(B)
    if z == 0:
        return ModuleDecomposition(ring, (), np.zeros((n, 0), dtype=np.int64), Z, Znf,
                                   np.zeros((0, 0), dtype=np.int64))
    big = np.concatenate([Z, (-B) % mod], axis=1)
    K = _kernel(ring, _normal_form(ring, big))[:z]
    Knf = _normal_form(ring, K)
    # coker(K) on Λ^z: factor i has exponent exps[i] (m if the diagonal is 0)
    exps_all = list(Knf.exps) + [ring.m] * (z - len(Knf.exps))
    keep = [i for i in range(z) if exps_all[i] > 0]
    # sort by exponent descending, stable in index
    keep.sort(key=lambda i: -exps_all[i])
    exps = tuple(exps_all[i] for i in keep)
    reps_c = Knf.Uinv[:, keep]          # generators in Λ^z
    basis = Z @ reps_c % mod
    Urows = Knf.U[keep]
    return ModuleDecomposition(ring, exps, basis.reshape(n, len(keep)), Z, Znf,
                               Urows.reshape(len(keep), z))


def cokernel(M: ModularMatrix) -> ModuleDecomposition:
    """Decompose Λ^rows / im(M)."""
    return subquotient(M.ring, np.eye(M.rows, dtype=np.int64), M.a)


def free_module(ring: Ring, n: int) -> ModuleDecomposition:
    return subquotient(ring, np.eye(n, dtype=np.int64), np.zeros((n, 0), dtype=np.int64))


def submodule_order(ring: Ring, gens, exps) -> int:
    """Order of the span of `gens` inside the sum of Z/p^{a} (a in exps)."""
    exps = list(exps)
    k = len(exps)
    if k == 0:
        return 1
    gens = np.asarray(gens, dtype=np.int64).reshape(k, -1)
    rel = np.diag([ring.p ** a for a in exps]).astype(np.int64)
    q = cokernel(ModularMatrix(ring, np.concatenate([gens, rel], axis=1)))
    return ring.p ** (sum(exps) - sum(q.exps))


def preimage_kernel(ring: Ring, beta, tgt_exps) -> np.ndarray:
    """Generators of {x : beta x = 0 in the sum of Z/p^{a'} over tgt_exps}."""
    beta = np.asarray(beta, dtype=np.int64)
    kt, k = beta.shape
    rel = np.diag([ring.p ** a for a in tgt_exps]).astype(np.int64).reshape(kt, kt)
    big = np.concatenate([beta, rel], axis=1) % ring.mod
    return _kernel(ring, _normal_form(ring, big))[:k]


def same_submodule(ring: Ring, A, B, exps) -> bool:
    """Do the column spans of A and B agree inside the sum of Z/p^{a}?"""
    k = len(exps)
    A = np.asarray(A, dtype=np.int64).reshape(k, -1)
    B = np.asarray(B, dtype=np.int64).reshape(k, -1)
    oa = submodule_order(ring, A, exps)
    ob = submodule_order(ring, B, exps)
    oab = submodule_order(ring, np.concatenate([A, B], axis=1), exps)
    return oa == ob == oab


def presented_map_is_iso(ring: Ring, M, rel_src, rel_tgt):
    """Is x ↦ M x an isomorphism Λ^s / span(rel_src) -> Λ^t / span(rel_tgt)?

    Returns (verdict, reason).  Checks that the map is well defined,
    surjective and injective.
    """
    mod = ring.mod
    M = np.asarray(M, dtype=np.int64) % mod
    t, s = M.shape
    rel_src = np.asarray(rel_src, dtype=np.int64).reshape(s, -1) % mod
    rel_tgt = np.asarray(rel_tgt, dtype=np.int64).reshape(t, -1) % mod
    tnf = _normal_form(ring, rel_tgt)
    _, ok = _solve(ring, tnf, matmul(M, rel_src, mod) if rel_src.shape[1] else np.zeros((t, 1), dtype=np.int64))
    if not np.all(ok):
        return False, "not well defined"
    big = np.concatenate([M, rel_tgt], axis=1)
    if cokernel(ModularMatrix(ring, big)).rank:
        return False, "not surjective"
    K = _kernel(ring, _normal_form(ring, big))[:s]
    if K.shape[1]:
        _, ok = _solve(ring, _normal_form(ring, rel_src), K)
        if not np.all(ok):
            return False, "not injective"
    return True, "isomorphism"
