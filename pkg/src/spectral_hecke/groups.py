"""Finite abelian p-groups and their group algebras over Z/p^m.

A group G = Z/p^{N_1} x ... x Z/p^{N_r} has elements stored as residue
tuples.  Group algebra elements come in two shapes:

* sparse: `GroupAlgebraElement`, a dict from tuples to residues.  Used for
  differentials, which have tiny support apart from norm elements.
* dense: numpy arrays whose trailing r axes are indexed by G.  Used for
  chain vectors, where products with a sparse element become sums of rolls.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .modarith import Ring, is_prime


@dataclass(frozen=True)
class FiniteAbelianPGroup:
    p: int
    exponents: tuple

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        ex = tuple(int(n) for n in self.exponents)
        if any(n < 1 for n in ex):
            raise ValueError("exponents must be >= 1")
        object.__setattr__(self, "exponents", ex)

    @property
    def rank(self) -> int:
        return len(self.exponents)

    @property
    def orders(self) -> tuple:
        return tuple(self.p ** n for n in self.exponents)

    @property
    def size(self) -> int:
        return int(np.prod(self.orders, dtype=np.int64)) if self.exponents else 1

    def identity(self) -> tuple:
        return (0,) * self.rank

    def generator(self, i: int) -> tuple:
        g = [0] * self.rank
        g[i] = 1
        return tuple(g)

    def elements(self):
        return itertools.product(*[range(n) for n in self.orders])

    def add(self, g, h) -> tuple:
        return tuple((a + b) % n for a, b, n in zip(g, h, self.orders))

    def neg(self, g) -> tuple:
        return tuple((-a) % n for a, n in zip(g, self.orders))

    def reduce(self, g) -> tuple:
        return tuple(int(a) % n for a, n in zip(g, self.orders))

    def product(self, other: "FiniteAbelianPGroup") -> "FiniteAbelianPGroup":
        if other.p != self.p:
            raise ValueError("different primes")
        return FiniteAbelianPGroup(self.p, self.exponents + other.exponents)

    def torsion_exponents(self, m: int) -> tuple:
        """Exponents of G[p^m] = {g : p^m g = 0}."""
        return tuple(min(n, m) for n in self.exponents)


class GroupHom:
    """Homomorphism G -> H given by an integer matrix acting on residue tuples.

    Column j of `matrix` is the image of the j-th standard generator of G.
    """

    def __init__(self, source: FiniteAbelianPGroup, target: FiniteAbelianPGroup, matrix):
        self.source = source
        self.target = target
        self.matrix = np.array(matrix, dtype=np.int64).reshape(target.rank, source.rank)
        # well defined: order_j times column j must vanish in the target
        for j, n in enumerate(source.orders):
            img = target.reduce(self.matrix[:, j] * n)
            if any(img):
                raise ValueError("matrix does not define a homomorphism")

    def __call__(self, g) -> tuple:
        if self.source.rank == 0:
            return self.target.identity()
        v = self.matrix @ np.array(g, dtype=np.int64)
        return self.target.reduce(v)

    @classmethod
    def identity(cls, G):
        return cls(G, G, np.eye(G.rank, dtype=np.int64))

    def is_identity(self) -> bool:
        return (self.source == self.target
                and bool(np.all(self.matrix == np.eye(self.source.rank, dtype=np.int64))))


class GroupAlgebraElement:
    """Finitely supported function G -> Λ, multiplied by convolution."""

    __slots__ = ("group", "ring", "terms", "_norm")

    def __init__(self, group: FiniteAbelianPGroup, ring: Ring, terms=None):
        self.group = group
        self.ring = ring
        clean = {}
        for g, c in (terms or {}).items():
            g = group.reduce(g)
            c = (clean.get(g, 0) + int(c)) % ring.mod
            if c:
                clean[g] = c
            else:
                clean.pop(g, None)
        self.terms = clean
        self._norm = self._detect_norm()

    # -- constructors
    @classmethod
    def zero(cls, G, R):
        return cls(G, R, {})

    @classmethod
    def one(cls, G, R, c=1):
        return cls(G, R, {G.identity(): c})

    @classmethod
    def basis(cls, G, R, g, c=1):
        return cls(G, R, {tuple(g): c})

    @classmethod
    def t_minus_one(cls, G, R, i):
        return cls(G, R, {G.generator(i): 1, G.identity(): -1})

    @classmethod
    def norm(cls, G, R, i):
        n = G.orders[i]
        terms = {}
        for k in range(n):
            g = [0] * G.rank
            g[i] = k
            terms[tuple(g)] = 1
        return cls(G, R, terms)

    def _detect_norm(self):
        """(axis, shift, coefficient) when self is c * shift * (norm along axis)."""
        G = self.group
        if G.rank == 0 or len(self.terms) < 2:
            return None
        cs = set(self.terms.values())
        if len(cs) != 1:
            return None
        keys = list(self.terms)
        for i, n in enumerate(G.orders):
            if len(keys) != n:
                continue
            base = keys[0]
            rest = base[:i] + base[i + 1:]
            if all(k[:i] + k[i + 1:] == rest for k in keys):
                shift = list(base)
                shift[i] = 0
                return i, tuple(shift), cs.pop()
        return None

    # -- arithmetic
    def __add__(self, o):
        t = dict(self.terms)
        for g, c in o.terms.items():
            t[g] = t.get(g, 0) + c
        return GroupAlgebraElement(self.group, self.ring, t)

    def __neg__(self):
        return GroupAlgebraElement(self.group, self.ring, {g: -c for g, c in self.terms.items()})

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c):
        return GroupAlgebraElement(self.group, self.ring, {g: c * v for g, v in self.terms.items()})

    def __mul__(self, o):
        if isinstance(o, GroupAlgebraElement):
            G = self.group
            t = {}
            for g, a in self.terms.items():
                for h, b in o.terms.items():
                    k = G.add(g, h)
                    t[k] = t.get(k, 0) + a * b
            return GroupAlgebraElement(G, self.ring, t)
        return self.scale(int(o))

    def __rmul__(self, c):
        return self.scale(int(c))

    def __eq__(self, o):
        return (isinstance(o, GroupAlgebraElement) and self.group == o.group
                and self.terms == o.terms)

    def __repr__(self):
        return f"GroupAlgebraElement({self.terms})"

    def is_zero(self) -> bool:
        return not self.terms

    def augmentation(self) -> int:
        return sum(self.terms.values()) % self.ring.mod

    def pushforward(self, phi: GroupHom) -> "GroupAlgebraElement":
        t = {}
        for g, c in self.terms.items():
            h = phi(g)
            t[h] = t.get(h, 0) + c
        return GroupAlgebraElement(phi.target, self.ring, t)

    def with_ring(self, ring: Ring) -> "GroupAlgebraElement":
        return GroupAlgebraElement(self.group, ring, self.terms)

    # -- dense action
    def dense(self) -> np.ndarray:
        a = np.zeros(self.group.orders, dtype=np.int64)
        for g, c in self.terms.items():
            a[g] = c
        return a

    def act(self, x: np.ndarray) -> np.ndarray:
        """Multiply a dense element (trailing axes indexed by G) by self."""
        G = self.group
        r = G.rank
        mod = self.ring.mod
        if r == 0:
            return x * self.terms.get((), 0) % mod
        axes = tuple(range(x.ndim - r, x.ndim))
        if self._norm is not None:
            i, shift, c = self._norm
            ax = x.ndim - r + i
            s = x.sum(axis=ax, keepdims=True) % mod
            out = np.broadcast_to(s, x.shape) * c % mod
            if any(shift):
                out = np.roll(out, shift, axis=axes)
            return out
        out = np.zeros_like(x)
        for g, c in self.terms.items():
            if any(g):
                out += c * np.roll(x, g, axis=axes)
            else:
                out += c * x
            out %= mod
        return out

    def regular_matrix(self) -> np.ndarray:
        """Matrix of left multiplication on Λ[G] in the flattened group basis."""
        n = self.group.size
        eye = np.eye(n, dtype=np.int64).reshape((n,) + self.group.orders)
        return self.act(eye).reshape(n, n).T % self.ring.mod


class GroupRing:
    """Λ[G], the base ring of complexes in this package."""

    def __init__(self, group: FiniteAbelianPGroup, ring: Ring):
        self.group = group
        self.ring = ring

    @classmethod
    def coefficients(cls, ring: Ring):
        """Λ itself, as the group ring of the trivial group."""
        return cls(FiniteAbelianPGroup(ring.p, ()), ring)

    def __eq__(self, o):
        return isinstance(o, GroupRing) and self.group == o.group and self.ring == o.ring

    def __repr__(self):
        return f"GroupRing({self.group.exponents}, {self.ring})"

    @property
    def is_trivial(self) -> bool:
        return self.group.rank == 0

    @property
    def shape(self) -> tuple:
        return self.group.orders

    @property
    def size(self) -> int:
        return self.group.size

    def zeros(self, rank) -> np.ndarray:
        return np.zeros((rank,) + self.shape, dtype=np.int64)

    def element(self, terms) -> GroupAlgebraElement:
        return GroupAlgebraElement(self.group, self.ring, terms)

    def one(self, c=1) -> GroupAlgebraElement:
        return GroupAlgebraElement.one(self.group, self.ring, c)

    def unit_vector(self, rank, i, c=1) -> np.ndarray:
        """c times the i-th basis generator, placed at the identity."""
        x = self.zeros(rank)
        x[(i,) + self.group.identity()] = c % self.ring.mod
        return x

    def augment(self, x: np.ndarray) -> np.ndarray:
        """Apply Λ[G] -> Λ coordinatewise to a dense vector of shape (rank, *G)."""
        r = self.group.rank
        if r == 0:
            return x % self.ring.mod
        return x.reshape(x.shape[0], -1).sum(axis=1) % self.ring.mod
