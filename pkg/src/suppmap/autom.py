"""Automorphisms of finite powerset algebras and the groups they generate.

A :class:`FinAut` is a permutation of the atoms, i.e. an automorphism of the
powerset algebra over them.  A :class:`GroupTable` is a finite group of such
automorphisms with the identity pinned at index 0, giving every element a
stable index; multiplication, inverse, commutation and support data are
tabulated lazily as numpy arrays so that the formula sweeps can run at index
level.

Support notions:

* ``f.var()`` -- the join of the atoms moved by ``f`` (equivalently, the
  supremum of all elements mapped disjointly from themselves; see
  :func:`var_by_supremum` for the brute-force form kept as a cross-check).
* ``f.fix()`` -- the complement: the largest element below which ``f`` is
  the identity pointwise.
* ``G.sp(a)`` / ``G.sp_exact(a)`` -- the elements supported within / exactly
  on ``a``.

Centralizers are always taken inside the ambient ``GroupTable``, never in
the full automorphism group of the algebra.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import permutations
from math import factorial, lcm

import numpy as np

from .balg import MAX_ATOMS, FinElem, UniverseMismatchError

#: Default cap on group order for table construction (7! fits, 8! does not).
DEFAULT_MAX_GROUP = 5040


class GroupSizeError(ValueError):
    """A group construction exceeded the configured size cap."""


@dataclass(frozen=True)
class FinAut:
    """An automorphism of the powerset algebra: a permutation of the atoms."""

    image: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.image)
        if not 1 <= n <= MAX_ATOMS:
            raise ValueError(f"universe size must be within 1..{MAX_ATOMS}, got {n}")
        if sorted(self.image) != list(range(n)):
            raise ValueError(f"image {self.image} is not a permutation of 0..{n - 1}")

    @property
    def universe_size(self) -> int:
        return len(self.image)

    @classmethod
    def identity(cls, universe_size: int) -> FinAut:
        return cls(tuple(range(universe_size)))

    @classmethod
    def from_cycles(cls, universe_size: int, cycles) -> FinAut:
        img = list(range(universe_size))
        seen: set[int] = set()
        for cyc in cycles:
            cyc = tuple(cyc)
            for a in cyc:
                if not 0 <= a < universe_size:
                    raise ValueError(f"atom {a} outside universe of size {universe_size}")
                if a in seen:
                    raise ValueError(f"atom {a} repeated across cycles")
                seen.add(a)
            for i, a in enumerate(cyc):
                img[a] = cyc[(i + 1) % len(cyc)]
        return cls(tuple(img))

    def is_identity(self) -> bool:
        return all(i == v for i, v in enumerate(self.image))

    def apply_atom(self, atom: int) -> int:
        return self.image[atom]

    def apply(self, a: FinElem) -> FinElem:
        if a.universe_size != self.universe_size:
            raise UniverseMismatchError(
                f"universe sizes differ: {a.universe_size} vs {self.universe_size}"
            )
        bits = 0
        rest = a.bits
        while rest:
            low = rest & -rest
            bits |= 1 << self.image[low.bit_length() - 1]
            rest ^= low
        return FinElem(a.universe_size, bits)

    def compose(self, other: FinAut) -> FinAut:
        """self after other: ``(self.compose(other))(x) = self(other(x))``."""
        if other.universe_size != self.universe_size:
            raise UniverseMismatchError("universe sizes differ")
        return FinAut(tuple(self.image[x] for x in other.image))

    def inverse(self) -> FinAut:
        inv = [0] * self.universe_size
        for i, v in enumerate(self.image):
            inv[v] = i
        return FinAut(tuple(inv))

    def conjugate_by(self, h: FinAut) -> FinAut:
        """``h o self o h^-1``."""
        return h.compose(self.compose(h.inverse()))

    def power(self, k: int) -> FinAut:
        base = self if k >= 0 else self.inverse()
        out = FinAut.identity(self.universe_size)
        for _ in range(abs(k)):
            out = out.compose(base)
        return out

    def order(self) -> int:
        k, g = 1, self
        while not g.is_identity():
            g = g.compose(self)
            k += 1
        return k

    def var(self) -> FinElem:
        """Join of the atoms moved by self."""
        n = self.universe_size
        bits = 0
        for i, v in enumerate(self.image):
            if i != v:
                bits |= 1 << i
        return FinElem(n, bits)

    def fix(self) -> FinElem:
        """Largest element on which self acts as the identity pointwise."""
        return self.var().complement()

    def cycles(self) -> tuple[tuple[int, ...], ...]:
        """Nontrivial cycles, each starting at its least atom, ordered by it."""
        out = []
        seen: set[int] = set()
        for start in range(self.universe_size):
            if start in seen or self.image[start] == start:
                continue
            cyc = [start]
            seen.add(start)
            x = self.image[start]
            while x != start:
                cyc.append(x)
                seen.add(x)
                x = self.image[x]
            out.append(tuple(cyc))
        return tuple(out)

    def to_text(self) -> str:
        cycs = self.cycles()
        if not cycs:
            return f"id@{self.universe_size}"
        body = "".join("(" + " ".join(str(a) for a in c) + ")" for c in cycs)
        return f"{body}@{self.universe_size}"

    _TEXT_RE = re.compile(r"^(id|(?:\(\s*\d+(?:\s+\d+)*\s*\))*)@(\d+)$")
    _CYCLE_RE = re.compile(r"\(([^()]*)\)")

    @classmethod
    def parse(cls, text: str) -> FinAut:
        m = cls._TEXT_RE.match(text.strip())
        if m is None:
            raise ValueError(f"bad automorphism text {text!r}")
        n = int(m.group(2))
        if m.group(1) == "id":
            return cls.identity(n)
        cycles = [
            tuple(int(tok) for tok in body.split())
            for body in cls._CYCLE_RE.findall(m.group(1))
        ]
        return cls.from_cycles(n, cycles)

    def __str__(self) -> str:
        return self.to_text()


def commutator(f: FinAut, g: FinAut) -> FinAut:
    """``f o g o f^-1 o g^-1``."""
    return f.compose(g).compose(f.inverse()).compose(g.inverse())


def triple_commutator(h: FinAut, f: FinAut, g: FinAut) -> FinAut:
    """``[[h, f], g]``."""
    return commutator(commutator(h, f), g)


def var_by_supremum(f: FinAut) -> FinElem:
    """Support as the join of all elements mapped disjointly from themselves.

    Brute force over the whole algebra; kept as the independent route to
    ``f.var()`` and never replaced by it.
    """
    n = f.universe_size
    out = 0
    for bits in range(1 << n):
        img = 0
        rest = bits
        while rest:
            low = rest & -rest
            img |= 1 << f.image[low.bit_length() - 1]
            rest ^= low
        if img & bits == 0:
            out |= bits
    return FinElem(n, out)


class GroupTable:
    """A finite group of FinAuts over one universe, identity at index 0.

    Element order is fixed at construction and all derived data (index
    tables, commutation masks, centralizers) is cached on the instance.
    The caches are observationally pure: concurrent lookups may duplicate
    work but never change results.
    """

    def __init__(self, elements, descriptor: str = "", *, check_closure: bool = True):
        elems = tuple(elements)
        if not elems:
            raise ValueError("a group needs at least the identity")
        n = elems[0].universe_size
        if any(e.universe_size != n for e in elems):
            raise UniverseMismatchError("group elements over mixed universes")
        if not elems[0].is_identity():
            raise ValueError("identity must sit at index 0")
        self.universe_size = n
        self.elements = elems
        self.descriptor = descriptor
        self._index: dict[FinAut, int] = {e: i for i, e in enumerate(elems)}
        if len(self._index) != len(elems):
            raise ValueError("duplicate elements in group table")
        if check_closure:
            for f in elems:
                if f.inverse() not in self._index:
                    raise ValueError(f"not closed under inverse at {f}")
                for g in elems:
                    if f.compose(g) not in self._index:
                        raise ValueError(f"not closed under composition at {f}, {g}")
        self._mult: np.ndarray | None = None
        self._inv: np.ndarray | None = None
        self._var_bits: np.ndarray | None = None
        self._pow4: np.ndarray | None = None
        self._commute: np.ndarray | None = None
        self._commute_masks: list[int] | None = None
        self._orders: np.ndarray | None = None
        self._class_sizes: np.ndarray | None = None
        self._cent_cache: dict[frozenset[int], tuple[int, ...]] = {}

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i: int) -> FinAut:
        return self.elements[i]

    def __contains__(self, f: FinAut) -> bool:
        return f in self._index

    def index_of(self, f: FinAut) -> int:
        try:
            return self._index[f]
        except KeyError:
            raise ValueError(f"{f} is not an element of this group") from None

    # -- index-level tables -------------------------------------------------

    @property
    def mult(self) -> np.ndarray:
        """``mult[i, j]`` is the index of ``elements[i].compose(elements[j])``."""
        if self._mult is None:
            n = len(self.elements)
            dtype = np.int16 if n < 2**15 else np.int32
            table = np.empty((n, n), dtype=dtype)
            index = self._index
            images = [e.image for e in self.elements]
            for i, fi in enumerate(images):
                row = table[i]
                for j, gj in enumerate(images):
                    row[j] = index[FinAut(tuple(fi[x] for x in gj))]
            self._mult = table
        return self._mult

    @property
    def inv(self) -> np.ndarray:
        if self._inv is None:
            self._inv = np.array(
                [self._index[e.inverse()] for e in self.elements],
                dtype=self.mult.dtype,
            )
        return self._inv

    @property
    def var_bits(self) -> np.ndarray:
        if self._var_bits is None:
            self._var_bits = np.array([e.var().bits for e in self.elements], dtype=np.int32)
        return self._var_bits

    @property
    def pow4(self) -> np.ndarray:
        """``pow4[i]`` is the index of the fourth power of element ``i``."""
        if self._pow4 is None:
            diag = np.arange(len(self.elements))
            sq = self.mult[diag, diag]
            self._pow4 = self.mult[sq, sq]
        return self._pow4

    @property
    def commute(self) -> np.ndarray:
        """Boolean matrix: ``commute[i, j]`` iff elements i and j commute."""
        if self._commute is None:
            self._commute = np.asarray(self.mult == self.mult.T)
        return self._commute

    def commute_mask(self, i: int) -> int:
        """Bitmask over element indices commuting with element ``i``."""
        if self._commute_masks is None:
            packed = np.packbits(self.commute, axis=1, bitorder="little")
            self._commute_masks = [
                int.from_bytes(row.tobytes(), "little") for row in packed
            ]
        return self._commute_masks[i]

    def mul_idx(self, i: int, j: int) -> int:
        return int(self.mult[i, j])

    def inv_idx(self, i: int) -> int:
        return int(self.inv[i])

    def conj_idx(self, f: int, h: int) -> int:
        """Index of ``h o f o h^-1``."""
        m = self.mult
        return int(m[m[h, f], self.inv[h]])

    def comm_idx(self, i: int, j: int) -> int:
        """Index of ``[i, j] = i o j o i^-1 o j^-1``."""
        m = self.mult
        return int(m[m[m[i, j], self.inv[i]], self.inv[j]])

    def element_order(self, i: int) -> int:
        if self._orders is None:
            n = len(self.elements)
            orders = np.ones(n, dtype=np.int32)
            for k in range(n):
                x, o = k, 1
                while x != 0:
                    x = int(self.mult[x, k])
                    o += 1
                orders[k] = o
            self._orders = orders
        return int(self._orders[i])

    def exponent(self) -> int:
        out = 1
        for i in range(len(self.elements)):
            out = lcm(out, self.element_order(i))
        return out

    def class_size(self, i: int) -> int:
        """Size of the conjugacy class of element ``i``."""
        if self._class_sizes is None:
            n = len(self.elements)
            sizes = np.zeros(n, dtype=np.int32)
            every = np.arange(n)
            for k in range(n):
                orbit = np.unique(self.mult[self.mult[every, k], self.inv[every]])
                sizes[k] = len(orbit)
            self._class_sizes = sizes
        return int(self._class_sizes[i])

    # -- support subsets and centralizers ------------------------------------

    def _require_elem(self, a: FinElem) -> None:
        if a.universe_size != self.universe_size:
            raise UniverseMismatchError(
                f"element universe {a.universe_size} vs group universe {self.universe_size}"
            )

    def sp_indices(self, a: FinElem) -> tuple[int, ...]:
        """Indices of elements supported within ``a``."""
        self._require_elem(a)
        hit = (self.var_bits & ~np.int32(a.bits)) == 0
        return tuple(int(i) for i in np.flatnonzero(hit))

    def sp(self, a: FinElem) -> list[FinAut]:
        return [self.elements[i] for i in self.sp_indices(a)]

    def sp_exact_indices(self, a: FinElem) -> tuple[int, ...]:
        """Indices of elements whose support is exactly ``a``."""
        self._require_elem(a)
        return tuple(int(i) for i in np.flatnonzero(self.var_bits == a.bits))

    def sp_exact(self, a: FinElem) -> list[FinAut]:
        return [self.elements[i] for i in self.sp_exact_indices(a)]

    def centralizer_indices(self, member_indices) -> tuple[int, ...]:
        """Indices of elements commuting with every listed element (memoized)."""
        key = frozenset(member_indices)
        cached = self._cent_cache.get(key)
        if cached is not None:
            return cached
        mask = (1 << len(self.elements)) - 1
        for i in key:
            mask &= self.commute_mask(i)
        out = []
        rest = mask
        while rest:
            low = rest & -rest
            out.append(low.bit_length() - 1)
            rest ^= low
        result = tuple(out)
        self._cent_cache[key] = result
        return result

    def centralizer(self, members) -> list[FinAut]:
        """Elements commuting with every member, inside this group only."""
        idxs = [self.index_of(f) for f in members]
        return [self.elements[i] for i in self.centralizer_indices(idxs)]


def generate(
    universe_size: int,
    generators,
    *,
    max_size: int = DEFAULT_MAX_GROUP,
    descriptor: str = "",
) -> GroupTable:
    """Close a generator set under composition (breadth-first, deterministic)."""
    gens = list(generators)
    for g in gens:
        if g.universe_size != universe_size:
            raise UniverseMismatchError("generator universe mismatch")
    elems = [FinAut.identity(universe_size)]
    index = {elems[0]: 0}
    at = 0
    while at < len(elems):
        base = elems[at]
        at += 1
        for g in gens:
            new = base.compose(g)
            if new not in index:
                if len(elems) >= max_size:
                    raise GroupSizeError(
                        f"closure exceeds the size cap of {max_size} elements"
                    )
                index[new] = len(elems)
                elems.append(new)
    return GroupTable(elems, descriptor or "gen:" + ";".join(g.to_text() for g in gens),
                      check_closure=False)


def symmetric_group(n: int, *, max_size: int = DEFAULT_MAX_GROUP) -> GroupTable:
    """The full symmetric group on ``n`` atoms, in lexicographic image order."""
    if not 1 <= n <= MAX_ATOMS:
        raise GroupSizeError(f"universe size must be within 1..{MAX_ATOMS}, got {n}")
    if factorial(n) > max_size:
        raise GroupSizeError(
            f"sym:{n} has {factorial(n)} elements, over the size cap of {max_size}"
        )
    elems = [FinAut(p) for p in permutations(range(n))]
    return GroupTable(elems, f"sym:{n}", check_closure=False)


def tree_group(depth: int, *, max_size: int = DEFAULT_MAX_GROUP) -> GroupTable:
    """Automorphisms of the complete binary tree of the given depth.

    Acts on the ``2**depth`` leaves; the order is ``2**(2**depth - 1)``.
    Elements are enumerated recursively as (no-swap, swap) x left x right,
    which puts the identity first and fixes a deterministic order.
    """
    if depth < 1:
        raise ValueError("tree depth must be >= 1")
    if 1 << depth > MAX_ATOMS:
        raise GroupSizeError(f"tree:{depth} needs {1 << depth} atoms, over {MAX_ATOMS}")
    order = 1 << ((1 << depth) - 1)
    if order > max_size:
        raise GroupSizeError(
            f"tree:{depth} has {order} elements, over the size cap of {max_size}"
        )

    def build(d: int) -> list[tuple[int, ...]]:
        if d == 0:
            return [(0,)]
        sub = build(d - 1)
        half = 1 << (d - 1)
        out = []
        for swap in (0, 1):
            for a in sub:
                for b in sub:
                    if swap:
                        img = tuple(half + a[i] for i in range(half)) + tuple(
                            b[i] for i in range(half)
                        )
                    else:
                        img = tuple(a[i] for i in range(half)) + tuple(
                            half + b[i] for i in range(half)
                        )
                    out.append(img)
        return out

    elems = [FinAut(img) for img in build(depth)]
    return GroupTable(elems, f"tree:{depth}", check_closure=False)


def parse_group_descriptor(text: str, *, max_size: int = DEFAULT_MAX_GROUP) -> GroupTable:
    """Build a group from ``sym:<n>``, ``tree:<k>`` or ``gen:<aut;aut;...>``."""
    kind, sep, rest = text.partition(":")
    if not sep:
        raise ValueError(f"unknown group descriptor {text!r}")
    if kind == "sym":
        return symmetric_group(int(rest), max_size=max_size)
    if kind == "tree":
        return tree_group(int(rest), max_size=max_size)
    if kind == "gen":
        gens = [FinAut.parse(part) for part in rest.split(";") if part]
        if not gens:
            raise ValueError("gen: descriptor needs at least one generator")
        sizes = {g.universe_size for g in gens}
        if len(sizes) != 1:
            raise ValueError("gen: generators over mixed universes")
        return generate(sizes.pop(), gens, max_size=max_size, descriptor=text)
    raise ValueError(f"unknown group descriptor {text!r}")


def is_locally_moving(G: GroupTable) -> bool:
    """Whether every nonzero element has a nontrivial member supported inside it.

    By monotonicity it is enough to check the atoms: a singleton is covered
    iff some nonidentity element has support exactly that singleton, and
    covering all singletons covers every nonzero element above them.
    """
    supports = {int(b) for b in G.var_bits if b}
    return all((1 << i) in supports for i in range(G.universe_size))
