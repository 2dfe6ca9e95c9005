"""Finite powerset algebras and eventually periodic subsets of the naturals.

Two Boolean-algebra carriers back everything else in this package:

* :class:`FinElem` -- an element of the powerset algebra over the atoms
  ``0..n-1`` of a finite universe, stored as a bitmask.
* :class:`NSet` -- an eventually periodic subset of the naturals: explicit
  membership below ``window``, a union of residue classes modulo ``period``
  from ``window`` on.  Finite and cofinite sets are the special cases with
  empty or full residue set.

Values are immutable, and NSets normalize eagerly to the minimal period and
the minimal window, so structural equality coincides with semantic equality
and hashing is reliable for both carriers.  ``eq_mod_fin`` gives the
coarser "equal up to finitely many points" comparison on NSets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations
from math import lcm

#: Hard cap on the number of atoms.  Every consumer of FinElem runs sweeps
#: that are exponential in the universe size, so this stays small.
MAX_ATOMS = 16


class UniverseMismatchError(ValueError):
    """Two FinElems over different universes were combined."""


def _fmt_members(xs) -> str:
    return "{" + ",".join(str(x) for x in sorted(xs)) + "}"


def _parse_members(body: str) -> frozenset[int]:
    body = body.strip()
    if not body:
        return frozenset()
    return frozenset(int(tok) for tok in body.split(","))


@dataclass(frozen=True)
class FinElem:
    """A subset of the atoms ``0..universe_size-1``, as a bitmask."""

    universe_size: int
    bits: int

    def __post_init__(self) -> None:
        if not 1 <= self.universe_size <= MAX_ATOMS:
            raise ValueError(
                f"universe size must be within 1..{MAX_ATOMS}, got {self.universe_size}"
            )
        if not 0 <= self.bits < 1 << self.universe_size:
            raise ValueError(
                f"bitmask {self.bits:#x} out of range for {self.universe_size} atoms"
            )

    @classmethod
    def empty(cls, universe_size: int) -> FinElem:
        return cls(universe_size, 0)

    @classmethod
    def full(cls, universe_size: int) -> FinElem:
        return cls(universe_size, (1 << universe_size) - 1)

    @classmethod
    def singleton(cls, universe_size: int, atom: int) -> FinElem:
        return cls.from_members(universe_size, (atom,))

    @classmethod
    def from_members(cls, universe_size: int, members) -> FinElem:
        bits = 0
        for i in members:
            if not 0 <= i < universe_size:
                raise ValueError(f"atom {i} outside universe of size {universe_size}")
            bits |= 1 << i
        return cls(universe_size, bits)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.universe_size) if self.bits >> i & 1)

    def cardinality(self) -> int:
        return self.bits.bit_count()

    def is_zero(self) -> bool:
        return self.bits == 0

    def contains_atom(self, atom: int) -> bool:
        return 0 <= atom < self.universe_size and bool(self.bits >> atom & 1)

    def _require_same(self, other: FinElem) -> None:
        if self.universe_size != other.universe_size:
            raise UniverseMismatchError(
                f"universe sizes differ: {self.universe_size} vs {other.universe_size}"
            )

    def meet(self, other: FinElem) -> FinElem:
        self._require_same(other)
        return FinElem(self.universe_size, self.bits & other.bits)

    def join(self, other: FinElem) -> FinElem:
        self._require_same(other)
        return FinElem(self.universe_size, self.bits | other.bits)

    def minus(self, other: FinElem) -> FinElem:
        self._require_same(other)
        return FinElem(self.universe_size, self.bits & ~other.bits)

    def complement(self) -> FinElem:
        return FinElem(self.universe_size, self.bits ^ ((1 << self.universe_size) - 1))

    def leq(self, other: FinElem) -> bool:
        self._require_same(other)
        return self.bits & ~other.bits == 0

    def subsets_nonzero(self):
        """All nonzero subsets of self, ascending cardinality then member order."""
        ms = self.members
        for k in range(1, len(ms) + 1):
            for combo in combinations(ms, k):
                yield FinElem.from_members(self.universe_size, combo)

    def to_text(self) -> str:
        return _fmt_members(self.members) + f"@{self.universe_size}"

    _TEXT_RE = re.compile(r"^\{([\d,\s]*)\}@(\d+)$")

    @classmethod
    def parse(cls, text: str) -> FinElem:
        m = cls._TEXT_RE.match(text.strip())
        if m is None:
            raise ValueError(f"bad FinElem text {text!r}")
        return cls.from_members(int(m.group(2)), _parse_members(m.group(1)))

    def __str__(self) -> str:
        return self.to_text()


def all_elements(universe_size: int):
    """Every element of the powerset algebra, ascending cardinality then member order."""
    atoms = range(universe_size)
    for k in range(universe_size + 1):
        for combo in combinations(atoms, k):
            yield FinElem.from_members(universe_size, combo)


@dataclass(frozen=True)
class NSet:
    """An eventually periodic subset of the naturals.

    ``n`` is a member iff ``n in explicit`` when ``n < window``, and iff
    ``n % period in tail_residues`` otherwise.  The constructor normalizes:
    the window is aligned up to a multiple of the period (absorbing the tail
    rule on the gap), the period is reduced to its minimum, and trailing
    window blocks that already follow the tail rule are folded away.  The
    normal form is unique per set of naturals.
    """

    period: int
    tail_residues: frozenset[int]
    window: int
    explicit: frozenset[int]

    def __post_init__(self) -> None:
        p, res, w, exp = self.period, self.tail_residues, self.window, self.explicit
        if p < 1:
            raise ValueError(f"period must be >= 1, got {p}")
        res = frozenset(res)
        exp = frozenset(exp)
        if any(not 0 <= r < p for r in res):
            raise ValueError(f"tail residues {sorted(res)} not within [0, {p})")
        if w < 0:
            raise ValueError(f"window must be >= 0, got {w}")
        if any(not 0 <= m < w for m in exp):
            raise ValueError(f"explicit members {sorted(exp)} not within [0, {w})")

        # Align the window up to a multiple of the period.
        if w % p:
            w2 = w + (-w) % p
            exp = exp | frozenset(m for m in range(w, w2) if m % p in res)
            w = w2

        # Minimal period dividing p.
        for q in range(1, p + 1):
            if p % q:
                continue
            rq = frozenset(r % q for r in res)
            if all((r in res) == (r % q in rq) for r in range(p)):
                p, res = q, rq
                break

        # Minimal window: fold trailing blocks that match the tail rule.
        exp_m = set(exp)
        while w >= p and all((m in exp_m) == (m % p in res) for m in range(w - p, w)):
            for m in range(w - p, w):
                exp_m.discard(m)
            w -= p

        object.__setattr__(self, "period", p)
        object.__setattr__(self, "tail_residues", res)
        object.__setattr__(self, "window", w)
        object.__setattr__(self, "explicit", frozenset(exp_m))

    @classmethod
    def empty(cls) -> NSet:
        return cls(1, frozenset(), 0, frozenset())

    @classmethod
    def naturals(cls) -> NSet:
        return cls(1, frozenset({0}), 0, frozenset())

    @classmethod
    def from_finite(cls, members) -> NSet:
        ms = frozenset(members)
        if any(m < 0 for m in ms):
            raise ValueError("members must be naturals")
        w = max(ms) + 1 if ms else 0
        return cls(1, frozenset(), w, ms)

    @classmethod
    def from_residues(cls, period: int, residues) -> NSet:
        return cls(period, frozenset(residues), 0, frozenset())

    def contains(self, n: int) -> bool:
        if n < 0:
            return False
        if n < self.window:
            return n in self.explicit
        return n % self.period in self.tail_residues

    def __contains__(self, n: int) -> bool:
        return self.contains(n)

    def _refined(self, period: int, window: int) -> tuple[frozenset[int], frozenset[int]]:
        """The same set described at a coarser period/window (both multiples)."""
        res = frozenset(s for s in range(period) if s % self.period in self.tail_residues)
        exp = frozenset(n for n in range(window) if self.contains(n))
        return res, exp

    def _common(self, other: NSet) -> tuple[int, int]:
        p = lcm(self.period, other.period)
        w = max(self.window, other.window)
        return p, w + (-w) % p

    def _binary(self, other: NSet, op) -> NSet:
        p, w = self._common(other)
        ra, ea = self._refined(p, w)
        rb, eb = other._refined(p, w)
        return NSet(p, op(ra, rb), w, op(ea, eb))

    def meet(self, other: NSet) -> NSet:
        return self._binary(other, frozenset.intersection)

    def join(self, other: NSet) -> NSet:
        return self._binary(other, frozenset.union)

    def minus(self, other: NSet) -> NSet:
        return self._binary(other, frozenset.difference)

    def complement(self) -> NSet:
        return NSet(
            self.period,
            frozenset(range(self.period)) - self.tail_residues,
            self.window,
            frozenset(range(self.window)) - self.explicit,
        )

    def leq(self, other: NSet) -> bool:
        p, w = self._common(other)
        ra, ea = self._refined(p, w)
        rb, eb = other._refined(p, w)
        return ra <= rb and ea <= eb

    def is_zero(self) -> bool:
        return not self.tail_residues and not self.explicit

    def eq_mod_fin(self, other: NSet) -> bool:
        """Equality up to finitely many points: the tails must agree."""
        p = lcm(self.period, other.period)
        ra = frozenset(s for s in range(p) if s % self.period in self.tail_residues)
        rb = frozenset(s for s in range(p) if s % other.period in other.tail_residues)
        return ra == rb

    def is_zero_mod_fin(self) -> bool:
        return not self.tail_residues

    def members_below(self, bound: int) -> list[int]:
        return [n for n in range(bound) if self.contains(n)]

    def to_text(self) -> str:
        return (
            f"per={self.period};res={_fmt_members(self.tail_residues)};"
            f"win={self.window};exp={_fmt_members(self.explicit)}"
        )

    _TEXT_RE = re.compile(r"^per=(\d+);res=\{([\d,\s]*)\};win=(\d+);exp=\{([\d,\s]*)\}$")

    @classmethod
    def parse(cls, text: str) -> NSet:
        m = cls._TEXT_RE.match(text.strip())
        if m is None:
            raise ValueError(f"bad NSet text {text!r}")
        return cls(
            int(m.group(1)),
            _parse_members(m.group(2)),
            int(m.group(3)),
            _parse_members(m.group(4)),
        )

    def __str__(self) -> str:
        return self.to_text()
