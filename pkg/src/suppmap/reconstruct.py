"""Recovering the atom action from the algebra of a group isomorphism.

A :class:`GroupIso` is a claimed isomorphism between two finite
automorphism groups, held as an index mapping.  From one, ``build_theta``
derives the induced correspondence of supports: each algebra element that
is the exact support of at least one group element is sent to the common
support of the images of all such elements.  The derivation fails loudly,
with the offending pair, whenever those images disagree, so a corrupted
mapping cannot produce a map silently.

``check_chains`` tests the derived correspondence against every maximal
chain of the source algebra: along any chain, defined values must stay
strictly increasing.  ``find_isos`` searches for isomorphisms by mapping a
greedy generating set and propagating products, pruning on any
inconsistency; survivors get the full table check.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .autom import FinAut, GroupTable
from .balg import FinElem, all_elements

#: Chain verification enumerates all maximal chains, factorially many in
#: the number of atoms.
MAX_CHAIN_ATOMS = 8


class ReconstructionError(ValueError):
    """The data does not support the requested reconstruction step."""


@dataclass(frozen=True)
class GroupIso:
    """A mapping of element indices between two group tables."""

    source: GroupTable
    target: GroupTable
    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.mapping) != len(self.source):
            raise ReconstructionError(
                f"mapping covers {len(self.mapping)} of {len(self.source)} elements"
            )
        if any(not 0 <= v < len(self.target) for v in self.mapping):
            raise ReconstructionError("mapping points outside the target group")

    def image_of(self, f: FinAut) -> FinAut:
        return self.target.elements[self.mapping[self.source.index_of(f)]]


def inner_iso(G: GroupTable, h: FinAut) -> GroupIso:
    """Conjugation by ``h`` as an isomorphism of ``G`` with itself."""
    hi = G.index_of(h)
    mapping = tuple(G.conj_idx(i, hi) for i in range(len(G)))
    return GroupIso(G, G, mapping)


def iso_defect(iso: GroupIso) -> str | None:
    """First witness that the mapping is not an isomorphism, or None.

    Checks bijectivity, unit preservation, then the full multiplication
    table.
    """
    G, H, mp = iso.source, iso.target, iso.mapping
    if len(G) != len(H):
        return f"group sizes differ: {len(G)} vs {len(H)}"
    arr = np.asarray(mp, dtype=np.int64)
    counts = np.bincount(arr, minlength=len(H))
    if (counts != 1).any():
        v = int(np.flatnonzero(counts != 1)[0])
        return f"target element {v} is hit {int(counts[v])} times"
    if mp[0] != 0:
        return f"identity maps to element {mp[0]}"
    lhs = arr[G.mult]
    rhs = H.mult[arr[:, None], arr[None, :]]
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        i, j = (int(x) for x in bad[0])
        return (
            f"product breaks at ({i},{j}): "
            f"maps to {int(lhs[i, j])}, images multiply to {int(rhs[i, j])}"
        )
    return None


def verify_iso(iso: GroupIso) -> bool:
    return iso_defect(iso) is None


# -- the induced support correspondence ------------------------------------


@dataclass(frozen=True)
class ThetaMap:
    """Support correspondence induced by an isomorphism.

    ``pairs`` is ordered by cardinality then members; ``witnesses[k]``
    counts the group elements whose exact support produced ``pairs[k]``.
    """

    source_universe: int
    target_universe: int
    pairs: tuple[tuple[FinElem, FinElem], ...]
    witnesses: tuple[int, ...]

    def domain(self) -> tuple[FinElem, ...]:
        return tuple(a for a, _ in self.pairs)

    def apply(self, a: FinElem) -> FinElem:
        for src, dst in self.pairs:
            if src == a:
                return dst
        raise KeyError(f"{a} is not the exact support of any element")

    def lines(self) -> list[str]:
        return [
            f"a={a.to_text()} theta={b.to_text()} witnesses={w}"
            for (a, b), w in zip(self.pairs, self.witnesses)
        ]


def build_theta(iso: GroupIso) -> ThetaMap:
    """Derive the support correspondence, or fail with the witness pair.

    The domain is every algebra element with a nonempty exact-support
    fiber; the value is the support of the image of any fiber member, and
    all members must agree for the map to exist.
    """
    G, H = iso.source, iso.target
    tvar = H.var_bits
    pairs = []
    witnesses = []
    for a in all_elements(G.universe_size):
        fiber = G.sp_exact_indices(a)
        if not fiber:
            continue
        images = {int(tvar[iso.mapping[i]]) for i in fiber}
        if len(images) > 1:
            by_bits: dict[int, int] = {}
            for i in fiber:
                by_bits.setdefault(int(tvar[iso.mapping[i]]), i)
            culprits = sorted(by_bits.items())
            (b1, i1), (b2, i2) = culprits[0], culprits[1]
            raise ReconstructionError(
                f"images of the fiber over {a} have unequal supports: "
                f"{G.elements[i1]} -> {FinElem(H.universe_size, b1)} but "
                f"{G.elements[i2]} -> {FinElem(H.universe_size, b2)}"
            )
        pairs.append((a, FinElem(H.universe_size, images.pop())))
        witnesses.append(len(fiber))
    return ThetaMap(G.universe_size, H.universe_size, tuple(pairs), tuple(witnesses))


def injective_witness(theta: ThetaMap) -> tuple[FinElem, FinElem] | None:
    """A pair of domain elements sharing a value, or None."""
    seen: dict[int, FinElem] = {}
    for a, b in theta.pairs:
        if b.bits in seen:
            return (seen[b.bits], a)
        seen[b.bits] = a
    return None


def check_injective(theta: ThetaMap) -> bool:
    return injective_witness(theta) is None


_CHAIN_CACHE: dict[int, np.ndarray] = {}


def _chain_matrix(n: int) -> np.ndarray:
    """All maximal chains of the algebra on ``n`` atoms, as prefix masks."""
    if n > MAX_CHAIN_ATOMS:
        raise ReconstructionError(
            f"chain check is factorial in atoms; {n} exceeds the cap {MAX_CHAIN_ATOMS}"
        )
    cached = _CHAIN_CACHE.get(n)
    if cached is None:
        rows = []
        for perm in permutations(range(n)):
            mask, row = 0, [0]
            for atom in perm:
                mask |= 1 << atom
                row.append(mask)
            rows.append(row)
        cached = np.asarray(rows, dtype=np.int32)
        _CHAIN_CACHE[n] = cached
    return cached


@dataclass(frozen=True)
class ChainReport:
    chains: int
    comparisons: int
    violations: int
    witness: str = ""

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def line(self) -> str:
        out = (
            f"chains={self.chains} comparisons={self.comparisons} "
            f"violations={self.violations}"
        )
        if self.witness:
            out += f" witness={self.witness}"
        return out


def check_chains(theta: ThetaMap) -> ChainReport:
    """Walk every maximal chain; defined values must strictly increase.

    Undefined entries are skipped, comparing each defined value with the
    last defined one before it.
    """
    n = theta.source_universe
    chains = _chain_matrix(n)
    lookup = np.full(1 << n, -1, dtype=np.int64)
    for a, b in theta.pairs:
        lookup[a.bits] = b.bits

    rows = chains.shape[0]
    prev = np.full(rows, -1, dtype=np.int64)
    prev_src = np.full(rows, -1, dtype=np.int64)
    comparisons = 0
    violations = 0
    witness = ""
    for level in range(n + 1):
        col = chains[:, level]
        cur = lookup[col]
        have = cur >= 0
        both = have & (prev >= 0)
        comparisons += int(both.sum())
        grow = ((prev | cur) == cur) & (prev != cur)
        bad = both & ~grow
        if bad.any() and not witness:
            r = int(np.flatnonzero(bad)[0])
            tn = theta.target_universe
            witness = (
                f"chain {r} level {level}: "
                f"{FinElem(n, int(prev_src[r]))} -> {FinElem(tn, int(prev[r]))} "
                f"then {FinElem(n, int(col[r]))} -> {FinElem(tn, int(cur[r]))}"
            )
        violations += int(bad.sum())
        prev = np.where(have, cur, prev)
        prev_src = np.where(have, col.astype(np.int64), prev_src)
    return ChainReport(rows, comparisons, violations, witness)


# -- isomorphism search ------------------------------------------------------


def _greedy_generators(G: GroupTable) -> list[int]:
    gens: list[int] = []
    known = {0}
    while len(known) < len(G):
        nxt = min(i for i in range(len(G)) if i not in known)
        gens.append(nxt)
        closure = {0}
        frontier = [0]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = int(G.mult[x, g])
                if y not in closure:
                    closure.add(y)
                    frontier.append(y)
        known = closure
    return gens


def find_isos(G: GroupTable, H: GroupTable, *, limit: int | None = None) -> list[GroupIso]:
    """All isomorphisms from ``G`` onto ``H``, in deterministic order.

    Images are assigned to a greedy generating set, candidates filtered by
    order and conjugacy class size, and each choice propagated through the
    product structure immediately; contradictions prune the branch.  Every
    completed mapping still passes through :func:`verify_iso` before being
    returned.  ``limit`` stops the search early.
    """
    if len(G) != len(H):
        return []
    if Counter(G.element_order(i) for i in range(len(G))) != Counter(
        H.element_order(j) for j in range(len(H))
    ):
        return []
    gens = _greedy_generators(G)
    cands = []
    for g in gens:
        og, cg = G.element_order(g), G.class_size(g)
        cands.append([
            h for h in range(len(H))
            if H.element_order(h) == og and H.class_size(h) == cg
        ])

    n = len(G)
    found: list[GroupIso] = []

    def propagate(mp: np.ndarray, rev: np.ndarray) -> bool:
        """Close the partial map under right translation by mapped gens."""
        queue = [i for i in range(n) if mp[i] >= 0]
        qi = 0
        active = [(g, int(mp[g])) for g in gens if mp[g] >= 0]
        while qi < len(queue):
            x = queue[qi]
            qi += 1
            for g, hg in active:
                y = int(G.mult[x, g])
                w = int(H.mult[mp[x], hg])
                if mp[y] < 0:
                    if rev[w] >= 0:
                        return False
                    mp[y] = w
                    rev[w] = y
                    queue.append(y)
                elif mp[y] != w:
                    return False
        return True

    def assign(pos: int, mp: np.ndarray, rev: np.ndarray) -> None:
        if limit is not None and len(found) >= limit:
            return
        if pos == len(gens):
            if (mp < 0).any():
                return
            iso = GroupIso(G, H, tuple(int(v) for v in mp))
            if verify_iso(iso):
                found.append(iso)
            return
        g = gens[pos]
        for h in cands[pos]:
            if mp[g] >= 0:
                if mp[g] == h:
                    assign(pos + 1, mp, rev)
                continue
            if rev[h] >= 0:
                continue
            mp2, rev2 = mp.copy(), rev.copy()
            mp2[g] = h
            rev2[h] = g
            if propagate(mp2, rev2):
                assign(pos + 1, mp2, rev2)

    mp0 = np.full(n, -1, dtype=np.int64)
    rev0 = np.full(n, -1, dtype=np.int64)
    mp0[0] = 0
    rev0[0] = 0
    assign(0, mp0, rev0)
    return found
