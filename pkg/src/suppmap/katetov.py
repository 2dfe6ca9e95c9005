"""Almost-permutations of the naturals and their three-part decompositions.

An :class:`AlmostPerm` is an injective map defined on a cofinite subset of
the naturals and surjective onto one: finitely many exceptional points
(an explicit window of pairs, with absent keys undefined), then a
displacement rule per residue class.  The carrier is exact; composition,
inversion and the image of an eventually periodic set stay inside it.

``katetov_decompose`` splits the set of strictly moved points (undefined
points count as moved) into three pieces, none of which meets its own
image.  Three pieces are necessary in general (an odd cycle defeats two)
and always suffice, since both the exceptional graph and the residue
quotient decompose into paths and cycles.  ``verify_parts`` re-checks the
defining properties of a decomposition from scratch, pointwise over an
initial segment wide enough that periodicity carries the verdict to all
of N, so it accepts or rejects independently of how the parts were built.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from math import lcm

import numpy as np

from .balg import NSet

#: Largest tail period a decomposition may use before coarser per-cycle
#: periods are substituted (and failing that, the decomposition refuses).
KATETOV_CAP = 10_000


class AlmostPermError(ValueError):
    """The data does not describe an injective almost-permutation."""


class KatetovCapError(ValueError):
    """No decomposition fits under the requested tail-period cap."""


@dataclass(frozen=True)
class AlmostPerm:
    """An almost-permutation of the naturals.

    For ``n >= window`` the map sends ``n`` to ``n + displacements[n % period]``;
    below the window, ``window_pairs`` lists ``(key, value)`` explicitly and a
    missing key is undefined.  Construction validates injectivity and
    totality of values, then canonicalizes: trailing window points that
    already follow the displacement rule fold into the tail, and the period
    drops to its minimum.  Equal maps are structurally equal.
    """

    window: int
    window_pairs: tuple[tuple[int, int], ...]
    period: int
    displacements: tuple[int, ...]

    def __post_init__(self) -> None:
        w = self.window
        pairs = tuple(sorted(tuple(pr) for pr in self.window_pairs))
        p = self.period
        d = tuple(self.displacements)
        if p < 1 or len(d) != p:
            raise AlmostPermError(f"period {p} needs exactly {p} displacements, got {len(d)}")
        if w < 0:
            raise AlmostPermError(f"window must be >= 0, got {w}")
        keys = [k for k, _ in pairs]
        if len(set(keys)) != len(keys):
            raise AlmostPermError("duplicate window keys")
        if keys and not (0 <= keys[0] and keys[-1] < w):
            raise AlmostPermError(f"window keys must lie in [0, {w})")
        vals = [v for _, v in pairs]
        if any(v < 0 for v in vals):
            raise AlmostPermError("window values must be naturals")
        if len(set(vals)) != len(vals):
            raise AlmostPermError("window values collide")

        image_res = sorted((r + d[r]) % p for r in range(p))
        if image_res != list(range(p)):
            raise AlmostPermError(f"displacements {d} do not permute the residues mod {p}")
        rho = [0] * p  # inverse of the residue map
        for r in range(p):
            rho[(r + d[r]) % p] = r
        for r in range(p):
            first = w + (r - w) % p
            if first + d[r] < 0:
                raise AlmostPermError(f"tail point {first} maps below zero")
        for v in vals:
            r = rho[v % p]
            if v - d[r] >= w:
                raise AlmostPermError(f"window value {v} is also the image of tail point {v - d[r]}")

        # Fold trailing window points that already follow the tail rule.
        by_key = dict(pairs)
        while w > 0 and by_key.get(w - 1) == (w - 1) + d[(w - 1) % p]:
            del by_key[w - 1]
            w -= 1
        # Minimal period.
        for q in range(1, p + 1):
            if p % q == 0 and all(d[r] == d[r % q] for r in range(p)):
                p, d = q, d[:q]
                break

        object.__setattr__(self, "window", w)
        object.__setattr__(self, "window_pairs", tuple(sorted(by_key.items())))
        object.__setattr__(self, "period", p)
        object.__setattr__(self, "displacements", d)
        object.__setattr__(self, "_lookup", dict(by_key))  # not a field: cache only

    # -- construction ----------------------------------------------------

    @classmethod
    def identity(cls) -> AlmostPerm:
        return cls(0, (), 1, (0,))

    @classmethod
    def shift(cls, k: int) -> AlmostPerm:
        """``n -> n + k``; for negative ``k`` the first ``|k|`` points are undefined."""
        return cls(max(0, -k), (), 1, (k,))

    @classmethod
    def from_tail_rule(cls, displacements, window: int = 0, pairs=()) -> AlmostPerm:
        d = tuple(displacements)
        return cls(window, tuple(pairs), len(d), d)

    # -- pointwise -------------------------------------------------------

    def apply(self, n: int) -> int | None:
        """Image of ``n``, or None where the map is undefined."""
        if n < 0:
            raise ValueError("defined on naturals only")
        if n >= self.window:
            return n + self.displacements[n % self.period]
        return self._lookup.get(n)

    def defined_at(self, n: int) -> bool:
        return self.apply(n) is not None

    def holes(self) -> tuple[int, ...]:
        """Points below the window with no image."""
        present = {k for k, _ in self.window_pairs}
        return tuple(n for n in range(self.window) if n not in present)

    def image_table(self, bound: int) -> np.ndarray:
        """Vector of images on ``[0, bound)``, with -1 at undefined points."""
        idx = np.arange(bound, dtype=np.int64)
        d = np.asarray(self.displacements, dtype=np.int64)
        val = idx + d[idx % self.period]
        w = min(self.window, bound)
        if w:
            head = np.full(w, -1, dtype=np.int64)
            for k, v in self.window_pairs:
                if k < w:
                    head[k] = v
            val[:w] = head
        return val

    # -- the two support sets --------------------------------------------

    def fix_set(self) -> NSet:
        """Points the map sends to themselves (undefined points excluded)."""
        res = frozenset(r for r in range(self.period) if self.displacements[r] == 0)
        exp = frozenset(k for k, v in self.window_pairs if k == v)
        return NSet(self.period, res, self.window, exp)

    def var_set(self) -> NSet:
        """Points moved or undefined; built directly, not as a complement."""
        res = frozenset(r for r in range(self.period) if self.displacements[r] != 0)
        exp = frozenset(
            n for n in range(self.window) if self._lookup.get(n, -1) != n
        )
        return NSet(self.period, res, self.window, exp)

    # -- algebra -----------------------------------------------------------

    def compose(self, other: AlmostPerm) -> AlmostPerm:
        """``self`` after ``other``; undefined wherever the chain breaks."""
        po, ps = other.period, self.period
        do, ds = other.displacements, self.displacements
        L = lcm(po, ps)
        w = max(other.window, self.window - min(min(do), 0), 0)
        d = tuple(
            do[r % po] + ds[(r + do[r % po]) % ps]
            for r in range(L)
        )
        pairs = []
        for n in range(w):
            v = other.apply(n)
            if v is None:
                continue
            u = self.apply(v)
            if u is None:
                continue
            pairs.append((n, u))
        return AlmostPerm(w, tuple(pairs), L, d)

    def inverse(self) -> AlmostPerm:
        """Inverse map; points outside the image become undefined."""
        p, d, w = self.period, self.displacements, self.window
        rho = [0] * p
        for r in range(p):
            rho[(r + d[r]) % p] = r
        d_inv = tuple(-d[rho[s]] for s in range(p))
        w_inv = w + max(0, max(d))
        back = {v: k for k, v in self.window_pairs}
        pairs = []
        for m in range(w_inv):
            if m in back:
                pairs.append((m, back[m]))
                continue
            n = m - d[rho[m % p]]
            if n >= w:
                pairs.append((m, n))
        return AlmostPerm(w_inv, tuple(pairs), p, d_inv)

    def eq_mod_fin(self, other: AlmostPerm) -> bool:
        """Equal outside a finite set, i.e. the tail rules agree."""
        L = lcm(self.period, other.period)
        return all(
            self.displacements[r % self.period] == other.displacements[r % other.period]
            for r in range(L)
        )

    def is_identity_where_defined(self) -> bool:
        return all(v == k for k, v in self.window_pairs) and set(self.displacements) <= {0}

    def image_of_nset(self, s: NSet) -> NSet:
        """Exact image ``{f(n) : n in s, f defined at n}`` as an NSet."""
        p, d = self.period, self.displacements
        q = lcm(p, s.period)
        t0 = max(self.window, s.window)
        wb = t0 + q + max(0, max(d))
        nb = wb - min(0, min(d))
        res = frozenset(
            (r + d[r % p]) % q
            for r in range(q)
            if r % s.period in s.tail_residues
        )
        exp = set()
        for n in s.members_below(nb):
            v = self.apply(n)
            if v is not None and v < wb:
                exp.add(v)
        return NSet(q, res, wb, frozenset(exp))

    # -- text form ---------------------------------------------------------

    def to_text(self) -> str:
        disp = ",".join(str(x) for x in self.displacements)
        mp = ",".join(f"{k}>{v}" for k, v in self.window_pairs)
        return f"per={self.period};disp={disp};win={self.window};map={mp}"

    _TEXT = re.compile(r"^per=(\d+);disp=([-\d,]*);win=(\d+);map=((?:\d+>\d+)?(?:,\d+>\d+)*)$")

    @classmethod
    def parse(cls, text: str) -> AlmostPerm:
        m = cls._TEXT.match(text.strip())
        if not m:
            raise AlmostPermError(f"cannot parse almost-permutation {text!r}")
        period = int(m.group(1))
        disp = tuple(int(x) for x in m.group(2).split(",")) if m.group(2) else ()
        window = int(m.group(3))
        pairs = []
        if m.group(4):
            for chunk in m.group(4).split(","):
                k, v = chunk.split(">")
                pairs.append((int(k), int(v)))
        return cls(window, tuple(pairs), period, disp)

    def __str__(self) -> str:
        return self.to_text()


def random_almost_perm(
    seed: int,
    *,
    max_window: int = 10_000,
    max_period: int = 12,
) -> AlmostPerm:
    """Deterministic sampler.

    The base form shuffles a window that is a multiple of the period and
    lifts each residue displacement by a nonnegative multiple of the
    period, which keeps every tail image at or above the window, so the
    base is always valid (and total).  Seeds alternate between the base,
    its inverse (undefined points appear where lifts skip values) and a
    composition of two bases sharing a period.
    """
    rng = random.Random(seed)
    margin = 8 * max_period

    def base(limit: int, period: int | None = None) -> AlmostPerm:
        p = period if period is not None else rng.randint(1, max_period)
        w = p * rng.randint(0, max(0, limit // p))
        tau = list(range(p))
        rng.shuffle(tau)
        lifts = [rng.choice((0, 0, 0, 1, 1, 2, 3)) for _ in range(p)]
        d = tuple(tau[r] - r + p * lifts[r] for r in range(p))
        vals = list(range(w))
        rng.shuffle(vals)
        return AlmostPerm(w, tuple(enumerate(vals)), p, d)

    style = rng.choice(("plain", "plain", "inverse", "composed"))
    if style == "plain":
        out = base(max_window)
    elif style == "inverse":
        out = base(max_window - margin).inverse()
    else:
        p = rng.randint(1, max_period)
        g = base(max_window - margin, p)
        f = base(max_window - margin, p)
        out = f.compose(g)
    if out.window > max_window or out.period > max_period:
        raise AlmostPermError("sampler produced an out-of-envelope map")
    return out


# -- decomposition -------------------------------------------------------


@dataclass(frozen=True)
class KatetovParts:
    """Three disjoint pieces covering the moved points."""

    e0: NSet
    e1: NSet
    e2: NSet

    def __iter__(self):
        return iter((self.e0, self.e1, self.e2))


def _tail_color_table(p: int, d: tuple[int, ...], cap: int) -> tuple[int, list[int]]:
    """Eventually periodic 3-coloring of the moved residue classes.

    Returns ``(P, table)`` where ``table[n % P]`` colors every tail point
    ``n`` (or is -1 on unmoved classes) and no point shares a color with
    its image.  Classes split into cycles of the residue permutation; a
    cycle with zero net displacement carries finite orbits and is colored
    by residue alone, while a drifting cycle is colored through a quotient
    ring whose size forces every quotient orbit to a length divisible by
    three.  If the combined period would exceed ``cap``, drifting cycles
    fall back, largest first, to the smallest multiple of ``p`` beyond
    their displacements; that quotient has no fixed points, so its orbits
    still 3-color, merely less regularly.
    """
    moved = [r for r in range(p) if d[r] != 0]
    if not moved:
        return 1, [-1]
    in_moved = set(moved)
    seen: set[int] = set()
    plans: list[list] = []  # [cycle, drift, quotient period, downgraded]
    for r0 in moved:
        if r0 in seen:
            continue
        cyc = [r0]
        seen.add(r0)
        x = (r0 + d[r0]) % p
        while x != r0:
            cyc.append(x)
            seen.add(x)
            x = (x + d[x]) % p
        drift = sum(d[r] for r in cyc)
        quot = p if drift == 0 else 3 * lcm(p, abs(drift))
        plans.append([cyc, drift, quot, False])

    def combined() -> int:
        out = p
        for pl in plans:
            out = lcm(out, pl[2])
        return out

    while combined() > cap:
        live = [pl for pl in plans if pl[1] != 0 and not pl[3]]
        if not live:
            raise KatetovCapError(
                f"smallest available tail period {combined()} exceeds cap {cap}"
            )
        pl = max(live, key=lambda pl: pl[2])
        biggest = max(abs(d[r]) for r in pl[0])
        pl[2] = p * (biggest // p + 1)
        pl[3] = True

    p_all = combined()
    table = [-1] * p_all
    for cyc, drift, quot, down in plans:
        members = set(cyc)
        if drift == 0:
            m = len(cyc)
            res_color = {}
            for i, r in enumerate(cyc):
                res_color[r] = 2 if (i == m - 1 and m % 2) else i % 2
            for rho in range(p_all):
                if rho % p in members:
                    table[rho] = res_color[rho % p]
        else:
            cols = [-1] * quot
            for x0 in range(quot):
                if x0 % p not in members or cols[x0] != -1:
                    continue
                orbit = [x0]
                x = (x0 + d[x0 % p]) % quot
                while x != x0:
                    orbit.append(x)
                    x = (x + d[x % p]) % quot
                m = len(orbit)
                if down:
                    for i, x in enumerate(orbit):
                        cols[x] = 2 if (i == m - 1 and m % 2) else i % 2
                else:
                    # quotient size makes every orbit length a multiple of 3
                    for i, x in enumerate(orbit):
                        cols[x] = i % 3
            for rho in range(p_all):
                if rho % p in members:
                    table[rho] = cols[rho % quot]
    return p_all, table


def katetov_decompose(f: AlmostPerm, *, cap: int = KATETOV_CAP) -> KatetovParts:
    """Split the moved points of ``f`` into three parts, each missing its
    own image.

    Tail points are colored by the residue table; window points form a
    graph of in/out degree at most one, so its cycles alternate (with a
    third color absorbing odd length) and its paths are colored greedily
    against at most two constraints each, the endpoints' contacts with
    the tail coloring.
    """
    p, d, w = f.period, f.displacements, f.window
    p_all, table = _tail_color_table(p, d, cap)

    by_key = dict(f.window_pairs)
    core = {n for n in range(w) if by_key.get(n, -1) != n}

    forbidden: dict[int, set[int]] = {n: set() for n in core}
    drop = -min(min(d), 0)
    for src in range(w, w + drop):
        v = src + d[src % p]
        if v < w and v in core:
            forbidden[v].add(table[src % p_all])
    edges: dict[int, int] = {}
    indeg = {n: 0 for n in core}
    for n in core:
        if n not in by_key:
            continue  # undefined: no outgoing edge
        v = by_key[n]
        if v < w:
            if v in core:
                edges[n] = v
                indeg[v] += 1
        elif d[v % p] != 0:
            forbidden[n].add(table[v % p_all])

    colors: dict[int, int] = {}
    for start in sorted(core):
        if indeg[start] or start in colors:
            continue
        prev = -1
        x = start
        while True:
            c = min({0, 1, 2} - forbidden[x] - {prev})
            colors[x] = c
            prev = c
            if x in edges and edges[x] not in colors:
                x = edges[x]
            else:
                break
    for start in sorted(core):
        if start in colors:
            continue
        orbit = [start]
        x = edges[start]
        while x != start:
            orbit.append(x)
            x = edges[x]
        m = len(orbit)
        for i, x in enumerate(orbit):
            colors[x] = 2 if (i == m - 1 and m % 2) else i % 2

    expl: list[set[int]] = [set(), set(), set()]
    for n, c in colors.items():
        expl[c].add(n)
    res: list[set[int]] = [set(), set(), set()]
    for rho in range(p_all):
        if table[rho] >= 0:
            res[table[rho]].add(rho)
    parts = tuple(
        NSet(p_all, frozenset(res[i]), w, frozenset(expl[i])) for i in range(3)
    )
    return KatetovParts(*parts)


# -- verification ---------------------------------------------------------


def _nset_mask(s: NSet, bound: int) -> np.ndarray:
    flags = np.zeros(s.period, dtype=bool)
    for r in s.tail_residues:
        flags[r] = True
    mask = flags[np.arange(bound, dtype=np.int64) % s.period]
    w = min(s.window, bound)
    if w:
        head = np.zeros(w, dtype=bool)
        for m in s.explicit:
            if m < w:
                head[m] = True
        mask[:w] = head
    return mask


@dataclass
class VerifyReport:
    """Outcome of re-checking a decomposition against its map."""

    checks: list[tuple[str, bool, str]]  # (name, passed, witness or "")
    scan_bound: int

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def lines(self) -> list[str]:
        out = [f"# verify-parts scan_bound={self.scan_bound}"]
        for name, passed, wit in self.checks:
            line = f"check {name} ok={int(passed)}"
            if wit:
                line += f" witness={wit}"
            out.append(line)
        out.append(f"result ok={int(self.ok)}")
        return out


def verify_parts(f: AlmostPerm, parts: KatetovParts) -> VerifyReport:
    """Re-derive whether ``parts`` decomposes the moved points of ``f``.

    Scans pointwise up to a bound past every window plus one full common
    period; beyond it membership and displacement both repeat with the
    common period and images stay past the windows, so the initial
    segment decides every check.  The scan never consults how the parts
    were constructed.
    """
    trio = list(parts)
    big = lcm(f.period, *(s.period for s in trio))
    d_lo, d_hi = min(f.displacements), max(f.displacements)
    span = max(abs(d_lo), abs(d_hi))
    x0 = max([f.window] + [s.window for s in trio]) + span
    bound = x0 + big
    total = bound + span

    val = f.image_table(total)
    idx = np.arange(total, dtype=np.int64)
    var_mask = val != idx  # holes carry -1 and stay "moved"
    masks = [_nset_mask(s, total) for s in trio]

    checks: list[tuple[str, bool, str]] = []

    def first_where(cond: np.ndarray, fmt) -> str:
        hits = np.flatnonzero(cond)
        return fmt(int(hits[0])) if hits.size else ""

    for i in range(3):
        for j in range(i + 1, 3):
            both = masks[i] & masks[j]
            checks.append((
                f"disjoint_e{i}_e{j}",
                not both.any(),
                first_where(both, lambda n: f"n={n} in both"),
            ))
    union = masks[0] | masks[1] | masks[2]
    diff = union ^ var_mask
    checks.append((
        "covers_moved_set",
        not diff.any(),
        first_where(diff, lambda n: f"n={n} moved={bool(var_mask[n])} covered={bool(union[n])}"),
    ))

    defined = val >= 0
    inside = defined & (val < total)
    safe = np.where(inside, val, 0)
    for i in range(3):
        viol = masks[i] & inside & masks[i][safe]
        wit = first_where(viol, lambda n: f"n={n} -> {int(val[n])} both in e{i}")
        passed = not viol.any()
        # window values can exceed the scan; check those few directly
        for n in np.flatnonzero(masks[i] & defined & ~inside):
            if trio[i].contains(int(val[n])):
                passed = False
                wit = f"n={int(n)} -> {int(val[n])} both in e{i}"
                break
        checks.append((f"image_clear_e{i}", passed, wit))

    return VerifyReport(checks, total)


def parts_cyclic(f: AlmostPerm, parts: KatetovParts) -> bool:
    """Whether the parts chain cyclically: each image lands in the next part.

    Holds for drift-only maps under this decomposition; not required of a
    valid decomposition in general.
    """
    trio = list(parts)
    return all(
        f.image_of_nset(trio[i]).leq(trio[(i + 1) % 3]) for i in range(3)
    )
