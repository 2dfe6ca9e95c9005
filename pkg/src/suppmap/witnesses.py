"""Witness searches for the support-calculus lemmas, over finite groups.

Each ``primo_*`` function hunts for the object a lemma promises (a shrunken
element mapped disjointly, a long disjoint orbit, a conjugating or a
non-commuting element) and returns a :class:`WitnessResult`.  Every result
is re-verified against the defining property before it is returned, and a
``found=False`` result is an exhaustion certificate: the full search space
was scanned.

``secondo_sweep`` classifies every ordered pair of group elements by the
disjoint-support criteria and records whether the observed ``phi1`` value
matches the prediction; on a finite atomic algebra the prediction need not
hold, so the sweep reports and never asserts.

``terzo_check`` searches for a counterexample to the orbit-covering
exclusion: given pairwise-disjoint images ``f^k0(a)..f^kn(a)`` and
centralizer members ``h1..hn``, no nonzero ``b <= a`` may satisfy
``join_i f^ki(b) <= join_i hi(a)``.  That exclusion is algebra-agnostic, so
``terzo_sweep`` asserts zero violations over an exhaustive enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .autom import FinAut, GroupTable, commutator
from .balg import FinElem
from .formulas import phi1_matrix


class PreconditionError(ValueError):
    """A witness search was invoked outside its stated precondition."""


class InvalidInstanceError(ValueError):
    """An instance violates the hypotheses it is supposed to satisfy."""


@dataclass(frozen=True)
class WitnessResult:
    """Outcome of one witness search.

    ``witness`` holds named parts (kept as live objects); ``scanned`` counts
    the candidates examined, so a negative outcome doubles as an exhaustion
    certificate.
    """

    lemma: str
    found: bool
    witness: tuple[tuple[str, object], ...]
    scanned: int
    reason: str = ""

    def witness_text(self) -> str:
        if not self.witness:
            return "-"
        return ",".join(f"{name}:{obj.to_text()}" for name, obj in self.witness)

    def part(self, name: str):
        for key, obj in self.witness:
            if key == name:
                return obj
        raise KeyError(name)

    def line(self) -> str:
        out = (
            f"lemma={self.lemma} found={int(self.found)} "
            f"witness={self.witness_text()} scanned={self.scanned}"
        )
        if self.reason:
            out += f" reason={self.reason}"
        return out


def _joined_image(gs, b: FinElem) -> FinElem:
    out = FinElem.empty(b.universe_size)
    for g in gs:
        out = out.join(g.apply(b))
    return out


def primo_a(gs, a: FinElem) -> WitnessResult:
    """Find nonzero ``b <= a`` disjoint from the join of its images.

    Precondition: ``a`` is nonzero and lies below every ``var(g)``.
    Scans ``b`` ascending by cardinality, then member order.
    """
    gs = list(gs)
    if not gs:
        raise PreconditionError("need at least one automorphism")
    if a.is_zero():
        raise PreconditionError("a must be nonzero")
    for g in gs:
        if not a.leq(g.var()):
            raise PreconditionError(f"a={a} not below var({g})={g.var()}")
    scanned = 0
    for b in a.subsets_nonzero():
        scanned += 1
        if b.meet(_joined_image(gs, b)).is_zero():
            assert not b.is_zero() and b.leq(a)
            return WitnessResult("primo_a", True, (("b", b),), scanned)
    return WitnessResult("primo_a", False, (), scanned, reason="exhausted")


def _orbit_disjoint(h: FinAut, b: FinElem, n: int) -> bool:
    images = [b]
    cur = b
    for _ in range(n):
        cur = h.apply(cur)
        images.append(cur)
    seen = FinElem.empty(b.universe_size)
    for img in images:
        if not seen.meet(img).is_zero():
            return False
        seen = seen.join(img)
    return True


def primo_b(G: GroupTable, a: FinElem, n: int) -> WitnessResult:
    """Find ``h`` supported in ``a`` and nonzero ``b <= a`` with
    ``b, h(b), ..., h^n(b)`` pairwise disjoint.

    The constructive route (find a disjointly-moved atom, then repeatedly
    extend, composing with some ``k`` supported in ``b`` whenever the next
    power is the identity on ``b``) is attempted first; if it stalls, the
    search falls back to an exhaustive scan of ``sp(G, a) x subsets(a)``.
    Requests beyond the group exponent fail immediately: ``h`` to such a
    power cannot move ``b`` off itself.
    """
    if a.is_zero():
        raise PreconditionError("a must be nonzero")
    if n < 1:
        raise PreconditionError("n must be >= 1")
    if n > G.exponent():
        return WitnessResult("primo_b", False, (), 0, reason="order bound")

    scanned = 0
    sp_idx = G.sp_indices(a)

    def verified(h: FinAut, b: FinElem, depth: int) -> bool:
        nonlocal scanned
        scanned += 1
        return _orbit_disjoint(h, b, depth)

    # Constructive route.
    cand: tuple[FinAut, FinElem] | None = None
    for i in sp_idx:
        h = G.elements[i]
        moved = h.var()
        if moved.is_zero():
            continue
        b = FinElem.singleton(a.universe_size, moved.members[0])
        if verified(h, b, 1):
            cand = (h, b)
            break
    depth = 1
    while cand is not None and depth < n:
        h, b = cand
        nxt = h.power(depth + 1)
        moved_in_b = nxt.var().meet(b)
        if not moved_in_b.is_zero():
            c = FinElem.singleton(a.universe_size, moved_in_b.members[0])
            if verified(h, c, depth + 1):
                cand = (h, c)
                depth += 1
                continue
        else:
            stepped = None
            for j in G.sp_indices(b):
                k = G.elements[j]
                kvar = k.var()
                if kvar.is_zero():
                    continue
                c = FinElem.singleton(a.universe_size, kvar.members[0])
                g = k.compose(h)
                if g.var().leq(a) and verified(g, c, depth + 1):
                    stepped = (g, c)
                    break
            if stepped is not None:
                cand = stepped
                depth += 1
                continue
        cand = None  # construction stalled; exhaustive fallback below

    if cand is not None:
        h, b = cand
        assert _orbit_disjoint(h, b, n) and h.var().leq(a) and b.leq(a)
        return WitnessResult("primo_b", True, (("h", h), ("b", b)), scanned)

    for i in sp_idx:
        h = G.elements[i]
        for b in a.subsets_nonzero():
            if verified(h, b, n):
                assert h.var().leq(a) and b.leq(a) and not b.is_zero()
                return WitnessResult("primo_b", True, (("h", h), ("b", b)), scanned)
    return WitnessResult("primo_b", False, (), scanned, reason="exhausted")


def primo_c(G: GroupTable, f: FinAut, g: FinAut, a: FinElem) -> WitnessResult:
    """Find ``h`` supported in ``a`` whose conjugate of ``f`` fails to
    commute with ``g``; the identity is returned when ``f, g`` already fail.

    Precondition: ``a`` nonzero and below ``var(f) . var(g)``.
    """
    if a.is_zero() or not a.leq(f.var().meet(g.var())):
        raise PreconditionError("need nonzero a below var(f) meet var(g)")
    if not commutator(f, g).is_identity():
        h = FinAut.identity(a.universe_size)
        return WitnessResult("primo_c", True, (("h", h),), 0)
    scanned = 0
    for i in G.sp_indices(a):
        h = G.elements[i]
        scanned += 1
        if not commutator(f.conjugate_by(h), g).is_identity():
            assert h.var().leq(a)
            return WitnessResult("primo_c", True, (("h", h),), scanned)
    return WitnessResult("primo_c", False, (), scanned, reason="exhausted")


def primo_d(G: GroupTable, g: FinAut, a: FinElem) -> WitnessResult:
    """Find ``k`` supported in ``a`` that fails to commute with ``g``.

    Precondition: ``a`` nonzero and below ``var(g)``.  The search is direct
    and exhaustive over ``sp(G, a)``; routing through ``primo_c`` with
    ``f := g`` would be incomplete here (every conjugate of a 3-cycle in
    S_3 is one of its own powers, yet non-commuting transpositions exist).
    A ``primo_c`` success still transfers: ``[g^h, g] != id`` forces
    ``[h, g] != id``.
    """
    if a.is_zero() or not a.leq(g.var()):
        raise PreconditionError("need nonzero a below var(g)")
    scanned = 0
    for i in G.sp_indices(a):
        k = G.elements[i]
        scanned += 1
        if not commutator(k, g).is_identity():
            assert k.var().leq(a)
            return WitnessResult("primo_d", True, (("k", k),), scanned)
    return WitnessResult("primo_d", False, (), scanned, reason="exhausted")


# -- pair classification sweep ------------------------------------------------


@dataclass(frozen=True)
class ScopeRecord:
    f: int
    fp: int
    scope: str  # "a", "b" or "-"
    phi1: bool

    @property
    def conforms(self) -> bool | None:
        if self.scope == "a":
            return self.phi1
        if self.scope == "b":
            return not self.phi1
        return None


@dataclass
class SecondoReport:
    """Ordered-pair classification against the disjoint-support criteria."""

    descriptor: str
    size: int
    seed: int
    records: list[ScopeRecord]

    def counts(self) -> dict[str, int]:
        out = {"scope_a": 0, "scope_b": 0, "scope_none": 0,
               "conform_a": 0, "conform_b": 0, "violations": 0}
        for r in self.records:
            if r.scope == "a":
                out["scope_a"] += 1
                out["conform_a"] += int(bool(r.conforms))
            elif r.scope == "b":
                out["scope_b"] += 1
                out["conform_b"] += int(bool(r.conforms))
            else:
                out["scope_none"] += 1
            if r.conforms is False:
                out["violations"] += 1
        return out

    def text_lines(self) -> list[str]:
        lines = [f"# secondo group={self.descriptor} seed={self.seed}"]
        for r in self.records:
            c = r.conforms
            lines.append(
                f"pair f={r.f} fp={r.fp} scope={r.scope} phi1={int(r.phi1)} "
                f"conforms={'-' if c is None else int(c)}"
            )
        c = self.counts()
        lines.append(
            f"summary pairs={len(self.records)} scope_a={c['scope_a']} "
            f"scope_b={c['scope_b']} scope_none={c['scope_none']} "
            f"conform_a={c['conform_a']} conform_b={c['conform_b']} "
            f"violations={c['violations']}"
        )
        return lines

    def jsonl_lines(self) -> list[str]:
        import json

        lines = []
        for r in self.records:
            lines.append(json.dumps({
                "kind": "pair", "f": r.f, "fp": r.fp, "scope": r.scope,
                "phi1": r.phi1, "conforms": r.conforms,
            }))
        summary = {"kind": "summary", "group": self.descriptor,
                   "seed": self.seed, "pairs": len(self.records)}
        summary.update(self.counts())
        lines.append(json.dumps(summary))
        return lines


def secondo_sweep(
    G: GroupTable,
    *,
    workers: int = 1,
    cap: int | None = None,
    seed: int = 0,
) -> SecondoReport:
    """Classify every ordered pair ``(f, fp)``:

    * scope "a": supports disjoint, predicting ``phi1`` true;
    * scope "b": ``var(f)`` meets ``var(fp^4)``, predicting ``phi1`` false;
    * scope "-": neither criterion applies.

    The fourth power comes from the four-fold product the argument for
    scope (b) manipulates.  Worker count only chunks record assembly.
    """
    from .formulas import DEFAULT_SWEEP_CAP, SweepCapError

    n = len(G)
    limit = DEFAULT_SWEEP_CAP if cap is None else cap
    if n > limit:
        raise SweepCapError(f"group has {n} elements, over the sweep cap of {limit}")
    matrix = phi1_matrix(G)
    var_bits = [int(b) for b in G.var_bits]
    pow4_bits = [var_bits[int(G.pow4[i])] for i in range(n)]

    def rows(rng) -> list[ScopeRecord]:
        out = []
        for f in rng:
            bf = var_bits[f]
            for fp in range(n):
                if bf & var_bits[fp] == 0:
                    scope = "a"
                elif bf & pow4_bits[fp]:
                    scope = "b"
                else:
                    scope = "-"
                out.append(ScopeRecord(f, fp, scope, bool(matrix[f, fp])))
        return out

    if workers <= 1:
        records = rows(range(n))
    else:
        from concurrent.futures import ThreadPoolExecutor

        chunks = [range(i, n, workers) for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(rows, chunks))
        by_f: dict[int, list[ScopeRecord]] = {}
        for part in parts:
            for rec in part:
                by_f.setdefault(rec.f, []).append(rec)
        records = [rec for f in range(n) for rec in by_f[f]]
    return SecondoReport(G.descriptor or f"order-{n}", n, seed, records)


# -- orbit-covering exclusion --------------------------------------------------


@dataclass(frozen=True)
class TerzoInstance:
    """Hypotheses for the orbit-covering exclusion.

    ``exponents`` lists ``k0..kn``; ``family`` lists ``h1..hn`` (one fewer),
    each commuting with ``f``; the images ``f^ki(a)`` must be pairwise
    disjoint.
    """

    f: FinAut
    a: FinElem
    exponents: tuple[int, ...]
    family: tuple[FinAut, ...]

    def validate(self) -> None:
        if len(self.exponents) != len(self.family) + 1:
            raise InvalidInstanceError(
                f"{len(self.exponents)} exponents need {len(self.exponents) - 1} "
                f"family members, got {len(self.family)}"
            )
        n = self.f.universe_size
        if self.a.universe_size != n or any(h.universe_size != n for h in self.family):
            raise InvalidInstanceError("mixed universes")
        for h in self.family:
            if not commutator(h, self.f).is_identity():
                raise InvalidInstanceError(f"{h} does not commute with f")
        seen = FinElem.empty(n)
        for k in self.exponents:
            img = self.f.power(k).apply(self.a)
            if not seen.meet(img).is_zero():
                raise InvalidInstanceError(
                    f"images of a under exponents {self.exponents} are not disjoint"
                )
            seen = seen.join(img)


def terzo_check(inst: TerzoInstance) -> WitnessResult:
    """Search for a counterexample ``b``: nonzero, below ``a``, with the
    joined ``f^ki`` images of ``b`` inside the joined family images of ``a``.

    ``found=True`` means the exclusion FAILED at the returned ``b``;
    ``found=False`` certifies conformance over every nonzero ``b <= a``.
    """
    inst.validate()
    powers = [inst.f.power(k) for k in inst.exponents]
    rhs = _joined_image(inst.family, inst.a)
    scanned = 0
    for b in inst.a.subsets_nonzero():
        scanned += 1
        lhs = _joined_image(powers, b)
        if lhs.leq(rhs):
            return WitnessResult("terzo", True, (("b", b),), scanned)
    return WitnessResult("terzo", False, (), scanned, reason="exhausted")


@dataclass
class TerzoSweepReport:
    descriptor: str
    max_exponents: int
    exponent_range: tuple[int, int]
    instances: int
    b_checked: int
    violations: list[tuple[int, FinElem, tuple[int, ...], tuple[int, ...], FinElem]]

    def summary_line(self) -> str:
        lo, hi = self.exponent_range
        return (
            f"terzo group={self.descriptor} max_exponents={self.max_exponents} "
            f"range={lo}..{hi} instances={self.instances} "
            f"b_checked={self.b_checked} violations={len(self.violations)}"
        )


def terzo_sweep(
    G: GroupTable,
    *,
    max_exponents: int = 3,
    exponent_range: tuple[int, int] = (-4, 4),
) -> TerzoSweepReport:
    """Exhaustively enumerate valid instances over ``G`` and check them all.

    Iterates every f, every nonzero a, every exponent tuple up to the
    length bound, every family tuple over the centralizer of f, and every
    nonzero b below a.  Runs on precomputed bitmask image tables; a sampled
    cross-check against :func:`terzo_check` lives in the tests.
    """
    n = G.universe_size
    lo, hi = exponent_range
    size = 1 << n
    full = size - 1
    ks = list(range(lo, hi + 1))

    instances = 0
    b_checked = 0
    violations: list[tuple[int, FinElem, tuple[int, ...], tuple[int, ...], FinElem]] = []

    # apply-tables: image_of[g_idx][bits]
    def table(aut: FinAut) -> list[int]:
        out = [0] * size
        for bits in range(size):
            img = 0
            rest = bits
            while rest:
                low = rest & -rest
                img |= 1 << aut.image[low.bit_length() - 1]
                rest ^= low
            out[bits] = img
        return out

    elem_tables = [table(e) for e in G.elements]
    subsets_of: list[list[int]] = [[] for _ in range(size)]
    for a_bits in range(1, size):
        sub = a_bits
        subs = []
        while sub:
            subs.append(sub)
            sub = (sub - 1) & a_bits
        subsets_of[a_bits] = sorted(subs, key=lambda s: (bin(s).count("1"), s))

    for fi, f in enumerate(G.elements):
        ptabs = {k: table(f.power(k)) for k in ks}
        cent = G.centralizer_indices((fi,))
        cent_tables = [elem_tables[i] for i in cent]
        for length in range(1, max_exponents + 1):
            for ktup in product(ks, repeat=length):
                tabs = [ptabs[k] for k in ktup]
                for a_bits in range(1, size):
                    seen = 0
                    ok = True
                    for t in tabs:
                        img = t[a_bits]
                        if seen & img:
                            ok = False
                            break
                        seen |= img
                    if not ok:
                        continue
                    for htup in product(range(len(cent)), repeat=length - 1):
                        instances += 1
                        rhs = 0
                        for hi_i in htup:
                            rhs |= cent_tables[hi_i][a_bits]
                        for b_bits in subsets_of[a_bits]:
                            b_checked += 1
                            lhs = 0
                            for t in tabs:
                                lhs |= t[b_bits]
                            if lhs & ~rhs & full == 0:
                                violations.append((
                                    fi,
                                    FinElem(n, a_bits),
                                    ktup,
                                    tuple(cent[j] for j in htup),
                                    FinElem(n, b_bits),
                                ))
                                break
    return TerzoSweepReport(
        G.descriptor or f"order-{len(G)}", max_exponents, exponent_range,
        instances, b_checked, violations,
    )
