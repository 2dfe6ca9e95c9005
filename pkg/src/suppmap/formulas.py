"""Group-language support formulas, evaluated exhaustively over a GroupTable.

The first-order formulas here mention only composition, inversion and
equality with the identity, so their truth depends on the group alone, never
on the algebra it acts on:

* ``phi1(f, fp, G)`` -- for every ``g`` that fails to commute with ``f``
  there are ``f1, f2`` in the centralizer of ``fp`` whose triple commutator
  ``[[g, f1], f2]`` is nontrivial yet commutes with ``fp``.
* ``d1(f, G)`` -- all ``fp`` with ``phi1(f, fp)``.
* ``v_set(f, G)`` -- centralizer of the fourth powers of ``d1(f, G)``.
* ``phi_le(f, g, G)`` -- ``v_set(f)`` contained in ``v_set(g)``; ``phi_eq``
  is the symmetrization.

``minore_report`` tabulates, for every ordered pair, ``phi_le`` against the
support order ``var(f) <= var(g)``.  Whether the two agree on a finite
atomic algebra is an empirical question; the report records it and asserts
nothing.

Quantifier evaluation is exhaustive with short-circuiting.  The batch path
used by the sweeps factors ``phi1`` through the observation that the inner
existential depends only on ``(g, fp)``: writing ``W(fp)`` for the set of
``g`` with a witness pair, ``phi1(f, fp)`` holds iff every ``g`` outside
``W(fp)`` commutes with ``f``.  Both paths compute the same function and the
tests compare them pairwise on whole groups.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from weakref import WeakKeyDictionary

import numpy as np

from .autom import FinAut, GroupTable

#: Default cap on group order for whole-group pair sweeps.
DEFAULT_SWEEP_CAP = 1024


class SweepCapError(ValueError):
    """A pair sweep was requested over a group larger than its cap."""


@dataclass
class _Cache:
    phi1: np.ndarray | None = None  # bool, [f, fp]
    vmasks: dict[int, int] = field(default_factory=dict)


_caches: WeakKeyDictionary[GroupTable, _Cache] = WeakKeyDictionary()


def _cache(G: GroupTable) -> _Cache:
    c = _caches.get(G)
    if c is None:
        c = _Cache()
        _caches[G] = c
    return c


def _witness_exists(G: GroupTable, g: int, zarr: np.ndarray, inv_zarr: np.ndarray,
                    fp: int) -> bool:
    """Some ``f1, f2`` in the centralizer give ``[[g,f1],f2]`` nontrivial and
    commuting with ``fp``.  Scans ``f1`` ascending, vectorizes over ``f2``."""
    mult, inv, commute = G.mult, G.inv, G.commute
    for f1 in zarr:
        t = mult[mult[mult[g, f1], inv[g]], inv[f1]]
        if t == 0:
            continue
        inner = mult[mult[mult[t, zarr], inv[t]], inv_zarr]
        if bool(np.any((inner != 0) & commute[inner, fp])):
            return True
    return False


def phi1_idx(G: GroupTable, f: int, fp: int) -> bool:
    """Direct quantifier evaluation at index level (outer g, inner pairs)."""
    zs = G.centralizer_indices((fp,))
    zarr = np.asarray(zs, dtype=G.mult.dtype)
    inv_zarr = G.inv[zarr]
    for g in range(len(G)):
        if G.comm_idx(g, f) == 0:
            continue
        if not _witness_exists(G, g, zarr, inv_zarr, fp):
            return False
    return True


def phi1(f: FinAut, fp: FinAut, G: GroupTable) -> bool:
    fi, fpi = G.index_of(f), G.index_of(fp)
    cached = _cache(G).phi1
    if cached is not None:
        return bool(cached[fi, fpi])
    return phi1_idx(G, fi, fpi)


def phi1_matrix(G: GroupTable) -> np.ndarray:
    """Boolean matrix ``[f, fp]`` of ``phi1`` over the whole group (cached)."""
    c = _cache(G)
    if c.phi1 is not None:
        return c.phi1
    n = len(G)
    full = (1 << n) - 1
    matrix = np.zeros((n, n), dtype=bool)
    for fp in range(n):
        zs = G.centralizer_indices((fp,))
        zarr = np.asarray(zs, dtype=G.mult.dtype)
        inv_zarr = G.inv[zarr]
        allowed = full
        for g in range(n):
            if not _witness_exists(G, g, zarr, inv_zarr, fp):
                allowed &= G.commute_mask(g)
        for f in range(n):
            matrix[f, fp] = bool(allowed >> f & 1)
    matrix.setflags(write=False)
    c.phi1 = matrix
    return matrix


def d1_indices(G: GroupTable, f: int) -> tuple[int, ...]:
    row = phi1_matrix(G)[f]
    return tuple(int(i) for i in np.flatnonzero(row))


def d1(f: FinAut, G: GroupTable) -> list[FinAut]:
    """Every ``fp`` satisfying ``phi1(f, fp)``, in element order."""
    return [G.elements[i] for i in d1_indices(G, G.index_of(f))]


def v_mask(G: GroupTable, f: int) -> int:
    """Bitmask of ``v_set`` member indices for element ``f`` (memoized)."""
    c = _cache(G)
    got = c.vmasks.get(f)
    if got is not None:
        return got
    row = phi1_matrix(G)[f]
    fourth = np.unique(G.pow4[np.flatnonzero(row)])
    mask = (1 << len(G)) - 1
    for i in fourth:
        mask &= G.commute_mask(int(i))
    c.vmasks[f] = mask
    return mask


def v_set(f: FinAut, G: GroupTable) -> list[FinAut]:
    """Centralizer of the fourth powers of ``d1(f, G)``, in element order."""
    mask = v_mask(G, G.index_of(f))
    return [G.elements[i] for i in range(len(G)) if mask >> i & 1]


def phi_le(f: FinAut, g: FinAut, G: GroupTable) -> bool:
    """Group-definable support comparison: ``v_set(f)`` within ``v_set(g)``."""
    vf = v_mask(G, G.index_of(f))
    vg = v_mask(G, G.index_of(g))
    return vf | vg == vg


def phi_eq(f: FinAut, g: FinAut, G: GroupTable) -> bool:
    vf = v_mask(G, G.index_of(f))
    vg = v_mask(G, G.index_of(g))
    return vf == vg


@dataclass(frozen=True)
class PairRecord:
    f: int
    g: int
    phi_le: bool
    var_le: bool

    @property
    def agree(self) -> bool:
        return self.phi_le == self.var_le


@dataclass
class FormulaReport:
    """Full ordered-pair table of ``phi_le`` against the support order."""

    descriptor: str
    size: int
    seed: int
    records: list[PairRecord]

    @property
    def agreements(self) -> int:
        return sum(1 for r in self.records if r.agree)

    def text_lines(self) -> list[str]:
        lines = [f"# verify-minore group={self.descriptor} seed={self.seed}"]
        for r in self.records:
            lines.append(
                f"pair f={r.f} g={r.g} phi_le={int(r.phi_le)} "
                f"var_le={int(r.var_le)} agree={int(r.agree)}"
            )
        total = len(self.records)
        agree = self.agreements
        lines.append(
            f"summary pairs={total} phi_le_true={sum(1 for r in self.records if r.phi_le)} "
            f"var_le_true={sum(1 for r in self.records if r.var_le)} "
            f"agree={agree} disagree={total - agree}"
        )
        return lines

    def jsonl_lines(self) -> list[str]:
        import json

        lines = []
        for r in self.records:
            lines.append(json.dumps({
                "kind": "pair", "f": r.f, "g": r.g,
                "phi_le": r.phi_le, "var_le": r.var_le, "agree": r.agree,
            }))
        total = len(self.records)
        agree = self.agreements
        lines.append(json.dumps({
            "kind": "summary", "group": self.descriptor, "seed": self.seed,
            "pairs": total,
            "phi_le_true": sum(1 for r in self.records if r.phi_le),
            "var_le_true": sum(1 for r in self.records if r.var_le),
            "agree": agree, "disagree": total - agree,
        }))
        return lines


def minore_report(
    G: GroupTable,
    *,
    workers: int = 1,
    cap: int = DEFAULT_SWEEP_CAP,
    seed: int = 0,
) -> FormulaReport:
    """Tabulate ``phi_le`` against ``var(f) <= var(g)`` for every ordered pair.

    The phi1 matrix and all v-masks are precomputed sequentially; only the
    embarrassingly parallel pair-record stage is chunked across workers, so
    the report bytes never depend on the worker count.
    """
    n = len(G)
    if n > cap:
        raise SweepCapError(f"group has {n} elements, over the sweep cap of {cap}")
    phi1_matrix(G)
    masks = [v_mask(G, f) for f in range(n)]
    var_bits = [int(b) for b in G.var_bits]

    def rows(rng) -> list[PairRecord]:
        out = []
        for f in rng:
            vf, bf = masks[f], var_bits[f]
            for g in range(n):
                out.append(PairRecord(
                    f, g,
                    vf | masks[g] == masks[g],
                    bf & ~var_bits[g] == 0,
                ))
        return out

    if workers <= 1 or n == 0:
        records = rows(range(n))
    else:
        chunks = [range(i, n, workers) for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(rows, chunks))
        by_f: dict[int, list[PairRecord]] = {}
        for part in parts:
            for rec in part:
                by_f.setdefault(rec.f, []).append(rec)
        records = [rec for f in range(n) for rec in by_f[f]]
    return FormulaReport(G.descriptor or f"order-{n}", n, seed, records)


# -- invariant sweeps ----------------------------------------------------------


@dataclass(frozen=True)
class SweepOutcome:
    """One exhaustively checked law over a whole group."""

    name: str
    checked: int
    violations: int
    witness: str = ""

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def line(self) -> str:
        out = f"sweep {self.name} checked={self.checked} violations={self.violations}"
        if self.witness:
            out += f" witness={self.witness}"
        return out


def _apply_tables(G: GroupTable) -> np.ndarray:
    """``tab[h, bits]`` = image bitmask of ``bits`` under element ``h``."""
    n = G.universe_size
    size = 1 << n
    atoms = np.zeros((len(G), n), dtype=np.int64)
    for h, e in enumerate(G.elements):
        for i in range(n):
            atoms[h, i] = 1 << e.image[i]
    bits = np.arange(size, dtype=np.int64)
    picked = (bits[None, :, None] >> np.arange(n)[None, None, :]) & 1
    return (picked * atoms[:, None, :]).sum(axis=2)


def sweep_var_laws(G: GroupTable) -> list[SweepOutcome]:
    """Support laws, each over every element (and every conjugator):

    * complementarity: the fixed set, recomputed atom by atom, is the
      complement of the moved set;
    * inverse invariance: an element and its inverse move the same atoms;
    * conjugation covariance: conjugating relabels the moved set;
    * supremum agreement: the moved set equals the least upper bound
      delivered by the order-theoretic route.
    """
    from .autom import var_by_supremum

    n = len(G)
    full = (1 << G.universe_size) - 1
    var = G.var_bits.astype(np.int64)
    out = []

    fix_direct = np.array(
        [sum(1 << i for i, v in enumerate(e.image) if v == i) for e in G.elements],
        dtype=np.int64,
    )
    bad = np.flatnonzero(fix_direct != (var ^ full))
    out.append(SweepOutcome(
        "fix_complements_var", n, len(bad),
        f"f={G.elements[int(bad[0])]}" if len(bad) else "",
    ))

    bad = np.flatnonzero(var[G.inv] != var)
    out.append(SweepOutcome(
        "var_inverse_invariant", n, len(bad),
        f"f={G.elements[int(bad[0])]}" if len(bad) else "",
    ))

    tabs = _apply_tables(G)
    viol = 0
    witness = ""
    every = np.arange(n)
    for h in range(n):
        conj = G.mult[G.mult[h, every], G.inv[h]]
        expected = tabs[h, var]
        bad = np.flatnonzero(var[conj] != expected)
        viol += len(bad)
        if len(bad) and not witness:
            f = int(bad[0])
            witness = f"f={G.elements[f]} h={G.elements[h]}"
    out.append(SweepOutcome("var_conjugation_covariant", n * n, viol, witness))

    viol = 0
    witness = ""
    for i, e in enumerate(G.elements):
        if var_by_supremum(e).bits != int(var[i]):
            viol += 1
            if not witness:
                witness = f"f={e}"
    out.append(SweepOutcome("var_matches_supremum", n, viol, witness))
    return out


def sweep_disjoint_commuting(G: GroupTable) -> SweepOutcome:
    """Elements with disjoint supports must commute; every ordered pair."""
    var = G.var_bits.astype(np.int64)
    disjoint = (var[:, None] & var[None, :]) == 0
    bad = disjoint & ~G.commute
    count = int(bad.sum())
    witness = ""
    if count:
        i, j = (int(x) for x in np.argwhere(bad)[0])
        witness = f"f={G.elements[i]} g={G.elements[j]}"
    return SweepOutcome("disjoint_supports_commute", int(disjoint.sum()), count, witness)


def sweep_phi_transport(G: GroupTable, *, cap: int | None = None) -> list[SweepOutcome]:
    """Transport and order laws for the derived comparison:

    * conjugation invariance of the comparison matrix;
    * the comparison is a preorder (reflexive and transitive);
    * mutual comparison is an equivalence (symmetry is then free);
    * every derived verifier set is a subgroup.
    """
    n = len(G)
    limit = DEFAULT_SWEEP_CAP if cap is None else cap
    if n > limit:
        raise SweepCapError(f"group has {n} elements, over the sweep cap of {limit}")
    masks = [v_mask(G, f) for f in range(n)]
    le = np.array(
        [[(masks[f] | masks[g]) == masks[g] for g in range(n)] for f in range(n)],
        dtype=bool,
    )
    out = []

    every = np.arange(n)
    viol = 0
    witness = ""
    for h in range(n):
        conj = G.mult[G.mult[h, every], G.inv[h]]
        moved = le[np.ix_(conj, conj)]
        bad = np.argwhere(moved != le)
        viol += len(bad)
        if len(bad) and not witness:
            f, g = (int(x) for x in bad[0])
            witness = f"f={G.elements[f]} g={G.elements[g]} h={G.elements[h]}"
    out.append(SweepOutcome("phi_le_conjugation_invariant", n * n * n, viol, witness))

    refl_bad = int((~le.diagonal()).sum())
    through = (le @ le) > 0
    trans_bad = np.argwhere(through & ~le)
    witness = ""
    if refl_bad:
        witness = f"f={G.elements[int(np.flatnonzero(~le.diagonal())[0])]}"
    elif len(trans_bad):
        f, g = (int(x) for x in trans_bad[0])
        witness = f"f={G.elements[f]} g={G.elements[g]}"
    out.append(SweepOutcome(
        "phi_le_preorder", n + n * n, refl_bad + len(trans_bad), witness,
    ))

    eq = le & le.T
    eq_through = (eq @ eq) > 0
    bad = np.argwhere(eq_through & ~eq)
    witness = ""
    if len(bad):
        f, g = (int(x) for x in bad[0])
        witness = f"f={G.elements[f]} g={G.elements[g]}"
    out.append(SweepOutcome("phi_eq_equivalence", n * n, len(bad), witness))

    viol = 0
    witness = ""
    for f in range(n):
        members = [i for i in range(n) if masks[f] >> i & 1]
        ok = 0 in members
        mset = set(members)
        ok = ok and all(int(G.inv[i]) in mset for i in members)
        ok = ok and all(
            int(G.mult[i, j]) in mset for i in members for j in members
        )
        if not ok:
            viol += 1
            if not witness:
                witness = f"f={G.elements[f]}"
    out.append(SweepOutcome("v_set_subgroup", n, viol, witness))
    return out
