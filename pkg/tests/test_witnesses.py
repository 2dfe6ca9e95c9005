"""Witness searches: frozen outcomes on small groups, postcondition checks,
and cross-validation of the bit-table sweep against the object-level check."""

import random
from itertools import product

import pytest

from suppmap.autom import (
    FinAut, commutator, parse_group_descriptor, symmetric_group, tree_group,
)
from suppmap.balg import FinElem, all_elements
from suppmap.formulas import phi1
from suppmap.witnesses import (
    InvalidInstanceError, PreconditionError, TerzoInstance, primo_a, primo_b,
    primo_c, primo_d, secondo_sweep, terzo_check, terzo_sweep,
)

S3 = symmetric_group(3)
S4 = symmetric_group(4)


def aut(text: str) -> FinAut:
    return FinAut.parse(text)


def elem(text: str) -> FinElem:
    return FinElem.parse(text)


# -- primo_a ----------------------------------------------------------------------


def test_primo_a_first_singleton_always_works():
    # Every atom of a is moved by each map, so the least singleton wins.
    cases = [
        ([aut("(0 1)@3")], elem("{0,1}@3")),
        ([aut("(0 1)@3"), aut("(0 1 2)@3")], elem("{0,1}@3")),
        ([aut("(0 1)(2 3)@4"), aut("(0 2)(1 3)@4")], elem("{0,1,2,3}@4")),
    ]
    for gs, a in cases:
        r = primo_a(gs, a)
        assert r.found and r.scanned == 1
        b = r.part("b")
        assert not b.is_zero() and b.leq(a)
        joined = FinElem.empty(a.universe_size)
        for g in gs:
            joined = joined.join(g.apply(b))
        assert b.meet(joined).is_zero()


def test_primo_a_preconditions():
    with pytest.raises(PreconditionError):
        primo_a([], elem("{0}@3"))
    with pytest.raises(PreconditionError):
        primo_a([aut("(0 1)@3")], FinElem.empty(3))
    with pytest.raises(PreconditionError):
        primo_a([aut("(1 2)@3")], elem("{0,1}@3"))


# -- primo_b ----------------------------------------------------------------------


def orbit_sets(h: FinAut, b: FinElem, n: int) -> list[FinElem]:
    out = [b]
    for _ in range(n):
        out.append(h.apply(out[-1]))
    return out


def test_primo_b_finds_disjoint_orbit():
    r = primo_b(S3, elem("{0,1,2}@3"), 2)
    assert r.found and r.scanned == 23
    h, b = r.part("h"), r.part("b")
    assert h in S3 and h.var().leq(elem("{0,1,2}@3")) and b.leq(elem("{0,1,2}@3"))
    sets = orbit_sets(h, b, 2)
    for i in range(3):
        for j in range(i + 1, 3):
            assert sets[i].meet(sets[j]).is_zero()


def test_primo_b_depth_one_and_s4():
    assert primo_b(S3, elem("{0,1}@3"), 1).found
    r = primo_b(S4, elem("{0,1,2,3}@4"), 3)
    assert r.found
    sets = orbit_sets(r.part("h"), r.part("b"), 3)
    for i in range(4):
        for j in range(i + 1, 4):
            assert sets[i].meet(sets[j]).is_zero()


def test_primo_b_exhaustion_and_order_bound():
    # Four pairwise disjoint nonzero sets cannot fit in three atoms.
    r = primo_b(S3, elem("{0,1,2}@3"), 3)
    assert not r.found and r.reason == "exhausted" and r.scanned > 0
    r = primo_b(S3, elem("{0,1,2}@3"), 7)  # exponent of S_3 is 6
    assert not r.found and r.reason == "order bound" and r.scanned == 0
    with pytest.raises(PreconditionError):
        primo_b(S3, FinElem.empty(3), 1)
    with pytest.raises(PreconditionError):
        primo_b(S3, elem("{0}@3"), 0)


# -- primo_c / primo_d -------------------------------------------------------------


def test_primo_c_identity_shortcut():
    f, g = aut("(0 1)@3"), aut("(0 2)@3")
    r = primo_c(S3, f, g, elem("{0}@3"))
    assert r.found and r.scanned == 0 and r.part("h").is_identity()


def test_primo_c_exhausts_on_self_centralizing_cycle():
    # Conjugates of a 3-cycle by elements supported in its own support are
    # its powers, so nothing breaks the commutation.
    g = aut("(0 1 2)@3")
    r = primo_c(S3, g, g, elem("{0,1,2}@3"))
    assert not r.found and r.scanned == 6 and r.reason == "exhausted"


def test_primo_c_conjugation_success():
    f = aut("(0 1 2 3)@4")
    r = primo_c(S4, f, f.power(2), elem("{0,1,2,3}@4"))
    assert r.found
    h = r.part("h")
    assert not commutator(f.conjugate_by(h), f.power(2)).is_identity()
    assert h.var().leq(elem("{0,1,2,3}@4"))


def test_primo_d_direct_search():
    r = primo_d(S3, aut("(0 1 2)@3"), elem("{0,1,2}@3"))
    assert r.found and r.scanned == 2 and r.part("k") == aut("(1 2)@3")
    assert not commutator(r.part("k"), aut("(0 1 2)@3")).is_identity()
    with pytest.raises(PreconditionError):
        primo_d(S3, aut("(0 1)@3"), elem("{0,2}@3"))


def test_primo_c_success_transfers_to_primo_d():
    # [g^h, g] != id forces [h, g] != id, so a primo_c success (with f = g)
    # guarantees a primo_d one.  The converse fails; see the 3-cycle above.
    for G in (S3, S4):
        for f in G:
            for g in G:
                a = f.var().meet(g.var())
                if a.is_zero():
                    continue
                if primo_c(G, f, g, a).found and f == g:
                    assert primo_d(G, g, a).found
    assert primo_d(S3, aut("(0 1 2)@3"), elem("{0,1,2}@3")).found
    assert not primo_c(S3, aut("(0 1 2)@3"), aut("(0 1 2)@3"), elem("{0,1,2}@3")).found


# -- secondo -----------------------------------------------------------------------


def test_secondo_frozen_counts_s3():
    rep = secondo_sweep(S3)
    assert len(rep.records) == 36
    assert rep.counts() == {
        "scope_a": 11, "scope_b": 10, "scope_none": 15,
        "conform_a": 11, "conform_b": 10, "violations": 0,
    }


def test_secondo_frozen_counts_s4():
    rep = secondo_sweep(S4)
    assert len(rep.records) == 576
    assert rep.counts() == {
        "scope_a": 53, "scope_b": 184, "scope_none": 339,
        "conform_a": 47, "conform_b": 184, "violations": 6,
    }
    # The finite-scale violations all sit in scope "a": disjoint supports
    # without the formula holding.  They are reported, never asserted away.
    for r in rep.records:
        if r.conforms is False:
            assert r.scope == "a"


def test_secondo_records_match_direct_evaluation():
    rep = secondo_sweep(S3)
    for r in random.Random(5).sample(rep.records, 12):
        f, fp = S3[r.f], S3[r.fp]
        assert r.phi1 == phi1(f, fp, S3)
        disjoint = f.var().meet(fp.var()).is_zero()
        meets4 = not f.var().meet(fp.power(4).var()).is_zero()
        want = "a" if disjoint else ("b" if meets4 else "-")
        assert r.scope == want


def test_secondo_worker_independence():
    base = secondo_sweep(S4).text_lines()
    for workers in (2, 5):
        assert secondo_sweep(S4, workers=workers).text_lines() == base


# -- terzo -------------------------------------------------------------------------


def test_terzo_instance_validation():
    f = aut("(0 1 2 3)@4")
    with pytest.raises(InvalidInstanceError):
        TerzoInstance(f, elem("{0}@4"), (0, 1), ()).validate()
    with pytest.raises(InvalidInstanceError):
        TerzoInstance(f, elem("{0}@4"), (0, 1), (aut("(0 1)@4"),)).validate()
    with pytest.raises(InvalidInstanceError):
        TerzoInstance(f, elem("{0,1}@4"), (0, 1), (f,)).validate()  # images overlap
    TerzoInstance(f, elem("{0}@4"), (0, 1), (f,)).validate()


def test_terzo_check_certifies_small_instances():
    f = aut("(0 1 2 3)@4")
    r = terzo_check(TerzoInstance(f, elem("{0}@4"), (0, 1), (f,)))
    assert not r.found and r.reason == "exhausted" and r.scanned == 1
    r = terzo_check(TerzoInstance(f, elem("{0,2}@4"), (1, 2), (f.power(2),)))
    assert not r.found and r.scanned == 3


def test_terzo_sweep_frozen_counts_s3():
    rep = terzo_sweep(S3)
    assert rep.instances == 10578
    assert rep.b_checked == 11226
    assert rep.violations == []
    assert "violations=0" in rep.summary_line()


def test_terzo_sweep_cross_validates_object_route():
    # The sweep runs on bit tables; replay sampled instances through the
    # element-level checker and demand the same certification.
    rng = random.Random(11)
    G = S3
    rep = terzo_sweep(G, max_exponents=2, exponent_range=(-2, 2))
    assert rep.violations == []
    universe = [a for a in all_elements(3) if not a.is_zero()]
    replayed = 0
    for _ in range(400):
        f = G[rng.randrange(len(G))]
        a = rng.choice(universe)
        ks = tuple(rng.sample(range(-2, 3), rng.choice((1, 2))))
        cent = G.centralizer([f])
        fam = tuple(rng.choice(cent) for _ in range(len(ks) - 1))
        inst = TerzoInstance(f, a, ks, fam)
        try:
            inst.validate()
        except InvalidInstanceError:
            continue
        replayed += 1
        assert not terzo_check(inst).found
    assert replayed > 50
