"""Automorphism arithmetic against hand-checked values and naive oracles."""

from itertools import permutations

import pytest

from suppmap.autom import (
    FinAut, GroupSizeError, GroupTable, commutator, generate, is_locally_moving,
    parse_group_descriptor, symmetric_group, tree_group, triple_commutator,
    var_by_supremum,
)
from suppmap.balg import FinElem, UniverseMismatchError

S3 = symmetric_group(3)
S4 = symmetric_group(4)


def aut(text: str) -> FinAut:
    return FinAut.parse(text)


def elem(text: str) -> FinElem:
    return FinElem.parse(text)


# -- element arithmetic -----------------------------------------------------------


def test_parse_round_trip():
    for text in ("id@4", "(0 1)@3", "(0 1 2)(3 4)@5", "(2 5)(0 3 1)@6"):
        assert aut(text).to_text() == FinAut.parse(aut(text).to_text()).to_text()
    assert aut("(1 2 0)@3") == aut("(0 1 2)@3")
    with pytest.raises(ValueError):
        FinAut.parse("(0 1 1)@3")
    with pytest.raises(ValueError):
        FinAut.parse("(0 5)@3")


def test_compose_and_conjugate_hand_values():
    f, h = aut("(0 1)@3"), aut("(1 2)@3")
    assert f.conjugate_by(h) == aut("(0 2)@3")
    assert commutator(f, h) == aut("(0 2 1)@3")
    assert f.compose(f).is_identity()
    g = aut("(0 1 2)@3")
    assert g.power(3).is_identity()
    assert g.power(-1) == g.inverse()
    assert g.order() == 3
    assert triple_commutator(h, f, g) == commutator(commutator(h, f), g)


def test_var_fix_cycles():
    g = aut("(0 1)(3 4)@5")
    assert g.var() == elem("{0,1,3,4}@5")
    assert g.fix() == elem("{2}@5")
    assert g.cycles() == ((0, 1), (3, 4))
    assert FinAut.identity(4).var().is_zero()


def test_var_by_supremum_agrees_everywhere():
    for g in S4:
        assert var_by_supremum(g) == g.var()
    for g in tree_group(2):
        assert var_by_supremum(g) == g.var()


def test_apply_respects_structure():
    g = aut("(0 1 2)@3")
    a = elem("{0,2}@3")
    assert g.apply(a) == elem("{0,1}@3")
    assert g.apply(a.complement()) == g.apply(a).complement()
    with pytest.raises(UniverseMismatchError):
        g.apply(FinElem.empty(4))


# -- group tables ------------------------------------------------------------------


def test_symmetric_group_matches_naive_closure():
    want = {FinAut(p) for p in permutations(range(3))}
    assert set(S3.elements) == want
    assert len(S3) == 6
    assert S3[0].is_identity()


def test_generate_counts():
    assert len(generate(3, [aut("(0 1)@3"), aut("(1 2)@3")])) == 6
    assert len(generate(4, [aut("(0 1)@4"), aut("(2 3)@4")])) == 4
    assert len(generate(3, [])) == 1
    assert len(generate(5, [aut("(0 1 2)(3 4)@5")])) == 6
    with pytest.raises(GroupSizeError):
        generate(4, [aut("(0 1 2 3)@4"), aut("(0 1)@4")], max_size=10)


def test_tree_group_sizes():
    assert len(tree_group(2)) == 8
    assert len(tree_group(3)) == 128
    assert tree_group(2)[0].is_identity()


def test_descriptor_parsing():
    assert parse_group_descriptor("sym:3").descriptor == "sym:3"
    assert len(parse_group_descriptor("tree:2")) == 8
    assert len(parse_group_descriptor("gen:(0 1 2)@3")) == 3
    for bad in ("nosuch:3", "sym", "gen:"):
        with pytest.raises(ValueError):
            parse_group_descriptor(bad)


def test_index_tables_match_element_ops():
    for i, f in enumerate(S3.elements):
        assert S3.inv_idx(i) == S3.index_of(f.inverse())
        assert S3.element_order(i) == f.order()
        for j, g in enumerate(S3.elements):
            assert S3.mul_idx(i, j) == S3.index_of(f.compose(g))
            assert S3.conj_idx(i, j) == S3.index_of(f.conjugate_by(g))
            assert S3.comm_idx(i, j) == S3.index_of(commutator(f, g))
            assert bool(S3.commute[i, j]) == (f.compose(g) == g.compose(f))


def test_exponent_and_class_sizes():
    assert S3.exponent() == 6
    assert S4.exponent() == 12
    assert S3.class_size(S3.index_of(aut("(0 1)@3"))) == 3
    assert S3.class_size(S3.index_of(aut("(0 1 2)@3"))) == 2
    assert S3.class_size(0) == 1


def test_sp_and_centralizer():
    a = elem("{0,1}@3")
    assert set(S3.sp(a)) == {FinAut.identity(3), aut("(0 1)@3")}
    assert S3.sp_exact(a) == [aut("(0 1)@3")]
    cyc = aut("(0 1 2)@3")
    assert set(S3.centralizer([cyc])) == {FinAut.identity(3), cyc, cyc.inverse()}
    assert set(S3.centralizer([])) == set(S3.elements)
    with pytest.raises(UniverseMismatchError):
        S3.sp(FinElem.full(4))


def test_pow4_table():
    for i, f in enumerate(S4.elements):
        assert S4.pow4[i] == S4.index_of(f.power(4))


def test_group_table_validation():
    with pytest.raises(ValueError):
        GroupTable([aut("(0 1)@3")])  # identity missing from slot 0
    with pytest.raises(ValueError):
        GroupTable([FinAut.identity(3), aut("(0 1)@3"), aut("(1 2)@3")])  # not closed


def test_locally_moving_is_blocked_by_atoms():
    assert not is_locally_moving(S3)
    assert not is_locally_moving(generate(2, []))
    assert not is_locally_moving(symmetric_group(1))
    assert not is_locally_moving(tree_group(2))
