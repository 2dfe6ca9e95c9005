"""Definable-support formulas against a naive quantifier oracle, plus frozen
small-group values and the exhaustive invariant sweeps."""

import pytest

from suppmap.autom import FinAut, commutator, symmetric_group, tree_group
from suppmap.balg import FinElem
from suppmap.formulas import (
    SweepCapError, d1, minore_report, phi1, phi1_matrix, phi_eq, phi_le,
    sweep_disjoint_commuting, sweep_phi_transport, sweep_var_laws, v_set,
)

S3 = symmetric_group(3)
T2 = tree_group(2)


def aut(text: str) -> FinAut:
    return FinAut.parse(text)


def phi1_naive(f, fp, G):
    """The quantifier chain evaluated directly on element objects."""
    zs = [z for z in G if z.compose(fp) == fp.compose(z)]
    for g in G:
        if commutator(g, f).is_identity():
            continue
        hit = False
        for f1 in zs:
            for f2 in zs:
                t = commutator(commutator(g, f1), f2)
                if not t.is_identity() and commutator(t, fp).is_identity():
                    hit = True
                    break
            if hit:
                break
        if not hit:
            return False
    return True


@pytest.mark.parametrize("G", [S3, T2], ids=["sym:3", "tree:2"])
def test_phi1_matches_naive_oracle(G):
    for f in G:
        for fp in G:
            assert phi1(f, fp, G) == phi1_naive(f, fp, G), (f, fp)


def test_phi1_matrix_matches_pointwise():
    m = phi1_matrix(S3)
    for i, f in enumerate(S3.elements):
        for j, fp in enumerate(S3.elements):
            assert bool(m[i, j]) == phi1(f, fp, S3)


def test_d1_and_v_set_frozen_on_s3():
    swap = aut("(0 1)@3")
    assert d1(swap, S3) == [FinAut.identity(3)]
    assert v_set(swap, S3) == list(S3.elements)
    # v_set is strictly larger than the support-bounded subgroup here: at
    # this scale the definable envelope collapses to the whole group.
    assert set(S3.sp(FinElem.parse("{0,1}@3"))) < set(v_set(swap, S3))


def test_v_set_collapses_on_tree2():
    for f in T2:
        assert v_set(f, T2) == list(T2.elements)


def test_phi_le_phi_eq_consistency():
    for f in S3:
        for g in S3:
            le_fg, le_gf = phi_le(f, g, S3), phi_le(g, f, S3)
            assert phi_eq(f, g, S3) == (le_fg and le_gf)
        assert phi_le(f, f, S3)


def test_minore_report_frozen_counts_and_determinism():
    rep = minore_report(S3)
    assert len(rep.records) == 36
    assert rep.agreements == 24
    again = minore_report(S3, workers=3)
    assert rep.text_lines() == again.text_lines()
    assert rep.jsonl_lines() == again.jsonl_lines()


def test_minore_report_seed_changes_header_only():
    a, b = minore_report(S3, seed=0), minore_report(S3, seed=9)
    assert a.text_lines()[0] != b.text_lines()[0]
    assert a.text_lines()[1:] == b.text_lines()[1:]


def test_sweep_var_laws_green():
    for G in (S3, symmetric_group(4), T2):
        for oc in sweep_var_laws(G):
            assert oc.ok, oc.line()
            assert oc.checked > 0


def test_sweep_disjoint_commuting_green():
    oc = sweep_disjoint_commuting(symmetric_group(4))
    assert oc.ok and oc.name == "disjoint_supports_commute"
    assert oc.checked == 53


def test_sweep_phi_transport_green():
    outcomes = sweep_phi_transport(S3)
    names = [oc.name for oc in outcomes]
    assert names == [
        "phi_le_conjugation_invariant", "phi_le_preorder",
        "phi_eq_equivalence", "v_set_subgroup",
    ]
    assert all(oc.ok for oc in outcomes)


def test_sweep_cap_enforced():
    with pytest.raises(SweepCapError):
        sweep_phi_transport(S3, cap=5)
    with pytest.raises(SweepCapError):
        minore_report(S3, cap=5)
