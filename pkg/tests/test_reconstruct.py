"""Support correspondence derived from group isomorphisms, and its checks."""

import pytest

from suppmap.autom import FinAut, parse_group_descriptor, symmetric_group, tree_group
from suppmap.balg import FinElem
from suppmap.reconstruct import (
    GroupIso, ReconstructionError, build_theta, check_chains, check_injective,
    find_isos, injective_witness, inner_iso, iso_defect, verify_iso,
)

S3 = symmetric_group(3)
S4 = symmetric_group(4)


def aut(text: str) -> FinAut:
    return FinAut.parse(text)


def elem(text: str) -> FinElem:
    return FinElem.parse(text)


def test_group_iso_validation():
    with pytest.raises(ReconstructionError):
        GroupIso(S3, S3, (0, 1, 2))  # wrong length
    with pytest.raises(ReconstructionError):
        GroupIso(S3, S3, (0, 1, 2, 3, 4, 99))  # out of range
    # shape is fine but the groups differ in size: reported, not raised
    defect = iso_defect(GroupIso(S3, S4, tuple(range(6))))
    assert defect is not None and "size" in defect
    defect = iso_defect(GroupIso(S3, S3, (0, 0, 1, 2, 3, 4)))  # not a bijection
    assert defect is not None


def test_inner_iso_is_an_iso():
    for h in S3:
        iso = inner_iso(S3, h)
        assert iso_defect(iso) is None and verify_iso(iso)


def test_iso_defect_reports_first_break():
    swapped = list(range(len(S3)))
    swapped[1], swapped[2] = swapped[2], swapped[1]
    bad = GroupIso(S3, S3, tuple(swapped))
    defect = iso_defect(bad)
    assert defect is not None and "product breaks" in defect
    assert not verify_iso(bad)


def test_identity_theta_is_identity_map():
    theta = build_theta(inner_iso(S4, FinAut.identity(4)))
    for a, b in theta.pairs:
        assert a == b
    assert check_injective(theta)
    assert check_chains(theta).ok


def test_inner_theta_matches_conjugators_action():
    # The correspondence induced by conjugation must move supports exactly
    # the way the conjugating element moves sets.
    for h in (aut("(0 1)@4"), aut("(0 1 2 3)@4"), aut("(1 2)(0 3)@4")):
        theta = build_theta(inner_iso(S4, h))
        for a in theta.domain():
            assert theta.apply(a) == h.apply(a)
        assert check_injective(theta)
        rep = check_chains(theta)
        assert rep.ok and rep.chains == 24 and rep.violations == 0


def test_theta_domain_covers_realized_supports():
    theta = build_theta(inner_iso(S3, aut("(0 1)@3")))
    realized = {f.var() for f in S3}
    assert set(theta.domain()) == realized
    assert elem("{0}@3") not in theta.domain()
    with pytest.raises(KeyError):
        theta.apply(elem("{0}@3"))


def test_theta_lines_are_ordered_and_counted():
    theta = build_theta(inner_iso(S3, aut("(0 1 2)@3")))
    lines = theta.lines()
    assert lines[0].startswith("a={}@3 theta={}@3 witnesses=1")
    cards = [a.cardinality() for a, _ in theta.pairs]
    assert cards == sorted(cards)
    full = dict(theta.pairs)[elem("{0,1,2}@3")]
    assert full == elem("{0,1,2}@3")
    assert theta.witnesses[-1] == 2  # both 3-cycles share the full support


def test_build_theta_refuses_fiber_disagreement():
    # Swap one double transposition with a 3-cycle: the full-support fiber
    # now lands on two different supports, so no single image exists.
    mapping = list(range(len(S4)))
    i = S4.index_of(aut("(0 1)(2 3)@4"))
    j = S4.index_of(aut("(0 1 2)@4"))
    mapping[i], mapping[j] = mapping[j], mapping[i]
    with pytest.raises(ReconstructionError) as err:
        build_theta(GroupIso(S4, S4, tuple(mapping)))
    assert "but" in str(err.value) and "->" in str(err.value)


def test_injective_witness_on_corrupted_pairs():
    theta = build_theta(inner_iso(S3, aut("(0 1)@3")))
    assert injective_witness(theta) is None
    squashed = type(theta)(
        theta.source_universe, theta.target_universe,
        tuple((a, theta.pairs[-1][1]) for a, _ in theta.pairs),
        theta.witnesses,
    )
    wit = injective_witness(squashed)
    assert wit is not None and wit[0] != wit[1]
    assert not check_injective(squashed)


def test_check_chains_flags_non_monotone_map():
    theta = build_theta(inner_iso(S4, FinAut.identity(4)))
    swap = dict(theta.pairs)
    swap[elem("{0,1}@4")] = elem("{0,1,2,3}@4")
    swap[elem("{0,1,2}@4")] = elem("{0,1,2}@4")
    twisted = type(theta)(
        theta.source_universe, theta.target_universe,
        tuple(sorted(swap.items(), key=lambda ab: (ab[0].cardinality(), ab[0].members))),
        theta.witnesses,
    )
    rep = check_chains(twisted)
    assert not rep.ok and rep.violations > 0
    assert "{0,1}@4 -> {0,1,2,3}@4" in rep.witness


def test_find_isos_counts():
    assert len(find_isos(S3, S3)) == 6  # all inner; S_3 is complete
    assert find_isos(S3, parse_group_descriptor("gen:(0 1 2 3 4 5)@6")) == []
    assert len(find_isos(S4, S4)) == 24
    t2 = tree_group(2)
    assert len(find_isos(t2, t2)) == 8  # automorphism count of D_4
    one = find_isos(S4, S4, limit=1)
    assert len(one) == 1 and iso_defect(one[0]) is None


def test_find_isos_results_verify():
    for iso in find_isos(S3, S3):
        assert verify_iso(iso)
        theta = build_theta(iso)
        assert check_injective(theta) and check_chains(theta).ok
