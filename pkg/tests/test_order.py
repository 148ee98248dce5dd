import random
from fractions import Fraction

import pytest

from fpet.fpoly import FPolyFamily, degree, family_is_good, random_good_family
from fpet.order import (
    DagBudgetError,
    StepKind,
    canonical_family,
    dag_to_text,
    height_drop,
    induction_dag,
    precedes,
    type1_precedent,
    type2_precedent,
)

F = Fraction


def fam(member_rows, height=None):
    return FPolyFamily.make(member_rows, height=height)


def oracle_precedes(a, b):
    """Independent restatement of the order: height clause, then the three
    size/degree bullets on degree-sorted members."""
    if a.height != b.height:
        return a.height < b.height
    da = sorted((degree(p) for p in a.members), reverse=True)
    db = sorted((degree(p) for p in b.members), reverse=True)
    if len(da) > len(db):
        return False
    pointwise_ok = all(x <= y for x, y in zip(da, db))
    strict = len(da) < len(db) or any(x < y for x, y in zip(da, db))
    return pointwise_ok and strict


def test_precedes_example_same_height():
    a = fam([[[1, 0, 0], [0, 0, 0]]], height=2)  # t^(1/2) e1
    b = fam([[[0, 1, 0], [0, 0, 1]]], height=2)  # t^(1/2) e2 + t e3
    assert precedes(a, b)
    assert not precedes(b, a)


def test_precedes_irreflexive():
    a = fam([[[1, 0]], [[0, 1]]])
    assert not precedes(a, a)


def test_precedes_distinct_heights():
    low = fam([[[1, 0], [0, 1]]], height=2)
    high = fam([[[1, 0], [0, 1], [0, 0]]], height=3)
    # height 3 member has degree 2/3 < 1 = degree of the height 2 member,
    # yet the lower height always precedes
    assert precedes(low, high)
    assert not precedes(high, low)


def test_precedes_requires_good_nonempty():
    good = fam([[[1, 0]]])
    bad = fam([[[1, 0]], [[2, 0]]])
    with pytest.raises(ValueError):
        precedes(bad, good)
    empty = FPolyFamily(1, 2, ())
    with pytest.raises(ValueError):
        precedes(empty, good)


def test_precedes_fewer_members_is_not_enough():
    # one top-degree member does not precede two members of low degree
    one_top = fam([[[1, 0, 0], [0, 1, 0]]], height=2)
    two_low = fam(
        [[[1, 0, 0], [0, 0, 0]], [[0, 1, 0], [0, 0, 0]]], height=2
    )
    assert not precedes(one_top, two_low)


def test_type1_example_two_full_members():
    f = fam([[[1, 0, 0, 0], [0, 1, 0, 0]], [[0, 0, 1, 0], [0, 0, 0, 1]]])
    step = type1_precedent(f)
    assert step.kind is StepKind.TYPE_I
    assert step.detail == (1, 2)
    (psi,) = step.result.members
    assert psi.coeffs == ((F(-1), F(0), F(1), F(0)), (F(0), F(-1), F(0), F(1)))
    assert precedes(step.result, f)


def test_type1_minimality_scan():
    # degree 1/2 member and degree 1 member: j1 = 1, i1 = the low-degree one
    f = fam(
        [
            [[0, 0, 1], [0, 0, 0]],  # t^(1/2) e3, degree 1/2
            [[1, 0, 0], [0, 1, 0]],  # degree 1
        ],
        height=2,
    )
    step = type1_precedent(f)
    assert step.detail == (1, 1)
    assert step.result.k == 1


def test_type1_requires_two_members():
    with pytest.raises(ValueError):
        type1_precedent(fam([[[1]]]))


def test_type1_random_results_good_and_preceding(rng):
    for _ in range(200):
        f = random_good_family(rng, k=rng.randint(2, 4), height=rng.randint(1, 3), dim=12)
        step = type1_precedent(f)
        assert family_is_good(step.result)
        assert precedes(step.result, f)


def test_type2_replacement():
    f = fam([[[1, 0], [0, 1]]])
    step = type2_precedent(f, 1)
    assert step.result.members[0].coeffs == ((F(1), F(0)), (F(0), F(0)))
    assert precedes(step.result, f)


def test_type2_omission_at_height_one():
    f = fam([[[1, 0]], [[0, 1]]])
    step = type2_precedent(f, 2)
    assert step.kind is StepKind.TYPE_II
    assert step.result.k == 1
    assert step.result.members[0].coeffs == ((F(1), F(0)),)


def test_type2_rejects_non_top_degree():
    f = fam([[[1, 0, 0], [0, 0, 0]], [[0, 1, 0], [0, 0, 1]]], height=2)
    with pytest.raises(ValueError):
        type2_precedent(f, 1)
    step = type2_precedent(f, 2)
    assert family_is_good(step.result)


def test_type2_random_results_good_and_preceding(rng):
    for _ in range(200):
        f = random_good_family(rng, k=rng.randint(1, 4), height=rng.randint(1, 3), dim=12)
        tops = [i for i, p in enumerate(f.members, start=1) if degree(p) == 1]
        if not tops:
            continue
        step = type2_precedent(f, rng.choice(tops))
        assert family_is_good(step.result)
        if step.result.k:
            assert precedes(step.result, f)


def test_height_drop():
    f = fam(
        [[[1, 0, 0], [0, 0, 0], [0, 0, 0]], [[0, 1, 0], [0, 0, 1], [0, 0, 0]]],
        height=3,
    )
    step = height_drop(f)
    assert step.kind is StepKind.HEIGHT_DROP
    assert step.detail == (2,)
    assert step.result.height == 2
    # coefficient vectors are reused verbatim
    assert step.result.members[1].coeffs == f.members[1].coeffs[:2]
    assert precedes(step.result, f)
    with pytest.raises(ValueError):
        height_drop(step.result)  # now has a top-degree member


def test_induction_dag_singleton():
    dag = induction_dag(fam([[[1, 0], [0, 1]]]))
    assert dag.node_count == 1
    assert dag.edges == ()


def test_induction_dag_k2_height1_by_hand():
    f = fam([[[1, 0]], [[0, 1]]])
    dag = induction_dag(f)
    # root, the type-I singleton difference, and the two type-II omissions
    assert dag.node_count == 4
    assert len(dag.edges) == 3
    kinds = sorted(step.kind.value for _, _, step in dag.edges)
    assert kinds == ["type1", "type2", "type2"]
    for src, dst, step in dag.edges:
        assert src == 0 and dst in (1, 2, 3)


def test_induction_dag_edges_precede(rng):
    for _ in range(40):
        f = random_good_family(rng, k=rng.randint(2, 4), height=rng.randint(1, 3), dim=12)
        dag = induction_dag(f)
        for src, dst, step in dag.edges:
            if dag.nodes[dst].k:
                assert precedes(dag.nodes[dst], dag.nodes[src])


def test_induction_dag_budget_error():
    rng = random.Random(3)
    f = random_good_family(rng, k=4, height=3, dim=12)
    with pytest.raises(DagBudgetError) as exc:
        induction_dag(f, max_nodes=3)
    assert exc.value.partial.node_count == 3


def test_dag_text_deterministic(rng):
    f = random_good_family(rng, k=3, height=2, dim=9)
    text1 = dag_to_text(induction_dag(f))
    text2 = dag_to_text(induction_dag(canonical_family(f)))
    assert text1 == text2
    assert text1.startswith("node 0 ")


def test_precedes_matches_oracle_and_is_transitive():
    rng = random.Random(11)
    fams = [
        random_good_family(rng, k=rng.randint(1, 4), height=rng.randint(1, 3), dim=12)
        for _ in range(60)
    ]
    rel = {}
    for i, a in enumerate(fams):
        for j, b in enumerate(fams):
            got = precedes(a, b)
            assert got == oracle_precedes(a, b)
            rel[(i, j)] = got
        assert not rel[(i, i)]
    for i in range(len(fams)):
        for j in range(len(fams)):
            if rel[(i, j)]:
                for k in range(len(fams)):
                    if rel[(j, k)]:
                        assert rel[(i, k)]
