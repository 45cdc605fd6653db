"""Model types, validation, qualification, and utility arithmetic."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netauction.model import (
    AuctionInstance,
    BidderReport,
    InstanceValidationError,
    NonMonotoneValuation,
    Outcome,
    SelfLoop,
    UnknownBidder,
    Valuation,
    bundle_from_items,
    bundle_items,
    full_bundle,
    iter_subbundles,
    qualified_set,
    restrict_instance,
    utility,
    validate_instance,
)


def build_instance(m, seller, edges, tables=None):
    tables = tables or {}
    reports = {
        i: BidderReport(i, tables.get(i, Valuation.zero(m)), frozenset(nbrs))
        for i, nbrs in edges.items()
    }
    return validate_instance(AuctionInstance(m, frozenset(seller), reports))


def closure_oracle(instance):
    """Independent qualification oracle: iterate set expansion to a fixed
    point instead of a BFS queue."""
    reached = set(i for i in instance.seller_neighbors if i in instance.reports)
    while True:
        grown = set(reached)
        for i in reached:
            grown |= set(instance.reports[i].neighbors) & set(instance.reports)
        if grown == reached:
            return frozenset(reached)
        reached = grown


# ---------------------------------------------------------------------------
# Bundles
# ---------------------------------------------------------------------------


def test_bundle_round_trip():
    assert bundle_from_items([1, 3]) == 0b101
    assert bundle_items(0b101) == (1, 3)
    assert bundle_items(0) == ()
    assert full_bundle(3) == 0b111


def test_subbundle_order_is_size_then_lexicographic():
    order = list(iter_subbundles(bundle_from_items([1, 2, 4])))
    as_items = [bundle_items(b) for b in order]
    assert as_items == [
        (), (1,), (2,), (4,),
        (1, 2), (1, 4), (2, 4),
        (1, 2, 4),
    ]


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def test_monotone_table_accepted():
    v = Valuation(2, (0, 3, 5, 7))
    inst = build_instance(2, {1}, {1: set()}, {1: v})
    assert inst.reports[1].valuation.of(0b11) == 7


def test_non_monotone_rejected():
    v = Valuation(2, (0, 5, 0, 3))  # {1} worth 5 but {1,2} worth 3
    with pytest.raises(InstanceValidationError) as err:
        build_instance(2, {1}, {1: set()}, {1: v})
    assert any(isinstance(x, NonMonotoneValuation) for x in err.value.violations)


def test_self_loop_rejected():
    with pytest.raises(InstanceValidationError) as err:
        build_instance(1, {4}, {4: {4}})
    assert any(isinstance(x, SelfLoop) and x.bidder == 4 for x in err.value.violations)


def test_nonzero_empty_bundle_rejected():
    with pytest.raises(InstanceValidationError):
        build_instance(1, {1}, {1: set()}, {1: Valuation(1, (2, 5))})


def test_all_violations_reported_together():
    bad_v = Valuation(1, (1, 0))  # nonzero empty bundle and non-monotone
    with pytest.raises(InstanceValidationError) as err:
        build_instance(1, {1}, {1: {1}}, {1: bad_v})
    kinds = {type(x).__name__ for x in err.value.violations}
    assert {"SelfLoop", "NonMonotoneValuation", "EmptyBundleValue"} <= kinds


def test_absent_bidders_materialized_with_zero_reports():
    inst = build_instance(1, {1}, {1: {2}})  # bidder 2 never reported
    assert 2 in inst.reports
    assert inst.reports[2].neighbors == frozenset()
    assert inst.reports[2].valuation.of(1) == 0


def test_reported_neighbors_must_lie_inside_truth():
    v = Valuation.zero(1)
    reports = {1: BidderReport(1, v, frozenset({2})), 2: BidderReport(2, v, frozenset())}
    truth = {1: BidderReport(1, v, frozenset()), 2: BidderReport(2, v, frozenset())}
    with pytest.raises(InstanceValidationError):
        validate_instance(AuctionInstance(1, frozenset({1}), reports, truth))


@given(st.data())
@settings(max_examples=200, deadline=None)
def test_planted_monotonicity_violation_always_caught(data):
    m = data.draw(st.integers(1, 4))
    base = [0] * (1 << m)
    for mask in sorted(range(1, 1 << m), key=lambda b: bin(b).count("1")):
        floor = max(
            (base[mask ^ (1 << k)] for k in range(m) if mask >> k & 1), default=0
        )
        base[mask] = data.draw(st.integers(floor, floor + 3))
    # Plant: pick a non-empty mask and push some subset's value above it.
    mask = data.draw(st.integers(1, (1 << m) - 1))
    strict_subs = [s for s in range(mask) if s | mask == mask]
    sub = data.draw(st.sampled_from(strict_subs))
    base[sub] = base[mask] + 1
    table = Valuation(m, tuple(base))
    if sub == 0:
        with pytest.raises(InstanceValidationError):
            build_instance(m, {1}, {1: set()}, {1: table})
    else:
        with pytest.raises(InstanceValidationError) as err:
            build_instance(m, {1}, {1: set()}, {1: table})
        assert any(
            isinstance(x, NonMonotoneValuation) for x in err.value.violations
        )


# ---------------------------------------------------------------------------
# Qualification
# ---------------------------------------------------------------------------


def test_qualified_line():
    inst = build_instance(1, {1}, {1: {2}, 2: {3}, 3: set()})
    assert qualified_set(inst) == {1, 2, 3}


def test_qualified_excludes_disconnected():
    inst = build_instance(1, {1}, {1: set(), 2: {3}, 3: set()})
    assert qualified_set(inst) == {1}


def test_qualified_branch_matches_oracle():
    inst = build_instance(
        1, {1, 4}, {1: {2, 5}, 2: {3}, 3: set(), 4: set(), 5: set()}
    )
    assert qualified_set(inst) == {1, 2, 3, 4, 5}
    assert qualified_set(inst) == closure_oracle(inst)


@given(st.data())
@settings(max_examples=150, deadline=None)
def test_qualified_equals_closure_oracle_on_random_digraphs(data):
    n = data.draw(st.integers(0, 8))
    ids = list(range(1, n + 1))
    seller = data.draw(st.frozensets(st.sampled_from(ids or [1]), max_size=n))
    edges = {
        i: data.draw(
            st.frozensets(st.sampled_from([j for j in ids if j != i] or [i + 1]),
                          max_size=n)
        )
        if n > 1
        else frozenset()
        for i in ids
    }
    edges = {i: frozenset(j for j in nbrs if j != i and j <= n) for i, nbrs in edges.items()}
    inst = build_instance(1, {s for s in seller if s <= n}, edges)
    assert qualified_set(inst) == closure_oracle(inst)


# ---------------------------------------------------------------------------
# Utility and restriction
# ---------------------------------------------------------------------------


def test_utility_examples():
    rep = BidderReport(1, Valuation(1, (0, 5)), frozenset())
    empty = Outcome({1: 0}, {1: 0}, 0)
    assert utility(rep, empty, 1) == 0
    won = Outcome({1: 1}, {1: 3}, 3)
    assert utility(rep, won, 1) == 2
    paid = Outcome({1: 0}, {1: -4}, -4)
    assert utility(rep, paid, 1) == 4
    with pytest.raises(UnknownBidder):
        utility(rep, empty, 9)


@given(
    value=st.integers(0, 50), payment=st.integers(-50, 50), delta=st.integers(-20, 20)
)
def test_utility_linear_in_payment(value, payment, delta):
    rep = BidderReport(1, Valuation(1, (0, value)), frozenset())
    base = Outcome({1: 1}, {1: payment}, payment)
    shifted = Outcome({1: 1}, {1: payment + delta}, payment + delta)
    assert utility(rep, shifted, 1) == utility(rep, base, 1) - delta


def test_restrict_identity():
    inst = build_instance(1, {1}, {1: {2}, 2: set()})
    same = restrict_instance(inst, inst.reports, inst.seller_neighbors)
    assert same.reports == inst.reports
    assert same.seller_neighbors == inst.seller_neighbors


def test_restrict_to_empty():
    inst = build_instance(1, {1}, {1: {2}, 2: set()})
    sub = restrict_instance(inst, (), ())
    assert sub.reports == {}
    assert qualified_set(sub) == frozenset()


def test_restrict_single_candidate():
    inst = build_instance(1, {1}, {1: {2}, 2: {3}, 3: set(), 6: set()})
    sub = restrict_instance(inst, {6}, {6})
    assert set(sub.reports) == {6}
    assert qualified_set(sub) == {6}
