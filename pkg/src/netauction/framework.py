"""Round engine for combinatorial diffusion auctions.

Each round: a candidate determination process (CDP) splits the current
frontier's reachable crowd into candidate distributors and a non-trading set
whose reported values price bundles; a bundle division process (BDP) hands
every candidate a resale bundle and a reserve bundle; each candidate then
either resells her bundle to her own invitees through a single-item diffusion
mechanism (keeping the margin between the bundle's fixed resale revenue and
its price) or, if the local proceeds fall short, buys the reserve bundle at
its price.  Processed participants leave, their invitees form the next
frontier, and unsold items stay in the pool.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .critical import all_critical_structures
from .idm import SingleItemResult
from .model import (
    AuctionError,
    AuctionInstance,
    BidderReport,
    Bundle,
    Money,
    Outcome,
    Valuation,
    bundle_str,
    check_outcome,
    full_bundle,
    restrict_instance,
)

PriceFn = Callable[[Sequence[BidderReport], Bundle], Money]
BoundPrice = Callable[[Bundle], Money]
Cdp = Callable[[AuctionInstance, Sequence[int]], "DistributorPartition"]
Bdp = Callable[..., tuple["BundleTuple", ...]]
SingleItemMech = Callable[[AuctionInstance, Mapping[int, Money]], SingleItemResult]


class InvalidTuple(AuctionError):
    pass


class UnqualifiedDistributor(AuctionError):
    pass


@dataclass(frozen=True)
class DistributorPartition:
    """CDP output: candidate distributors (in classification order) and the
    non-trading bidders whose reports set prices."""

    candidates: tuple[int, ...]
    non_trading: frozenset[int]

    def __post_init__(self):
        if set(self.candidates) & self.non_trading:
            raise InvalidTuple("candidate and non-trading sets overlap")


@dataclass(frozen=True)
class BundleTuple:
    """Per-candidate pair: the bundle offered for resale and the fallback
    reserve bundle."""

    resale: Bundle
    reserve: Bundle

    def footprint(self) -> Bundle:
        return self.resale | self.reserve

    def __str__(self) -> str:
        return f"(resale={bundle_str(self.resale)}, reserve={bundle_str(self.reserve)})"


@dataclass(frozen=True)
class RoundState:
    """Snapshot of one engine round, kept for traces and invariant tests."""

    index: int
    participants: tuple[int, ...]
    frontier: tuple[int, ...]
    candidates: tuple[int, ...]
    non_trading: tuple[int, ...]
    tuples: tuple[BundleTuple, ...]
    resold: tuple[bool, ...]
    intake: Money
    items_before: Bundle
    items_after: Bundle
    removed: frozenset[int]


@dataclass(frozen=True)
class DcafRun:
    outcome: Outcome
    rounds: tuple[RoundState, ...]


# ---------------------------------------------------------------------------
# Pricing over the non-trading set
# ---------------------------------------------------------------------------


def price_fn(tn_reports: Sequence[BidderReport], bundle: Bundle) -> Money:
    """Second-highest reported value for the bundle among non-traders; zero
    when fewer than two of them exist."""
    if len(tn_reports) < 2:
        return 0
    values = sorted((rep.valuation.of(bundle) for rep in tn_reports), reverse=True)
    return values[1]


def resale_revenue_fn(tn_reports: Sequence[BidderReport], bundle: Bundle) -> Money:
    """Highest reported value for the bundle among non-traders; zero when
    none exist.  Never below :func:`price_fn` on the same inputs."""
    return max((rep.valuation.of(bundle) for rep in tn_reports), default=0)


PRICING = {"second-first": (price_fn, resale_revenue_fn)}


# ---------------------------------------------------------------------------
# Diffusion resale process
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DrpResult:
    """Partial outcome over one distributor's reach."""

    distributor: int
    allocation: dict[int, Bundle]
    payment: dict[int, Money]
    resold: bool
    local_revenue: Money

    def intake(self) -> Money:
        return sum(self.payment.values())


def drp_run(
    residual_instance: AuctionInstance,
    distributor: int,
    bundle_tuple: BundleTuple,
    pr: BoundPrice,
    rev: BoundPrice,
    single_item_mech: SingleItemMech,
    *,
    reach: frozenset[int] | None = None,
    reserve_bidder: bool = False,
) -> DrpResult:
    """Run one distributor's resale attempt.

    The distributor's invitees that only she can reach (``reach``, computed
    from the residual graph if not supplied) form a local market where her
    resale bundle is sold as a single item.  If the local proceeds reach the
    bundle's fixed resale revenue she gets nothing, pays price minus revenue
    (a non-positive amount: her dealer margin), and the local outcome stands;
    otherwise the attempt is void and she buys the reserve bundle at its
    price.  An empty resale bundle or an empty local market skips straight to
    the reservation branch.

    ``reserve_bidder`` injects a virtual, never-winning bid equal to the
    resale revenue next to the local seller, flooring the local price.
    """
    if reach is None:
        reach = _candidate_reach(residual_instance, distributor)
        if reach is None:
            raise UnqualifiedDistributor(
                f"distributor {distributor} is unreachable in the residual graph"
            )
    locals_ = reach - {distributor}
    allocation = {j: 0 for j in reach}
    payment = {j: 0 for j in reach}

    resale = bundle_tuple.resale
    if resale and locals_:
        seller_edges = residual_instance.reports[distributor].neighbors & locals_
        market = restrict_instance(residual_instance, locals_, seller_edges)
        item_value = {
            j: residual_instance.reports[j].valuation.of(resale) for j in locals_
        }
        virtual = None
        if reserve_bidder:
            virtual = max(residual_instance.reports, default=0) + 1
            reports = dict(market.reports)
            reports[virtual] = BidderReport(
                virtual, Valuation.zero(market.m), frozenset()
            )
            market = AuctionInstance(
                market.m, market.seller_neighbors | {virtual}, reports
            )
            item_value[virtual] = rev(resale)
        result = single_item_mech(market, item_value)
        if result.winner is not None and result.winner != virtual:
            if virtual is not None and result.payments.get(virtual, 0) != 0:
                raise AuctionError("virtual reserve bid must never pay")
            revenue = result.revenue
            if revenue >= rev(resale):
                for j in locals_:
                    payment[j] = result.payments.get(j, 0)
                allocation[result.winner] = resale
                payment[distributor] = pr(resale) - rev(resale)
                return DrpResult(distributor, allocation, payment, True, revenue)

    reserve = bundle_tuple.reserve
    allocation[distributor] = reserve
    payment[distributor] = pr(reserve)
    return DrpResult(distributor, allocation, payment, False, 0)


def _candidate_reach(
    residual_instance: AuctionInstance, distributor: int
) -> frozenset[int] | None:
    from .critical import Unqualified, critical_children

    try:
        return critical_children(residual_instance, distributor)
    except Unqualified:
        return None


# ---------------------------------------------------------------------------
# The round loop
# ---------------------------------------------------------------------------


def dcaf_run(
    instance: AuctionInstance,
    cdp: Cdp,
    bdp: Bdp,
    single_item_mech: SingleItemMech,
    pr_fn: PriceFn = price_fn,
    rev_fn: PriceFn = resale_revenue_fn,
    *,
    rng: random.Random | int | None = None,
    reserve_bidder: bool = False,
) -> Outcome:
    return dcaf_run_detailed(
        instance,
        cdp,
        bdp,
        single_item_mech,
        pr_fn,
        rev_fn,
        rng=rng,
        reserve_bidder=reserve_bidder,
    ).outcome


def dcaf_run_detailed(
    instance: AuctionInstance,
    cdp: Cdp,
    bdp: Bdp,
    single_item_mech: SingleItemMech,
    pr_fn: PriceFn = price_fn,
    rev_fn: PriceFn = resale_revenue_fn,
    *,
    rng: random.Random | int | None = None,
    reserve_bidder: bool = False,
) -> DcafRun:
    """Run the full round loop and keep per-round snapshots.

    Rounds repeat until the item pool, the set of unprocessed participants,
    or the frontier empties; whoever is left gets nothing and pays nothing.
    Every round removes at least one participant, so the loop ends.
    """
    if not isinstance(rng, random.Random):
        rng = random.Random(rng or 0)
    alive = set(instance.reports)
    remaining = full_bundle(instance.m)
    frontier = tuple(sorted(i for i in instance.seller_neighbors if i in alive))
    allocation = {i: 0 for i in instance.reports}
    payment = {i: 0 for i in instance.reports}
    rounds: list[RoundState] = []

    while remaining and alive and frontier:
        residual = restrict_instance(instance, alive, frontier)
        partition = cdp(residual, frontier)
        tn_reports = [residual.reports[j] for j in sorted(partition.non_trading)]
        pr = lambda b: pr_fn(tn_reports, b)  # noqa: E731 - bound per round
        rev = lambda b: rev_fn(tn_reports, b)  # noqa: E731
        tuples = bdp(residual, remaining, partition.candidates, partition.non_trading,
                     pr, rev, rng=rng)
        _check_tuples(tuples, remaining)

        structure = all_critical_structures(residual)
        reaches = []
        claimed: set[int] = set()
        for cand in partition.candidates:
            if cand not in structure.critical_children:
                raise UnqualifiedDistributor(
                    f"candidate {cand} is unreachable in the residual graph"
                )
            reach = structure.critical_children[cand]
            if reach & claimed:
                raise AuctionError(
                    f"candidate reaches overlap at distributor {cand}; "
                    "the CDP/BDP combination is unsound"
                )
            claimed |= reach
            reaches.append(reach)

        intake = 0
        sold = 0
        resold_flags = []
        items_before = remaining
        for cand, tup, reach in zip(partition.candidates, tuples, reaches):
            result = drp_run(
                residual, cand, tup, pr, rev, single_item_mech,
                reach=reach, reserve_bidder=reserve_bidder,
            )
            for j, b in result.allocation.items():
                allocation[j] |= b
                sold |= b
            for j, p in result.payment.items():
                payment[j] += p
            intake += result.intake()
            resold_flags.append(result.resold)

        removed = frozenset(claimed | partition.non_trading)
        alive -= removed
        remaining &= ~sold
        next_frontier = set()
        for j in removed:
            next_frontier |= instance.reports[j].neighbors
        frontier = tuple(sorted(next_frontier & alive))
        rounds.append(
            RoundState(
                index=len(rounds),
                participants=tuple(sorted(residual.reports)),
                frontier=tuple(sorted(residual.seller_neighbors)),
                candidates=partition.candidates,
                non_trading=tuple(sorted(partition.non_trading)),
                tuples=tuple(tuples),
                resold=tuple(resold_flags),
                intake=intake,
                items_before=items_before,
                items_after=remaining,
                removed=removed,
            )
        )

    outcome = Outcome.from_maps(allocation, payment)
    check_outcome(instance, outcome)
    return DcafRun(outcome, tuple(rounds))


def _check_tuples(tuples: Sequence[BundleTuple], remaining: Bundle) -> None:
    union = 0
    for tup in tuples:
        footprint = tup.footprint()
        if footprint & ~remaining:
            raise InvalidTuple(f"{tup} leaves the remaining item pool")
        if footprint & union:
            raise InvalidTuple(f"{tup} overlaps another distributor's bundles")
        union |= footprint


def seller_revenue(outcome: Outcome) -> Money:
    """Sum of all payments."""
    return sum(outcome.payment.values())
