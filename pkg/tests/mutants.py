"""Deliberately broken mechanisms and processes.

Each one plants exactly the defect its matching checker exists to catch;
the mutation tests assert the checkers flag them.
"""

from __future__ import annotations

import random
from typing import Mapping, Sequence

from netauction.framework import BundleTuple, DistributorPartition
from netauction.idm import SingleItemResult, idm_run
from netauction.model import (
    AuctionInstance,
    Money,
    Outcome,
    full_bundle,
    qualified_set,
)


def qualified_second_price(instance: AuctionInstance) -> Outcome:
    """Second price over all qualified bidders, no invitation rewards.
    Hiding a stronger invitee lets a weak bidder win cheap, so truthful
    invitation is not dominant."""
    grand = full_bundle(instance.m)
    reachable = sorted(qualified_set(instance))
    allocation = {i: 0 for i in instance.reports}
    payment = {i: 0 for i in instance.reports}
    if reachable:
        values = {i: instance.reports[i].valuation.of(grand) for i in reachable}
        winner = min(reachable, key=lambda i: (-values[i], i))
        rest = sorted((values[i] for i in reachable if i != winner), reverse=True)
        allocation[winner] = grand
        payment[winner] = rest[0] if rest else 0
    return Outcome.from_maps(allocation, payment)


def overcharging_mechanism(instance: AuctionInstance) -> Outcome:
    """Winner pays her own reported value plus one: never rational."""
    outcome = qualified_second_price(instance)
    grand = full_bundle(instance.m)
    payment = dict(outcome.payment)
    for i, bundle in outcome.allocation.items():
        if bundle:
            payment[i] = instance.reports[i].valuation.of(grand) + 1
    return Outcome.from_maps(outcome.allocation, payment)


def subsidizing_mechanism(instance: AuctionInstance) -> Outcome:
    """Pays every qualified loser one unit; rewards can exceed intake."""
    outcome = qualified_second_price(instance)
    payment = dict(outcome.payment)
    for i in qualified_set(instance):
        if outcome.allocation.get(i, 0) == 0:
            payment[i] = -1
    return Outcome.from_maps(outcome.allocation, payment)


def ascending_degree_cdp(
    residual_instance: AuctionInstance, frontier: Sequence[int]
) -> DistributorPartition:
    """Graph exploration with the ranking inverted (fewest invitations
    first): a candidate who reports more neighbors can fall out of the
    candidate set."""
    candidates: list[int] = []
    non_trading: set[int] = set()
    classified: set[int] = set()
    layer = [i for i in frontier if i in residual_instance.reports]
    while layer:
        ranked = sorted(
            layer, key=lambda i: (len(residual_instance.reports[i].neighbors), i)
        )
        cut = (len(ranked) + 1) // 2
        candidates.extend(ranked[:cut])
        non_trading.update(ranked[cut:])
        classified.update(ranked)
        discovered: set[int] = set()
        for j in non_trading:
            discovered |= residual_instance.reports[j].neighbors
        discovered &= residual_instance.bidders
        layer = sorted(discovered - classified)
    return DistributorPartition(tuple(candidates), frozenset(non_trading))


def valuation_ranked_cdp(
    residual_instance: AuctionInstance, frontier: Sequence[int]
) -> DistributorPartition:
    """Graph exploration ranked by reported grand-bundle value: the split
    depends on valuations, which a candidate split must never do."""
    grand = full_bundle(residual_instance.m)
    candidates: list[int] = []
    non_trading: set[int] = set()
    classified: set[int] = set()
    layer = [i for i in frontier if i in residual_instance.reports]
    while layer:
        ranked = sorted(
            layer,
            key=lambda i: (-residual_instance.reports[i].valuation.of(grand), i),
        )
        cut = (len(ranked) + 1) // 2
        candidates.extend(ranked[:cut])
        non_trading.update(ranked[cut:])
        classified.update(ranked)
        discovered: set[int] = set()
        for j in non_trading:
            discovered |= residual_instance.reports[j].neighbors
        discovered &= residual_instance.bidders
        layer = sorted(discovered - classified)
    return DistributorPartition(tuple(candidates), frozenset(non_trading))


def degree_ordered_greedy_bdp(
    residual_instance: AuctionInstance,
    remaining: int,
    candidates: Sequence[int],
    non_trading: frozenset[int],
    pr,
    rev,
    *,
    rng: random.Random | int | None = None,
) -> tuple[BundleTuple, ...]:
    """Greedy division but serving candidates by reported degree: a
    candidate's own invitation report moves her place in the queue."""
    from netauction.model import iter_subbundles

    order = sorted(
        candidates,
        key=lambda i: (-len(residual_instance.reports[i].neighbors), i),
    )
    tuples: dict[int, BundleTuple] = {}
    pool = remaining
    for cand in order:
        value = residual_instance.reports[cand].valuation.of
        best_resale, best_resale_score = 0, 0
        best_reserve, best_reserve_score = 0, 0
        for b in iter_subbundles(pool):
            resale_score = max(value(b), rev(b)) - pr(b)
            reserve_score = value(b) - pr(b)
            if resale_score > best_resale_score:
                best_resale, best_resale_score = b, resale_score
            if reserve_score > best_reserve_score:
                best_reserve, best_reserve_score = b, reserve_score
        tuples[cand] = BundleTuple(best_resale, best_reserve)
        pool &= ~(best_resale | best_reserve)
    return tuple(tuples[c] for c in candidates)


def leaky_idm(
    market: AuctionInstance, item_value: Mapping[int, Money]
) -> SingleItemResult:
    """IDM plus a rebate of the first critical node's own bid: the local
    revenue now moves with a positive-utility loser's report."""
    result, trace = idm_run(market, item_value)
    if trace.winner is None or not trace.critical_sequence:
        return result
    first = trace.critical_sequence[0]
    if first == trace.winner:
        return result
    payments = dict(result.payments)
    payments[first] -= item_value[first]
    return SingleItemResult(result.winner, payments, sum(payments.values()))
