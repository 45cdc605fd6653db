"""Concrete mechanism assembly: the dealer retail mechanism and variants.

The dealer retail mechanism ("drm") wires together the graph-exploration
candidate split, the greedy bundle division, the IDM local resale market, and
second/first-price bundle pricing over the non-trading set.  Variants swap
the bundle division for the random single-item one ("drm-random-bdp") or add
a virtual reserve bid at the resale-revenue level ("drm-reserve").
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

from .framework import (
    BoundPrice,
    BundleTuple,
    DistributorPartition,
    PRICING,
    dcaf_run_detailed,
    DcafRun,
)
from .idm import SingleItemResult, idm_run
from .model import (
    AuctionError,
    AuctionInstance,
    Bundle,
    MechanismConfig,
    Money,
    Outcome,
    full_bundle,
    iter_subbundles,
    qualified_set,
)

Mechanism = Callable[[AuctionInstance, MechanismConfig], Outcome]

GREEDY_MAX_POOL = 12


class TooManyItems(AuctionError):
    def __init__(self, count: int):
        self.count = count
        super().__init__(
            f"{count} items remain; greedy bundle division enumerates all "
            f"sub-bundles and is capped at {GREEDY_MAX_POOL}"
        )


# ---------------------------------------------------------------------------
# Candidate determination
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CdpOrdering:
    """Bidders ranked by reported degree, descending; ties break to the
    lower id.  Depends on neighbor reports only, never on valuations."""

    ranked: tuple[tuple[int, int], ...]

    @classmethod
    def of(cls, instance: AuctionInstance, ids) -> "CdpOrdering":
        pairs = sorted(
            ((i, len(instance.reports[i].neighbors)) for i in ids),
            key=lambda p: (-p[1], p[0]),
        )
        return cls(tuple(pairs))

    def ids(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.ranked)


def graph_exploration_cdp(
    residual_instance: AuctionInstance, frontier: Sequence[int]
) -> DistributorPartition:
    """Explore outward from the frontier, repeatedly sending the top half of
    each newly discovered layer (by reported degree) to the candidate side
    and the bottom half to the non-trading side.  Discovery follows only
    non-traders' reported neighbors, so a bidder's own report never affects
    her own classification beyond her rank."""
    candidates: list[int] = []
    non_trading: set[int] = set()
    classified: set[int] = set()

    layer = sorted({i for i in frontier if i in residual_instance.reports})
    while layer:
        ranked = CdpOrdering.of(residual_instance, layer).ids()
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


def trivial_cdp(
    residual_instance: AuctionInstance, frontier: Sequence[int]
) -> DistributorPartition:
    """Every frontier bidder becomes a candidate; nobody prices bundles."""
    present = tuple(sorted({i for i in frontier if i in residual_instance.reports}))
    return DistributorPartition(present, frozenset())


# ---------------------------------------------------------------------------
# Bundle division
# ---------------------------------------------------------------------------


def random_single_item_bdp(
    residual_instance: AuctionInstance,
    remaining: Bundle,
    candidates: Sequence[int],
    non_trading: frozenset[int],
    pr: BoundPrice,
    rev: BoundPrice,
    *,
    rng: random.Random | int | None = None,
) -> tuple[BundleTuple, ...]:
    """Hand each candidate one random distinct item (resale = reserve) while
    items remain; later candidates get empty tuples.  Deterministic for a
    fixed seed."""
    if not isinstance(rng, random.Random):
        rng = random.Random(rng or 0)
    order = sorted(candidates)
    rng.shuffle(order)
    pool = [1 << k for k in range(residual_instance.m) if remaining >> k & 1]
    picks: dict[int, Bundle] = {}
    for cand in order:
        if not pool:
            picks[cand] = 0
            continue
        picks[cand] = pool.pop(rng.randrange(len(pool)))
    return tuple(BundleTuple(picks[c], picks[c]) for c in candidates)


def greedy_bdp(
    residual_instance: AuctionInstance,
    remaining: Bundle,
    candidates: Sequence[int],
    non_trading: frozenset[int],
    pr: BoundPrice,
    rev: BoundPrice,
    *,
    rng: random.Random | int | None = None,
) -> tuple[BundleTuple, ...]:
    """In fixed id order (independent of any report), give each candidate the
    sub-bundle of the remaining pool maximizing resale margin
    ``max(own value, resale revenue) - price`` and the one maximizing keeper
    surplus ``own value - price``, then retire both from the pool.

    The empty bundle always competes with score zero, so both objectives are
    non-negative at the chosen bundles; ties prefer fewer items, then the
    lexicographically smallest item list.
    """
    if bin(remaining).count("1") > GREEDY_MAX_POOL:
        raise TooManyItems(bin(remaining).count("1"))
    tuples: dict[int, BundleTuple] = {}
    pool = remaining
    for cand in sorted(candidates):
        value = residual_instance.reports[cand].valuation.of
        best_resale, best_resale_score = 0, 0
        best_reserve, best_reserve_score = 0, 0
        for b in iter_subbundles(pool):
            price = pr(b)
            resale_score = max(value(b), rev(b)) - price
            reserve_score = value(b) - price
            if resale_score > best_resale_score:
                best_resale, best_resale_score = b, resale_score
            if reserve_score > best_reserve_score:
                best_reserve, best_reserve_score = b, reserve_score
        tuples[cand] = BundleTuple(best_resale, best_reserve)
        pool &= ~(best_resale | best_reserve)
    return tuple(tuples[c] for c in candidates)


CDPS = {"graph-exploration": graph_exploration_cdp, "trivial": trivial_cdp}
BDPS = {"greedy": greedy_bdp, "random-single-item": random_single_item_bdp}


def _idm_qualified(
    market: AuctionInstance, item_value: Mapping[int, Money]
) -> SingleItemResult:
    return idm_run(market, item_value, vstar_domain="qualified")[0]


def _idm_firstnode(
    market: AuctionInstance, item_value: Mapping[int, Money]
) -> SingleItemResult:
    return idm_run(market, item_value, vstar_domain="first-node")[0]


SINGLE_ITEM = {"idm": _idm_qualified, "idm-firstnode": _idm_firstnode}


# ---------------------------------------------------------------------------
# Assembled mechanisms
# ---------------------------------------------------------------------------


def run_with_config(instance: AuctionInstance, config: MechanismConfig) -> Outcome:
    return run_with_config_detailed(instance, config).outcome


def run_with_config_detailed(
    instance: AuctionInstance, config: MechanismConfig
) -> DcafRun:
    try:
        cdp = CDPS[config.cdp]
        bdp = BDPS[config.bdp]
        mech = SINGLE_ITEM[config.single_item]
        pr_fn, rev_fn = PRICING[config.pricing]
    except KeyError as exc:
        raise AuctionError(f"unknown component name {exc}") from None
    return dcaf_run_detailed(
        instance,
        cdp,
        bdp,
        mech,
        pr_fn,
        rev_fn,
        rng=random.Random(config.rng_seed),
        reserve_bidder=config.reserve_bidder,
    )


def drm_run(
    instance: AuctionInstance,
    *,
    seed: int = 0,
    reserve_bidder: bool = False,
    bdp: str = "greedy",
) -> Outcome:
    """The dealer retail mechanism with default components."""
    config = MechanismConfig(
        bdp=bdp, reserve_bidder=reserve_bidder, rng_seed=seed
    )
    return run_with_config(instance, config)


def idm_grand_bundle(instance: AuctionInstance, config: MechanismConfig) -> Outcome:
    """IDM run directly on the instance, selling all items as one lot."""
    qualified = qualified_set(instance)
    grand = full_bundle(instance.m)
    values = {i: instance.reports[i].valuation.of(grand) for i in qualified}
    result, _ = idm_run(instance, values)
    allocation = {i: 0 for i in instance.reports}
    if result.winner is not None:
        allocation[result.winner] = grand
    payment = {i: result.payments.get(i, 0) for i in instance.reports}
    return Outcome.from_maps(allocation, payment)


def baseline_direct_second_price(
    instance: AuctionInstance, config: MechanismConfig | None = None
) -> Outcome:
    """No-diffusion yardstick: sell the grand bundle among the seller's
    direct neighbors at the second price."""
    grand = full_bundle(instance.m)
    direct = sorted(i for i in instance.seller_neighbors if i in instance.reports)
    allocation = {i: 0 for i in instance.reports}
    payment = {i: 0 for i in instance.reports}
    if direct:
        values = {i: instance.reports[i].valuation.of(grand) for i in direct}
        winner = min(direct, key=lambda i: (-values[i], i))
        rest = sorted((values[i] for i in direct if i != winner), reverse=True)
        allocation[winner] = grand
        payment[winner] = rest[0] if rest else 0
    return Outcome.from_maps(allocation, payment)


def _drm(instance: AuctionInstance, config: MechanismConfig) -> Outcome:
    return run_with_config(instance, config)


def _drm_random(instance: AuctionInstance, config: MechanismConfig) -> Outcome:
    return run_with_config(instance, replace(config, bdp="random-single-item"))


def _drm_reserve(instance: AuctionInstance, config: MechanismConfig) -> Outcome:
    return run_with_config(instance, replace(config, reserve_bidder=True))


MECHANISMS: dict[str, Mechanism] = {
    "drm": _drm,
    "drm-random-bdp": _drm_random,
    "drm-reserve": _drm_reserve,
    "idm": idm_grand_bundle,
    "baseline-direct": baseline_direct_second_price,
}


def get_mechanism(name: str) -> Mechanism:
    try:
        return MECHANISMS[name]
    except KeyError:
        raise AuctionError(
            f"unknown mechanism {name!r}; known: {', '.join(sorted(MECHANISMS))}"
        ) from None
