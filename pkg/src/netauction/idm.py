"""Single-item diffusion mechanism with invitation rewards (IDM).

The item goes to the first node on the top bidder's critical sequence that
can match the best offer outside the next node's reach; every node earlier on
the winner's sequence is paid the increase in outside competition she created
by inviting, which can make her payment negative (she receives money).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .critical import all_critical_structures
from .model import AuctionInstance, Money, qualified_set

VSTAR_DOMAINS = ("qualified", "first-node")


@dataclass(frozen=True)
class SingleItemResult:
    """Outcome of one local single-item market."""

    winner: int | None
    payments: dict[int, Money]
    revenue: Money


@dataclass(frozen=True)
class IdmTrace:
    """Intermediate quantities, kept for tests and reports."""

    top_bidder: int | None
    critical_sequence: tuple[int, ...]
    vstar: dict[int, Money]
    winner: int | None


def idm_run(
    local_instance: AuctionInstance,
    item_value: Mapping[int, Money],
    *,
    vstar_domain: str = "qualified",
) -> tuple[SingleItemResult, IdmTrace]:
    """Run the mechanism on one market.

    ``item_value`` maps every qualified bidder to her reported value for the
    (single, abstract) item.  ``vstar_domain`` selects the pool the outside
    offers ``v*`` are drawn from: all qualified bidders (default) or only the
    first critical node's reach; the two differ only when the first node does
    not cut off the whole market.

    Ties for the top bidder break to the lowest id so runs are reproducible.
    An empty market is a no-sale result, not an error.
    """
    if vstar_domain not in VSTAR_DOMAINS:
        raise ValueError(f"vstar_domain must be one of {VSTAR_DOMAINS}")
    qualified = qualified_set(local_instance)
    zero_payments = {i: 0 for i in local_instance.reports}
    if not qualified:
        return (
            SingleItemResult(None, zero_payments, 0),
            IdmTrace(None, (), {}, None),
        )
    for i in qualified:
        if i not in item_value:
            raise KeyError(f"no item value for qualified bidder {i}")

    top = min(qualified, key=lambda i: (-item_value[i], i))
    structure = all_critical_structures(local_instance)
    sequence = structure.critical_nodes[top]
    children = structure.critical_children

    if vstar_domain == "qualified":
        domain = qualified
    else:
        domain = children[sequence[0]]
    vstar: dict[int, Money] = {}
    for i in sequence:
        outside = domain - children[i]
        vstar[i] = max((item_value[j] for j in outside), default=0)

    winner = top
    for pos, i in enumerate(sequence[:-1]):
        # i can match the best offer outside the next node's reach; her bid
        # never exceeds it, so equality is the matching test.
        if item_value[i] == vstar[sequence[pos + 1]]:
            winner = i
            break

    payments = dict(zero_payments)
    # The winner's own critical sequence is the prefix of the top bidder's
    # sequence ending at her (dominator-tree ancestor chain).
    win_pos = sequence.index(winner)
    for pos in range(win_pos):
        i = sequence[pos]
        payments[i] = vstar[i] - vstar[sequence[pos + 1]]
    payments[winner] = vstar[winner]
    revenue = sum(payments.values())
    return (
        SingleItemResult(winner, payments, revenue),
        IdmTrace(top, sequence, vstar, winner),
    )
