"""Instance files: canonical JSON on disk, validated instances in memory.

The on-disk form lists bundles as sorted item arrays for readability.  A
valuation may list only some bundles; the parser completes the rest with the
monotone lower envelope (max over listed subsets), which can never introduce
a monotonicity violation on its own.  Serialization always writes the full
table in canonical order (ids ascending, bundles by size then item order),
so parse-then-serialize is the identity on canonical text.
"""

from __future__ import annotations

import json
from typing import Any

from .model import (
    AuctionError,
    AuctionInstance,
    BidderReport,
    Bundle,
    Valuation,
    bundle_from_items,
    bundle_items,
    validate_instance,
)

SCHEMA_VERSION = 1


class ParseError(AuctionError):
    def __init__(self, reason: str, line: int | None = None):
        self.reason, self.line = reason, line
        at = f" (line {line})" if line is not None else ""
        super().__init__(f"cannot parse instance{at}: {reason}")


def _parse_bidders(raw: Any, m: int, section: str) -> dict[int, BidderReport]:
    if not isinstance(raw, list):
        raise ParseError(f"{section!r} must be a list")
    reports: dict[int, BidderReport] = {}
    for entry in raw:
        if not isinstance(entry, dict) or "id" not in entry:
            raise ParseError(f"every {section} entry needs an 'id'")
        bid = entry["id"]
        if not isinstance(bid, int):
            raise ParseError(f"bidder id {bid!r} is not an integer")
        if bid in reports:
            raise ParseError(f"duplicate bidder id {bid}")
        neighbors = entry.get("neighbors", [])
        if not isinstance(neighbors, list):
            raise ParseError(f"bidder {bid}: 'neighbors' must be a list")
        pairs: dict[Bundle, int] = {}
        for item_list_value in entry.get("valuation", []):
            try:
                items, value = item_list_value
                mask = bundle_from_items(items)
            except (TypeError, ValueError) as exc:
                raise ParseError(f"bidder {bid}: bad valuation entry: {exc}") from None
            if mask >= 1 << m:
                raise ParseError(f"bidder {bid}: bundle {items} has items beyond 1..{m}")
            if not isinstance(value, int):
                raise ParseError(f"bidder {bid}: value {value!r} is not an integer")
            if mask in pairs:
                raise ParseError(f"bidder {bid}: bundle listed twice")
            pairs[mask] = value
        reports[bid] = BidderReport(
            bid, Valuation.from_pairs(m, pairs), frozenset(neighbors)
        )
    return reports


def parse_instance(text: str) -> AuctionInstance:
    """Parse and validate one instance from JSON text."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    if not isinstance(raw, dict):
        raise ParseError("top level must be an object")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema version {version}")
    try:
        m = raw["m"]
        seller = raw["seller_neighbors"]
    except KeyError as exc:
        raise ParseError(f"missing field {exc}") from None
    if not isinstance(m, int) or not isinstance(seller, list):
        raise ParseError("'m' must be an integer and 'seller_neighbors' a list")
    reports = _parse_bidders(raw.get("bidders", []), m, "bidders")
    truth = None
    if "truth" in raw:
        truth = _parse_bidders(raw["truth"], m, "truth")
    return validate_instance(
        AuctionInstance(m, frozenset(seller), reports, truth)
    )


def _bidder_obj(rep: BidderReport) -> dict[str, Any]:
    table = [
        [list(bundle_items(mask)), rep.valuation.of(mask)]
        for mask in sorted(
            range(1, 1 << rep.valuation.m),
            key=lambda b: (bin(b).count("1"), bundle_items(b)),
        )
    ]
    return {
        "id": rep.bidder_id,
        "neighbors": sorted(rep.neighbors),
        "valuation": table,
    }


def serialize_instance(instance: AuctionInstance) -> str:
    """Canonical JSON text for a validated instance."""
    obj: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "m": instance.m,
        "seller_neighbors": sorted(instance.seller_neighbors),
        "bidders": [
            _bidder_obj(instance.reports[bid]) for bid in sorted(instance.reports)
        ],
    }
    if instance.ground_truth is not None:
        obj["truth"] = [
            _bidder_obj(instance.ground_truth[bid])
            for bid in sorted(instance.ground_truth)
        ]
    return json.dumps(obj, indent=2) + "\n"


def load_instance(path) -> AuctionInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh.read())


def save_instance(path, instance: AuctionInstance) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_instance(instance))
