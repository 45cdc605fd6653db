"""Seeded instance families, exhaustive network enumerations, and fixtures.

Everything here is deterministic given its seed, so generated corpora can be
regenerated byte-for-byte and every reported counterexample replays.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from .model import (
    AuctionError,
    AuctionInstance,
    BidderReport,
    Money,
    Valuation,
    bundle_items,
    validate_instance,
)

GRAPH_MODELS = ("random-tree-plus-edges", "erdos-renyi", "line", "star")


class BadSpec(AuctionError):
    pass


@dataclass(frozen=True)
class FamilySpec:
    """Parameters for one seeded random family."""

    n: int
    m: int
    v_max: int
    graph_model: str = "random-tree-plus-edges"
    count: int = 1
    seed: int = 0
    edge_p: float = 0.25


# ---------------------------------------------------------------------------
# Valuation sampling and enumeration
# ---------------------------------------------------------------------------


def random_valuation(m: int, v_max: int, rng: random.Random) -> Valuation:
    """Per-item uniform values summed per bundle, plus a non-negative synergy
    bonus on bundles of two or more items, clamped so the table stays
    monotone."""
    per_item = [rng.randint(0, v_max) for _ in range(m)]
    vals = [0] * (1 << m)
    for mask in range(1, 1 << m):
        additive = sum(per_item[i - 1] for i in bundle_items(mask))
        size = bin(mask).count("1")
        bonus = rng.randint(0, v_max) if size >= 2 else 0
        floor = 0
        rest = mask
        while rest:
            bit = rest & -rest
            floor = max(floor, vals[mask ^ bit])
            rest ^= bit
        vals[mask] = max(additive + bonus, floor)
    return Valuation(m, tuple(vals))


@lru_cache(maxsize=None)
def monotone_tables(m: int, v_max: int) -> tuple[Valuation, ...]:
    """Every monotone table over ``m`` items with values in ``0..v_max`` and
    zero on the empty bundle.  Small only for small ``m``; the deviation
    spaces cap usage."""
    masks = sorted(range(1 << m), key=lambda b: bin(b).count("1"))
    tables: list[list[Money]] = [[0] * (1 << m)]
    for mask in masks[1:]:
        subs = [mask ^ (1 << k) for k in range(m) if mask >> k & 1]
        extended = []
        for partial in tables:
            lo = max((partial[s] for s in subs), default=0)
            for v in range(lo, v_max + 1):
                nxt = list(partial)
                nxt[mask] = v
                extended.append(nxt)
        tables = extended
    return tuple(Valuation(m, tuple(t)) for t in tables)


def scalar_profiles(n: int, v_max: int) -> Iterator[tuple[int, ...]]:
    """All single-item value assignments for ``n`` bidders."""
    return itertools.product(range(v_max + 1), repeat=n)


# ---------------------------------------------------------------------------
# Topology builders
# ---------------------------------------------------------------------------


def line_edges(n: int) -> tuple[frozenset[int], dict[int, frozenset[int]]]:
    seller = frozenset({1} if n else ())
    out = {i: frozenset({i + 1}) if i < n else frozenset() for i in range(1, n + 1)}
    return seller, out


def star_edges(n: int) -> tuple[frozenset[int], dict[int, frozenset[int]]]:
    """Seller reaches a hub bidder who invites everyone else."""
    seller = frozenset({1} if n else ())
    out = {i: frozenset() for i in range(1, n + 1)}
    if n > 1:
        out[1] = frozenset(range(2, n + 1))
    return seller, out


def branch_edges(n: int) -> tuple[frozenset[int], dict[int, frozenset[int]]]:
    """Binary-tree invitations: bidder ``i`` invites ``2i`` and ``2i+1``."""
    seller = frozenset({1} if n else ())
    out = {
        i: frozenset(c for c in (2 * i, 2 * i + 1) if c <= n)
        for i in range(1, n + 1)
    }
    return seller, out


TOPOLOGIES = {"line": line_edges, "star": star_edges, "branch": branch_edges}


def instance_from_parts(
    m: int,
    seller: Iterable[int],
    out_edges: Mapping[int, Iterable[int]],
    valuations: Mapping[int, Valuation],
    *,
    with_truth: bool = True,
) -> AuctionInstance:
    reports = {
        i: BidderReport(i, valuations[i], frozenset(out_edges.get(i, ())))
        for i in out_edges
    }
    truth = dict(reports) if with_truth else None
    return validate_instance(
        AuctionInstance(m, frozenset(seller), reports, truth)
    )


def scalar_market(
    kind: str, values: tuple[int, ...], *, m: int = 1
) -> AuctionInstance:
    """A topology instance whose bidders value the full lot at the given
    scalars (additively spread over items when ``m > 1``)."""
    n = len(values)
    seller, out = TOPOLOGIES[kind](n)
    tables = {
        i: Valuation.from_pairs(m, {(1 << m) - 1: values[i - 1]})
        for i in range(1, n + 1)
    }
    return instance_from_parts(m, seller, out, tables)


# ---------------------------------------------------------------------------
# Seeded random families
# ---------------------------------------------------------------------------


def _random_edges(
    spec: FamilySpec, rng: random.Random
) -> tuple[frozenset[int], dict[int, frozenset[int]]]:
    n = spec.n
    if spec.graph_model == "line":
        return line_edges(n)
    if spec.graph_model == "star":
        return star_edges(n)
    out = {i: set() for i in range(1, n + 1)}
    if spec.graph_model == "random-tree-plus-edges":
        order = list(range(1, n + 1))
        rng.shuffle(order)
        seller = frozenset(order[:1])
        for pos, node in enumerate(order[1:], start=1):
            out[order[rng.randrange(pos)]].add(node)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i != j and rng.random() < spec.edge_p:
                    out[i].add(j)
        return seller, {i: frozenset(s) for i, s in out.items()}
    if spec.graph_model == "erdos-renyi":
        seller = frozenset(i for i in range(1, n + 1) if rng.random() < spec.edge_p)
        if n and not seller:
            seller = frozenset({rng.randint(1, n)})
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i != j and rng.random() < spec.edge_p:
                    out[i].add(j)
        return seller, {i: frozenset(s) for i, s in out.items()}
    raise BadSpec(f"unknown graph model {spec.graph_model!r}")


def generate_instances(spec: FamilySpec) -> list[AuctionInstance]:
    """A deterministic family of validated instances with ground truth."""
    if spec.n < 0:
        raise BadSpec("negative bidder count")
    if not 0 <= spec.m <= 16:
        raise BadSpec("item count outside 0..16")
    if spec.graph_model not in GRAPH_MODELS:
        raise BadSpec(f"unknown graph model {spec.graph_model!r}")
    rng = random.Random(spec.seed)
    family = []
    for _ in range(spec.count):
        seller, out = _random_edges(spec, rng)
        tables = {
            i: random_valuation(spec.m, spec.v_max, rng) for i in range(1, spec.n + 1)
        }
        family.append(instance_from_parts(spec.m, seller, out, tables))
    return family


# ---------------------------------------------------------------------------
# Exhaustive network enumerations (for the consistency checkers)
# ---------------------------------------------------------------------------


def all_digraph_networks(
    n: int,
) -> Iterator[tuple[frozenset[int], dict[int, frozenset[int]]]]:
    """Every labeled digraph on ``n`` bidders together with every seller
    invitation set.  Grows as ``2**(n + n(n-1))``; practical for ``n <= 4``."""
    ids = list(range(1, n + 1))
    others = {i: [j for j in ids if j != i] for i in ids}
    edge_choices = [
        [frozenset(c) for r in range(n) for c in itertools.combinations(others[i], r)]
        for i in ids
    ]
    for seller_bits in range(1 << n):
        seller = frozenset(i for i in ids if seller_bits >> (i - 1) & 1)
        for combo in itertools.product(*edge_choices):
            yield seller, dict(zip(ids, combo))


def all_undirected_networks(
    n: int,
) -> Iterator[tuple[frozenset[int], dict[int, frozenset[int]]]]:
    """Every mutual-neighbor network on ``n`` bidders with every seller
    invitation set; the symmetric counterpart of the digraph enumeration,
    matching how acquaintance actually works."""
    ids = list(range(1, n + 1))
    pairs = list(itertools.combinations(ids, 2))
    for edge_bits in range(1 << len(pairs)):
        out = {i: set() for i in ids}
        for k, (i, j) in enumerate(pairs):
            if edge_bits >> k & 1:
                out[i].add(j)
                out[j].add(i)
        frozen = {i: frozenset(s) for i, s in out.items()}
        for seller_bits in range(1 << n):
            yield frozenset(i for i in ids if seller_bits >> (i - 1) & 1), frozen


def network_instance(
    seller: frozenset[int], out_edges: Mapping[int, frozenset[int]], m: int = 1
) -> AuctionInstance:
    """Zero-valuation instance over a bare network (valuations are irrelevant
    to the candidate-split checkers).  Skips validation for speed; the
    enumerations above only produce well-formed networks."""
    zero = Valuation.zero(m)
    reports = {i: BidderReport(i, zero, out_edges[i]) for i in out_edges}
    return AuctionInstance(m, seller, reports, dict(reports))


# ---------------------------------------------------------------------------
# Hand fixtures
# ---------------------------------------------------------------------------


def line_market_fixture() -> AuctionInstance:
    """Three bidders on a chain valuing the item at 3, 5, 10."""
    return scalar_market("line", (3, 5, 10))


def branch_market_fixture() -> AuctionInstance:
    """Five bidders, two arms: the chain 1 -> 2 -> 3 plus direct bidders 4
    (from the seller) and 5 (invited by 1); values 1, 9, 10, 2, 6.  The
    canonical market where an inviter ends up paid for the competition she
    brought in."""
    seller = frozenset({1, 4})
    out = {
        1: frozenset({2, 5}),
        2: frozenset({3}),
        3: frozenset(),
        4: frozenset(),
        5: frozenset(),
    }
    values = {1: 1, 2: 9, 3: 10, 4: 2, 5: 6}
    tables = {i: Valuation(1, (0, v)) for i, v in values.items()}
    return instance_from_parts(1, seller, out, tables)


def embedded_branch_fixture() -> AuctionInstance:
    """The branch market hanging off a single dealer (bidder 6) so the whole
    resale pipeline reproduces it as a local market; one item."""
    seller = frozenset({6})
    out = {
        6: frozenset({1, 4}),
        1: frozenset({2, 5}),
        2: frozenset({3}),
        3: frozenset(),
        4: frozenset(),
        5: frozenset(),
    }
    values = {6: 1, 1: 1, 2: 9, 3: 10, 4: 2, 5: 6}
    tables = {i: Valuation(1, (0, v)) for i, v in values.items()}
    return instance_from_parts(1, seller, out, tables)


def two_round_showcase() -> AuctionInstance:
    """Eleven bidders, two items; built so a run takes exactly two rounds
    with a singleton candidate set in the second, two bidders never reached,
    and one item returning to the pool after a failed resale."""
    m = 2
    # table layout: (empty, item 1, item 2, both)
    seller = frozenset({1, 2, 3, 4})
    out = {
        1: frozenset({5, 9}),
        2: frozenset({7}),
        3: frozenset(),
        4: frozenset(),
        5: frozenset({6}),
        6: frozenset({8}),
        7: frozenset({6}),
        8: frozenset(),
        9: frozenset(),
        10: frozenset(),
        11: frozenset(),
    }
    tables = {
        1: Valuation.zero(m),
        2: Valuation(m, (0, 4, 0, 4)),
        3: Valuation(m, (0, 3, 9, 11)),
        4: Valuation(m, (0, 3, 7, 11)),
        5: Valuation(m, (0, 0, 6, 6)),
        6: Valuation(m, (0, 0, 2, 2)),
        7: Valuation(m, (0, 5, 0, 5)),
        8: Valuation(m, (0, 0, 1, 1)),
        9: Valuation.zero(m),
        10: Valuation.zero(m),
        11: Valuation.zero(m),
    }
    return instance_from_parts(m, seller, out, tables)


def topology_family(
    kinds: Iterable[str],
    max_n: int,
    *,
    m: int = 1,
    v_max: int = 3,
    profiles_per_shape: int | None = None,
    seed: int = 0,
) -> list[AuctionInstance]:
    """Topology instances over all (or a seeded sample of) value profiles."""
    rng = random.Random(seed)
    family = []
    seen = set()
    for kind in kinds:
        for n in range(1, max_n + 1):
            key_base = TOPOLOGIES[kind](n)
            dedupe = (key_base[0], tuple(sorted(key_base[1].items())))
            if dedupe in seen:
                continue
            seen.add(dedupe)
            profiles = list(scalar_profiles(n, v_max))
            if profiles_per_shape is not None and len(profiles) > profiles_per_shape:
                profiles = rng.sample(profiles, profiles_per_shape)
            for values in profiles:
                family.append(scalar_market(kind, values, m=m))
    return family
