"""Brute-force verifiers for the incentive properties.

Every checker enumerates a deviation space (exhaustively when it fits a
budget, by seeded sampling otherwise, and always saying which) and returns
replayable counterexamples: re-running the mechanism on the stored instance,
context, and deviation reproduces the stored delta exactly.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .framework import BundleTuple, DistributorPartition
from .generate import monotone_tables, network_instance
from .idm import SingleItemResult
from .model import (
    AuctionInstance,
    BidderReport,
    Money,
    Outcome,
    Valuation,
    full_bundle,
    qualified_set,
    utility,
)

MechanismFn = Callable[[AuctionInstance], Outcome]
CdpFn = Callable[[AuctionInstance, Sequence[int]], DistributorPartition]
BdpFn = Callable[..., tuple[BundleTuple, ...]]
SingleItemFn = Callable[[AuctionInstance, Mapping[int, Money]], SingleItemResult]

PROPERTIES = ("IR", "IC", "WBB", "EPI4NW", "CDC", "RDM", "RC")


@dataclass(frozen=True)
class DeviationSpace:
    """What a single bidder may try: any subset of her true neighbors crossed
    with any monotone valuation table up to ``v_max``.

    ``budget`` caps the unilateral deviations enumerated per bidder; beyond
    it the space is sampled and the run is marked so.  ``others_budget``
    controls how many joint deviation profiles of the *other* bidders are
    layered under each unilateral check (0 keeps the others truthful).
    """

    v_max: int = 3
    budget: int = 4096
    others_budget: int = 0
    seed: int = 11

    def tables(self, m: int) -> tuple[Valuation, ...]:
        return monotone_tables(m, self.v_max)


@dataclass(frozen=True)
class Violation:
    """One replayable counterexample."""

    prop: str
    instance: AuctionInstance
    bidder: int | None
    deviation: BidderReport | None
    delta: Money
    context: tuple[BidderReport, ...] = ()
    note: str = ""

    def deviated_instance(self) -> AuctionInstance:
        inst = self.instance.truthful()
        for rep in self.context:
            inst = inst.with_report(rep)
        if self.deviation is not None:
            inst = inst.with_report(self.deviation)
        return inst

    def base_instance(self) -> AuctionInstance:
        inst = self.instance.truthful()
        for rep in self.context:
            inst = inst.with_report(rep)
        return inst


@dataclass
class CheckResult:
    """Violations plus how the space was covered."""

    prop: str
    scope: str  # "exhaustive" or "sampled"
    instances: int = 0
    cases: int = 0
    violations: list[Violation] = field(default_factory=list)
    budget_exceeded: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        head = (
            f"{self.prop}: {'ok' if self.ok else 'VIOLATED'} "
            f"[{self.scope}] instances={self.instances} cases={self.cases} "
            f"violations={len(self.violations)}"
        )
        if self.budget_exceeded:
            head += " (budget exceeded; sampled)"
        if self.violations:
            head += f"\n  first witness: {describe_violation(self.violations[0])}"
        return head


def describe_violation(v: Violation) -> str:
    where = f"bidder {v.bidder}" if v.bidder is not None else "instance"
    detail = f"{v.prop} at {where}, delta={v.delta}"
    if v.note:
        detail += f" ({v.note})"
    return detail


# ---------------------------------------------------------------------------
# Deviation enumeration helpers
# ---------------------------------------------------------------------------


def _subsets(items: frozenset[int]) -> list[frozenset[int]]:
    ordered = sorted(items)
    return [
        frozenset(c)
        for r in range(len(ordered) + 1)
        for c in itertools.combinations(ordered, r)
    ]


def _unilateral_deviations(
    truth: BidderReport, m: int, space: DeviationSpace, rng: random.Random
) -> tuple[list[BidderReport], bool]:
    """All (table, neighbor subset) misreports for one bidder, or a seeded
    sample when the full grid exceeds the budget."""
    tables = space.tables(m)
    subsets = _subsets(truth.neighbors)
    total = len(tables) * len(subsets)
    if total <= space.budget:
        return (
            [
                BidderReport(truth.bidder_id, tbl, sub)
                for tbl in tables
                for sub in subsets
            ],
            False,
        )
    out = [
        BidderReport(truth.bidder_id, rng.choice(tables), rng.choice(subsets))
        for _ in range(space.budget)
    ]
    return out, True


def _neighbor_deviations(
    truth: BidderReport, space: DeviationSpace, rng: random.Random
) -> tuple[list[BidderReport], bool]:
    """Truthful-valuation misreports: every subset of the true neighbors."""
    subsets = _subsets(truth.neighbors)
    if len(subsets) <= space.budget:
        return [truth.with_neighbors(sub) for sub in subsets], False
    out = [truth.with_neighbors(rng.choice(subsets)) for _ in range(space.budget)]
    return out, True


def _others_contexts(
    instance: AuctionInstance, bidder: int, space: DeviationSpace, rng: random.Random
) -> list[tuple[BidderReport, ...]]:
    """Joint deviation profiles for everyone but ``bidder``; the truthful
    profile (empty context) always comes first."""
    contexts: list[tuple[BidderReport, ...]] = [()]
    if space.others_budget <= 0:
        return contexts
    truth = instance.ground_truth or {}
    others = [b for b in sorted(truth) if b != bidder]
    tables = space.tables(instance.m)
    for _ in range(space.others_budget):
        ctx = []
        for j in others:
            rep = truth[j]
            sub = frozenset(k for k in rep.neighbors if rng.random() < 0.5)
            ctx.append(BidderReport(j, rng.choice(tables), sub))
        contexts.append(tuple(ctx))
    return contexts


# ---------------------------------------------------------------------------
# Individual rationality / incentive compatibility / budget balance
# ---------------------------------------------------------------------------


def check_ir(
    mechanism: MechanismFn,
    instances: Iterable[AuctionInstance],
    space: DeviationSpace = DeviationSpace(),
) -> CheckResult:
    """Truthful valuation plus any invitation subset never yields negative
    utility, under the truthful profile of others and under sampled
    others' deviation profiles."""
    rng = random.Random(space.seed)
    result = CheckResult("IR", "exhaustive")
    for inst in instances:
        result.instances += 1
        truthful = inst.truthful()
        reachable = qualified_set(truthful)
        for i in sorted(reachable):
            true_rep = truthful.reports[i]
            devs, clipped = _neighbor_deviations(true_rep, space, rng)
            result.budget_exceeded |= clipped
            for ctx in _others_contexts(inst, i, space, rng):
                base = truthful
                for rep in ctx:
                    base = base.with_report(rep)
                for dev in devs:
                    outcome = mechanism(base.with_report(dev))
                    result.cases += 1
                    u = utility(true_rep, outcome, i)
                    if u < 0:
                        result.violations.append(
                            Violation("IR", inst, i, dev, u, ctx)
                        )
    if result.budget_exceeded or space.others_budget > 0:
        result.scope = "sampled"
    return result


def check_ic(
    mechanism: MechanismFn,
    instances: Iterable[AuctionInstance],
    space: DeviationSpace = DeviationSpace(),
) -> CheckResult:
    """No unilateral misreport (valuation table and/or invitation subset)
    strictly beats truth-telling, others held fixed."""
    rng = random.Random(space.seed)
    result = CheckResult("IC", "exhaustive")
    for inst in instances:
        result.instances += 1
        truthful = inst.truthful()
        reachable = qualified_set(truthful)
        for i in sorted(reachable):
            true_rep = truthful.reports[i]
            devs, clipped = _unilateral_deviations(true_rep, inst.m, space, rng)
            result.budget_exceeded |= clipped
            for ctx in _others_contexts(inst, i, space, rng):
                base = truthful
                for rep in ctx:
                    base = base.with_report(rep)
                result.cases += 1
                u_truth = utility(true_rep, mechanism(base), i)
                for dev in devs:
                    outcome = mechanism(base.with_report(dev))
                    result.cases += 1
                    gain = utility(true_rep, outcome, i) - u_truth
                    if gain > 0:
                        result.violations.append(
                            Violation("IC", inst, i, dev, gain, ctx)
                        )
    if result.budget_exceeded or space.others_budget > 0:
        result.scope = "sampled"
    return result


def check_wbb(
    mechanism: MechanismFn, instances: Iterable[AuctionInstance]
) -> CheckResult:
    """The seller never ends up out of pocket."""
    result = CheckResult("WBB", "exhaustive")
    for inst in instances:
        result.instances += 1
        result.cases += 1
        outcome = mechanism(inst)
        if outcome.seller_revenue < 0:
            result.violations.append(
                Violation("WBB", inst, None, None, outcome.seller_revenue)
            )
    return result


def find_epi4nw_witness(
    mechanism: MechanismFn, instances: Iterable[AuctionInstance]
) -> Violation | None:
    """First bidder found holding nothing yet being paid (payment < 0).
    This is an existence property, so one witness settles it."""
    for inst in instances:
        outcome = mechanism(inst)
        for i in sorted(outcome.payment):
            if outcome.allocation.get(i, 0) == 0 and outcome.payment[i] < 0:
                return Violation(
                    "EPI4NW", inst, i, None, outcome.payment[i],
                    note="empty-handed bidder with negative payment",
                )
    return None


# ---------------------------------------------------------------------------
# Candidate split consistency
# ---------------------------------------------------------------------------


def check_cdp_consistency(
    cdp: CdpFn,
    networks: Iterable[tuple[frozenset[int], dict[int, frozenset[int]]]],
) -> CheckResult:
    """Exhaustive unilateral invitation perturbation against the three
    candidacy rules: a candidate reporting more stays a candidate; a
    truthfully reporting non-trader cannot leave the non-trading side by
    deviating; an unclassified bidder reporting more changes nothing.

    Also probes the split's type contract (a candidate split is a function
    of invitation reports alone) by bumping one valuation at a time and
    requiring bitwise-identical output."""
    result = CheckResult("CDC", "exhaustive")
    for seller, out_edges in networks:
        result.instances += 1
        inst = network_instance(seller, out_edges)
        probe_table = Valuation.from_pairs(inst.m, {full_bundle(inst.m): 7})
        frontier = tuple(sorted(seller))
        for i, true_neighbors in out_edges.items():
            subs = _subsets(true_neighbors)
            outputs: dict[frozenset[int], DistributorPartition] = {}
            rep = inst.reports[i]
            for sub in subs:
                outputs[sub] = cdp(inst.with_report(rep.with_neighbors(sub)), frontier)
                result.cases += 1
            full = outputs[true_neighbors]
            bumped = cdp(inst.with_report(rep.with_valuation(probe_table)), frontier)
            result.cases += 1
            if (
                set(bumped.candidates) != set(full.candidates)
                or bumped.non_trading != full.non_trading
            ):
                result.violations.append(
                    Violation(
                        "CDC", inst, i, rep.with_valuation(probe_table), 0,
                        note="split depends on a valuation report",
                    )
                )
            for sub in subs:
                if i in full.non_trading and i not in outputs[sub].non_trading:
                    result.violations.append(
                        Violation(
                            "CDC", inst, i, rep.with_neighbors(sub), 0,
                            note="left the non-trading side by deviating",
                        )
                    )
            for small, big in itertools.combinations(subs, 2):
                lo, hi = (small, big) if small <= big else (big, small)
                if not lo <= hi or lo == hi:
                    continue
                out_lo, out_hi = outputs[lo], outputs[hi]
                if i in out_lo.candidates and i not in out_hi.candidates:
                    result.violations.append(
                        Violation(
                            "CDC", inst, i, rep.with_neighbors(hi), 0,
                            note="candidate dropped after reporting more",
                        )
                    )
                unclassified = (
                    i not in out_lo.candidates and i not in out_lo.non_trading
                )
                if unclassified and (
                    set(out_lo.candidates) != set(out_hi.candidates)
                    or out_lo.non_trading != out_hi.non_trading
                ):
                    result.violations.append(
                        Violation(
                            "CDC", inst, i, rep.with_neighbors(hi), 0,
                            note="unclassified bidder changed the split",
                        )
                    )
    return result


# ---------------------------------------------------------------------------
# Bundle division locality / resale diffusion monotonicity
# ---------------------------------------------------------------------------


def check_bdp_locality(
    bdp: BdpFn,
    instances: Iterable[AuctionInstance],
    cdp: CdpFn | None = None,
    *,
    pr_fn=None,
    rev_fn=None,
) -> CheckResult:
    """A candidate's invitation report never moves any bundle tuple: with the
    split, pool, and prices held fixed, every subset report of every candidate
    yields the identical tuple sequence."""
    from .drm import graph_exploration_cdp
    from .framework import price_fn, resale_revenue_fn

    cdp = cdp or graph_exploration_cdp
    pr_fn = pr_fn or price_fn
    rev_fn = rev_fn or resale_revenue_fn
    result = CheckResult("RDM", "exhaustive")
    for inst in instances:
        result.instances += 1
        frontier = tuple(sorted(inst.seller_neighbors))
        if not frontier:
            continue
        partition = cdp(inst, frontier)
        tn_reports = [inst.reports[j] for j in sorted(partition.non_trading)]
        pr = lambda b: pr_fn(tn_reports, b)  # noqa: E731
        rev = lambda b: rev_fn(tn_reports, b)  # noqa: E731
        pool = full_bundle(inst.m)
        baseline = bdp(
            inst, pool, partition.candidates, partition.non_trading, pr, rev, rng=0
        )
        result.cases += 1
        for i in partition.candidates:
            rep = inst.reports[i]
            for sub in _subsets(rep.neighbors):
                varied = bdp(
                    inst.with_report(rep.with_neighbors(sub)),
                    pool,
                    partition.candidates,
                    partition.non_trading,
                    pr,
                    rev,
                    rng=0,
                )
                result.cases += 1
                if varied != baseline:
                    result.violations.append(
                        Violation(
                            "RDM", inst, i, rep.with_neighbors(sub), 0,
                            note="bundle tuples moved with a neighbor report",
                        )
                    )
    return result


def check_rdm_end_to_end(
    mechanism: MechanismFn,
    instances: Iterable[AuctionInstance],
    cdp: CdpFn | None = None,
) -> CheckResult:
    """Literal utility form of resale diffusion monotonicity: a first-round
    candidate's true utility is non-decreasing in her invitation report.
    Checked end to end through the whole mechanism."""
    from .drm import graph_exploration_cdp

    cdp = cdp or graph_exploration_cdp
    result = CheckResult("RDM", "exhaustive")
    for inst in instances:
        result.instances += 1
        truthful = inst.truthful()
        frontier = tuple(sorted(inst.seller_neighbors))
        if not frontier:
            continue
        candidates = cdp(truthful, frontier).candidates
        for i in candidates:
            true_rep = truthful.reports[i]
            subs = _subsets(true_rep.neighbors)
            utilities = {}
            for sub in subs:
                outcome = mechanism(truthful.with_report(true_rep.with_neighbors(sub)))
                result.cases += 1
                utilities[sub] = utility(true_rep, outcome, i)
            for small, big in itertools.combinations(subs, 2):
                lo, hi = (small, big) if small <= big else (big, small)
                if not lo <= hi or lo == hi:
                    continue
                if utilities[lo] > utilities[hi]:
                    result.violations.append(
                        Violation(
                            "RDM", inst, i, true_rep.with_neighbors(lo),
                            utilities[lo] - utilities[hi],
                            note="utility fell as the invitation report grew",
                        )
                    )
    return result


# ---------------------------------------------------------------------------
# Revenue consistency of the local single-item mechanism
# ---------------------------------------------------------------------------


def check_revenue_consistency(
    single_item_mech: SingleItemFn,
    markets: Iterable[AuctionInstance],
    rev_grid: Sequence[Money],
    space: DeviationSpace = DeviationSpace(),
) -> CheckResult:
    """No bidder with positive truthful utility can flip whether the local
    market's revenue clears a resale threshold while keeping her utility
    positive, for any threshold on the grid."""
    rng = random.Random(space.seed)
    result = CheckResult("RC", "exhaustive")
    for market in markets:
        result.instances += 1
        truthful = market.truthful()
        grand = full_bundle(market.m)
        reachable = qualified_set(truthful)
        values = {j: truthful.reports[j].valuation.of(grand) for j in reachable}
        base = single_item_mech(truthful, values)
        result.cases += 1
        for i in sorted(reachable):
            true_rep = truthful.reports[i]
            true_value = true_rep.valuation.of(grand)
            u_truth = (true_value if base.winner == i else 0) - base.payments.get(i, 0)
            if u_truth <= 0:
                continue
            devs, clipped = _unilateral_deviations(true_rep, market.m, space, rng)
            result.budget_exceeded |= clipped
            for dev in devs:
                dev_inst = truthful.with_report(dev)
                dev_q = qualified_set(dev_inst)
                dev_values = {
                    j: dev_inst.reports[j].valuation.of(grand) for j in dev_q
                }
                dev_result = single_item_mech(dev_inst, dev_values)
                result.cases += 1
                u_dev = (
                    true_value if dev_result.winner == i else 0
                ) - dev_result.payments.get(i, 0)
                if u_dev <= 0:
                    continue
                for level in rev_grid:
                    if (base.revenue < level) != (dev_result.revenue < level):
                        result.violations.append(
                            Violation(
                                "RC", market, i, dev,
                                dev_result.revenue - base.revenue,
                                note=f"threshold {level} flipped",
                            )
                        )
                        break
    if result.budget_exceeded:
        result.scope = "sampled"
    return result


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


def replay_violation(mechanism: MechanismFn, violation: Violation) -> Money:
    """Recompute the stored delta from scratch; soundness means equality."""
    if violation.prop == "IR":
        outcome = mechanism(violation.deviated_instance())
        true_rep = violation.instance.true_report(violation.bidder)
        return utility(true_rep, outcome, violation.bidder)
    if violation.prop == "IC":
        true_rep = violation.instance.true_report(violation.bidder)
        u_truth = utility(true_rep, mechanism(violation.base_instance()), violation.bidder)
        u_dev = utility(true_rep, mechanism(violation.deviated_instance()), violation.bidder)
        return u_dev - u_truth
    if violation.prop == "WBB":
        return mechanism(violation.instance).seller_revenue
    if violation.prop == "EPI4NW":
        return mechanism(violation.instance).payment[violation.bidder]
    raise ValueError(f"no replay rule for {violation.prop}")
