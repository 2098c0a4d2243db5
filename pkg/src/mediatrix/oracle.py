"""Brute-force certification of solution construction.

The enumerator walks every joint plan assignment and derives the forced
transfer set for each, keeping those that satisfy the same admissibility
conditions the planner enforces. Diffing its verdict against
create_solution certifies soundness and completeness on small scenarios.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Iterable

from .agent import AgentState, GiveAction
from .lang import Constant, Literal, Modality
from .logic import DEFAULT_PROOF_DEPTH, DepthExceeded, Entry, Theory, prove
from .mediator import (
    Solution,
    _blocked_transfers,
    _plans_for,
    believed_ownership,
    create_solution,
)
from .scenario import Scenario


@dataclass(frozen=True)
class Candidate:
    plans: tuple[tuple[str, str], ...]  # (agent, rule label), agent order
    transfers: frozenset[GiveAction]


def brute_force_candidates(
    gamma: Theory,
    goals: dict[str, Literal],
    generous: Iterable[str] = (),
    exclude: Iterable[GiveAction] = (),
    depth: int = DEFAULT_PROOF_DEPTH,
) -> list[Candidate]:
    """Every admissible joint plan assignment with its forced transfers.

    A resource has a unique believed owner, so once plans are fixed the
    transfer set is forced; admissibility mirrors the planner: the donor
    must exist, differ from the taker, be generous or not need the item
    for its own assigned plan, the transfer must not be blocked, and a
    transfer-intention argument must be provable.
    """
    if not goals:
        return []
    agents = sorted(goals)
    owner_of = believed_ownership(gamma)
    owned = {a: {r for r, o in owner_of.items() if o == a} for a in agents}
    generous = set(generous)
    excluded = set(exclude) | _blocked_transfers(gamma)
    per_agent = [_plans_for(gamma, a, goals[a], owned[a]) for a in agents]
    if any(not plans for plans in per_agent):
        return []

    out: list[Candidate] = []
    for assignment in itertools.product(*per_agent):
        needed = {p.agent: set(p.needed) for p in assignment}
        transfers: set[GiveAction] = set()
        ok = True
        for p in assignment:
            for res in p.unmet:
                donor = owner_of.get(res)
                if donor is None or donor == p.agent:
                    ok = False
                    break
                if donor not in generous and res in needed.get(donor, set()):
                    ok = False
                    break
                give = GiveAction(donor, p.agent, res)
                if give in excluded or any(t.resource == res for t in transfers):
                    ok = False
                    break
                transfers.add(give)
            if not ok:
                break
        if not ok:
            continue
        for give in transfers:
            try:
                if prove(gamma, give.intention(give.receiver), depth) is None:
                    ok = False
            except DepthExceeded:
                ok = False
            if not ok:
                break
        if ok:
            out.append(
                Candidate(tuple((p.agent, p.rule_label) for p in assignment), frozenset(transfers))
            )
    return out


def oracle_diff(
    gamma: Theory,
    goals: dict[str, Literal],
    generous: Iterable[str] = (),
    exclude: Iterable[GiveAction] = (),
    depth: int = DEFAULT_PROOF_DEPTH,
) -> list[str]:
    """Discrepancies between the planner and the enumerator; empty means agreement."""
    candidates = brute_force_candidates(gamma, goals, generous, exclude, depth)
    solution = create_solution(gamma, goals, {}, generous, exclude, depth)
    diffs = []
    if solution is None:
        if candidates:
            diffs.append(
                f"planner found no solution but {len(candidates)} candidate(s) exist, "
                f"e.g. plans {candidates[0].plans}"
            )
        return diffs
    found = Candidate(
        tuple((p.agent, p.rule_label) for p in solution.assignment),
        frozenset(solution.transfers),
    )
    if not candidates:
        diffs.append(f"planner returned {found.plans} but the enumerator finds no candidate")
    elif found not in candidates:
        diffs.append(
            f"planner returned {found.plans} with transfers "
            f"{sorted(map(str, found.transfers))}, not among the enumerator's candidates"
        )
    return diffs


def full_disclosure(scenario: Scenario) -> tuple[Theory, dict[str, Literal], set[str]]:
    """The mediator's theory after every agent disclosed everything.

    Returns the combined theory, one goal atom per agent, and the set of
    generous participants.
    """
    gamma = scenario.mediator.theory
    n = itertools.count(1)
    additions: list[tuple[str, Entry]] = []

    def offer(item: Entry) -> None:
        if not gamma.contains(item) and not any(item == e for _, e in additions):
            additions.append((f"O.{next(n)}", item))

    goals: dict[str, Literal] = {}
    for agent in scenario.agents:
        for _, item in agent.unit("B").entries():
            offer(item)
        for label, fact in agent.unit("I").facts():
            wrapped = fact if fact.modality is not Modality.NONE else _intend(agent, fact)
            offer(wrapped)
            if label in agent.goal_labels and agent.id not in goals:
                goals[agent.id] = fact.atom()
        for decl in _resource_facts(agent):
            offer(decl)
    gamma = gamma.extended(additions)
    generous = gamma.generosity_owners()
    return gamma, goals, generous


def _intend(agent: AgentState, fact: Literal) -> Literal:
    return replace(fact, modality=Modality.INT, owner=Constant(agent.id))


def _resource_facts(agent: AgentState) -> list[Literal]:
    return [
        Literal("have", (Constant(agent.id), Constant(name))) for name, _ in agent.resources
    ]


def certify(scenario: Scenario, depth: int = DEFAULT_PROOF_DEPTH) -> list[str]:
    """Oracle verdict for a scenario under full disclosure."""
    gamma, goals, generous = full_disclosure(scenario)
    return oracle_diff(gamma, goals, generous, depth=depth)
