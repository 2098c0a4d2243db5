"""The mediator: belief revision, solution construction, and the mediation game.

Each round the mediator gathers knowledge from both agents, revises its
theory, and tries to build a solution: a joint plan assignment plus a set
of resource transfers, each backed by an argument. Proposals are accepted
or rejected by the agents; a single rejection triggers a one-repair
negotiation, a double rejection teaches the mediator not to propose the
same transfers again.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional

from . import transcript as tr
from .agent import (
    AgentState,
    DisclosureItem,
    GiveAction,
    Message,
    MessageKind,
    ResourceDecl,
    bridge_step,
    disclose,
    execute_give,
)
from .argumentation import (
    Argument,
    Decision,
    SupportItem,
    Verdict,
    construct_argument,
    evaluate,
)
from .lang import Constant, Literal, Modality
from .logic import (
    DEFAULT_PROOF_DEPTH,
    GIVE,
    OWNS,
    DepthExceeded,
    Entry,
    GeneralRule,
    LogicError,
    Rule,
    Theory,
    base_goals,
    entry_canonical,
)
from .lang import unify


class MediationError(Exception):
    pass


class IncoherentInput(MediationError):
    """Incoming knowledge contains a complementary pair."""


class RoundLimitExceeded(MediationError):
    pass


@dataclass(frozen=True)
class MediatorState:
    id: str
    theory: Theory
    resources: tuple[tuple[str, Fraction], ...] = ()

    def general_theory(self) -> list[tuple[str, Rule]]:
        """Rules with free variables, reusable across cases."""
        return [(l, r) for l, r in self.theory.rules() if not r.is_fact and _rule_vars(r)]

    def case_theory(self) -> list[tuple[str, Entry]]:
        return [
            (l, e)
            for l, e in self.theory.entries()
            if isinstance(e, Literal) or not _rule_vars(e)
        ]


def _rule_vars(rule: Rule) -> set[str]:
    vs = rule.head.variables()
    for lit in rule.body + rule.naf:
        vs |= lit.variables()
    return vs


@dataclass(frozen=True)
class MediatorPlan:
    agent: str
    goal: Literal
    rule_label: str
    preconditions: tuple[Literal, ...]
    needed: tuple[str, ...]  # resources the agent must hold for the plan
    unmet: tuple[str, ...]   # needed resources the agent does not hold yet


@dataclass(frozen=True)
class Solution:
    arguments: tuple[Argument, ...]
    assignment: tuple[MediatorPlan, ...]  # one plan per agent, agent order
    transfers: tuple[GiveAction, ...]

    def conclusions(self) -> tuple[Literal, ...]:
        return tuple(a.conclusion for a in self.arguments)

    def record(self) -> tr.SolutionRecord:
        return tr.SolutionRecord(
            arguments=tuple(
                tr.ArgumentRecord(str(a.conclusion), tuple(sorted(a.labels())))
                for a in self.arguments
            ),
            transfers=tuple(str(t) for t in self.transfers),
            plans=tuple((p.agent, p.rule_label) for p in self.assignment),
        )


@dataclass(frozen=True)
class Outcome:
    status: str  # success | failure
    reason: str
    rounds: int
    solution: Optional[Solution]
    transcript: tr.Transcript


# ----------------------------------------------------------------------
# Belief revision
# ----------------------------------------------------------------------


def revise(gamma: Theory, incoming: list[tuple[str, Entry]]) -> Theory:
    """Newest-wins base revision.

    Stored base facts conflicting with an incoming literal are dropped,
    then the incoming items are appended (duplicates skipped). Derived
    facts are never stored, so the result is consistent at the base level.
    """
    incoming_facts = [e for _, e in incoming if isinstance(e, Literal)]
    for i, a in enumerate(incoming_facts):
        for b in incoming_facts[i + 1 :]:
            if a == b.complement():
                raise IncoherentInput(f"incoming knowledge asserts both {a} and {b}")
    doomed = set()
    for label, fact in gamma.facts():
        if any(fact == inc.complement() for inc in incoming_facts):
            doomed.add(label)
    kept = [(l, e) for l, e in gamma.entries() if l not in doomed]
    return Theory(kept, gamma.general).extended(incoming)


# ----------------------------------------------------------------------
# Solution construction
# ----------------------------------------------------------------------


def believed_ownership(gamma: Theory) -> dict[str, str]:
    """resource -> owner, from the theory's ownership facts (first wins)."""
    owners: dict[str, str] = {}
    for _, fact in gamma.facts():
        if (
            fact.modality is Modality.NONE
            and fact.positive
            and fact.predicate == OWNS
            and len(fact.args) == 2
            and all(isinstance(a, Constant) for a in fact.args)
        ):
            owners.setdefault(fact.args[1].symbol, fact.args[0].symbol)
    return owners


def _plans_for(gamma: Theory, agent: str, goal_atom: Literal, owned: set[str]) -> list[MediatorPlan]:
    plans, seen = [], set()
    for label, rule in gamma.rules():
        if rule.is_fact:
            continue
        r = rule.rename(0)
        s = unify(goal_atom, r.head)
        if s is None:
            continue
        key = rule.canonical()
        if key in seen:
            continue
        seen.add(key)
        preconds = tuple(s.apply(b) for b in r.body)
        needed, unmet, grounded = [], [], True
        for p in preconds:
            if p.predicate == OWNS and len(p.args) == 2 and p.args[0] == Constant(agent):
                if not isinstance(p.args[1], Constant):
                    grounded = False
                    break
                res = p.args[1].symbol
                needed.append(res)
                if res not in owned:
                    unmet.append(res)
            elif not (p.is_ground() and gamma.has_fact(p)):
                grounded = False
                break
        if grounded:
            plans.append(MediatorPlan(agent, goal_atom, label, preconds, tuple(needed), tuple(unmet)))
    plans.sort(key=lambda p: (len(p.unmet), p.rule_label))
    return plans


def _blocked_transfers(gamma: Theory) -> set[GiveAction]:
    """Transfers whose intention the theory explicitly negates."""
    out = set()
    for _, fact in gamma.facts():
        if (
            fact.modality is Modality.INT
            and not fact.positive
            and fact.predicate == GIVE
            and len(fact.args) == 3
            and all(isinstance(a, Constant) for a in fact.args)
        ):
            out.add(GiveAction(*(a.symbol for a in fact.args)))
    return out


def create_solution(
    gamma: Theory,
    goals: dict[str, Literal],
    ownership: dict[str, frozenset[str]],
    generous: Iterable[str] = (),
    exclude: Iterable[GiveAction] = (),
    depth: int = DEFAULT_PROOF_DEPTH,
) -> Optional[Solution]:
    """Deterministic goal-directed joint planning under the unicity constraint.

    Agents are processed by id, plans in unique-choice order, and each
    unmet precondition is satisfied by a transfer from its owner, admitted
    only when the owner is generous or the owner's own assigned plan does
    not need the resource. The first feasible assignment yields the
    solution; every transfer is backed by a freshly constructed argument.
    """
    if not goals:
        return None
    agents = sorted(goals)
    owner_of = believed_ownership(gamma)
    owned = {a: {r for r, o in owner_of.items() if o == a} for a in agents}
    generous = set(generous)
    excluded = set(exclude) | _blocked_transfers(gamma)

    per_agent = [_plans_for(gamma, a, goals[a], owned[a]) for a in agents]
    if any(not plans for plans in per_agent):
        return None

    for assignment in itertools.product(*per_agent):
        needed = {p.agent: set(p.needed) for p in assignment}
        transfers: list[GiveAction] = []
        taken: set[str] = set()
        feasible = True
        for p in assignment:
            for res in p.unmet:
                donor = owner_of.get(res)
                if donor is None or donor == p.agent or res in taken:
                    feasible = False
                    break
                if donor not in generous and res in needed.get(donor, set()):
                    feasible = False
                    break
                give = GiveAction(donor, p.agent, res)
                if give in excluded:
                    feasible = False
                    break
                taken.add(res)
                transfers.append(give)
            if not feasible:
                break
        if not feasible:
            continue
        arguments = []
        for give in transfers:
            try:
                arg = construct_argument(gamma, give.intention(give.receiver), depth)
            except DepthExceeded:
                arg = None
            if arg is None:
                feasible = False
                break
            arguments.append(arg)
        if feasible:
            return Solution(tuple(arguments), assignment, tuple(transfers))
    return None


def solution_feasible(
    solution: Solution, ownership: dict[str, frozenset[str]]
) -> bool:
    """Replay check: transfers execute in order and every plan is then met."""
    world = dict(ownership)
    try:
        for give in solution.transfers:
            world = execute_give(world, give)
    except Exception:
        return False
    for p in solution.assignment:
        if not set(p.needed) <= world.get(p.agent, frozenset()):
            return False
    return True


# ----------------------------------------------------------------------
# The mediation game
# ----------------------------------------------------------------------


@dataclass
class MediationConfig:
    max_rounds: int = 64
    stall_threshold: int = 1
    proof_depth: int = DEFAULT_PROOF_DEPTH


class Mediation:
    """One mediation run over two agents and a mediator."""

    def __init__(
        self,
        agents: list[AgentState],
        mediator: MediatorState,
        config: Optional[MediationConfig] = None,
        scenario_name: str = "scenario",
    ):
        if len(agents) != 2:
            raise ValueError("exactly two negotiating agents are supported")
        self.agents = {a.id: a for a in agents}
        self.order = [a.id for a in agents]
        self.mediator = mediator
        self.config = config or MediationConfig()
        self.scenario_name = scenario_name
        self.gamma = mediator.theory
        self.world: dict[str, frozenset[str]] = {
            a.id: frozenset(a.owned()) for a in agents
        }
        self.world[mediator.id] = frozenset(n for n, _ in mediator.resources)
        self._label_no = self._initial_label_no()
        self._rounds: list[tr.Round] = []

    def _initial_label_no(self) -> int:
        n = 0
        for label in self.gamma.labels():
            m = re.fullmatch(r"M\.(\d+)", label)
            if m:
                n = max(n, int(m.group(1)))
        return n

    def _label_incoming(self, items: list[Entry]) -> list[tuple[str, Entry]]:
        out = []
        seen = set()
        for item in items:
            key = entry_canonical(item)
            if key in seen or self.gamma.contains(item):
                continue
            seen.add(key)
            self._label_no += 1
            out.append((f"M.{self._label_no}", item))
        return out

    # -- protocol steps ------------------------------------------------

    def get_knowledge(self, agent_id: str, round_no: int) -> list[DisclosureItem]:
        agent, package = disclose(self.agents[agent_id], round_no)
        self.agents[agent_id] = agent
        return package

    def _fold(self, packages: dict[str, list[DisclosureItem]]) -> list[str]:
        items: list[Entry] = []
        for agent_id in self.order:
            for d in packages[agent_id]:
                payload = d.payload
                if isinstance(payload, ResourceDecl):
                    items.append(payload.have())
                else:
                    items.append(payload)
        labelled = self._label_incoming(items)
        self.gamma = revise(self.gamma, labelled)
        return [l for l, _ in labelled]

    def goals(self) -> dict[str, Literal]:
        out = {}
        for agent_id in self.order:
            found = base_goals(self.gamma, agent_id)
            if found:
                out[agent_id] = found[0][1].atom()
        return out

    def _relevant(self, solution: Solution, agent_id: str) -> list[Argument]:
        rel = []
        for arg in solution.arguments:
            c = arg.conclusion
            parties = {c.owner.symbol if isinstance(c.owner, Constant) else None}
            parties |= {a.symbol for a in c.args if isinstance(a, Constant)}
            if agent_id in parties:
                rel.append(arg)
        return rel

    def propose(self, agent_id: str, solution: Solution) -> tuple[bool, list[SupportItem], tr.ProposalRecord]:
        """Send the solution's relevant arguments; accept iff all are accepted."""
        bundle = self._relevant(solution, agent_id)
        context: list[tuple[str, Entry]] = [
            (f"S.{i + 1}", c) for i, c in enumerate(solution.conclusions())
        ]
        for arg in bundle:
            for s in arg.support:
                if not isinstance(s.item, GeneralRule):
                    context.append((s.label, s.item))
        delta = self.agents[agent_id].delta()
        accepted = True
        explanation: list[SupportItem] = []
        decisions: list[tr.DecisionRecord] = []
        for arg in bundle:
            decision = evaluate(delta, arg, context, self.config.proof_depth)
            if decision.verdict is Verdict.REJECT:
                accepted = False
                for s in decision.explanation:
                    if s not in explanation:
                        explanation.append(s)
            decisions.append(
                tr.DecisionRecord(
                    str(arg.conclusion),
                    decision.verdict.value,
                    tuple(str(s.label) for s in decision.explanation),
                )
            )
        return accepted, explanation, tr.ProposalRecord(agent_id, accepted, tuple(decisions))

    def negotiate(
        self,
        solution: Solution,
        rejecting: str,
        explanation: list[SupportItem],
        rejected_args: list[Argument],
    ) -> tuple[Optional[Solution], tr.NegotiationRecord, list[tr.ProposalRecord]]:
        """Single-repair exchange after exactly one rejection.

        The rejector's counter-argument support joins the working theory,
        the attacked transfers are excluded, and one replanning attempt is
        made; the repair stands only if both agents accept it.
        """
        items = [(s.label, s.item) for s in explanation if not isinstance(s.item, GeneralRule)]
        self.gamma = revise(self.gamma, self._label_incoming([e for _, e in items]))
        excluded = set()
        for arg in rejected_args:
            c = arg.conclusion
            if c.predicate == GIVE and len(c.args) == 3:
                excluded.add(GiveAction(*(a.symbol for a in c.args)))
        repaired = create_solution(
            self.gamma,
            self.goals(),
            self.world,
            generous=self._generous(),
            exclude=excluded,
            depth=self.config.proof_depth,
        )
        explanations = {a: () for a in self.order}
        explanations[rejecting] = tuple(sorted(s.label for s in explanation))
        proposals: list[tr.ProposalRecord] = []
        if repaired is None:
            record = tr.NegotiationRecord(
                rejecting, None, False, tuple(sorted(explanations.items()))
            )
            return None, record, proposals
        ok = True
        for agent_id in self.order:
            accepted, expl, prop = self.propose(agent_id, repaired)
            proposals.append(prop)
            if not accepted:
                ok = False
                explanations[agent_id] = tuple(sorted({s.label for s in expl}))
        record = tr.NegotiationRecord(
            rejecting, repaired.record(), ok, tuple(sorted(explanations.items()))
        )
        return (repaired if ok else None), record, proposals

    def _generous(self) -> set[str]:
        return self.gamma.generosity_owners()

    def _negate_solution(self, solution: Solution) -> list[Entry]:
        return [c.complement() for c in solution.conclusions()]

    # -- acceptance execution -------------------------------------------

    def _execute(self, solution: Solution) -> list[tr.MessageRecord]:
        """Deliver the accepted arguments and run the message exchange."""
        log: list[tr.MessageRecord] = []
        queue: list[Message] = []
        for arg in solution.arguments:
            target = arg.conclusion.owner.symbol
            items = tuple(s.item for s in arg.support if not isinstance(s.item, GeneralRule))
            msg = Message(MessageKind.TELL, self.mediator.id, target, (items, arg.conclusion))
            queue.append(msg)

        def record(m: Message) -> None:
            payload = m.payload
            if m.kind is MessageKind.TELL:
                payload = str(payload[1])
            log.append(tr.MessageRecord(m.kind.value, m.sender, m.receiver, str(payload)))

        for _ in range(32):  # exchange settles in a handful of waves
            if not queue:
                break
            for m in queue:
                record(m)
            inboxes: dict[str, list[Message]] = {a: [] for a in self.order}
            mediator_inbox: list[Message] = []
            for m in queue:
                if m.receiver in inboxes:
                    inboxes[m.receiver].append(m)
                elif m.receiver == self.mediator.id:
                    mediator_inbox.append(m)
            queue = []
            for agent_id in self.order:
                state, outbox = bridge_step(self.agents[agent_id], inboxes[agent_id])
                self.agents[agent_id] = state
                for m in outbox:
                    if m.kind is MessageKind.GIVE:
                        self.world = execute_give(self.world, m.payload)
                    queue.append(m)
            for m in mediator_inbox:
                if m.kind is MessageKind.ASK and self.mediator.id in self._generous():
                    action: GiveAction = m.payload
                    if action.resource in self.world.get(self.mediator.id, frozenset()):
                        self.world = execute_give(self.world, action)
                        queue.append(
                            Message(MessageKind.GIVE, self.mediator.id, action.receiver, action)
                        )
        return log

    # -- the main loop ---------------------------------------------------

    def run(self) -> Outcome:
        stall = 0
        final: Optional[Solution] = None
        status, reason = "failure", "round limit exceeded"
        rounds_played = 0
        for round_no in range(1, self.config.max_rounds + 1):
            rounds_played = round_no
            packages = {a: self.get_knowledge(a, round_no) for a in self.order}
            delta_labels = self._fold(packages)
            new_knowledge = bool(delta_labels)
            solution = create_solution(
                self.gamma,
                self.goals(),
                self.world,
                generous=self._generous(),
                depth=self.config.proof_depth,
            )
            proposals: list[tr.ProposalRecord] = []
            negotiation: Optional[tr.NegotiationRecord] = None
            messages: list[tr.MessageRecord] = []
            done = False

            if solution is None:
                stall = stall + 1 if not new_knowledge else 0
                if stall >= self.config.stall_threshold:
                    status, reason = "failure", "no new knowledge and no solution"
                    done = True
            else:
                stall = 0
                results = {}
                explanations = {}
                rejected_args: dict[str, list[Argument]] = {}
                for agent_id in self.order:
                    accepted, expl, prop = self.propose(agent_id, solution)
                    proposals.append(prop)
                    results[agent_id] = accepted
                    explanations[agent_id] = expl
                    rejected_args[agent_id] = [
                        arg
                        for arg, dec in zip(self._relevant(solution, agent_id), prop.decisions)
                        if dec.verdict == "reject"
                    ]
                expl_items = [
                    (s.label, s.item)
                    for agent_id in self.order
                    for s in explanations[agent_id]
                    if not isinstance(s.item, GeneralRule)
                ]
                if expl_items:
                    self.gamma = revise(
                        self.gamma, self._label_incoming([e for _, e in expl_items])
                    )
                if all(results.values()):
                    messages = self._execute(solution)
                    final = solution
                    status, reason = "success", "both agents accepted the solution"
                    done = True
                elif not any(results.values()):
                    negated = self._negate_solution(solution)
                    self.gamma = revise(self.gamma, self._label_incoming(negated))
                else:
                    rejecting = next(a for a in self.order if not results[a])
                    repaired, negotiation, neg_props = self.negotiate(
                        solution,
                        rejecting,
                        explanations[rejecting],
                        rejected_args[rejecting],
                    )
                    proposals.extend(neg_props)
                    if repaired is not None:
                        messages = self._execute(repaired)
                        final = repaired
                        status, reason = "success", "negotiated repair accepted"
                        done = True
                    else:
                        negated = self._negate_solution(solution)
                        self.gamma = revise(self.gamma, self._label_incoming(negated))

            self._rounds.append(
                tr.Round(
                    number=round_no,
                    disclosures=tuple(
                        (a, tuple(str(d.payload) for d in packages[a])) for a in self.order
                    ),
                    revision_delta=tuple(delta_labels),
                    new_knowledge=new_knowledge,
                    solution=None if solution is None else solution.record(),
                    proposals=tuple(proposals),
                    negotiation=negotiation,
                    messages=tuple(messages),
                )
            )
            if done:
                break
        else:
            rounds_played = self.config.max_rounds

        transcript = tr.Transcript(
            scenario_name=self.scenario_name,
            outcome=status,
            reason=reason,
            rounds=tuple(self._rounds),
            final_ownership=tuple(
                (a, tuple(sorted(self.world.get(a, frozenset()))))
                for a in sorted(self.world)
            ),
        )
        return Outcome(status, reason, rounds_played, final, transcript)


def mediate(
    agents: list[AgentState],
    mediator: MediatorState,
    config: Optional[MediationConfig] = None,
    scenario_name: str = "scenario",
) -> Outcome:
    return Mediation(agents, mediator, config, scenario_name).run()
