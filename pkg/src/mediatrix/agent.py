"""Strongly realist BDI agents.

An agent keeps four unit theories (beliefs, desires, intentions,
communication log), a value-ordered resource list and a disclosure
strategy. Bridge rules move content between units and the wire: told
beliefs are trusted, wanted transfers become requests, and requests for
unneeded items are granted.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Union

from .lang import Constant, Literal, Modality, Variable, intends, modal, unify
from .logic import (
    GIVE,
    OWNS,
    Entry,
    GeneralKind,
    GeneralRule,
    Rule,
    Theory,
    entry_canonical,
)

# Bridge rule labels; the rules themselves are built in and toggled per scenario.
BRIDGE_ADVICE = "advice"            # tell an agent about its own possible intention
BRIDGE_ADVICE_RULE = "advice_rule"  # tell an agent an enabling rule for its intention
BRIDGE_TRUST = "trust"              # fold told mediator beliefs into the belief unit
BRIDGE_REQUEST = "request"          # wanted incoming transfers become outgoing asks
BRIDGE_ACCEPT = "accept_request"    # grant an ask for an item not intended to keep
ALL_BRIDGES = (BRIDGE_ADVICE, BRIDGE_ADVICE_RULE, BRIDGE_TRUST, BRIDGE_REQUEST, BRIDGE_ACCEPT)


class AgentError(Exception):
    pass


class RealismViolation(AgentError):
    """Realism propagation produced a complementary pair in some unit."""


class NotOwner(AgentError):
    """A transfer was executed by an agent that does not own the resource."""


class Strategy(Enum):
    CAUTIOUS = "cautious"
    EAGER = "eager"


class MessageKind(Enum):
    TELL = "tell"
    ASK = "ask"
    GIVE = "give"
    ACCEPT = "accept"
    REJECT = "reject"


@dataclass(frozen=True)
class GiveAction:
    giver: str
    receiver: str
    resource: str

    def literal(self) -> Literal:
        return Literal(GIVE, (Constant(self.giver), Constant(self.receiver), Constant(self.resource)))

    def intention(self, owner: str) -> Literal:
        return intends(Constant(owner), self.literal())

    def __str__(self) -> str:
        return f"give({self.giver}, {self.receiver}, {self.resource})"


@dataclass(frozen=True)
class Message:
    kind: MessageKind
    sender: str
    receiver: str
    payload: object  # literal, (items, literal) for tell, GiveAction, or Decision

    def __str__(self) -> str:
        return f"{self.kind.value}({self.sender} -> {self.receiver}: {self.payload})"


@dataclass(frozen=True)
class Plan:
    goal: Literal
    rule_label: str
    rule: Rule
    preconditions: tuple[Literal, ...]
    unmet: tuple[Literal, ...]
    transfers: tuple[GiveAction, ...]
    selected: bool = False


@dataclass(frozen=True)
class DisclosureItem:
    label: str
    payload: Union[Literal, Rule, "ResourceDecl"]


@dataclass(frozen=True)
class ResourceDecl:
    agent: str
    name: str
    value: Fraction

    def have(self) -> Literal:
        return Literal(OWNS, (Constant(self.agent), Constant(self.name)))

    def __str__(self) -> str:
        return f"resource {self.agent} {self.name} = {self.value}"


UNITS = ("B", "D", "I")


@dataclass(frozen=True)
class AgentState:
    id: str
    units: dict[str, Theory]
    resources: tuple[tuple[str, Fraction], ...]  # ascending by value, ties by name
    strategy: Strategy = Strategy.EAGER
    general: tuple[GeneralRule, ...] = ()
    bridges: frozenset[str] = frozenset(ALL_BRIDGES)
    disclosed: frozenset[str] = frozenset()
    goal_labels: tuple[str, ...] = ()
    asked: frozenset[GiveAction] = frozenset()
    fresh: int = 0

    def __post_init__(self):
        ordered = tuple(sorted(self.resources, key=lambda r: (r[1], r[0])))
        object.__setattr__(self, "resources", ordered)
        for name, value in ordered:
            if not 0 <= value <= 1:
                raise ValueError(f"resource value out of [0, 1]: {name}={value}")

    # -- unit access -----------------------------------------------------

    def unit(self, name: str) -> Theory:
        return self.units[name]

    def owned(self) -> set[str]:
        return {name for name, _ in self.resources}

    def delta(self) -> Theory:
        """The agent's reasoning theory: beliefs plus modally wrapped intentions."""
        entries = list(self.unit("B").entries())
        me = Constant(self.id)
        for label, fact in self.unit("I").facts():
            entries.append((f"I:{label}", replace(fact, modality=Modality.INT, owner=me)))
        return Theory(_dedup(entries), self.general)

    def with_unit(self, name: str, theory: Theory) -> "AgentState":
        units = dict(self.units)
        units[name] = theory
        return replace(self, units=units)

    def believes(self, lit: Literal) -> bool:
        return self.unit("B").has_fact(lit)

    def _next_label(self, prefix: str) -> tuple["AgentState", str]:
        n = self.fresh + 1
        return replace(self, fresh=n), f"{prefix}{self.id}.{n}"


def _dedup(entries: Iterable[tuple[str, Entry]]) -> list[tuple[str, Entry]]:
    seen, out = set(), []
    for label, item in entries:
        key = entry_canonical(item)
        if key in seen:
            continue
        seen.add(key)
        out.append((label, item))
    return out


# ----------------------------------------------------------------------
# Planning
# ----------------------------------------------------------------------


def plan(agent: AgentState, goal: Literal) -> list[Plan]:
    """Plans for an intention, with exactly one marked selected.

    Candidate rules come from the belief unit; a plan is suppressed
    entirely when the agent explicitly does not intend the goal
    (parsimony). Promised incoming transfers count as met preconditions.
    Selection order: fewest unmet preconditions, then fewest transfers,
    then rule label.
    """
    inner = goal.atom()
    negated = replace(inner, positive=False)
    if agent.unit("I").has_fact(negated):
        return []
    me = Constant(agent.id)
    theory = agent.delta()
    have = agent.owned() | {
        f.args[1].symbol
        for _, f in agent.unit("B").facts()
        if f.modality is Modality.NONE
        and f.positive
        and f.predicate == OWNS
        and f.args[:1] == (me,)
        and isinstance(f.args[1], Constant)
    }
    promised = _promises(agent)
    believed_owner = _believed_owners(agent)

    plans, seen = [], set()
    for label, rule in agent.unit("B").rules():
        if rule.is_fact:
            continue
        r = rule.rename(0)
        s = unify(inner, r.head)
        if s is None:
            continue
        key = rule.canonical()
        if key in seen:
            continue
        seen.add(key)
        preconds = tuple(s.apply(b) for b in r.body)
        unmet, transfers = [], []
        for p in preconds:
            if p.predicate == OWNS and len(p.args) == 2 and p.args[0] == me:
                if not isinstance(p.args[1], Constant):
                    continue
                res = p.args[1].symbol
                if res in have:
                    continue
                if res in promised:
                    transfers.append(GiveAction(promised[res], agent.id, res))
                    continue
                unmet.append(p)
                owner = believed_owner.get(res)
                if owner and owner != agent.id:
                    transfers.append(GiveAction(owner, agent.id, res))
            elif not theory.has_fact(p):
                unmet.append(p)
        plans.append(Plan(goal, label, rule, preconds, tuple(unmet), tuple(transfers)))

    plans.sort(key=lambda p: (len(p.unmet), len(p.transfers), p.rule_label))
    return [replace(p, selected=(i == 0)) for i, p in enumerate(plans)]


def _promises(agent: AgentState) -> dict[str, str]:
    """resource -> promised giver, from incoming transfer intentions."""
    out = {}
    for _, fact in agent.unit("I").facts():
        if (
            fact.positive
            and fact.predicate == GIVE
            and len(fact.args) == 3
            and fact.args[1] == Constant(agent.id)
            and all(isinstance(a, Constant) for a in fact.args)
        ):
            out.setdefault(fact.args[2].symbol, fact.args[0].symbol)
    return out


def _believed_owners(agent: AgentState) -> dict[str, str]:
    out = {}
    for _, fact in agent.unit("B").facts():
        if (
            fact.modality is Modality.NONE
            and fact.positive
            and fact.predicate == OWNS
            and len(fact.args) == 2
            and all(isinstance(a, Constant) for a in fact.args)
        ):
            out.setdefault(fact.args[1].symbol, fact.args[0].symbol)
    return out


def intends_to_keep(agent: AgentState, resource: str) -> bool:
    """NAF over the intention unit after replanning.

    True when an explicit keep intention exists or the selected plan for
    one of the agent's goals needs the resource.
    """
    keep = Literal(OWNS, (Constant(agent.id), Constant(resource)))
    if agent.unit("I").has_fact(keep):
        return True
    for label in agent.goal_labels:
        goal = agent.unit("I").lookup(label)
        if goal is None:
            continue
        for p in plan(agent, intends(Constant(agent.id), goal.atom())):
            if not p.selected:
                continue
            for pre in p.preconditions:
                if (
                    pre.predicate == OWNS
                    and len(pre.args) == 2
                    and pre.args[1] == Constant(resource)
                    and pre.args[0] == Constant(agent.id)
                ):
                    return True
    return False


# ----------------------------------------------------------------------
# Bridge rules
# ----------------------------------------------------------------------


def bridge_step(agent: AgentState, inbox: list[Message]) -> tuple[AgentState, list[Message]]:
    """Apply all enabled bridge rules once to a fixpoint within the round."""
    outbox: list[Message] = []

    if BRIDGE_TRUST in agent.bridges:
        for msg in inbox:
            if msg.kind is MessageKind.TELL:
                agent = _absorb_tell(agent, msg)

    for msg in inbox:
        if msg.kind is MessageKind.GIVE:
            action: GiveAction = msg.payload
            agent = _apply_transfer(agent, action)

    if BRIDGE_ACCEPT in agent.bridges:
        for msg in inbox:
            if msg.kind is not MessageKind.ASK:
                continue
            action = msg.payload
            if action.giver != agent.id:
                continue
            if _generous(agent) or not intends_to_keep(agent, action.resource):
                agent, granted = _grant(agent, action)
                if granted:
                    outbox.append(Message(MessageKind.GIVE, agent.id, action.receiver, action))
            else:
                outbox.append(Message(MessageKind.REJECT, agent.id, msg.sender, action))

    if BRIDGE_REQUEST in agent.bridges:
        for _, fact in agent.unit("I").facts():
            if not (fact.positive and fact.predicate == GIVE and len(fact.args) == 3):
                continue
            if not all(isinstance(a, Constant) for a in fact.args):
                continue
            action = GiveAction(*(a.symbol for a in fact.args))
            if action.receiver != agent.id or action.giver == agent.id:
                continue
            if action in agent.asked or action.resource in agent.owned():
                continue
            agent = replace(agent, asked=agent.asked | {action})
            outbox.append(Message(MessageKind.ASK, agent.id, action.giver, action))

    agent = _propagate_realism(agent)
    return agent, outbox


def _absorb_tell(agent: AgentState, msg: Message) -> AgentState:
    items, conclusion = msg.payload if isinstance(msg.payload, tuple) else ((), msg.payload)
    additions_b: list[Entry] = []
    for item in items:
        additions_b.append(item)
    for item in additions_b:
        agent, label = agent._next_label("T:")
        agent = agent.with_unit("B", agent.unit("B").extended([(label, item)]))
    if conclusion is not None:
        if (
            conclusion.modality is Modality.INT
            and conclusion.owner == Constant(agent.id)
        ):
            agent, label = agent._next_label("T:")
            agent = agent.with_unit("I", agent.unit("I").extended([(label, conclusion.atom() if conclusion.positive else replace(conclusion.atom(), positive=False))]))
        else:
            agent, label = agent._next_label("T:")
            agent = agent.with_unit("B", agent.unit("B").extended([(label, conclusion)]))
    return agent


def _generous(agent: AgentState) -> bool:
    return any(g.kind is GeneralKind.GENEROSITY and g.owner == agent.id for g in agent.general)


def _grant(agent: AgentState, action: GiveAction) -> tuple[AgentState, bool]:
    if action.resource not in agent.owned():
        return agent, False
    agent, label = agent._next_label("G:")
    agent = agent.with_unit("I", agent.unit("I").extended([(label, action.literal())]))
    return _apply_transfer(agent, action), True


def _apply_transfer(agent: AgentState, action: GiveAction) -> AgentState:
    """Ownership/unicity state transition on the belief unit and resource list."""
    me = agent.id
    had = Literal(OWNS, (Constant(action.giver), Constant(action.resource)))
    got = Literal(OWNS, (Constant(action.receiver), Constant(action.resource)))
    beliefs = Theory(
        [(l, e) for l, e in agent.unit("B").entries() if e != had],
        agent.unit("B").general,
    )
    agent = agent.with_unit("B", beliefs)
    if not agent.unit("B").has_fact(got):
        agent, label = agent._next_label("W:")
        agent = agent.with_unit("B", agent.unit("B").extended([(label, got)]))
    resources = agent.resources
    if action.giver == me:
        resources = tuple(r for r in resources if r[0] != action.resource)
    if action.receiver == me and action.resource not in {r[0] for r in resources}:
        resources = resources + ((action.resource, Fraction(0)),)
    return replace(agent, resources=resources)


def _propagate_realism(agent: AgentState) -> AgentState:
    """Intentions imply desires imply beliefs; disbelief flows back down."""
    for source, target in (("I", "D"), ("D", "B")):
        for label, fact in agent.unit(source).facts():
            if fact.positive and not agent.unit(target).has_fact(fact):
                agent = agent.with_unit(target, agent.unit(target).extended([(f"r:{source}:{label}", fact)]))
    for source, target in (("B", "D"), ("D", "I")):
        for label, fact in agent.unit(source).facts():
            if not fact.positive and not agent.unit(target).has_fact(fact):
                agent = agent.with_unit(target, agent.unit(target).extended([(f"r:{source}:{label}", fact)]))
    for name in UNITS:
        for _, fact in agent.unit(name).facts():
            if agent.unit(name).has_fact(fact.complement()):
                raise RealismViolation(f"unit {name} holds {fact} and its complement")
    return agent


# ----------------------------------------------------------------------
# Disclosure
# ----------------------------------------------------------------------


def disclose(agent: AgentState, round_no: int) -> tuple[AgentState, list[DisclosureItem]]:
    """Knowledge package for the round; never repeats an item.

    Round 1 is always the agent's goals. Later rounds depend on strategy:
    eager sends everything at once, cautious sends beliefs relevant to the
    goals' plan closure plus the single cheapest undisclosed resource.
    """
    package: list[DisclosureItem] = []
    disclosed = set(agent.disclosed)
    me = Constant(agent.id)

    def offer(label: str, payload) -> None:
        if label in disclosed:
            return
        disclosed.add(label)
        package.append(DisclosureItem(label, payload))

    if round_no <= 1:
        for label in agent.goal_labels:
            fact = agent.unit("I").lookup(label)
            if fact is not None:
                offer(label, replace(fact, modality=Modality.INT, owner=me))
        return replace(agent, disclosed=frozenset(disclosed)), package

    if agent.strategy is Strategy.EAGER:
        for label, item in agent.unit("B").entries():
            offer(label, item)
        for label, fact in agent.unit("I").facts():
            offer(label, replace(fact, modality=Modality.INT, owner=me))
        for name, value in agent.resources:
            offer(f"res:{name}", ResourceDecl(agent.id, name, value))
    else:
        relevant = _relevance_closure(agent)
        for label, item in agent.unit("B").entries():
            symbols = _symbols(item)
            if symbols & relevant:
                offer(label, item)
        for name, value in agent.resources:
            key = f"res:{name}"
            if key not in disclosed:
                offer(key, ResourceDecl(agent.id, name, value))
                break
    return replace(agent, disclosed=frozenset(disclosed)), package


def _symbols(item: Entry) -> set[str]:
    if isinstance(item, Rule):
        out = _lit_symbols(item.head)
        for lit in item.body + item.naf:
            out |= _lit_symbols(lit)
        return out
    return _lit_symbols(item)


def _lit_symbols(lit: Literal) -> set[str]:
    return {lit.predicate} | lit.constants()


def _relevance_closure(agent: AgentState) -> set[str]:
    """Predicates and constants reachable from the goals through plan rules."""
    closure: set[str] = set()
    for label in agent.goal_labels:
        goal = agent.unit("I").lookup(label)
        if goal is not None:
            closure |= _lit_symbols(goal)
    changed = True
    while changed:
        changed = False
        for _, rule in agent.unit("B").rules():
            if rule.is_fact:
                continue
            if _lit_symbols(rule.head) & closure:
                added = _symbols(rule)
                if not added <= closure:
                    closure |= added
                    changed = True
    return closure


# ----------------------------------------------------------------------
# Transfers over the shared world
# ----------------------------------------------------------------------


def execute_give(world: dict[str, frozenset[str]], give: GiveAction) -> dict[str, frozenset[str]]:
    """Move a resource between owners; the giver must currently own it."""
    if give.resource not in world.get(give.giver, frozenset()):
        raise NotOwner(f"{give.giver} does not own {give.resource}")
    out = dict(world)
    out[give.giver] = out[give.giver] - {give.resource}
    out[give.receiver] = out.get(give.receiver, frozenset()) | {give.resource}
    return out
