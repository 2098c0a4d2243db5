"""Rules, theories, forward-chaining saturation and backward proof search.

A theory is an ordered, labelled collection of facts and Horn-style rules,
plus a set of enabled general principles (ownership, reduction, generosity,
parsimony, ...) that the proof search knows how to apply as built-in
inference schemes. Negative rule conditions are negation-as-failure,
evaluated against the positive stratum of the saturation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Optional, Union

from .lang import (
    Constant,
    EMPTY_SUBSTITUTION,
    Literal,
    Modality,
    Substitution,
    Term,
    Variable,
    is_var,
    unify,
)

DEFAULT_PROOF_DEPTH = 32

OWNS = "have"  # ownership predicate used by the transfer machinery
GIVE = "give"


class LogicError(Exception):
    pass


class InconsistentTheory(LogicError):
    """Saturation derived a literal together with its complement."""

    def __init__(self, literal: Literal):
        super().__init__(f"inconsistent theory: {literal} and its complement")
        self.literal = literal


class DepthExceeded(LogicError):
    """Proof search hit the depth bound before finding a proof."""


@dataclass(frozen=True)
class Rule:
    label: str
    head: Literal
    body: tuple[Literal, ...] = ()
    naf: tuple[Literal, ...] = ()  # absence conditions, negation-as-failure
    unit: Optional[str] = None

    @property
    def is_fact(self) -> bool:
        return not self.body and not self.naf

    def range_restricted(self) -> bool:
        if self.is_fact:
            return True
        bound = set()
        for lit in self.body + self.naf:
            bound |= lit.variables()
        return self.head.variables() <= bound

    def rename(self, tag: int) -> "Rule":
        vs = self.head.variables()
        for lit in self.body + self.naf:
            vs |= lit.variables()
        s = Substitution({v: Variable(f"{v}_{tag}") for v in sorted(vs)})
        return replace(
            self,
            head=s.apply(self.head),
            body=tuple(s.apply(b) for b in self.body),
            naf=tuple(s.apply(n) for n in self.naf),
        )

    def canonical(self) -> tuple:
        """Key equal for rules identical up to variable renaming."""
        names: dict[str, str] = {}

        def canon_term(t: Term):
            if is_var(t):
                return ("v", names.setdefault(t.name, f"V{len(names)}"))
            return ("c", t.symbol)

        def canon_lit(lit: Literal):
            owner = canon_term(lit.owner) if lit.owner is not None else None
            return (
                lit.modality.value,
                owner,
                lit.positive,
                lit.predicate,
                tuple(canon_term(a) for a in lit.args),
            )

        return (
            canon_lit(self.head),
            tuple(canon_lit(b) for b in self.body),
            tuple(canon_lit(n) for n in self.naf),
        )

    def __str__(self) -> str:
        if self.is_fact:
            return f"{self.head}."
        parts = [str(b) for b in self.body] + [f"not({n})" for n in self.naf]
        return f"{self.head} :- {', '.join(parts)}."


class GeneralKind(Enum):
    OWNERSHIP = "ownership"          # give(X,Y,Z) transfers have(X,Z) to have(Y,Z)
    REDUCTION = "reduction"          # intending a conclusion intends its preconditions
    GENEROSITY = "generosity"        # the tagged agent never intends to keep anything
    UNICITY = "unicity"              # giving removes the giver's ownership
    BENEVOLENCE = "benevolence"      # grant a request for an unneeded item
    PARSIMONY = "parsimony"          # refuse transfers of items the owner's plan needs
    UNIQUE_CHOICE = "unique_choice"  # commit to exactly one plan per goal


@dataclass(frozen=True)
class GeneralRule:
    label: str
    kind: GeneralKind
    owner: Optional[str] = None  # generosity is scoped to one agent

    def __str__(self) -> str:
        if self.owner:
            return f"general {self.label} {self.kind.value}({self.owner});"
        return f"general {self.label} {self.kind.value};"


Entry = Union[Literal, Rule]


def entry_canonical(item: Entry):
    if isinstance(item, Rule):
        return ("rule",) + item.canonical()
    return ("fact", item.modality.value, item.owner, item.positive, item.predicate, item.args)


class Theory:
    """Ordered labelled facts and rules plus enabled general principles."""

    def __init__(
        self,
        entries: Iterable[tuple[str, Entry]] = (),
        general: Iterable[GeneralRule] = (),
    ):
        self._entries: list[tuple[str, Entry]] = []
        self._by_label: dict[str, Entry] = {}
        self._keys: set = set()
        self.general: tuple[GeneralRule, ...] = tuple(general)
        self._fixpoint_cache: Optional[dict[Literal, "Proof"]] = None
        for label, item in entries:
            self._add(label, item)

    def _add(self, label: str, item: Entry) -> None:
        if label in self._by_label:
            raise ValueError(f"duplicate label {label!r}")
        if isinstance(item, Rule) and not item.range_restricted():
            raise ValueError(f"rule {label} is not range-restricted")
        self._entries.append((label, item))
        self._by_label[label] = item
        self._keys.add(entry_canonical(item))

    # -- views ---------------------------------------------------------

    def entries(self) -> list[tuple[str, Entry]]:
        return list(self._entries)

    def facts(self) -> list[tuple[str, Literal]]:
        return [(l, e) for l, e in self._entries if isinstance(e, Literal)]

    def rules(self) -> list[tuple[str, Rule]]:
        return [(l, e) for l, e in self._entries if isinstance(e, Rule)]

    def lookup(self, label: str) -> Optional[Entry]:
        return self._by_label.get(label)

    def labels(self) -> list[str]:
        return [l for l, _ in self._entries]

    def contains(self, item: Entry) -> bool:
        return entry_canonical(item) in self._keys

    def has_fact(self, lit: Literal) -> bool:
        return entry_canonical(lit) in self._keys

    def general_of(self, kind: GeneralKind) -> Optional[GeneralRule]:
        for g in self.general:
            if g.kind is kind:
                return g
        return None

    def generosity_owners(self) -> set[str]:
        return {g.owner for g in self.general if g.kind is GeneralKind.GENEROSITY and g.owner}

    # -- construction --------------------------------------------------

    def extended(self, items: Iterable[tuple[str, Entry]]) -> "Theory":
        """New theory with the items appended; duplicates (up to renaming) skipped."""
        t = Theory(self._entries, self.general)
        for label, item in items:
            if t.contains(item):
                continue
            lab, n = label, 1
            while lab in t._by_label:
                n += 1
                lab = f"{label}~{n}"
            t._add(lab, item)
        return t

    def restricted(self, labels: Iterable[str]) -> "Theory":
        """Sub-theory keeping only the given labels (entries and general rules)."""
        keep = set(labels)
        return Theory(
            [(l, e) for l, e in self._entries if l in keep],
            [g for g in self.general if g.label in keep],
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Theory)
            and self._entries == other._entries
            and self.general == other.general
        )

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"Theory({len(self._entries)} entries, {len(self.general)} general)"


@dataclass(frozen=True)
class ProofStep:
    kind: str  # fact | rule | reduction | ownership | generosity | refusal
    label: str
    derived: Literal

    def __str__(self) -> str:
        return f"[{self.kind} {self.label}] {self.derived}"


@dataclass(frozen=True)
class Proof:
    conclusion: Literal
    premises: frozenset[str]
    steps: tuple[ProofStep, ...]

    def replays(self, theory: Theory, depth: int = DEFAULT_PROOF_DEPTH) -> bool:
        """The recorded premises alone re-derive the conclusion."""
        try:
            return prove(theory.restricted(self.premises), self.conclusion, depth) is not None
        except DepthExceeded:
            return False


# ----------------------------------------------------------------------
# Forward chaining
# ----------------------------------------------------------------------


def _match_body(
    body: tuple[Literal, ...],
    base: dict[Literal, Proof],
    subst: Substitution,
) -> Iterator[tuple[Substitution, list[Literal]]]:
    if not body:
        yield subst, []
        return
    first, rest = body[0], body[1:]
    for fact in base:
        s = unify(subst.apply(first), fact)
        if s is None:
            continue
        merged = subst
        for v, t in s.items():
            merged = merged.bind(Variable(v), t)
        for s2, used in _match_body(rest, base, merged):
            yield s2, [fact] + used


def _naf_holds(conds: tuple[Literal, ...], subst: Substitution, stratum: dict) -> bool:
    for cond in conds:
        pat = subst.apply(cond)
        if any(unify(pat, fact) is not None for fact in stratum):
            return False
    return True


def forward_chain(theory: Theory) -> dict[Literal, Proof]:
    """Least fixpoint of ground facts derivable from the theory's rules.

    Two-pass stratified evaluation: rules without absence conditions are
    saturated first; absence conditions are then checked against that
    positive fixpoint, and saturation continues with all rules. Every
    derived fact carries a proof. Raises InconsistentTheory when the
    fixpoint contains a complementary pair.
    """
    base: dict[Literal, Proof] = {}

    def add(lit: Literal, proof: Proof) -> bool:
        if lit in base:
            return False
        if lit.complement() in base:
            raise InconsistentTheory(lit)
        base[lit] = proof
        return True

    for label, fact in theory.facts():
        add(fact, Proof(fact, frozenset([label]), (ProofStep("fact", label, fact),)))

    rules = theory.rules()

    def saturate(active: list[tuple[str, Rule]], naf_stratum: Optional[dict]) -> None:
        changed = True
        while changed:
            changed = False
            for label, rule in active:
                for subst, used in list(_match_body(rule.body, base, EMPTY_SUBSTITUTION)):
                    if rule.naf:
                        if naf_stratum is None or not _naf_holds(rule.naf, subst, naf_stratum):
                            continue
                    head = subst.apply(rule.head)
                    if not head.is_ground() or head in base:
                        continue
                    premises: set[str] = {label}
                    steps: list[ProofStep] = []
                    for f in used:
                        premises |= base[f].premises
                        steps.extend(base[f].steps)
                    steps.append(ProofStep("rule", label, head))
                    if add(head, Proof(head, frozenset(premises), tuple(steps))):
                        changed = True

    positive = [(l, r) for l, r in rules if not r.naf]
    saturate(positive, None)
    stratum_one = dict(base)
    guarded = [(l, r) for l, r in rules if r.naf]
    if guarded:
        saturate(rules, stratum_one)
    return base


def consistent(facts: Iterable[Literal], theory: Theory) -> bool:
    """True iff saturating the theory extended with the facts stays conflict-free."""
    extended = theory.extended((f"_c{i}", f) for i, f in enumerate(facts))
    try:
        forward_chain(extended)
    except InconsistentTheory:
        return False
    return True


def _positive_stratum(theory: Theory) -> dict[Literal, Proof]:
    if theory._fixpoint_cache is None:
        positive = Theory(
            [(l, e) for l, e in theory.entries() if isinstance(e, Literal) or not e.naf],
            theory.general,
        )
        theory._fixpoint_cache = forward_chain(positive)
    return theory._fixpoint_cache


# ----------------------------------------------------------------------
# Backward proof search
# ----------------------------------------------------------------------


class _Search:
    """One backward-chaining query; holds the depth flag and fresh-name tag."""

    def __init__(self, theory: Theory, depth: int):
        self.theory = theory
        self.depth = depth
        self.depth_hit = False
        self._tag = itertools.count(1)

    def solve(
        self, goal: Literal, subst: Substitution, depth: int
    ) -> Iterator[tuple[Substitution, frozenset[str], tuple[ProofStep, ...]]]:
        if depth <= 0:
            self.depth_hit = True
            return
        goal = subst.apply(goal)

        for label, fact in self.theory.facts():
            s = unify(goal, fact, subst)
            if s is not None:
                yield s, frozenset([label]), (ProofStep("fact", label, fact),)

        for label, rule in self.theory.rules():
            if rule.is_fact:
                continue
            r = rule.rename(next(self._tag))
            s = unify(goal, r.head, subst)
            if s is None:
                continue
            for s2, prem, steps in self._solve_body(r.body, s, depth - 1):
                if r.naf and not _naf_holds(r.naf, s2, _positive_stratum(self.theory)):
                    continue
                derived = s2.apply(r.head)
                yield s2, prem | {label}, steps + (ProofStep("rule", label, derived),)

        yield from self._solve_meta(goal, subst, depth)

    def _solve_body(self, body, subst, depth):
        if not body:
            yield subst, frozenset(), ()
            return
        first, rest = body[0], body[1:]
        for s, prem, steps in self.solve(first, subst, depth):
            for s2, prem2, steps2 in self._solve_body(rest, s, depth):
                yield s2, prem | prem2, steps + steps2

    # -- built-in schemes ------------------------------------------------

    def _candidate_rules(self, tag_source) -> Iterator[tuple[str, Rule, frozenset[str]]]:
        """Declared rules plus ownership-derived transfer rules.

        Each ownership fact have(x, z) licenses the derived rule
        give(x, Y, z) -> have(Y, z); its use charges the fact and the
        ownership principle to the premises.
        """
        for label, rule in self.theory.rules():
            if rule.is_fact:
                continue
            yield label, rule, frozenset([label])
        ownership = self.theory.general_of(GeneralKind.OWNERSHIP)
        if ownership is None:
            return
        for label, fact in self.theory.facts():
            if (
                fact.modality is Modality.NONE
                and fact.positive
                and fact.predicate == OWNS
                and len(fact.args) == 2
                and fact.is_ground()
            ):
                x, z = fact.args
                recv = Variable(f"Y_{next(tag_source)}")
                derived = Rule(
                    label=f"{label}>{ownership.label}",
                    head=Literal(OWNS, (recv, z)),
                    body=(Literal(GIVE, (x, recv, z)),),
                )
                yield derived.label, derived, frozenset([label, ownership.label])

    def _solve_meta(self, goal, subst, depth):
        if goal.modality is Modality.INT and goal.positive:
            yield from self._solve_reduction(goal, subst, depth)
        if goal.modality is Modality.INT and not goal.positive:
            yield from self._solve_generosity(goal, subst)
            yield from self._solve_refusal(goal, subst, depth)

    def _solve_reduction(self, goal, subst, depth):
        """Intending a rule's conclusion intends each of its preconditions.

        To prove int j: P, find a rule instance with P in its body and show
        int j: head for that instance.
        """
        reduction = self.theory.general_of(GeneralKind.REDUCTION)
        if reduction is None or goal.owner is None or is_var(subst.resolve(goal.owner)):
            return
        owner = subst.resolve(goal.owner)
        inner = goal.atom()
        for label, rule, charged in self._candidate_rules(self._tag):
            r = rule.rename(next(self._tag))
            for b in r.body:
                if b.modality is not Modality.NONE or not b.positive:
                    continue
                s = unify(subst.apply(inner), b, subst)
                if s is None:
                    continue
                head_goal = Literal(
                    r.head.predicate, r.head.args, True, Modality.INT, owner
                )
                for s2, prem, steps in self.solve(head_goal, s, depth - 1):
                    derived = s2.apply(goal)
                    yield (
                        s2,
                        prem | charged | {reduction.label},
                        steps + (ProofStep("reduction", reduction.label, derived),),
                    )

    def _solve_generosity(self, goal, subst):
        """~int m: have(m, z) holds for a generous owner of z."""
        generosity = self.theory.general_of(GeneralKind.GENEROSITY)
        if generosity is None or goal.predicate != OWNS or len(goal.args) != 2:
            return
        owner = subst.resolve(goal.owner) if goal.owner is not None else None
        if not isinstance(owner, Constant) or owner.symbol != generosity.owner:
            return
        want = Literal(OWNS, (owner, goal.args[1]))
        for label, fact in self.theory.facts():
            s = unify(want, fact, subst)
            if s is None:
                continue
            if fact.args[0] != owner:
                continue
            derived = s.apply(goal)
            yield (
                s,
                frozenset([label, generosity.label]),
                (ProofStep("generosity", generosity.label, derived),),
            )

    def _solve_refusal(self, goal, subst, depth):
        """~int w: give(x, y, z) when x's committed plan needs z and x holds z.

        Plan commitment is skeptical: among the rules concluding one of x's
        declared goals, exactly one plan is selected (fewest unmet
        preconditions, promises counted as met, then label order). Only the
        selected plan's preconditions justify a refusal.
        """
        parsimony = self.theory.general_of(GeneralKind.PARSIMONY)
        reduction = self.theory.general_of(GeneralKind.REDUCTION)
        if parsimony is None or reduction is None:
            return
        if goal.predicate != GIVE or len(goal.args) != 3:
            return
        giver = subst.resolve(goal.args[0])
        resource = subst.resolve(goal.args[2])
        if is_var(giver) or is_var(resource):
            return
        plan = select_plan(self.theory, giver.symbol)
        if plan is None:
            return
        goal_label, goal_fact, rule_label, needed, several = plan
        if resource.symbol not in needed:
            return
        holding = Literal(OWNS, (giver, resource))
        have_label = None
        for label, fact in self.theory.facts():
            if fact == holding:
                have_label = label
                break
        if have_label is None:
            return
        premises = {goal_label, rule_label, have_label, parsimony.label, reduction.label}
        if several:
            choice = self.theory.general_of(GeneralKind.UNIQUE_CHOICE)
            if choice is not None:
                premises.add(choice.label)
        derived = subst.apply(goal)
        yield (
            subst,
            frozenset(premises),
            (ProofStep("refusal", parsimony.label, derived),),
        )


def base_goals(theory: Theory, agent: str) -> list[tuple[str, Literal]]:
    """Declared goal intentions of the agent: int facts over non-transfer atoms."""
    out = []
    for label, fact in theory.facts():
        if (
            fact.modality is Modality.INT
            and fact.positive
            and isinstance(fact.owner, Constant)
            and fact.owner.symbol == agent
            and fact.predicate not in (OWNS, GIVE)
        ):
            out.append((label, fact))
    return out


def promised_resources(theory: Theory, agent: str) -> set[str]:
    """Resources some transfer intention already routes to the agent."""
    out = set()
    for _, fact in theory.facts():
        if (
            fact.modality is Modality.INT
            and fact.positive
            and fact.predicate == GIVE
            and len(fact.args) == 3
            and isinstance(fact.args[1], Constant)
            and fact.args[1].symbol == agent
            and isinstance(fact.args[2], Constant)
        ):
            out.add(fact.args[2].symbol)
    return out


def holdings(theory: Theory, agent: str) -> set[str]:
    out = set()
    for _, fact in theory.facts():
        if (
            fact.modality is Modality.NONE
            and fact.positive
            and fact.predicate == OWNS
            and len(fact.args) == 2
            and fact.args[0] == Constant(agent)
            and isinstance(fact.args[1], Constant)
        ):
            out.add(fact.args[1].symbol)
    return out


def plan_candidates(theory: Theory, agent: str, goal_atom: Literal) -> list[tuple[str, Rule, Substitution]]:
    """Rule instances concluding the agent's goal atom, in declaration order."""
    out = []
    for label, rule in theory.rules():
        if rule.is_fact:
            continue
        r = rule.rename(0)
        s = unify(goal_atom, r.head)
        if s is not None:
            out.append((label, r, s))
    return out


def select_plan(theory: Theory, agent: str) -> Optional[tuple[str, Literal, str, set[str], bool]]:
    """Unique-choice plan commitment for the agent's first viable goal.

    Returns (goal label, goal fact, rule label, needed resources, several)
    where `needed` lists the resources the selected plan requires the agent
    to hold and `several` flags that more than one candidate plan existed.
    """
    have = holdings(theory, agent)
    promised = promised_resources(theory, agent)
    for goal_label, goal_fact in base_goals(theory, agent):
        candidates = []
        seen = set()
        for label, rule, s in plan_candidates(theory, agent, goal_fact.atom()):
            key = rule.canonical()
            if key in seen:
                continue
            seen.add(key)
            needed = set()
            unmet = 0
            grounded = True
            for b in rule.body:
                lit = s.apply(b)
                if lit.predicate == OWNS and len(lit.args) == 2 and lit.args[0] == Constant(agent):
                    if not isinstance(lit.args[1], Constant):
                        grounded = False
                        break
                    res = lit.args[1].symbol
                    needed.add(res)
                    if res not in have and res not in promised:
                        unmet += 1
                elif not theory.has_fact(lit):
                    grounded = False
                    break
            if grounded:
                candidates.append((unmet, label, needed))
        if not candidates:
            continue
        candidates.sort(key=lambda c: (c[0], c[1]))
        unmet, label, needed = candidates[0]
        return goal_label, goal_fact, label, needed, len(candidates) > 1
    return None


def prove(theory: Theory, goal: Literal, depth: int = DEFAULT_PROOF_DEPTH) -> Optional[Proof]:
    """First proof of the goal in deterministic search order, or None.

    Facts are tried before rules, rules in declaration order, built-in
    schemes last. Raises DepthExceeded when the depth bound was hit and no
    proof was found.
    """
    search = _Search(theory, depth)
    for subst, premises, steps in search.solve(goal, EMPTY_SUBSTITUTION, depth):
        return Proof(subst.apply(goal), premises, steps)
    if search.depth_hit:
        raise DepthExceeded(f"no proof of {goal} within depth {depth}")
    return None
