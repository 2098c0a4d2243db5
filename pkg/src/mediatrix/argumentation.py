"""Arguments, attacks and acceptance decisions.

An argument is a pair (support, conclusion): the support is a consistent,
minimal labelled subset of a theory from which the conclusion is provable.
Arguments attack each other by rebutting the conclusion or undercutting a
support fact; an agent accepts a proposed argument unless it can build a
counter-argument from its own knowledge extended with the proposal.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from .lang import Literal
from .logic import (
    DEFAULT_PROOF_DEPTH,
    DepthExceeded,
    Entry,
    Proof,
    Theory,
    consistent,
    prove,
)

log = logging.getLogger(__name__)

EXACT_MINIMALITY_BOUND = 12


@dataclass(frozen=True)
class SupportItem:
    label: str
    item: Entry  # fact literal or rule; general principles appear label-only

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class Argument:
    support: tuple[SupportItem, ...]
    conclusion: Literal
    proof: Proof

    def labels(self) -> frozenset[str]:
        return frozenset(s.label for s in self.support)

    def fact_items(self) -> list[SupportItem]:
        return [s for s in self.support if isinstance(s.item, Literal)]

    def __str__(self) -> str:
        return f"({self.conclusion}, {{{', '.join(sorted(self.labels()))}}})"


class AttackKind(Enum):
    REBUT = "rebut"
    UNDERCUT = "undercut"


@dataclass(frozen=True)
class Attack:
    kind: AttackKind
    attacker: Argument
    target: Argument
    point: Literal  # target conclusion (rebut) or a support fact (undercut)


class Verdict(Enum):
    ACCEPT = "accept"
    REJECT = "reject"


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    counter: Optional[Attack] = None
    explanation: tuple[SupportItem, ...] = ()

    def __post_init__(self):
        if self.verdict is Verdict.REJECT and self.counter is None:
            raise ValueError("a rejection must carry its counter-attack")


def _support_items(delta: Theory, labels: Iterable[str]) -> tuple[SupportItem, ...]:
    order = {l: i for i, (l, _) in enumerate(delta.entries())}
    for g in delta.general:
        order.setdefault(g.label, len(order) + 1000)
    resolved = []
    for label in sorted(labels, key=lambda l: order.get(l, 10_000)):
        item = delta.lookup(label)
        if item is None:
            gen = next((g for g in delta.general if g.label == label), None)
            if gen is None:
                raise ValueError(f"support label {label!r} not in source theory")
            item = gen
        resolved.append(SupportItem(label, item))
    return tuple(resolved)


def construct_argument(
    delta: Theory, omega: Literal, depth: int = DEFAULT_PROOF_DEPTH
) -> Optional[Argument]:
    """Build an argument for omega from delta, or None if omega is unprovable.

    The proof's premises are shrunk to a minimal support by dropping
    candidates in reverse declaration order and re-proving after each drop,
    so the result is deterministic and biased toward keeping earlier
    entries. A support that turns out inconsistent is discarded.
    """
    proof = prove(delta, omega, depth)
    if proof is None:
        return None
    working = set(proof.premises)
    best = proof
    order = delta.labels() + [g.label for g in delta.general]
    for label in reversed(order):
        if label not in working or len(working) == 1:
            continue
        try:
            smaller = prove(delta.restricted(working - {label}), omega, depth)
        except DepthExceeded:
            smaller = None
        if smaller is not None:
            working = set(smaller.premises)
            best = smaller
    support_theory = delta.restricted(working)
    if not consistent((), support_theory):
        return None
    return Argument(_support_items(delta, working), best.conclusion, best)


def minimality_check(
    arg: Argument,
    delta: Theory,
    bound: int = EXACT_MINIMALITY_BOUND,
    depth: int = DEFAULT_PROOF_DEPTH,
) -> bool:
    """True iff no proper subset of the support proves the conclusion.

    Exact subset enumeration up to `bound` support items; above the bound a
    greedy single-removal check is used and logged as approximate.
    """
    labels = sorted(arg.labels())
    if len(labels) > bound:
        log.warning("support of size %d exceeds bound %d; approximate check", len(labels), bound)
        subsets: Iterable[tuple[str, ...]] = (
            tuple(l for l in labels if l != drop) for drop in labels
        )
    else:
        subsets = itertools.chain.from_iterable(
            itertools.combinations(labels, k) for k in range(len(labels))
        )
    for subset in subsets:
        try:
            if prove(delta.restricted(subset), arg.conclusion, depth) is not None:
                return False
        except DepthExceeded:
            continue
    return True


def find_attacks(a: Argument, b: Argument) -> list[Attack]:
    """All rebuts and undercuts of b by a."""
    attacks = []
    if a.conclusion == b.conclusion.complement():
        attacks.append(Attack(AttackKind.REBUT, a, b, b.conclusion))
    for item in b.fact_items():
        if a.conclusion == item.item.complement():
            attacks.append(Attack(AttackKind.UNDERCUT, a, b, item.item))
    return attacks


def evaluate(
    delta: Theory,
    proposed: Argument,
    context: Iterable[tuple[str, Entry]] = (),
    depth: int = DEFAULT_PROOF_DEPTH,
) -> Decision:
    """Accept or reject a proposed argument against the given theory.

    The evaluator's theory is extended with the proposal's support (told
    facts are hypothetically trusted) and any extra context items, then
    searched for a counter-argument: first a rebut of the conclusion, then
    undercuts of the support facts in declaration order.
    """
    extension = [(s.label, s.item) for s in proposed.support if not _is_general(s)]
    extended = delta.extended(list(context) + extension)

    def counter_for(point: Literal, kind: AttackKind) -> Optional[Decision]:
        try:
            counter = construct_argument(extended, point.complement(), depth)
        except DepthExceeded:
            counter = None
        if counter is None:
            return None
        attack = Attack(kind, counter, proposed, point)
        return Decision(Verdict.REJECT, attack, counter.support)

    decision = counter_for(proposed.conclusion, AttackKind.REBUT)
    if decision is not None:
        return decision
    for item in proposed.fact_items():
        decision = counter_for(item.item, AttackKind.UNDERCUT)
        if decision is not None:
            return decision
    return Decision(Verdict.ACCEPT)


def _is_general(s: SupportItem) -> bool:
    from .logic import GeneralRule

    return isinstance(s.item, GeneralRule)
