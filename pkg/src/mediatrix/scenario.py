"""Scenario files: parsing and serialization.

The concrete syntax is Prolog-adjacent. Lowercase identifiers are
constants, uppercase-initial identifiers are variables, `#` starts a line
comment. Directives end with `;`, facts and rules with `.`:

    scenario home_improvement;
    agent alpha;
    mediator mu;
    strategy alpha = eager;
    resource alpha screw = 0.0;
    general G.1 ownership;
    bridge R.3 trust;
    [A.1] int alpha: can(alpha, hang_picture).
    [A.6] bel alpha: can(X, p) :- have(X, hammer), not(have(X, glue)).
    [M.4] bel mu: int alpha: can(alpha, hang_picture).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .agent import ALL_BRIDGES, AgentState, Strategy
from .lang import Constant, Literal, Modality, Term, Variable
from .logic import Entry, GeneralKind, GeneralRule, Rule, Theory
from .mediator import MediationConfig, MediatorState

MODALITY_KEYWORDS = {"bel": Modality.BEL, "des": Modality.DES, "int": Modality.INT}
UNIT_OF_MODALITY = {Modality.BEL: "B", Modality.DES: "D", Modality.INT: "I"}
BRIDGE_KINDS = set(ALL_BRIDGES)
CONFIG_KEYS = ("max_rounds", "stall_threshold", "proof_depth")


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        hint = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{line}:{col}: {message}{hint}")
        self.line = line
        self.col = col
        self.expected = expected


class ValidationError(Exception):
    pass


@dataclass(frozen=True)
class Scenario:
    name: str
    agents: tuple[AgentState, ...]
    mediator: MediatorState
    config: MediationConfig
    warnings: tuple[str, ...] = field(default=(), compare=False)


# ----------------------------------------------------------------------
# Tokenizer
# ----------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<number>\d+(\.\d+)?|\.\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z0-9_]+)*)
  | (?P<arrow>:-)
  | (?P<punct>[()\[\],.:;=~])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | punct | arrow | eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(value)
        else:
            tokens.append(Token(kind, value, line, col))
            col += len(value)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------


@dataclass
class _Participant:
    id: str
    is_mediator: bool
    units: dict[str, list[tuple[str, Entry]]] = field(default_factory=lambda: {"B": [], "D": [], "I": []})
    resources: list[tuple[str, Fraction]] = field(default_factory=list)
    strategy: Strategy = Strategy.EAGER
    goal_labels: list[str] = field(default_factory=list)


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.name = "scenario"
        self.participants: dict[str, _Participant] = {}
        self.order: list[str] = []
        self.general: list[GeneralRule] = []
        self.bridges: list[tuple[str, str]] = []  # (label, kind)
        self.config = MediationConfig()
        self.warnings: list[str] = []
        self._auto_label: dict[str, int] = {}

    # -- token plumbing --------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def fail(self, message: str, expected: tuple[str, ...] = ()) -> "ParseError":
        t = self.peek()
        return ParseError(message, t.line, t.col, expected)

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            want = text if text is not None else kind
            raise self.fail(f"unexpected {t.text!r}" if t.text else "unexpected end of input", (want,))
        return self.next()

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        t = self.peek()
        if t.kind == kind and (text is None or t.text == text):
            return self.next()
        return None

    # -- grammar ----------------------------------------------------------

    def parse(self) -> Scenario:
        if self.peek().kind == "eof":
            raise ParseError("empty scenario", 1, 1, ("a directive",))
        while self.peek().kind != "eof":
            self.statement()
        return self.build()

    def statement(self) -> None:
        t = self.peek()
        if t.kind == "punct" and t.text == "[":
            self.labelled_formula()
            return
        if t.kind != "ident":
            raise self.fail(f"unexpected {t.text!r}", ("a directive or formula",))
        if t.text == "scenario":
            self.next()
            self.name = self.expect("ident").text
            self.expect("punct", ";")
        elif t.text in ("agent", "mediator"):
            self.next()
            ident = self.expect("ident").text
            if ident in self.participants:
                raise ValidationError(f"duplicate participant id {ident!r}")
            self.participants[ident] = _Participant(ident, t.text == "mediator")
            self.order.append(ident)
            self.expect("punct", ";")
        elif t.text == "strategy":
            self.next()
            ident = self.expect("ident").text
            self.expect("punct", "=")
            value = self.expect("ident").text
            try:
                self.participant(ident).strategy = Strategy(value)
            except ValueError:
                raise self.fail(f"unknown strategy {value!r}", ("eager", "cautious"))
            self.expect("punct", ";")
        elif t.text == "resource":
            self.next()
            owner = self.expect("ident").text
            name = self.expect("ident").text
            self.expect("punct", "=")
            num = self.expect("number").text
            value = Fraction(num)
            if not 0 <= value <= 1:
                raise ValidationError(f"resource value out of [0, 1]: {owner} {name} = {num}")
            self.participant(owner).resources.append((name, value))
            self.expect("punct", ";")
        elif t.text == "general":
            self.next()
            label = self.expect("ident").text
            kind_tok = self.expect("ident")
            try:
                kind = GeneralKind(kind_tok.text)
            except ValueError:
                raise ParseError(
                    f"unknown general principle {kind_tok.text!r}",
                    kind_tok.line,
                    kind_tok.col,
                    tuple(k.value for k in GeneralKind),
                )
            owner = None
            if self.accept("punct", "("):
                owner = self.expect("ident").text
                self.expect("punct", ")")
            self.general.append(GeneralRule(label, kind, owner))
            self.expect("punct", ";")
        elif t.text == "bridge":
            self.next()
            label = self.expect("ident").text
            kind_tok = self.expect("ident")
            if kind_tok.text not in BRIDGE_KINDS:
                raise ParseError(
                    f"unknown bridge rule {kind_tok.text!r}",
                    kind_tok.line,
                    kind_tok.col,
                    tuple(sorted(BRIDGE_KINDS)),
                )
            self.bridges.append((label, kind_tok.text))
            self.expect("punct", ";")
        elif t.text == "config":
            self.next()
            key = self.expect("ident").text
            if key not in CONFIG_KEYS:
                raise self.fail(f"unknown config key {key!r}", CONFIG_KEYS)
            self.expect("punct", "=")
            num = self.expect("number").text
            if "." in num:
                raise ValidationError(f"config {key} must be a positive integer")
            value = int(num)
            if value <= 0:
                raise ValidationError(f"config {key} must be a positive integer")
            setattr(self.config, key, value)
            self.expect("punct", ";")
        else:
            self.labelled_formula()

    def participant(self, ident: str) -> _Participant:
        if ident not in self.participants:
            raise ValidationError(f"unknown participant {ident!r}")
        return self.participants[ident]

    def labelled_formula(self) -> None:
        label = None
        if self.accept("punct", "["):
            label = self.expect("ident").text
            self.expect("punct", "]")
        mod_tok = self.peek()
        modality, owner = self.modal_prefix()
        if modality is None:
            raise ParseError(
                "formula must start with a unit tag",
                mod_tok.line,
                mod_tok.col,
                ("bel", "des", "int"),
            )
        if not isinstance(owner, Constant) or owner.symbol not in self.participants:
            raise ValidationError(f"formula owner {owner} is not a declared participant")
        p = self.participant(owner.symbol)
        unit = UNIT_OF_MODALITY[modality]
        if label is None:
            n = self._auto_label.get(owner.symbol, 0) + 1
            self._auto_label[owner.symbol] = n
            label = f"{owner.symbol}.{n}"

        head = self.literal()
        if self.accept("arrow"):
            body, naf = self.rule_body()
            self.expect("punct", ".")
            if head.modality is not Modality.NONE:
                raise ValidationError(f"rule {label}: rule heads are plain literals")
            rule = Rule(label, head, tuple(body), tuple(naf), unit=unit)
            if not rule.range_restricted():
                raise ValidationError(f"rule {label} is not range-restricted")
            p.units[unit].append((label, rule))
        else:
            self.expect("punct", ".")
            if unit == "I" and head.modality is Modality.NONE and head.positive:
                if head.predicate not in ("have", "give"):
                    p.goal_labels.append(label)
            p.units[unit].append((label, head))

    def modal_prefix(self) -> tuple[Optional[Modality], Optional[Term]]:
        t = self.peek()
        if t.kind == "ident" and t.text in MODALITY_KEYWORDS:
            nxt = self.tokens[self.pos + 1]
            after = self.tokens[self.pos + 2] if self.pos + 2 < len(self.tokens) else None
            if nxt.kind == "ident" and after is not None and after.kind == "punct" and after.text == ":":
                self.next()
                owner = self.term(self.next().text)
                self.expect("punct", ":")
                return MODALITY_KEYWORDS[t.text], owner
        return None, None

    def literal(self) -> Literal:
        positive = not self.accept("punct", "~")
        modality, owner = self.modal_prefix()
        if self.accept("punct", "~"):
            positive = not positive
        pred_tok = self.expect("ident")
        if pred_tok.text[0].isupper():
            raise ParseError(
                f"predicate {pred_tok.text!r} must be lowercase", pred_tok.line, pred_tok.col
            )
        args: list[Term] = []
        if self.accept("punct", "("):
            args.append(self.term(self.expect("ident").text))
            while self.accept("punct", ","):
                args.append(self.term(self.expect("ident").text))
            self.expect("punct", ")")
        if modality is None:
            return Literal(pred_tok.text, tuple(args), positive)
        return Literal(pred_tok.text, tuple(args), positive, modality, owner)

    def rule_body(self) -> tuple[list[Literal], list[Literal]]:
        body: list[Literal] = []
        naf: list[Literal] = []
        while True:
            if self.peek().kind == "ident" and self.peek().text == "not":
                nxt = self.tokens[self.pos + 1]
                if nxt.kind == "punct" and nxt.text == "(":
                    self.next()
                    self.next()
                    naf.append(self.literal())
                    self.expect("punct", ")")
                else:
                    body.append(self.literal())
            else:
                body.append(self.literal())
            if not self.accept("punct", ","):
                break
        return body, naf

    @staticmethod
    def term(text: str) -> Term:
        if text[0].isupper() or text[0] == "_":
            return Variable(text)
        return Constant(text)

    # -- assembly ----------------------------------------------------------

    def build(self) -> Scenario:
        mediators = [p for p in self.participants.values() if p.is_mediator]
        agents = [p for p in self.participants.values() if not p.is_mediator]
        if len(mediators) != 1:
            raise ValidationError(f"exactly one mediator required, found {len(mediators)}")
        if len(agents) != 2:
            raise ValidationError(f"exactly two negotiating agents required, found {len(agents)}")
        general = tuple(self.general)
        enabled_bridges = frozenset(kind for _, kind in self.bridges) or frozenset(ALL_BRIDGES)

        agent_states = []
        for p in agents:
            resources = self._sorted_resources(p)
            try:
                units = {u: Theory(entries) for u, entries in p.units.items()}
            except ValueError as exc:
                raise ValidationError(str(exc))
            agent_states.append(
                AgentState(
                    id=p.id,
                    units=units,
                    resources=resources,
                    strategy=p.strategy,
                    general=general,
                    bridges=enabled_bridges,
                    goal_labels=tuple(p.goal_labels),
                )
            )
        m = mediators[0]
        entries = list(m.units["B"])
        for unit in ("D", "I"):
            entries.extend(m.units[unit])
        try:
            theory = Theory(entries, general)
        except ValueError as exc:
            raise ValidationError(str(exc))
        for label, e in theory.facts():
            if not e.is_ground():
                raise ValidationError(f"mediator case fact {label} must be ground")
        mediator = MediatorState(m.id, theory, self._sorted_resources(m))
        ordered_agents = tuple(a for a in agent_states)
        return Scenario(
            self.name, ordered_agents, mediator, self.config, tuple(self.warnings)
        )

    def _sorted_resources(self, p: _Participant) -> tuple[tuple[str, Fraction], ...]:
        ordered = tuple(sorted(p.resources, key=lambda r: (r[1], r[0])))
        if list(ordered) != p.resources:
            self.warnings.append(f"resources of {p.id} re-sorted by ascending value")
        return ordered


def parse_scenario(data: Union[bytes, str]) -> Scenario:
    """Parse a scenario file; ParseError carries line/column information."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not valid UTF-8: {exc.reason}", 1, 1)
    else:
        text = data
    return _Parser(text).parse()


# ----------------------------------------------------------------------
# Serialization
# ----------------------------------------------------------------------


def _render_term(t: Term) -> str:
    return t.name if isinstance(t, Variable) else t.symbol


def render_literal(lit: Literal) -> str:
    sign = "" if lit.positive else "~"
    args = f"({', '.join(_render_term(a) for a in lit.args)})" if lit.args else ""
    inner = f"{lit.predicate}{args}"
    if lit.modality is Modality.NONE:
        return sign + inner
    return f"{sign}{lit.modality.value} {_render_term(lit.owner)}: {inner}"


def render_rule(rule: Rule) -> str:
    parts = [render_literal(b) for b in rule.body]
    parts += [f"not({render_literal(n)})" for n in rule.naf]
    return f"{render_literal(rule.head)} :- {', '.join(parts)}"


def render_entry(item: Entry) -> str:
    return render_rule(item) if isinstance(item, Rule) else render_literal(item)


def serialize_scenario(scenario: Scenario) -> bytes:
    """Canonical text form; parsing it yields an equal Scenario."""
    lines = [f"scenario {scenario.name};", ""]
    for a in scenario.agents:
        lines.append(f"agent {a.id};")
    lines.append(f"mediator {scenario.mediator.id};")
    lines.append("")
    for a in scenario.agents:
        lines.append(f"strategy {a.id} = {a.strategy.value};")
    c = scenario.config
    lines.append(f"config max_rounds = {c.max_rounds};")
    lines.append(f"config stall_threshold = {c.stall_threshold};")
    lines.append(f"config proof_depth = {c.proof_depth};")
    lines.append("")
    general = scenario.agents[0].general if scenario.agents else scenario.mediator.theory.general
    for g in general:
        owner = f"({g.owner})" if g.owner else ""
        lines.append(f"general {g.label} {g.kind.value}{owner};")
    bridge_labels = {
        "advice": "R.1",
        "advice_rule": "R.2",
        "trust": "R.3",
        "request": "R.4",
        "accept_request": "R.5",
    }
    for kind in sorted(scenario.agents[0].bridges if scenario.agents else ALL_BRIDGES):
        lines.append(f"bridge {bridge_labels[kind]} {kind};")
    lines.append("")
    for a in scenario.agents:
        for unit, tag in (("B", "bel"), ("D", "des"), ("I", "int")):
            for label, item in a.units[unit].entries():
                if isinstance(item, Rule):
                    lines.append(f"[{label}] {tag} {a.id}: {render_rule(item)}.")
                elif item.modality is Modality.NONE:
                    lines.append(f"[{label}] {tag} {a.id}: {render_literal(item)}.")
                else:
                    lines.append(f"[{label}] {tag} {a.id}: {render_literal(item)}.")
        for name, value in a.resources:
            lines.append(f"resource {a.id} {name} = {_render_fraction(value)};")
        lines.append("")
    m = scenario.mediator
    for label, item in m.theory.entries():
        lines.append(f"[{label}] bel {m.id}: {render_entry(item)}.")
    for name, value in m.resources:
        lines.append(f"resource {m.id} {name} = {_render_fraction(value)};")
    return ("\n".join(lines).rstrip("\n") + "\n").encode("utf-8")


def _render_fraction(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    f = float(value)
    if Fraction(str(f)) == value:
        return str(f)
    return f"{value.numerator}/{value.denominator}"
