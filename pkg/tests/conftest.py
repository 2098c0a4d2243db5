from __future__ import annotations

from pathlib import Path

import pytest

from mediatrix import parse_scenario
from mediatrix.lang import atom, intends
from mediatrix.logic import GeneralKind, GeneralRule, Rule, Theory
from mediatrix.scenario import Scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

GENERAL = (
    GeneralRule("G.1", GeneralKind.OWNERSHIP),
    GeneralRule("G.2", GeneralKind.REDUCTION),
    GeneralRule("G.3", GeneralKind.GENEROSITY, "mu"),
    GeneralRule("G.4", GeneralKind.UNICITY),
    GeneralRule("G.5", GeneralKind.BENEVOLENCE),
    GeneralRule("G.6", GeneralKind.PARSIMONY),
    GeneralRule("G.7", GeneralKind.UNIQUE_CHOICE),
)


def load_scenario(name: str) -> Scenario:
    return parse_scenario((SCENARIOS / f"{name}.med").read_bytes())


@pytest.fixture
def home_improvement() -> Scenario:
    return load_scenario("home_improvement")


def mediator_round_two_theory() -> Theory:
    """The mediator's theory after both agents disclosed everything.

    Labels M.4 onward follow the order knowledge arrives in: goals first
    (round one), then alpha's beliefs, then beta's.
    """
    return Theory(
        [
            ("M.1", atom("have", "mu", "screwdriver")),
            (
                "M.2",
                Rule(
                    "M.2",
                    atom("can", "X", "hang_mirror"),
                    (
                        atom("have", "X", "screw"),
                        atom("have", "X", "screwdriver"),
                        atom("have", "X", "mirror"),
                    ),
                ),
            ),
            (
                "M.3",
                Rule(
                    "M.3",
                    atom("can", "X", "hang_mirror"),
                    (
                        atom("have", "X", "hammer"),
                        atom("have", "X", "nail"),
                        atom("have", "X", "mirror"),
                    ),
                ),
            ),
            ("M.4", intends("alpha", atom("can", "alpha", "hang_picture"))),
            ("M.5", intends("beta", atom("can", "beta", "hang_mirror"))),
            ("M.6", atom("have", "alpha", "picture")),
            ("M.7", atom("have", "alpha", "screw")),
            ("M.8", atom("have", "alpha", "hammer")),
            ("M.9", atom("have", "beta", "nail")),
            (
                "M.10",
                Rule(
                    "M.10",
                    atom("can", "X", "hang_picture"),
                    (
                        atom("have", "X", "hammer"),
                        atom("have", "X", "nail"),
                        atom("have", "X", "picture"),
                    ),
                ),
            ),
            ("M.11", atom("have", "beta", "mirror")),
        ],
        GENERAL,
    )


@pytest.fixture
def gamma_full() -> Theory:
    return mediator_round_two_theory()
