"""Kripke models with per-world boolean definitions.

A premodel supplies worlds, per-agent relations, a valuation, and a local
definition function DEF_w assigning each atom a boolean formula.  A premodel
is a model when, at every world, (1) formulas with identical unravelings get
identical truth values and (2) every atom mentioned in a definition is
self-evident there (DEF_w(p) = p), which rules out circular chains.  The
quantified form of (1) reduces, given (2), to the atom-level check
V_w(p) = V_w(unravel(p)); `validate` checks exactly that, and the test suite
guards the reduction by brute force.

Models are immutable after validation; `restrict` returns a fresh model.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .syntax import (
    And, Atom, BoolForm, Neg, parse_bool, text_of_bool, vocabulary,
)

__all__ = [
    "Premodel", "Model", "Violation", "InvalidModelError",
    "unravel", "eval_bool", "validate", "restrict",
    "load", "save", "loads", "dumps", "premodel_from_dict", "premodel_to_dict",
    "single_world_model", "fixture_path", "fixture_names", "FIXTURE_ENV_VAR",
]

FIXTURE_ENV_VAR = "PALDEF_FIXTURES"
_FIXTURE_NAMES = ("fig1", "fig2", "fig3", "fig4")


@dataclass(frozen=True)
class Premodel:
    """Raw model data; totality holds but the two model constraints may not."""

    vocabulary: tuple[Atom, ...]
    agents: tuple[str, ...]
    worlds: tuple[str, ...]
    valuation: dict[str, dict[Atom, bool]]
    definitions: dict[str, dict[Atom, BoolForm]]
    relations: dict[str, frozenset[tuple[str, str]]]
    actual: str | None = None

    def __post_init__(self) -> None:
        if not self.worlds:
            raise ValueError("a premodel needs at least one world")
        if len(set(self.worlds)) != len(self.worlds):
            raise ValueError("duplicate world ids")
        world_set = set(self.worlds)
        vocab_set = set(self.vocabulary)
        for agent, pairs in self.relations.items():
            if agent not in self.agents:
                raise ValueError(f"relation for undeclared agent {agent!r}")
            for u, v in pairs:
                if u not in world_set or v not in world_set:
                    raise ValueError(f"relation {agent}: unknown world in ({u}, {v})")
        for w in self.worlds:
            for name, table in (("valuation", self.valuation), ("def", self.definitions)):
                if w not in table:
                    raise ValueError(f"world {w!r} missing its {name} table")
                if set(table[w]) != vocab_set:
                    raise ValueError(f"{name} at world {w!r} is not total on the vocabulary")
        for w in self.worlds:
            for a, image in self.definitions[w].items():
                extra = vocabulary(image) - vocab_set
                if extra:
                    raise ValueError(
                        f"definition of {a} at {w!r} uses undeclared atoms "
                        f"{sorted(x.name for x in extra)}"
                    )
        if self.actual is not None and self.actual not in world_set:
            raise ValueError(f"actual world {self.actual!r} is not a world")

    def successors(self, agent: str, world: str) -> list[str]:
        if agent not in self.agents:
            raise ValueError(f"unknown agent {agent!r}")
        pairs = self.relations.get(agent, frozenset())
        return sorted(v for u, v in pairs if u == world)


class Model(Premodel):
    """A premodel that passed (or provably preserves) both model constraints."""


@dataclass(frozen=True)
class Violation:
    world: str
    kind: str        # "circular-definition" | "valuation-mismatch"
    atom: Atom
    detail: str

    def __str__(self) -> str:
        return f"world {self.world}: {self.detail}"


class InvalidModelError(ValueError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        lines = "\n".join(f"  - {v}" for v in violations)
        super().__init__(f"premodel violates the model constraints:\n{lines}")


def unravel(model: Premodel, world: str, P: BoolForm) -> BoolForm:
    """Replace every atom of P by its definition at the world (one pass).

    On a valid model the images mention only self-evident atoms, so one pass
    is already a fixpoint.
    """
    defs = model.definitions[world]
    def go(f: BoolForm) -> BoolForm:
        match f:
            case Atom():
                if f not in defs:
                    raise ValueError(f"unknown atom {f} at world {world!r}")
                return defs[f]
            case Neg(inner):
                return Neg(go(inner))
            case And(left, right):
                return And(go(left), go(right))
        raise TypeError(f"not a boolean formula: {f!r}")
    return go(P)


def eval_bool(model: Premodel, world: str, P: BoolForm) -> bool:
    """Standard truth-table lifting of the world's valuation."""
    vals = model.valuation[world]
    def go(f: BoolForm) -> bool:
        match f:
            case Atom():
                if f not in vals:
                    raise ValueError(f"unknown atom {f} at world {world!r}")
                return vals[f]
            case Neg(inner):
                return not go(inner)
            case And(left, right):
                return go(left) and go(right)
        raise TypeError(f"not a boolean formula: {f!r}")
    return go(P)


def validate(premodel: Premodel) -> Model:
    """Check both model constraints; return the same data as a Model.

    Well-foundedness is checked directly: every atom inside a definition
    must be self-evident at that world.  The definitional-valuation link is
    checked through its atom-level criterion V_w(p) = V_w(unravel(p)).
    """
    violations: list[Violation] = []
    for w in premodel.worlds:
        defs = premodel.definitions[w]
        for a in premodel.vocabulary:
            for used in sorted(vocabulary(defs[a])):
                if defs[used] != used:
                    violations.append(Violation(
                        w, "circular-definition", a,
                        f"definition of {a} mentions {used}, whose definition is "
                        f"{text_of_bool(defs[used])} rather than itself",
                    ))
    if not violations:
        for w in premodel.worlds:
            for a in premodel.vocabulary:
                expected = eval_bool(premodel, w, unravel(premodel, w, a))
                if premodel.valuation[w][a] != expected:
                    violations.append(Violation(
                        w, "valuation-mismatch", a,
                        f"V({a}) = {premodel.valuation[w][a]} but its definition "
                        f"{text_of_bool(premodel.definitions[w][a])} evaluates to {expected}",
                    ))
    if violations:
        raise InvalidModelError(violations)
    return Model(
        premodel.vocabulary, premodel.agents, premodel.worlds,
        premodel.valuation, premodel.definitions, premodel.relations,
        premodel.actual,
    )


def restrict(model: Model, keep) -> Model:
    """Drop all worlds outside `keep`, preserving valuations and definitions.

    Restriction only removes worlds and relation pairs, so both model
    constraints (which are per-world) are preserved; no revalidation needed.
    """
    keep = set(keep)
    unknown = keep - set(model.worlds)
    if unknown:
        raise ValueError(f"cannot keep unknown worlds {sorted(unknown)}")
    if not keep:
        raise ValueError("restriction to the empty set of worlds")
    worlds = tuple(w for w in model.worlds if w in keep)
    return Model(
        model.vocabulary,
        model.agents,
        worlds,
        {w: model.valuation[w] for w in worlds},
        {w: model.definitions[w] for w in worlds},
        {a: frozenset((u, v) for u, v in pairs if u in keep and v in keep)
         for a, pairs in model.relations.items()},
        model.actual if model.actual in keep else None,
    )


def single_world_model(vocabulary_atoms, agents, valuation, definitions,
                       world: str = "w0") -> Model:
    """Build and validate a one-world model (reflexivity not assumed)."""
    vocab = tuple(sorted(set(vocabulary_atoms)))
    vals = {a: bool(valuation.get(a, False)) for a in vocab}
    defs = {a: definitions.get(a, a) for a in vocab}
    pm = Premodel(
        vocabulary=vocab,
        agents=tuple(sorted(set(agents))),
        worlds=(world,),
        valuation={world: vals},
        definitions={world: defs},
        relations={a: frozenset() for a in sorted(set(agents))},
        actual=world,
    )
    return validate(pm)


# ---------------------------------------------------------------------------
# File format

def premodel_to_dict(model: Premodel) -> dict:
    data: dict = {
        "vocabulary": [a.name for a in sorted(model.vocabulary)],
        "agents": sorted(model.agents),
        "worlds": [
            {
                "id": w,
                "valuation": {a.name: model.valuation[w][a] for a in sorted(model.vocabulary)},
                "def": {a.name: text_of_bool(model.definitions[w][a])
                        for a in sorted(model.vocabulary)},
            }
            for w in model.worlds
        ],
        "relations": {
            agent: sorted([u, v] for u, v in model.relations.get(agent, frozenset()))
            for agent in sorted(model.agents)
        },
    }
    if model.actual is not None:
        data["actual"] = model.actual
    return data


def premodel_from_dict(data: dict) -> Premodel:
    try:
        vocab = tuple(Atom(name) for name in data["vocabulary"])
        agents = tuple(data["agents"])
        world_entries = data["worlds"]
        worlds = tuple(entry["id"] for entry in world_entries)
        valuation = {}
        definitions = {}
        for entry in world_entries:
            w = entry["id"]
            valuation[w] = {Atom(name): bool(value)
                            for name, value in entry["valuation"].items()}
            definitions[w] = {Atom(name): parse_bool(text)
                              for name, text in entry["def"].items()}
        relations = {
            agent: frozenset((u, v) for u, v in pairs)
            for agent, pairs in data.get("relations", {}).items()
        }
        for agent in agents:
            relations.setdefault(agent, frozenset())
        actual = data.get("actual")
    except KeyError as e:
        raise ValueError(f"model file is missing key {e}") from None
    return Premodel(vocab, agents, worlds, valuation, definitions, relations, actual)


def dumps(model: Premodel) -> str:
    return json.dumps(premodel_to_dict(model), indent=2) + "\n"


def loads(text: str) -> Premodel:
    return premodel_from_dict(json.loads(text))


def save(model: Premodel, path) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8")


def load(path) -> Premodel:
    return loads(Path(path).read_text(encoding="utf-8"))


def fixture_names() -> tuple[str, ...]:
    return _FIXTURE_NAMES


def fixture_path(name: str) -> Path:
    """Path of a shipped fixture; PALDEF_FIXTURES overrides the directory."""
    stem = name[:-5] if name.endswith(".json") else name
    if stem not in _FIXTURE_NAMES:
        raise ValueError(f"unknown fixture {name!r}; available: {', '.join(_FIXTURE_NAMES)}")
    override = os.environ.get(FIXTURE_ENV_VAR)
    base = Path(override) if override else Path(__file__).parent / "fixtures"
    return base / f"{stem}.json"
