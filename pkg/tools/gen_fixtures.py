"""Regenerate the shipped example models under src/paldef/fixtures/.

Writing them through `models.save` keeps the files in canonical form, so
load/save round trips are byte-exact.
"""

from pathlib import Path

from paldef.models import Premodel, validate, save
from paldef.syntax import Atom, parse_bool

OUT = Path(__file__).resolve().parent.parent / "src" / "paldef" / "fixtures"


def world_table(vocab, values):
    return {Atom(name): value for name, value in zip(vocab, values)}


def defs_table(vocab, texts):
    return {Atom(name): parse_bool(text) for name, text in zip(vocab, texts)}


def full_relation(worlds):
    return frozenset((u, v) for u in worlds for v in worlds)


def build_fig1():
    vocab = ["p", "q", "r"]
    worlds = ("left", "middle", "right")
    return validate(Premodel(
        vocabulary=tuple(Atom(a) for a in vocab),
        agents=("i",),
        worlds=worlds,
        valuation={
            "left": world_table(vocab, [True, True, True]),
            "middle": world_table(vocab, [True, True, False]),
            "right": world_table(vocab, [True, False, True]),
        },
        definitions={
            "left": defs_table(vocab, ["r", "q", "r"]),
            "middle": defs_table(vocab, ["q", "q", "r"]),
            "right": defs_table(vocab, ["r", "q", "r"]),
        },
        relations={"i": full_relation(worlds)},
        actual="middle",
    ))


def build_fig2():
    vocab = ["p", "q"]
    worlds = ("left", "right")
    return validate(Premodel(
        vocabulary=tuple(Atom(a) for a in vocab),
        agents=("i",),
        worlds=worlds,
        valuation={
            "left": world_table(vocab, [True, True]),
            "right": world_table(vocab, [False, False]),
        },
        definitions={
            "left": defs_table(vocab, ["q", "q"]),
            "right": defs_table(vocab, ["q", "q"]),
        },
        relations={"i": full_relation(worlds)},
        actual="left",
    ))


def build_fig3():
    vocab = ["p", "q", "q1", "r", "r1"]
    worlds = ("left", "middle", "right")
    return validate(Premodel(
        vocabulary=tuple(Atom(a) for a in vocab),
        agents=("a", "b"),
        worlds=worlds,
        valuation={
            "left": world_table(vocab, [False, False, False, True, False]),
            "middle": world_table(vocab, [True, True, False, True, False]),
            "right": world_table(vocab, [False, True, False, False, False]),
        },
        definitions={
            "left": defs_table(vocab, ["(q & ~r1)", "q", "q1", "~r1", "r1"]),
            "middle": defs_table(vocab, ["(~q1 & ~r1)", "~q1", "q1", "~r1", "r1"]),
            "right": defs_table(vocab, ["(~q1 & r)", "~q1", "q1", "r", "r1"]),
        },
        relations={
            "a": full_relation(("left", "middle")) | {("right", "right")},
            "b": full_relation(("middle", "right")) | {("left", "left")},
        },
        actual="middle",
    ))


def build_fig4():
    vocab = ["p", "q", "r"]
    worlds = ("left", "middle", "right")
    return validate(Premodel(
        vocabulary=tuple(Atom(a) for a in vocab),
        agents=("i", "j"),
        worlds=worlds,
        valuation={
            "left": world_table(vocab, [True, False, True]),
            "middle": world_table(vocab, [True, False, False]),
            "right": world_table(vocab, [True, True, False]),
        },
        definitions={
            "left": defs_table(vocab, ["r", "q", "r"]),
            "middle": defs_table(vocab, ["p", "q", "r"]),
            "right": defs_table(vocab, ["q", "q", "r"]),
        },
        relations={
            "i": frozenset({("middle", "left")}),
            "j": frozenset({("middle", "right")}),
        },
        actual="middle",
    ))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, build in [("fig1", build_fig1), ("fig2", build_fig2),
                        ("fig3", build_fig3), ("fig4", build_fig4)]:
        save(build(), OUT / f"{name}.json")
        print(f"wrote {OUT / (name + '.json')}")


if __name__ == "__main__":
    main()
