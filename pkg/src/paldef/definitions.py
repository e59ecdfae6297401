"""Decision procedures for equivalence-by-definition.

Equivalences between boolean formulas are decided by syntactic unification:
atoms act as variables, `~` and `&` as constructors.  A ``DefState`` holds a
union-find partition of atoms (representative = alphabetically least) plus at
most one binding image per class, together with a trail that can replay every
conclusion.  The pattern axioms of the logic are exactly the decomposition and
clash rules of unification; the occurs check realises non-circularity, and on
failure a ``CircularWitness`` is extracted from the trail: a substitution
chain that derives an explicitly circular equivalence from the asserted
literals.

States are values: `assert_equiv` returns a new state and never mutates the
receiver, so distinct states may be used concurrently.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .syntax import (
    And, Atom, BoolForm, Neg, NegF, EquivF, OccSubst, apply_occ_subst,
    is_circular, length, lex_key, parse_form, project_bool,
    text_of_bool, vocabulary,
)

__all__ = [
    "EquivLiteral", "DefState", "CircularWitness", "WitnessStep",
    "PatternClash", "CircularityDetected",
    "DInput", "DSym", "DNegParts", "DAndParts", "DTrans",
    "merge", "merge_substitution", "pick",
    "literal_sat", "SatCheck", "parse_literal_lines",
]


@dataclass(frozen=True)
class EquivLiteral:
    """A (dis)equivalence between boolean formulas: `left == right` or `!=`."""

    positive: bool
    left: BoolForm
    right: BoolForm

    def __str__(self) -> str:
        op = "==" if self.positive else "!="
        return f"{text_of_bool(self.left)} {op} {text_of_bool(self.right)}"


# ---------------------------------------------------------------------------
# Derivations: how a literal follows from the asserted inputs.  Each node
# carries the literal it derives, so replay and proof generation never have to
# recompute it.

@dataclass(frozen=True)
class DInput:
    left: BoolForm
    right: BoolForm


@dataclass(frozen=True)
class DSym:
    left: BoolForm
    right: BoolForm
    of: "Derivation"


@dataclass(frozen=True)
class DNegParts:
    """(l == r) from (~l == ~r)."""

    left: BoolForm
    right: BoolForm
    of: "Derivation"


@dataclass(frozen=True)
class DAndParts:
    """One coordinate of ((a & b) == (c & d))."""

    left: BoolForm
    right: BoolForm
    of: "Derivation"
    side: int


@dataclass(frozen=True)
class DTrans:
    left: BoolForm
    right: BoolForm
    first: "Derivation"
    second: "Derivation"


Derivation = DInput | DSym | DNegParts | DAndParts | DTrans


def d_sym(d: Derivation) -> Derivation:
    if isinstance(d, DSym):
        return d.of
    return DSym(d.right, d.left, d)


def d_trans(first: Derivation, second: Derivation) -> Derivation:
    if first.right != second.left:
        raise ValueError("transitivity endpoints do not meet")
    return DTrans(first.left, second.right, first, second)


class PatternClash(ValueError):
    """A negation met a conjunction while decomposing an equivalence."""

    def __init__(self, left: BoolForm, right: BoolForm):
        self.left = left
        self.right = right
        super().__init__(
            f"pattern mismatch: {text_of_bool(left)} cannot equal {text_of_bool(right)}"
        )


class CircularityDetected(ValueError):
    """The asserted equivalences entail a circular formula."""

    def __init__(self, witness: "CircularWitness"):
        self.witness = witness
        super().__init__(f"circular consequence: {witness.conclusion}")


@dataclass(frozen=True)
class WitnessStep:
    premise: Derivation
    subst: OccSubst


@dataclass(frozen=True)
class CircularWitness:
    """A replayable derivation of a circular equivalence.

    Starting from the base literal, each step rewrites one atom occurrence on
    the right-hand side using an equivalence derived from the inputs; the
    final literal has its left-hand atom occurring properly inside its
    right-hand side.
    """

    base: Derivation
    steps: tuple[WitnessStep, ...]
    conclusion: EquivLiteral

    def replay(self) -> EquivLiteral:
        """Re-run the substitution chain; the result must equal conclusion."""
        current = self.base.right
        for step in self.steps:
            if step.subst.atom != step.premise.left:
                raise ValueError("witness step substitutes a different atom than its premise")
            if step.subst.replacement != step.premise.right:
                raise ValueError("witness step replacement differs from its premise")
            current = apply_occ_subst(step.subst, current)
        lit = EquivLiteral(True, self.base.left, current)
        if lit != self.conclusion:
            raise ValueError(f"witness replays to {lit}, not {self.conclusion}")
        if not is_circular(lit.left, lit.right):
            raise ValueError(f"witness conclusion {lit} is not circular")
        return lit

    def describe(self) -> str:
        lines = [f"start  {text_of_bool(self.base.left)} == {text_of_bool(self.base.right)}"]
        current = self.base.right
        for step in self.steps:
            current = apply_occ_subst(step.subst, current)
            lines.append(
                f"  {step.subst}  (using {text_of_bool(step.premise.left)} == "
                f"{text_of_bool(step.premise.right)})"
            )
            lines.append(f"       {text_of_bool(self.base.left)} == {text_of_bool(current)}")
        lines.append(f"conclusion {self.conclusion} is circular")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# merge: combine two unifiable formulas into their common refinement

def merge(P: BoolForm, Q: BoolForm) -> BoolForm | None:
    """Componentwise combination of P and Q; None on constructor clash.

    Atom against atom keeps the alphabetically smaller one; atom against a
    compound keeps the compound; negations and conjunctions combine their
    parts; a negation against a conjunction is undefined.
    """
    match (P, Q):
        case (Atom(), Atom()):
            return P if P.name < Q.name else Q
        case (Atom(), _):
            return Q
        case (_, Atom()):
            return P
        case (Neg(a), Neg(b)):
            inner = merge(a, b)
            return None if inner is None else Neg(inner)
        case (And(a, b), And(c, d)):
            left = merge(a, c)
            right = merge(b, d)
            if left is None or right is None:
                return None
            return And(left, right)
    return None


def merge_substitution(P: BoolForm, Q: BoolForm) -> list[OccSubst]:
    """Occurrence substitutions turning P into merge(P, Q), applied at once.

    Each produced substitution replaces an atom of P by the aligned subterm
    of Q (or by an alphabetically smaller atom), so its premise is an
    equivalence that holds whenever P and Q do.  Undefined merges raise.
    """
    if merge(P, Q) is None:
        raise ValueError("merge(P, Q) is undefined")
    counts: dict[Atom, int] = {}
    subs: list[OccSubst] = []

    def count_leaves(f: BoolForm) -> None:
        match f:
            case Atom():
                counts[f] = counts.get(f, 0) + 1
            case Neg(inner):
                count_leaves(inner)
            case And(left, right):
                count_leaves(left)
                count_leaves(right)

    def walk(a: BoolForm, b: BoolForm) -> None:
        match (a, b):
            case (Atom(), _):
                counts[a] = counts.get(a, 0) + 1
                replace_by = None
                if isinstance(b, Atom):
                    if b.name < a.name:
                        replace_by = b
                else:
                    replace_by = b
                if replace_by is not None:
                    subs.append(OccSubst(counts[a], a, replace_by))
            case (Neg(x), Neg(y)):
                walk(x, y)
            case (And(x1, x2), And(y1, y2)):
                walk(x1, y1)
                walk(x2, y2)
            case (_, Atom()):
                # compound side wins; its leaves still advance the counters
                count_leaves(a)
    walk(P, Q)
    return subs


def pick(X) -> BoolForm:
    """Canonical element of a finite set: longest, ties broken lex-first."""
    items = list(X)
    if not items:
        raise ValueError("pick of an empty set")
    longest = max(length(P) for P in items)
    return min((P for P in items if length(P) == longest), key=lex_key)


# ---------------------------------------------------------------------------
# DefState

@dataclass(frozen=True)
class _Binding:
    owner: Atom
    image: BoolForm
    just: Derivation
    seq: int


@dataclass(frozen=True)
class UnionEvent:
    seq: int
    left: Atom
    right: Atom
    just: Derivation


@dataclass(frozen=True)
class BindEvent:
    seq: int
    atom: Atom
    image: BoolForm
    just: Derivation


TrailEvent = UnionEvent | BindEvent


@dataclass
class DefState:
    """Unification state over atoms-as-variables; treat as an immutable value.

    All mutation happens on private copies inside assert_equiv.
    """

    _parent: dict[Atom, Atom] = field(default_factory=dict)
    _bindings: dict[Atom, _Binding] = field(default_factory=dict)
    _edges: dict[Atom, list[tuple[Atom, Derivation, int]]] = field(default_factory=dict)
    _trail: list[TrailEvent] = field(default_factory=list)

    # -- structure ----------------------------------------------------------

    def rep(self, a: Atom) -> Atom:
        while a in self._parent:
            a = self._parent[a]
        return a

    def binding_image(self, a: Atom) -> BoolForm | None:
        b = self._bindings.get(self.rep(a))
        return b.image if b else None

    @property
    def trail(self) -> tuple[TrailEvent, ...]:
        return tuple(self._trail)

    def bindings(self) -> dict[Atom, BoolForm]:
        """Current binding map, keyed by class representative."""
        return {rep: b.image for rep, b in self._bindings.items()}

    def replay_trail(self) -> dict[Atom, BoolForm]:
        """Recompute the binding map from the trail alone (sanity check).

        Events are applied primitively; pending pairs an event would have
        spawned are dropped because their effects appear later in the trail.
        """
        fresh = DefState()
        for event in self._trail:
            match event:
                case UnionEvent(_, left, right, just):
                    fresh._union(left, right, just)
                case BindEvent(_, atom, image, just):
                    fresh._bind(atom, image, just)
        return fresh.bindings()

    def _copy(self) -> "DefState":
        return DefState(
            dict(self._parent),
            dict(self._bindings),
            {a: list(edges) for a, edges in self._edges.items()},
            list(self._trail),
        )

    # -- assertion ----------------------------------------------------------

    def assert_equiv(self, left: BoolForm, right: BoolForm) -> "DefState":
        """Return a state additionally satisfying `left == right`.

        Raises PatternClash on a negation/conjunction mismatch and
        CircularityDetected (with witness) when the occurs check fails.
        """
        new = self._copy()
        new._consume([(left, right, DInput(left, right))])
        return new

    def _consume(self, pairs: list[tuple[BoolForm, BoolForm, Derivation]]) -> None:
        queue = list(pairs)
        while queue:
            a, b, just = queue.pop(0)
            if a == b:
                continue
            match (a, b):
                case (Atom(), Atom()):
                    queue[:0] = self._union(a, b, just)
                case (Atom(), _):
                    queue[:0] = self._bind(a, b, just)
                case (_, Atom()):
                    queue[:0] = self._bind(b, a, d_sym(just))
                case (Neg(x), Neg(y)):
                    queue.insert(0, (x, y, DNegParts(x, y, just)))
                case (And(x1, x2), And(y1, y2)):
                    queue[:0] = [
                        (x1, y1, DAndParts(x1, y1, just, 0)),
                        (x2, y2, DAndParts(x2, y2, just, 1)),
                    ]
                case _:
                    if isinstance(a, Neg):
                        raise PatternClash(a, b)
                    raise PatternClash(b, a)

    def _union(self, a: Atom, b: Atom, just: Derivation):
        ra, rb = self.rep(a), self.rep(b)
        if ra == rb:
            return []
        seq = len(self._trail)
        self._trail.append(UnionEvent(seq, a, b, just))
        self._edges.setdefault(a, []).append((b, just, seq))
        self._edges.setdefault(b, []).append((a, d_sym(just), seq))
        keep, lose = (ra, rb) if ra.name < rb.name else (rb, ra)
        self._parent[lose] = keep
        pending = []
        lost_binding = self._bindings.pop(lose, None)
        if lost_binding is not None:
            kept_binding = self._bindings.get(keep)
            if kept_binding is None:
                self._bindings[keep] = lost_binding
            else:
                first, second = sorted((kept_binding, lost_binding), key=lambda x: x.seq)
                self._bindings[keep] = first
                pending.append(self._image_pair(first, second))
        self._occurs_sweep()
        return pending

    def _bind(self, a: Atom, image: BoolForm, just: Derivation):
        r = self.rep(a)
        existing = self._bindings.get(r)
        if existing is not None:
            candidate = _Binding(a, image, just, len(self._trail))
            return [self._image_pair(existing, candidate)]
        seq = len(self._trail)
        self._trail.append(BindEvent(seq, a, image, just))
        self._bindings[r] = _Binding(a, image, just, seq)
        self._occurs_sweep()
        return []

    def _image_pair(self, first: _Binding, second: _Binding):
        """Pending pair equating two images asserted for the same class."""
        d = d_sym(first.just)  # image1 == owner1
        path = self._atom_path(first.owner, second.owner)
        if path is not None:
            d = d_trans(d, path)
        d = d_trans(d, second.just)  # ... == image2
        return (first.image, second.image, d)

    def _atom_path(self, x: Atom, y: Atom) -> Derivation | None:
        """Derivation of x == y along recorded union edges; None when x is y."""
        if x == y:
            return None
        prev: dict[Atom, tuple[Atom, Derivation]] = {x: (x, None)}
        frontier = [x]
        while frontier:
            u = frontier.pop(0)
            for v, just, _ in sorted(
                self._edges.get(u, []), key=lambda e: (e[0].name, e[2])
            ):
                if v in prev:
                    continue
                prev[v] = (u, just)
                if v == y:
                    frontier = []
                    break
                frontier.append(v)
        if y not in prev:
            raise ValueError(f"no union path between {x} and {y}")
        chain = []
        node = y
        while node != x:
            node, just = prev[node]
            chain.append(just)
        d = chain[-1]
        for just in reversed(chain[:-1]):
            d = d_trans(d, just)
        return d

    def _path_edges(self, x: Atom, y: Atom) -> list[tuple[Atom, Atom, Derivation, int]]:
        """Union edges along the path x .. y as (from, to, just-for(from==to), seq)."""
        if x == y:
            return []
        prev: dict[Atom, tuple[Atom, Derivation, int]] = {x: (x, None, -1)}
        frontier = [x]
        while frontier:
            u = frontier.pop(0)
            for v, just, seq in sorted(
                self._edges.get(u, []), key=lambda e: (e[0].name, e[2])
            ):
                if v in prev:
                    continue
                prev[v] = (u, just, seq)
                if v == y:
                    frontier = []
                    break
                frontier.append(v)
        if y not in prev:
            raise ValueError(f"no union path between {x} and {y}")
        edges = []
        node = y
        while node != x:
            u, just, seq = prev[node]
            edges.append((u, node, just, seq))
            node = u
        edges.reverse()
        return edges

    # -- occurs check and witness extraction ---------------------------------

    def _occurs_sweep(self) -> None:
        deps: dict[Atom, list[Atom]] = {}
        for r, binding in self._bindings.items():
            targets = {self.rep(at) for at in vocabulary(binding.image)}
            deps[r] = sorted(targets, key=lambda a: a.name)
        state: dict[Atom, int] = {}

        def visit(node: Atom, stack: list[Atom]):
            state[node] = 1
            stack.append(node)
            for nxt in deps.get(node, []):
                if nxt not in deps:
                    continue
                mark = state.get(nxt, 0)
                if mark == 0:
                    cycle = visit(nxt, stack)
                    if cycle:
                        return cycle
                elif mark == 1:
                    return stack[stack.index(nxt):]
            stack.pop()
            state[node] = 2
            return None

        for start in sorted(deps, key=lambda a: a.name):
            if state.get(start, 0) == 0:
                cycle = visit(start, [])
                if cycle:
                    raise CircularityDetected(self._extract_witness(cycle))

    def _leftmost_of_class(self, image: BoolForm, cls: Atom) -> Atom | None:
        match image:
            case Atom():
                return image if self.rep(image) == cls else None
            case Neg(inner):
                return self._leftmost_of_class(inner, cls)
            case And(left, right):
                found = self._leftmost_of_class(left, cls)
                return found if found else self._leftmost_of_class(right, cls)
        return None

    def _extract_witness(self, cycle: list[Atom]) -> CircularWitness:
        """Build a replayable circular derivation from a class-level cycle.

        The derivation starts at the earliest trail event lying on the cycle
        and walks the cycle once, substituting binding images (and union
        edges as atom renamings) until the start atom reappears inside the
        right-hand side.
        """
        m = len(cycle)
        binds = [self._bindings[c] for c in cycle]
        entries = []  # entry atom of class cycle[i+1] inside image of cycle[i]
        paths = []    # union edges from that entry atom to the next owner
        for i in range(m):
            nxt = cycle[(i + 1) % m]
            entry = self._leftmost_of_class(binds[i].image, nxt)
            entries.append(entry)
            paths.append(self._path_edges(entry, binds[(i + 1) % m].owner))

        candidates = [("bind", i, binds[i].seq) for i in range(m)]
        for i in range(m):
            for j, (_, _, _, seq) in enumerate(paths[i]):
                candidates.append(("edge", (i, j), seq))
        kind, where, _ = min(candidates, key=lambda c: c[2])

        steps: list[WitnessStep] = []

        def occ_index(S: BoolForm, path: tuple[int, ...]) -> int:
            # occurrence number of the atom sitting at `path` within S
            target = S
            for d in path:
                target = (target.inner if isinstance(target, Neg)
                          else (target.left if d == 0 else target.right))
            count = 0

            def scan(f: BoolForm, p: tuple[int, ...]) -> bool:
                nonlocal count
                match f:
                    case Atom():
                        if f == target:
                            count += 1
                        return p == path
                    case Neg(inner):
                        return scan(inner, p + (0,))
                    case And(left, right):
                        return scan(left, p + (0,)) or scan(right, p + (1,))
            scan(S, ())
            return count

        def atom_path_in(image: BoolForm, atom: Atom) -> tuple[int, ...]:
            def go(f: BoolForm, p: tuple[int, ...]):
                match f:
                    case Atom():
                        return p if f == atom else None
                    case Neg(inner):
                        return go(inner, p + (0,))
                    case And(left, right):
                        return go(left, p + (0,)) or go(right, p + (1,))
            found = go(image, ())
            if found is None:
                raise ValueError(f"{atom} not in {text_of_bool(image)}")
            return found

        def substitute(S, pos, premise: Derivation):
            k = occ_index(S, pos)
            sub = OccSubst(k, premise.left, premise.right)
            steps.append(WitnessStep(premise, sub))
            return apply_occ_subst(sub, S)

        if kind == "bind":
            j = where
            base = binds[j].just
            x0 = binds[j].owner
            S = binds[j].image
            pos = atom_path_in(S, entries[j])
            pending = paths[j]
            next_class = (j + 1) % m
        else:
            i, j = where
            u, v, just, _ = paths[i][j]
            base = just
            x0 = u
            S = v
            pos = ()
            pending = paths[i][j + 1:]
            next_class = (i + 1) % m

        home = self.rep(x0)

        def stop_atom(S: BoolForm):
            if isinstance(S, Atom):
                return None
            found = self._leftmost_of_class(S, home)
            return found

        while True:
            hit = stop_atom(S)
            if hit is not None:
                pos = atom_path_in(S, hit)
                for u, v, just, _ in self._path_edges(hit, x0):
                    S = substitute(S, pos, just)
                break
            for u, v, just, _ in pending:
                S = substitute(S, pos, just)
            k = next_class
            S = substitute(S, pos, binds[k].just)
            pos = pos + atom_path_in(binds[k].image, entries[k])
            pending = paths[k]
            next_class = (k + 1) % m

        conclusion = EquivLiteral(True, x0, S)
        witness = CircularWitness(base, tuple(steps), conclusion)
        witness.replay()
        return witness

    # -- resolution ----------------------------------------------------------

    def resolve(self, P: BoolForm) -> BoolForm:
        """Fully unravel bindings, then name free atoms by their class rep."""
        def go(f: BoolForm) -> BoolForm:
            match f:
                case Atom():
                    r = self.rep(f)
                    binding = self._bindings.get(r)
                    return go(binding.image) if binding else r
                case Neg(inner):
                    return Neg(go(inner))
                case And(left, right):
                    return And(go(left), go(right))
            raise TypeError(f"not a boolean formula: {f!r}")
        return go(P)


# ---------------------------------------------------------------------------
# Satisfiability of literal sets

@dataclass(frozen=True)
class SatCheck:
    """Outcome of literal_sat; on success carries a one-world model seed."""

    satisfiable: bool
    reason: str | None = None           # pattern-clash | circular | disequality | boolean
    detail: str = ""
    witness: CircularWitness | None = None
    definitions: dict[Atom, BoolForm] | None = None
    valuation: dict[Atom, bool] | None = None


def _eval_under(P: BoolForm, assignment: dict[Atom, bool]) -> bool:
    match P:
        case Atom():
            return assignment[P]
        case Neg(inner):
            return not _eval_under(inner, assignment)
        case And(left, right):
            return _eval_under(left, assignment) and _eval_under(right, assignment)
    raise TypeError(f"not a boolean formula: {P!r}")


def literal_sat(equivs, constraints=()) -> SatCheck:
    """Decide a finite set of (dis)equivalences plus boolean constraints.

    Satisfiable iff the positive equivalences unify, no negative literal is
    forced equal after resolution, and some truth assignment to the class
    representatives makes every boolean constraint true.  The model seed maps
    each atom to its resolved definition and extends the representative
    assignment to defined atoms.
    """
    equivs = list(equivs)
    constraints = list(constraints)
    state = DefState()
    for lit in equivs:
        if not lit.positive:
            continue
        try:
            state = state.assert_equiv(lit.left, lit.right)
        except PatternClash as e:
            return SatCheck(False, "pattern-clash", f"{lit}: {e}")
        except CircularityDetected as e:
            return SatCheck(False, "circular", f"{lit}: {e}", witness=e.witness)

    for lit in equivs:
        if lit.positive:
            continue
        if state.resolve(lit.left) == state.resolve(lit.right):
            return SatCheck(False, "disequality", f"{lit} is violated: both sides resolve to "
                            f"{text_of_bool(state.resolve(lit.left))}")

    vocab: set[Atom] = set()
    for lit in equivs:
        vocab |= vocabulary(lit.left) | vocabulary(lit.right)
    for c in constraints:
        vocab |= vocabulary(c)
    vocab_sorted = sorted(vocab)

    resolved = {a: state.resolve(a) for a in vocab_sorted}
    free: set[Atom] = set()
    for image in resolved.values():
        free |= vocabulary(image)
    resolved_constraints = [state.resolve(c) for c in constraints]
    for rc in resolved_constraints:
        free |= vocabulary(rc)
    free_sorted = sorted(free)

    for bits in itertools.product((False, True), repeat=len(free_sorted)):
        assignment = dict(zip(free_sorted, bits))
        if all(_eval_under(rc, assignment) for rc in resolved_constraints):
            valuation = {a: _eval_under(resolved[a], assignment) for a in vocab_sorted}
            return SatCheck(True, definitions=resolved, valuation=valuation)
    return SatCheck(False, "boolean", "no assignment to the class representatives satisfies "
                    "the boolean constraints")


def parse_literal_lines(text: str) -> tuple[list[EquivLiteral], list[BoolForm]]:
    """Parse a literal file: one `P == Q`, `P != Q`, or boolean formula per line.

    Blank lines and lines starting with `#` are skipped.
    """
    equivs: list[EquivLiteral] = []
    constraints: list[BoolForm] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        f = parse_form(line)
        match f:
            case EquivF(left, right):
                equivs.append(EquivLiteral(True, left, right))
            case NegF(EquivF(left, right)):
                equivs.append(EquivLiteral(False, left, right))
            case _:
                P = project_bool(f)
                if P is None:
                    raise ValueError(
                        f"line {lineno}: expected P == Q, P != Q, or a boolean formula"
                    )
                constraints.append(P)
    return equivs, constraints
