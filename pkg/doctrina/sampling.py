from __future__ import annotations

"""
Seeded random generators for property checks.

Used by base-theory closure validation, doctrine-map functoriality checks and
the test suite. Every function takes an explicit ``random.Random``.
"""

import random

from doctrina.base import (
    AnyOver,
    BaseTheory,
    Bound,
    Exact,
    ExactlyOneOf,
    Sign,
    SignedSort,
    StructuralMap,
    admissible,
    allowed,
)
from doctrina.calculus import (
    Checker,
    CutRule,
    Derivation,
    Entry,
    GenRule,
    IdRule,
    InvRule,
    NonInvRule,
    StructRule,
    projection_entries,
    size,
)
from doctrina.errors import DoctrinaError
from doctrina.sketch import Sketch
from doctrina.types import Gen, TypeExpr


def random_signed_list(base: BaseTheory, rng: random.Random, max_len: int = 5) -> list:
    """Uniform random signed list, not necessarily admissible."""
    length = rng.randint(0, max_len)
    return [
        SignedSort(rng.choice(base.sorts), rng.choice([Sign.POS, Sign.NEG]))
        for _ in range(length)
    ]


def random_inhabited(base: BaseTheory, rng: random.Random, max_extra: int = 3) -> list | None:
    """
    Sample an inhabited list by picking a clause and filling its counts.

    Returns None when the sampled shape is not admissible.
    """
    if not base.clauses:
        return None
    clause = rng.choice(base.clauses)
    entries: list[SignedSort] = []

    positives = clause.positives
    if isinstance(positives, Exact):
        names = list(positives.sorts)
    elif isinstance(positives, ExactlyOneOf):
        names = [rng.choice(sorted(positives.sorts))]
    elif isinstance(positives, AnyOver):
        pool = sorted(positives.sorts)
        names = [rng.choice(pool) for _ in range(rng.randint(0, 2))] if pool else []
    else:
        names = []
    entries.extend(base.signed(name, Sign.POS) for name in names)

    for name, bound in clause.negatives:
        if bound is Bound.EXACTLY_ONE:
            count = 1
        elif bound is Bound.AT_MOST_ONE:
            count = rng.randint(0, 1)
        elif bound is Bound.UNBOUNDED:
            count = rng.randint(0, max_extra)
        else:
            count = 0
        entries.extend(base.signed(name, Sign.NEG) for _ in range(count))

    rng.shuffle(entries)
    if not admissible(entries) or not allowed(base, entries):
        return None
    return entries


def random_structural_map(source: list, rng: random.Random) -> StructuralMap:
    """
    Random valid structural map over ``source``.

    Negative nonlinear entries may be dropped or duplicated; everything else
    appears exactly once; the result is shuffled.
    """
    index: list[int] = []
    for position, entry in enumerate(source):
        if entry.is_negative_nonlinear:
            index.extend([position] * rng.choice([0, 1, 1, 2]))
        else:
            index.append(position)
    rng.shuffle(index)
    return StructuralMap.of(len(source), index)


def random_structural_instance(base: BaseTheory, rng: random.Random):
    """A random (Φ, σ) pair with Φ admissible."""
    source = random_inhabited(base, rng)
    if source is None:
        source = random_signed_list(base, rng)
        if not admissible(source):
            return None
    return source, random_structural_map(source, rng)


def random_cut_instance(base: BaseTheory, rng: random.Random, tries: int = 50):
    """
    A random cut (left, i, right, j) between inhabited lists.

    Returns None if no matching pair was found within ``tries`` samples.
    """
    left = None
    for _ in range(tries):
        left = random_inhabited(base, rng)
        if left:
            break
    if not left:
        return None
    i = rng.randrange(len(left))
    wanted = left[i].flip()
    for _ in range(tries):
        right = random_inhabited(base, rng)
        if right and wanted in right:
            positions = [k for k, entry in enumerate(right) if entry == wanted]
            return left, i, right, rng.choice(positions)
    return None


# Random derivations


class _Pool:
    """Checked derivations grown by random rule applications."""

    def __init__(self, sketch: Sketch, rng: random.Random, max_nodes: int):
        self.sketch = sketch
        self.rng = rng
        self.max_nodes = max_nodes
        self.checker = Checker(sketch)
        self.items: list[tuple[Derivation, tuple[Entry, ...]]] = []
        self.seen: set[Derivation] = set()
        for obj in sketch.objects:
            self.add(IdRule(Gen(obj.name)))
        for gen in sketch.generators:
            self.add(GenRule(gen.name))

    def add(self, d: Derivation) -> bool:
        if d in self.seen or size(d) > self.max_nodes:
            return False
        try:
            conclusion = self.checker.check(d)
        except DoctrinaError:
            return False
        self.seen.add(d)
        self.items.append((d, conclusion.entries))
        return True

    def types_of_sort(self, sort: str) -> list[TypeExpr]:
        found = {e.type for _, entries in self.items for e in entries}
        found.update(Gen(obj.name) for obj in self.sketch.objects)
        return sorted(
            (t for t in found if self.checker.sort_of(t).name == sort), key=str
        )

    def grow(self, steps: int) -> None:
        moves = (self._noninv, self._cut, self._inv, self._permute)
        for _ in range(steps):
            self.rng.choice(moves)()

    def _noninv(self) -> None:
        cones = self.sketch.doctrine.cones
        if not cones:
            return
        cone = self.rng.choice(cones)
        if not cone.projections:
            return
        args = []
        for obj in cone.reduct:
            choices = self.types_of_sort(obj.sort)
            if not choices:
                return
            args.append(self.rng.choice(choices))
        self.add(NonInvRule(cone.name, tuple(args), self.rng.choice(cone.projections).id))

    def _cut(self) -> None:
        if not self.items:
            return
        left, lc = self.rng.choice(self.items)
        right, rc = self.rng.choice(self.items)
        pairs = [
            (i, j)
            for i, a in enumerate(lc)
            for j, b in enumerate(rc)
            if a.type == b.type and a.sign is not b.sign
        ]
        if pairs:
            i, j = self.rng.choice(pairs)
            self.add(CutRule(left, i, right, j))

    def _inv(self) -> None:
        cones = self.sketch.doctrine.cones
        if not cones or not self.items:
            return
        cone = self.rng.choice(cones)
        d, entries = self.rng.choice(self.items)
        args: dict[str, TypeExpr] = {}
        if cone.projections:
            first = cone.projections[0]
            if len(entries) < len(first.entries):
                return
            for (obj, sign), entry in zip(first.entries, entries):
                if entry.sign is not sign or args.setdefault(obj, entry.type) != entry.type:
                    return
            sides = entries[len(first.entries):]
        else:
            sides = entries
        for obj in cone.reduct:
            if obj.id not in args:
                choices = self.types_of_sort(obj.sort)
                if not choices:
                    return
                args[obj.id] = self.rng.choice(choices)
        ordered = tuple(args[obj.id] for obj in cone.reduct)
        premises = []
        for projection in cone.projections:
            wanted = tuple(projection_entries(cone, ordered, projection.id)) + tuple(sides)
            matches = [p for p, c in self.items if c == wanted]
            if not matches:
                return
            premises.append((projection.id, self.rng.choice(matches)))
        self.add(InvRule(cone.name, ordered, tuple(sides), tuple(premises)))

    def _permute(self) -> None:
        if not self.items:
            return
        d, entries = self.rng.choice(self.items)
        index = list(range(len(entries)))
        self.rng.shuffle(index)
        target = [None] * len(entries)
        for k, position in enumerate(index):
            target[position] = entries[k]
        self.add(StructRule(tuple(target), StructuralMap.of(len(entries), index), d))


def random_derivation(
    sketch: Sketch,
    rng: random.Random,
    max_nodes: int = 12,
    min_nodes: int = 2,
    steps: int = 60,
) -> Derivation | None:
    """
    A random checked core derivation with between ``min_nodes`` and
    ``max_nodes`` nodes, or None if none was grown.
    """
    pool = _Pool(sketch, rng, max_nodes)
    pool.grow(steps)
    candidates = [d for d, _ in pool.items if size(d) >= min_nodes]
    return rng.choice(candidates) if candidates else None


def random_redex(
    sketch: Sketch, rng: random.Random, max_nodes: int = 12, steps: int = 80
) -> Derivation | None:
    """
    A random checked derivation whose root is a principal cut: a
    noninvertible rule cut against the invertible rule of the same cone.
    """
    pool = _Pool(sketch, rng, max_nodes)
    pool.grow(steps)
    redexes = []
    for d, _ in pool.items:
        if not isinstance(d, InvRule) or not d.premises:
            continue
        cone = sketch.doctrine.cone(d.cone)
        for projection in cone.projections:
            intro = NonInvRule(d.cone, d.args, projection.id)
            redex = CutRule(intro, len(projection.entries), d, 0)
            try:
                pool.checker.check(redex)
            except DoctrinaError:
                continue
            redexes.append(redex)
    return rng.choice(redexes) if redexes else None
