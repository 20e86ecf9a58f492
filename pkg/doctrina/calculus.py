from __future__ import annotations

"""
Sequents, derivations, the rule checker and split-context elaboration.

Sequents are entries-only: one ordered list of signed types, negatives on
the domain side and positives on the codomain side. Derivations are trees of
six core rules (identity, cut, structural, generator, noninvertible and
invertible logical rules). Surface sugar (``intro``, ``factor`` with
inferred sides, ``derelict``, ``promote``, ``store``, ``ref`` and
index-only structural maps) is elaborated into core rules by
``Elaborator``.
"""

import logging
from dataclasses import dataclass, fields
from typing import Iterator, Union

from doctrina.base import BaseSort, Sign, SignedSort, StructuralMap, allowed
from doctrina.doctrine import DiscreteCone
from doctrina.errors import (
    AmbiguousZone,
    BadStructuralMap,
    CutSignMismatch,
    CutTypeMismatch,
    DoctrinaError,
    InadmissibleConclusion,
    MissingProjectionPremise,
    NotSorted,
    PremiseShapeMismatch,
    SideConditionFailed,
    UncheckedInput,
    UnknownItem,
)
from doctrina.sketch import Sketch
from doctrina.types import Comp, Gen, TypeExpr, check_type, objects_in

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Entry:
    type: TypeExpr
    sign: Sign

    def flip(self) -> Entry:
        return Entry(self.type, self.sign.flip())

    def __str__(self) -> str:
        return f"{self.type}{self.sign.value}"


def neg(t: TypeExpr) -> Entry:
    return Entry(t, Sign.NEG)


def pos(t: TypeExpr) -> Entry:
    return Entry(t, Sign.POS)


@dataclass(frozen=True)
class Sequent:
    entries: tuple[Entry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Entry]:
        return iter(self.entries)

    def __getitem__(self, index: int) -> Entry:
        return self.entries[index]

    def find(self, entry: Entry) -> int | None:
        """Position of the first occurrence of ``entry``."""
        for position, candidate in enumerate(self.entries):
            if candidate == entry:
                return position
        return None

    def without(self, index: int) -> tuple[Entry, ...]:
        return self.entries[:index] + self.entries[index + 1 :]

    def __str__(self) -> str:
        return "|- " + (", ".join(str(e) for e in self.entries) or ".")


# Derivation trees


class Derivation:
    """Base class of derivation nodes, core and surface."""

    __slots__ = ()


@dataclass(frozen=True)
class IdRule(Derivation):
    type: TypeExpr


@dataclass(frozen=True)
class CutRule(Derivation):
    left: Derivation
    i: int
    right: Derivation
    j: int


@dataclass(frozen=True)
class StructRule(Derivation):
    """Conclusion ``target`` from a premise concluding target reindexed by ``sigma``."""

    target: tuple[Entry, ...]
    sigma: StructuralMap
    premise: Derivation


@dataclass(frozen=True)
class GenRule(Derivation):
    name: str


@dataclass(frozen=True)
class NonInvRule(Derivation):
    cone: str
    args: tuple[TypeExpr, ...]
    projection: str


@dataclass(frozen=True)
class InvRule(Derivation):
    cone: str
    args: tuple[TypeExpr, ...]
    sides: tuple[Entry, ...]
    premises: tuple[tuple[str, Derivation], ...] = ()

    def premise(self, projection_id: str) -> Derivation | None:
        for pid, d in self.premises:
            if pid == projection_id:
                return d
        return None


CORE_RULES = (IdRule, CutRule, StructRule, GenRule, NonInvRule, InvRule)


# Surface sugar, removed by elaboration


@dataclass(frozen=True)
class Ref(Derivation):
    name: str


@dataclass(frozen=True)
class Reindex(Derivation):
    """``map{σ}(d)``; the target is inferred when σ is surjective."""

    index: tuple[int, ...]
    premise: Derivation
    target: tuple[Entry, ...] | None = None


@dataclass(frozen=True)
class Intro(Derivation):
    cone: str
    args: tuple[TypeExpr, ...]
    projection: str
    premises: tuple[Derivation, ...] = ()


@dataclass(frozen=True)
class Factor(Derivation):
    cone: str
    args: tuple[TypeExpr, ...]
    sides: tuple[Entry, ...] | None
    premises: tuple[tuple[str, Derivation], ...] = ()


@dataclass(frozen=True)
class Derelict(Derivation):
    index: int
    premise: Derivation


@dataclass(frozen=True)
class Promote(Derivation):
    premise: Derivation


@dataclass(frozen=True)
class Store(Derivation):
    index: int
    premise: Derivation


def is_core(d: Derivation) -> bool:
    """True when no surface sugar occurs anywhere in ``d``."""
    if not isinstance(d, CORE_RULES):
        return False
    return all(is_core(child) for child in children(d))


def children(d: Derivation) -> list[Derivation]:
    if isinstance(d, CutRule):
        return [d.left, d.right]
    if isinstance(d, StructRule):
        return [d.premise]
    if isinstance(d, InvRule):
        return [p for _, p in d.premises]
    return []


def size(d: Derivation) -> int:
    """Number of core nodes."""
    return 1 + sum(size(child) for child in children(d))


def subderivations(d: Derivation) -> Iterator[Derivation]:
    yield d
    for child in children(d):
        yield from subderivations(child)


def mentions(d) -> tuple[set[str], set[str]]:
    """Sketch objects and generators a term refers to."""
    objects: set[str] = set()
    generators: set[str] = set()

    def walk(value):
        if isinstance(value, (Gen, Comp)):
            objects.update(objects_in(value))
        elif isinstance(value, Entry):
            walk(value.type)
        elif isinstance(value, GenRule):
            generators.add(value.name)
        elif isinstance(value, Derivation):
            for f in fields(value):
                walk(getattr(value, f.name))
        elif isinstance(value, tuple):
            for item in value:
                walk(item)

    walk(d)
    return objects, generators


def projection_entries(cone: DiscreteCone, args, projection_id: str) -> list[Entry]:
    """Instantiated entries of one projection, in declared order."""
    projection = cone.projection(projection_id)
    return [Entry(args[cone.object_index(obj)], sign) for obj, sign in projection.entries]


# Checking


class Checker:
    """
    Checks derivations against one sketch.

    Conclusions are memoized per node object, so checking a tree that shares
    subtrees with earlier ones is linear in the new nodes.
    """

    def __init__(self, sketch: Sketch):
        self.sketch = sketch
        self.doctrine = sketch.doctrine
        self.base = sketch.doctrine.base
        self._memo: dict[int, tuple[Derivation, Sequent]] = {}
        self._sorts: dict[TypeExpr, BaseSort] = {}

    def sort_of(self, t: TypeExpr) -> BaseSort:
        if t not in self._sorts:
            self._sorts[t] = check_type(self.sketch, t)
        return self._sorts[t]

    def signed(self, entry: Entry) -> SignedSort:
        return SignedSort(self.sort_of(entry.type), entry.sign)

    def admit(self, entries) -> Sequent:
        """
        Build a sequent after checking its invariants.

        Raises:
            InadmissibleConclusion: if the signed sorts are not admissible and inhabited
        """
        entries = tuple(entries)
        image = [self.signed(e) for e in entries]
        if not allowed(self.base, image):
            shown = ", ".join(str(s) for s in image)
            raise InadmissibleConclusion(
                f"Conclusion sorts ({shown}) are not admissible and inhabited "
                f"in '{self.base.name}'"
            )
        return Sequent(entries)

    def check(self, d: Derivation, path: str = "root") -> Sequent:
        """
        Check a core derivation and return its conclusion.

        Raises:
            DerivationError subclasses, lookup and sort errors, with ``path`` set
        """
        hit = self._memo.get(id(d))
        if hit is not None and hit[0] is d:
            return hit[1]
        try:
            entries = self._infer(d, path)
            sequent = self.admit(entries)
        except DoctrinaError as e:
            raise e.at(path)
        self._memo[id(d)] = (d, sequent)
        return sequent

    def _infer(self, d: Derivation, path: str) -> list[Entry]:
        if isinstance(d, IdRule):
            self.sort_of(d.type)
            return [neg(d.type), pos(d.type)]
        if isinstance(d, GenRule):
            gen = self.sketch.generator(d.name)
            return [Entry(Gen(name), sign) for name, sign in gen.signature]
        if isinstance(d, NonInvRule):
            return self._noninv(d)
        if isinstance(d, CutRule):
            return self._cut(d, path)
        if isinstance(d, StructRule):
            return self._struct(d, path)
        if isinstance(d, InvRule):
            return self._inv(d, path)
        raise UncheckedInput(
            f"{type(d).__name__} is surface syntax and must be elaborated before checking"
        )

    def _noninv(self, d: NonInvRule) -> list[Entry]:
        cone = self.doctrine.cone(d.cone)
        vertex = Comp(cone.name, tuple(d.args))
        self.sort_of(vertex)
        entries = projection_entries(cone, d.args, d.projection)
        entries.append(Entry(vertex, cone.vertex_sign))
        return entries

    def _cut(self, d: CutRule, path: str) -> list[Entry]:
        left = self.check(d.left, f"{path}.left")
        right = self.check(d.right, f"{path}.right")
        if not (0 <= d.i < len(left) and 0 <= d.j < len(right)):
            raise CutTypeMismatch(
                f"Cut positions [{d.i},{d.j}] out of range for premises of "
                f"length {len(left)} and {len(right)}"
            )
        a, b = left[d.i], right[d.j]
        if a.type != b.type:
            raise CutTypeMismatch(f"Cut entries {a} and {b} have different types")
        if a.sign is b.sign:
            raise CutSignMismatch(f"Cut entries {a} and {b} have the same sign")
        return list(left.without(d.i) + right.without(d.j))

    def _struct(self, d: StructRule, path: str) -> list[Entry]:
        premise = self.check(d.premise, f"{path}.premise")
        target = list(d.target)
        sigma = d.sigma
        for entry in target:
            self.sort_of(entry.type)
        if sigma.source_len != len(target) or sigma.target_len != len(premise):
            raise BadStructuralMap(
                f"Map {list(sigma.index)} goes from {sigma.source_len} to "
                f"{sigma.target_len} entries; rule needs {len(target)} to {len(premise)}"
            )
        for k, value in enumerate(sigma.index):
            if premise[k] != target[value]:
                raise BadStructuralMap(
                    f"Premise entry {k} is {premise[k]} but the map sends it to "
                    f"{target[value]}"
                )
        for position, count in enumerate(sigma.preimage_counts()):
            if count != 1 and not self.signed(target[position]).is_negative_nonlinear:
                action = "drops" if count == 0 else "copies"
                raise BadStructuralMap(
                    f"Map {action} entry {position} ({target[position]}), which is not "
                    f"negative nonlinear"
                )
        return target

    def check_inv_header(self, d: InvRule) -> None:
        """Checks of an invertible rule that do not look at its premises."""
        cone = self.doctrine.cone(d.cone)
        vertex = Comp(cone.name, tuple(d.args))
        self.sort_of(vertex)
        for entry in d.sides:
            self.sort_of(entry.type)

        given = [pid for pid, _ in d.premises]
        declared = [p.id for p in cone.projections]
        repeated = sorted({pid for pid in given if given.count(pid) > 1})
        if repeated:
            raise PremiseShapeMismatch(f"Premises {repeated} given more than once")
        missing = [pid for pid in declared if pid not in given]
        if missing:
            raise MissingProjectionPremise(
                f"No premise for projection(s) {missing} of '{cone.name}'"
            )
        extra = [pid for pid in given if pid not in declared]
        if extra:
            raise PremiseShapeMismatch(f"'{cone.name}' has no projection(s) {extra}")

        condition = [self.base.signed(cone.vertex_sort, cone.vertex_sign.flip())]
        condition += [self.signed(e) for e in d.sides]
        if not allowed(self.base, condition):
            shown = ", ".join(str(s) for s in condition)
            raise SideConditionFailed(
                f"Side context ({shown}) is not allowed in '{self.base.name}'"
            )

    def _inv(self, d: InvRule, path: str) -> list[Entry]:
        cone = self.doctrine.cone(d.cone)
        vertex = Comp(cone.name, tuple(d.args))
        self.check_inv_header(d)
        for pid in (p.id for p in cone.projections):
            expected = tuple(projection_entries(cone, d.args, pid)) + tuple(d.sides)
            premise_path = f"{path}.premises.{pid}"
            got = self.check(d.premise(pid), premise_path)
            if got.entries != expected:
                raise PremiseShapeMismatch(
                    f"Premise concludes {got}, expected {Sequent(expected)}",
                    path=premise_path,
                )
        return [Entry(vertex, cone.vertex_sign.flip())] + list(d.sides)


def check_derivation(sketch: Sketch, d: Derivation) -> Sequent:
    """Check a core derivation against a sketch."""
    return Checker(sketch).check(d)


def conclusion_of(checker: Checker, d: Derivation) -> Sequent:
    return checker.check(d)


# Zones

THETA, GAMMA, DELTA, UPSILON, POSITIVE = range(5)


@dataclass
class ZoneView:
    theta: list[Entry]
    gamma: list[Entry]
    delta: list[Entry]
    upsilon: list[Entry]
    positive: list[Entry]


def _upsilon_sorts(sketch: Sketch) -> set[str]:
    doctrine = sketch.doctrine
    if not doctrine.is_sorted:
        return set()
    found = set()
    for _, cone_name in doctrine.sorting.sorting_cones:
        if not doctrine.has_cone(cone_name):
            continue
        cone = doctrine.cone(cone_name)
        if cone.is_arrow_type and cone.projections[0].entries[0][1] is Sign.NEG:
            found.add(cone.vertex_sort)
    return found


def zone_of(checker: Checker, entry: Entry, upsilon_sorts: set[str]) -> int:
    sort = checker.sort_of(entry.type)
    if sort.is_linear:
        return GAMMA if entry.sign is Sign.NEG else DELTA
    if entry.sign is Sign.POS:
        return POSITIVE
    return UPSILON if sort.name in upsilon_sorts else THETA


def split_zones(checker: Checker, sequent: Sequent) -> ZoneView:
    upsilon_sorts = _upsilon_sorts(checker.sketch)
    view = ZoneView([], [], [], [], [])
    buckets = [view.theta, view.gamma, view.delta, view.upsilon, view.positive]
    for entry in sequent:
        buckets[zone_of(checker, entry, upsilon_sorts)].append(entry)
    return view


def zone_permutation(checker: Checker, sequent: Sequent) -> list[int]:
    """Stable order of positions grouping entries by zone."""
    upsilon_sorts = _upsilon_sorts(checker.sketch)
    return sorted(
        range(len(sequent)), key=lambda k: (zone_of(checker, sequent[k], upsilon_sorts), k)
    )


def in_zone_order(checker: Checker, sequent: Sequent) -> Sequent:
    order = zone_permutation(checker, sequent)
    return Sequent(tuple(sequent[k] for k in order))


def permute_to(entries, order: list[int], d: Derivation) -> Derivation:
    """Struct node listing ``entries`` in ``order``; ``d`` unchanged when order is identity."""
    if order == list(range(len(order))):
        return d
    target = tuple(entries[k] for k in order)
    new_position = {old: new for new, old in enumerate(order)}
    sigma = StructuralMap.of(len(target), [new_position[k] for k in range(len(order))])
    return StructRule(target, sigma, d)


def _coercion(checker: Checker, t: TypeExpr, entry_sign: Sign) -> DiscreteCone:
    doctrine = checker.doctrine
    sort = checker.sort_of(t)
    if not doctrine.is_sorted:
        raise NotSorted(
            f"Doctrine '{doctrine.name}' has no sorting to place linear type {t} "
            f"in a nonlinear zone"
        )
    cones = doctrine.coercion_cones(sort.name, entry_sign)
    if not cones:
        raise NotSorted(f"No sorting cone coerces sort '{sort.name}' into this zone")
    if len(cones) > 1:
        raise AmbiguousZone(
            f"Sorting cones {[c.name for c in cones]} all coerce sort '{sort.name}'"
        )
    return cones[0]


def coerce(checker: Checker, t: TypeExpr, zone: int) -> TypeExpr:
    """Wrap a linear type in the sorting cone of a nonlinear zone."""
    if not checker.sort_of(t).is_linear:
        return t
    entry_sign = Sign.POS if zone == THETA else Sign.NEG
    return Comp(_coercion(checker, t, entry_sign).name, (t,))


def _uncoerce(checker: Checker, t: TypeExpr, zone: int) -> TypeExpr:
    if not isinstance(t, Comp) or len(t.args) != 1:
        return t
    inner = t.args[0]
    if not checker.doctrine.is_sorted or not checker.sort_of(inner).is_linear:
        return t
    entry_sign = Sign.POS if zone == THETA else Sign.NEG
    cones = checker.doctrine.coercion_cones(checker.sort_of(inner).name, entry_sign)
    if len(cones) == 1 and cones[0].name == t.cone:
        return inner
    return t


def _show(types) -> str:
    return ", ".join(str(t) for t in types) or "."


def render_sequent(checker: Checker, sequent: Sequent, entries_only: bool = False) -> str:
    """Display a sequent in split-context notation (or entries-only)."""
    if entries_only:
        return str(sequent)
    view = split_zones(checker, sequent)
    if view.positive:
        left = [e.type for e in view.theta + view.upsilon]
        return f"{_show(left)} |- {_show(e.type for e in view.positive)}"
    theta = [_uncoerce(checker, e.type, THETA) for e in view.theta]
    gamma = [e.type for e in view.gamma]
    delta = [e.type for e in view.delta]
    text = f"{_show(theta)} | {_show(gamma)} |- {_show(delta)}"
    if view.upsilon:
        upsilon = [_uncoerce(checker, e.type, UPSILON) for e in view.upsilon]
        text += f" | {_show(upsilon)}"
    return text


@dataclass(frozen=True)
class SurfaceSequent:
    """
    A sequent as written.

    ``form`` is ``entries`` (one zone of Entry values), ``plain`` (negative
    types, positive types) or ``split`` (Θ, Γ, Δ and optionally Υ as types).
    """

    form: str
    zones: tuple[tuple, ...]


def elaborate_sequent(checker: Checker, surface: SurfaceSequent) -> Sequent:
    """
    Turn a written sequent into its entries-only form.

    Raises:
        NotSorted, AmbiguousZone, InadmissibleConclusion, type errors
    """
    if surface.form == "entries":
        entries = list(surface.zones[0])
    elif surface.form == "plain":
        left, right = surface.zones
        entries = [neg(t) for t in left] + [pos(t) for t in right]
    elif surface.form == "split":
        theta, gamma, delta = surface.zones[:3]
        upsilon = surface.zones[3] if len(surface.zones) > 3 else ()
        for t in list(gamma) + list(delta):
            if not checker.sort_of(t).is_linear:
                raise AmbiguousZone(f"Nonlinear type {t} written in a linear zone")
        entries = [neg(coerce(checker, t, THETA)) for t in theta]
        entries += [neg(t) for t in gamma] + [pos(t) for t in delta]
        entries += [neg(coerce(checker, t, UPSILON)) for t in upsilon]
    else:
        raise ValueError(f"Unknown sequent form '{surface.form}'")
    for entry in entries:
        checker.sort_of(entry.type)
    return checker.admit(entries)


def same_up_to_zones(checker: Checker, a: Sequent, b: Sequent) -> bool:
    """Equal after grouping both sequents by zone."""
    return in_zone_order(checker, a) == in_zone_order(checker, b)


def fitting_map(checker: Checker, have, target) -> StructuralMap | None:
    """
    Structural map turning a premise concluding ``have`` into ``target``.

    Returns None when exchange plus weakening and contraction of negative
    nonlinear entries cannot do it.
    """
    have = tuple(have)
    target = tuple(target)
    used = [0] * len(target)
    index = []
    for entry in have:
        candidates = [k for k, t in enumerate(target) if t == entry]
        free = [k for k in candidates if not used[k]]
        if free:
            k = free[0]
        elif candidates and checker.signed(entry).is_negative_nonlinear:
            k = candidates[0]
        else:
            return None
        used[k] += 1
        index.append(k)
    for k, count in enumerate(used):
        if count == 0 and not checker.signed(target[k]).is_negative_nonlinear:
            return None
    return StructuralMap.of(len(target), index)


# Elaboration


class Elaborator:
    """Elaborates surface terms into checked core derivations."""

    def __init__(
        self,
        sketch: Sketch,
        proofs: dict[str, Derivation] | None = None,
        checker: Checker | None = None,
    ):
        self.sketch = sketch
        self.doctrine = sketch.doctrine
        self.proofs = proofs if proofs is not None else {}
        self.checker = checker or Checker(sketch)

    def elaborate(self, t: Derivation, path: str = "root") -> Derivation:
        try:
            return self._term(t, path)
        except DoctrinaError as e:
            raise e.at(path)

    def _term(self, t: Derivation, path: str) -> Derivation:
        check = self.checker.check
        if isinstance(t, (IdRule, GenRule, NonInvRule)):
            check(t, path)
            return t
        if isinstance(t, CutRule):
            left = self.elaborate(t.left, f"{path}.left")
            right = self.elaborate(t.right, f"{path}.right")
            node = t if (left is t.left and right is t.right) else CutRule(left, t.i, right, t.j)
            check(node, path)
            return node
        if isinstance(t, StructRule):
            premise = self.elaborate(t.premise, f"{path}.premise")
            node = t if premise is t.premise else StructRule(t.target, t.sigma, premise)
            check(node, path)
            return node
        if isinstance(t, InvRule):
            premises = tuple(
                (pid, self.elaborate(d, f"{path}.premises.{pid}")) for pid, d in t.premises
            )
            unchanged = all(a[1] is b[1] for a, b in zip(premises, t.premises))
            node = t if unchanged else InvRule(t.cone, t.args, t.sides, premises)
            check(node, path)
            return node
        if isinstance(t, Ref):
            if t.name not in self.proofs:
                raise UnknownItem(f"No proof named '{t.name}'")
            return self.proofs[t.name]
        if isinstance(t, Reindex):
            return self._reindex(t, path)
        if isinstance(t, Intro):
            return self._intro(t, path)
        if isinstance(t, Factor):
            return self._factor(t, path)
        if isinstance(t, Derelict):
            return self._derelict(t, path)
        if isinstance(t, Promote):
            return self._promote(t, path)
        if isinstance(t, Store):
            return self._store(t, path)
        raise UncheckedInput(f"Cannot elaborate {type(t).__name__}")

    def zone_ordered(self, d: Derivation, path: str) -> Derivation:
        sequent = self.checker.check(d, path)
        node = permute_to(sequent.entries, zone_permutation(self.checker, sequent), d)
        if node is not d:
            self.checker.check(node, path)
        return node

    def fit(self, d: Derivation, target, path: str) -> Derivation:
        """
        Wrap ``d`` in a structural rule so it concludes ``target``.

        Raises:
            PremiseShapeMismatch: if no exchange, weakening or contraction fits
        """
        have = self.checker.check(d, path)
        target = tuple(target)
        if have.entries == target:
            return d
        sigma = fitting_map(self.checker, have.entries, target)
        if sigma is None:
            raise PremiseShapeMismatch(
                f"Premise concludes {have}, which does not fit {Sequent(target)}",
                path=path,
            )
        node = StructRule(target, sigma, d)
        self.checker.check(node, path)
        return node

    def _reindex(self, t: Reindex, path: str) -> Derivation:
        premise = self.elaborate(t.premise, f"{path}.premise")
        have = self.checker.check(premise, f"{path}.premise")
        if len(t.index) != len(have):
            raise BadStructuralMap(
                f"Map lists {len(t.index)} indices for a premise with {len(have)} entries"
            )
        if t.target is not None:
            target = tuple(t.target)
        else:
            width = max(t.index, default=-1) + 1
            slots: list[Entry | None] = [None] * width
            for k, value in enumerate(t.index):
                if value < 0:
                    raise BadStructuralMap(f"Negative index {value}")
                if slots[value] is not None and slots[value] != have[k]:
                    raise BadStructuralMap(
                        f"Index {value} receives both {slots[value]} and {have[k]}"
                    )
                slots[value] = have[k]
            holes = [k for k, slot in enumerate(slots) if slot is None]
            if holes:
                raise BadStructuralMap(
                    f"Map leaves positions {holes} unfilled; give the conclusion explicitly"
                )
            target = tuple(slots)
        if any(not 0 <= v < len(target) for v in t.index):
            raise BadStructuralMap(f"Map {list(t.index)} points outside the conclusion")
        node = StructRule(target, StructuralMap.of(len(target), t.index), premise)
        self.checker.check(node, path)
        return node

    def _intro(self, t: Intro, path: str) -> Derivation:
        current: Derivation = NonInvRule(t.cone, tuple(t.args), t.projection)
        self.checker.check(current, path)
        cone = self.doctrine.cone(t.cone)
        wanted = projection_entries(cone, t.args, t.projection)
        if len(t.premises) != len(wanted):
            raise PremiseShapeMismatch(
                f"Projection '{t.projection}' of '{cone.name}' takes {len(wanted)} "
                f"premises, got {len(t.premises)}"
            )
        pending = list(range(len(wanted)))
        for k, premise in enumerate(t.premises):
            premise_path = f"{path}.premises.{k}"
            d = self.elaborate(premise, premise_path)
            have = self.checker.check(d, premise_path)
            position = have.find(wanted[k].flip())
            if position is None:
                raise PremiseShapeMismatch(
                    f"Premise {k} concludes {have} with no {wanted[k].flip()} to cut on",
                    path=premise_path,
                )
            at = pending[k]
            current = CutRule(d, position, current, at)
            shift = len(have) - 1
            pending = [
                p if index <= k else (p - 1 if p > at else p) + shift
                for index, p in enumerate(pending)
            ]
            self.checker.check(current, path)
        return self.zone_ordered(current, path)

    def _factor(self, t: Factor, path: str) -> Derivation:
        cone = self.doctrine.cone(t.cone)
        args = tuple(t.args)
        self.checker.sort_of(Comp(cone.name, args))
        declared = [p.id for p in cone.projections]
        premises = [
            (pid, self.elaborate(d, f"{path}.premises.{pid}")) for pid, d in t.premises
        ]
        premises.sort(
            key=lambda item: declared.index(item[0]) if item[0] in declared else len(declared)
        )

        sides = t.sides
        if sides is None:
            known = [(pid, d) for pid, d in premises if pid in declared]
            if not known:
                raise PremiseShapeMismatch(
                    f"Cannot infer the side context of '{cone.name}' without premises; "
                    f"write the sides explicitly"
                )
            pid, d = known[0]
            remaining = list(self.checker.check(d, f"{path}.premises.{pid}"))
            for entry in projection_entries(cone, args, pid):
                if entry not in remaining:
                    raise PremiseShapeMismatch(
                        f"Premise for '{pid}' lacks projection entry {entry}",
                        path=f"{path}.premises.{pid}",
                    )
                remaining.remove(entry)
            sides = tuple(remaining)

        try:
            self.checker.check_inv_header(InvRule(cone.name, args, tuple(sides), tuple(premises)))
        except DoctrinaError as e:
            raise e.at(path)
        fitted = []
        for pid, d in premises:
            expected = projection_entries(cone, args, pid) + list(sides)
            fitted.append((pid, self.fit(d, expected, f"{path}.premises.{pid}")))
        node = InvRule(cone.name, args, tuple(sides), tuple(fitted))
        self.checker.check(node, path)
        return node

    def _derelict(self, t: Derelict, path: str) -> Derivation:
        d = self.elaborate(t.premise, f"{path}.premise")
        have = self.checker.check(d, f"{path}.premise")
        entry = _entry_at(have, t.index)
        if not self.checker.sort_of(entry.type).is_linear:
            raise NotSorted(f"Entry {entry} is already nonlinear")
        # a negative entry moves to Θ, a positive one to Υ
        entry_sign = Sign.POS if entry.sign is Sign.NEG else Sign.NEG
        cone = _coercion(self.checker, entry.type, entry_sign)
        noninv = NonInvRule(cone.name, (entry.type,), cone.projections[0].id)
        node = CutRule(noninv, 0, d, t.index)
        self.checker.check(node, path)
        return self.zone_ordered(node, path)

    def _promote(self, t: Promote, path: str) -> Derivation:
        d = self.elaborate(t.premise, f"{path}.premise")
        have = self.checker.check(d, f"{path}.premise")
        linear = [k for k, e in enumerate(have) if self.checker.sort_of(e.type).is_linear]
        if len(linear) != 1:
            raise PremiseShapeMismatch(
                f"Promotion needs exactly one linear entry, {have} has {len(linear)}"
            )
        k = linear[0]
        entry = have[k]
        context = have.without(k)
        for other in context:
            if not self.checker.signed(other).is_negative_nonlinear:
                raise PremiseShapeMismatch(f"Promotion context holds {other}")
        forget = _coercion(self.checker, entry.type, entry.sign)
        inv = self._factor(
            Factor(forget.name, (entry.type,), context, ((forget.projections[0].id, d),)),
            f"{path}.premise",
        )
        stored = Comp(forget.name, (entry.type,))
        arrows = self.doctrine.arrow_cones(forget.vertex_sort, Sign.NEG, entry.sign)
        if len(arrows) != 1:
            raise NotSorted(
                f"Expected one arrow cone out of '{forget.vertex_sort}' with vertex sign "
                f"{entry.sign.value}, found {[c.name for c in arrows]}"
            )
        free = arrows[0]
        return self._intro(Intro(free.name, (stored,), free.projections[0].id, (inv,)), path)

    def _store(self, t: Store, path: str) -> Derivation:
        d = self.elaborate(t.premise, f"{path}.premise")
        have = self.checker.check(d, f"{path}.premise")
        entry = _entry_at(have, t.index)
        sort = self.checker.sort_of(entry.type)
        if entry.sign is not Sign.NEG or sort.is_linear:
            raise NotSorted(f"Entry {entry} is not a stored nonlinear hypothesis")
        arrows = self.doctrine.arrow_cones(sort.name, Sign.NEG)
        if not arrows:
            raise NotSorted(f"No arrow cone stores sort '{sort.name}' linearly")
        if len(arrows) > 1:
            raise AmbiguousZone(
                f"Arrow cones {[c.name for c in arrows]} all store sort '{sort.name}'"
            )
        free = arrows[0]
        context = have.without(t.index)
        node = self._factor(
            Factor(free.name, (entry.type,), context, ((free.projections[0].id, d),)), path
        )
        return self.zone_ordered(node, path)


def _entry_at(sequent: Sequent, index: int) -> Entry:
    if not 0 <= index < len(sequent):
        raise PremiseShapeMismatch(f"No entry {index} in {sequent}")
    return sequent[index]


def elaborate_split_context(
    sketch: Sketch,
    item: Union[SurfaceSequent, Derivation],
    proofs: dict[str, Derivation] | None = None,
    checker: Checker | None = None,
) -> Union[Sequent, Derivation]:
    """
    Elaborate a written sequent or proof term.

    Args:
        sketch: Sketch the item lives in
        item: SurfaceSequent or surface proof term
        proofs: Named proofs that ``ref`` may use
        checker: Checker to share memoized conclusions with

    Returns:
        Entries-only Sequent, or a checked core Derivation
    """
    checker = checker or Checker(sketch)
    if isinstance(item, SurfaceSequent):
        return elaborate_sequent(checker, item)
    return Elaborator(sketch, proofs, checker).elaborate(item)
