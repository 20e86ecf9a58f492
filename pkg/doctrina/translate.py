from __future__ import annotations

"""
Doctrine maps: validation, sortedness, base change of sketches and
translation of derivations.

A map sends source sorts to target sorts and each source cone to a target
cone through an explicit correspondence of reduct objects and projections.
Derivations over free sketches translate rule by rule.
"""

import logging
import random
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product

from doctrina.base import Sign, SignedSort, allowed
from doctrina.calculus import (
    Checker,
    CutRule,
    Derivation,
    Entry,
    GenRule,
    IdRule,
    InvRule,
    NonInvRule,
    Sequent,
    StructRule,
    fitting_map,
    projection_entries,
)
from doctrina.doctrine import Doctrine, ValidationReport
from doctrina.errors import DoctrinaError, InvalidMap, UncheckedInput
from doctrina.sampling import random_inhabited
from doctrina.sketch import ConeInstance, Equation, Generator, Sketch, SketchObject
from doctrina.types import Comp, Gen, TypeExpr

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConeCorrespondence:
    source: str
    target: str
    objects: tuple[tuple[str, str], ...] = ()
    projections: tuple[tuple[str, str], ...] = ()

    def object(self, source_id: str) -> str:
        return dict(self.objects).get(source_id, source_id)

    def projection(self, source_id: str) -> str:
        return dict(self.projections).get(source_id, source_id)


@dataclass(frozen=True)
class DoctrineMap:
    name: str
    source: Doctrine
    target: Doctrine
    sorts: tuple[tuple[str, str], ...]
    cones: tuple[ConeCorrespondence, ...]

    def sort(self, name: str) -> str:
        for source, target in self.sorts:
            if source == name:
                return target
        raise InvalidMap(f"Map '{self.name}' does not send sort '{name}' anywhere")

    def cone(self, name: str) -> ConeCorrespondence:
        for correspondence in self.cones:
            if correspondence.source == name:
                return correspondence
        raise InvalidMap(f"Map '{self.name}' has no correspondence for cone '{name}'")


@dataclass
class MapReport:
    """Validation of a doctrine map, with the sortedness verdict."""

    name: str
    report: ValidationReport = field(default_factory=ValidationReport)
    sorted: bool = False
    sorted_diagnostics: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.report.valid


def inclusion_map(
    name: str, source: Doctrine, target: Doctrine, sort_map: dict[str, str] | None = None
) -> DoctrineMap:
    """Map matching cones by name with identity object and projection correspondences."""
    sort_map = sort_map or {s.name: s.name for s in source.base.sorts}
    return DoctrineMap(
        name=name,
        source=source,
        target=target,
        sorts=tuple(sorted(sort_map.items())),
        cones=tuple(ConeCorrespondence(c.name, c.name) for c in source.cones),
    )


# Validation


def _check_sorts(m: DoctrineMap, report: ValidationReport) -> bool:
    ok = True
    mapped = dict(m.sorts)
    for sort in m.source.base.sorts:
        if sort.name not in mapped:
            report.add("UnmappedSort", f"Sort '{sort.name}' has no image", sort.name)
            ok = False
            continue
        image = mapped[sort.name]
        if not m.target.base.has_sort(image):
            report.add("UnknownSort", f"Target has no sort '{image}'", sort.name)
            ok = False
        elif m.target.base.sort(image).linearity is not sort.linearity:
            report.add(
                "LinearityMismatch",
                f"'{sort.name}' is {sort.linearity.value} but '{image}' is "
                f"{m.target.base.sort(image).linearity.value}",
                sort.name,
            )
            ok = False
    return ok


def _image(m: DoctrineMap, entries) -> list[SignedSort]:
    return [m.target.base.signed(m.sort(s.sort.name), s.sign) for s in entries]


def _check_base(
    m: DoctrineMap, report: ValidationReport, trials: int, seed: int, exhaustive_length: int
) -> None:
    base = m.source.base
    alphabet = [SignedSort(sort, sign) for sort in base.sorts for sign in Sign]
    for length in range(exhaustive_length + 1):
        for combo in combinations_with_replacement(alphabet, length):
            entries = list(combo)
            if allowed(base, entries) and not allowed(m.target.base, _image(m, entries)):
                shown = ", ".join(str(e) for e in entries)
                report.add("BaseNotPreserved", f"Image of ({shown}) is not inhabited", "base")
                return
    rng = random.Random(seed)
    for _ in range(trials):
        entries = random_inhabited(base, rng, max_extra=exhaustive_length)
        if entries and not allowed(m.target.base, _image(m, entries)):
            shown = ", ".join(str(e) for e in entries)
            report.add("BaseNotPreserved", f"Image of ({shown}) is not inhabited", "base")
            return


def _check_cone(m: DoctrineMap, correspondence: ConeCorrespondence, report: ValidationReport):
    path = f"cone {correspondence.source}"
    source = m.source.cone(correspondence.source)
    if not m.target.has_cone(correspondence.target):
        report.add("UnknownCone", f"Target has no cone '{correspondence.target}'", path)
        return
    target = m.target.cone(correspondence.target)
    if len(source.reduct) != len(target.reduct):
        report.add(
            "ArityMismatch",
            f"'{source.name}' has {len(source.reduct)} reduct objects, "
            f"'{target.name}' has {len(target.reduct)}",
            path,
        )
        return

    images = [correspondence.object(obj.id) for obj in source.reduct]
    if sorted(images) != sorted(obj.id for obj in target.reduct):
        report.add("InvalidMap", f"Object correspondence {images} is not a bijection", path)
        return
    for obj in source.reduct:
        target_obj = target.reduct[target.object_index(correspondence.object(obj.id))]
        if m.sort(obj.sort) != target_obj.sort:
            report.add(
                "SortMismatch",
                f"Reduct object '{obj.id}' over '{obj.sort}' meets '{target_obj.id}' "
                f"over '{target_obj.sort}'",
                path,
            )
    if m.sort(source.vertex_sort) != target.vertex_sort:
        report.add("SortMismatch", "Vertex sorts do not correspond", path)
    if source.vertex_sign is not target.vertex_sign:
        report.add("SignMismatch", "Vertex signs differ", path)

    projections = [correspondence.projection(p.id) for p in source.projections]
    if sorted(projections) != sorted(p.id for p in target.projections):
        report.add(
            "InvalidMap", f"Projection correspondence {projections} is not a bijection", path
        )
        return
    for projection in source.projections:
        image = Counter((correspondence.object(obj), sign) for obj, sign in projection.entries)
        target_projection = target.projection(correspondence.projection(projection.id))
        if image != Counter(target_projection.entries):
            report.add(
                "InvalidMap",
                f"Projection '{projection.id}' does not match '{target_projection.id}'",
                path,
            )


def _sortedness(m: DoctrineMap) -> list[str]:
    source, target = m.source, m.target
    if not (source.is_sorted and target.is_sorted):
        return ["both doctrines must be sorted"]
    problems = []
    for sort in source.sorting.primitive:
        if m.sort(sort) not in target.sorting.primitive:
            problems.append(f"primitive sort '{sort}' goes to non-primitive '{m.sort(sort)}'")
    for sort in source.sorting.derived:
        image = m.sort(sort)
        if image not in target.sorting.derived:
            problems.append(f"derived sort '{sort}' goes to non-derived '{image}'")
            continue
        cone_name = source.sorting.cone_for(sort)
        wanted = target.sorting.cone_for(image)
        if cone_name is None:
            problems.append(f"derived sort '{sort}' has no sorting cone")
            continue
        got = m.cone(cone_name).target
        if got != wanted:
            problems.append(
                f"sorting cone '{cone_name}' goes to '{got}', not the sorting cone '{wanted}'"
            )
    return problems


def validate_map(
    m: DoctrineMap,
    trials: int = 2000,
    seed: int = 1729,
    exhaustive_length: int = 5,
    check_base: bool = True,
) -> MapReport:
    """
    Validate a doctrine map and decide whether it is sorted.

    Args:
        m: The map
        trials: Random inhabited source lists tried after the exhaustive pass
        seed: Seed for the random pass
        exhaustive_length: Longest source multiset checked exhaustively
        check_base: Skip base functoriality when False

    Returns:
        MapReport with every violation and the sortedness verdict
    """
    result = MapReport(name=m.name)
    report = result.report
    sorts_ok = _check_sorts(m, report)
    if sorts_ok and check_base:
        _check_base(m, report, trials, seed, exhaustive_length)

    names = [c.source for c in m.cones]
    for cone in m.source.cones:
        if cone.name not in names:
            report.add("UnmappedCone", f"Cone '{cone.name}' has no correspondence", cone.name)
    for correspondence in m.cones:
        if not m.source.has_cone(correspondence.source):
            report.add("UnknownCone", f"Source has no cone '{correspondence.source}'", m.name)
        elif sorts_ok:
            _check_cone(m, correspondence, report)

    if report.valid:
        result.sorted_diagnostics = _sortedness(m)
        result.sorted = not result.sorted_diagnostics
    else:
        result.sorted_diagnostics = ["map is not valid"]
    if check_base:
        _validated[id(m)] = (m, result)
    logger.debug(f"Map '{m.name}': valid={report.valid}, sorted={result.sorted}")
    return result


# full validations by map identity; pushes and pulls reuse them
_validated: dict[int, tuple[DoctrineMap, MapReport]] = {}


def _require_valid(m: DoctrineMap) -> None:
    hit = _validated.get(id(m))
    result = hit[1] if hit is not None and hit[0] is m else validate_map(m)
    if not result.valid:
        raise InvalidMap(
            f"Map '{m.name}' is not valid: "
            + "; ".join(str(v) for v in result.report.violations)
        )


# Translation of types and sequents


def translate_type(m: DoctrineMap, t: TypeExpr) -> TypeExpr:
    if isinstance(t, Gen):
        return t
    correspondence = m.cone(t.cone)
    source = m.source.cone(t.cone)
    target = m.target.cone(correspondence.target)
    args: list[TypeExpr | None] = [None] * len(target.reduct)
    for obj, arg in zip(source.reduct, t.args):
        args[target.object_index(correspondence.object(obj.id))] = translate_type(m, arg)
    return Comp(target.name, tuple(args))


def translate_entry(m: DoctrineMap, entry: Entry) -> Entry:
    return Entry(translate_type(m, entry.type), entry.sign)


def translate_sequent(m: DoctrineMap, sequent: Sequent) -> Sequent:
    return Sequent(tuple(translate_entry(m, e) for e in sequent))


# Base change of sketches


def push_sketch(m: DoctrineMap, s: Sketch) -> Sketch:
    """
    Relabel a source sketch along the map.

    Raises:
        InvalidMap: if the map is not valid
    """
    _require_valid(m)
    instances = []
    for inst in s.extremal:
        correspondence = m.cone(inst.cone)
        instances.append(
            ConeInstance(
                cone=correspondence.target,
                assignment=tuple(
                    (correspondence.object(rid), name) for rid, name in inst.assignment
                ),
                vertex=inst.vertex,
                witnesses=tuple(
                    (correspondence.projection(pid), gen) for pid, gen in inst.witnesses
                ),
            )
        )
    pushed = Sketch(
        name=f"{s.name}@{m.name}",
        doctrine=m.target,
        objects=tuple(SketchObject(o.name, m.sort(o.sort)) for o in s.objects),
        generators=s.generators,
        extremal=tuple(instances),
    )
    if s.equations:
        equations = tuple(
            Equation(
                eq.name,
                translate_derivation(m, s, eq.lhs, target=pushed),
                translate_derivation(m, s, eq.rhs, target=pushed),
            )
            for eq in s.equations
        )
        pushed = Sketch(
            pushed.name, pushed.doctrine, pushed.objects, pushed.generators, equations,
            pushed.extremal,
        )
    return pushed


def pull_sketch(m: DoctrineMap, t: Sketch) -> Sketch:
    """
    Pull a target sketch back along the map.

    Objects are the pairs (target object, source sort) over the same target
    sort; an object with one lift keeps its name, otherwise lifts are named
    ``object@sort``. Generators and instances are pulled wherever all their
    entries lift. Equations are not pulled back.

    Raises:
        InvalidMap: if the map is not valid
    """
    _require_valid(m)
    source_sorts = [s.name for s in m.source.base.sorts]
    lifts: dict[str, list[tuple[str, str]]] = {}
    for obj in t.objects:
        matching = [r for r in source_sorts if m.sort(r) == obj.sort]
        if len(matching) == 1:
            lifts[obj.name] = [(obj.name, matching[0])]
        else:
            lifts[obj.name] = [(f"{obj.name}@{r}", r) for r in matching]
    objects = tuple(SketchObject(name, r) for obj in t.objects for name, r in lifts[obj.name])

    generators = []
    pulled_from: dict[str, list[Generator]] = {}
    for gen in t.generators:
        choices = [lifts[name] for name, _ in gen.signature]
        combos = list(product(*choices))
        for k, combo in enumerate(combos):
            name = gen.name if len(combos) == 1 else f"{gen.name}@{k}"
            signature = tuple(
                (lifted, sign) for (lifted, _), (_, sign) in zip(combo, gen.signature)
            )
            image = [m.source.base.signed(r, sign) for (_, r), (_, sign) in zip(combo, gen.signature)]
            if not allowed(m.source.base, image):
                continue
            pulled = Generator(name, signature)
            generators.append(pulled)
            pulled_from.setdefault(gen.name, []).append(pulled)

    instances = []
    for inst in t.extremal:
        for correspondence in m.cones:
            if correspondence.target != inst.cone:
                continue
            cone = m.source.cone(correspondence.source)
            target_assignment = dict(inst.assignment)
            names = [target_assignment.get(correspondence.object(o.id)) for o in cone.reduct]
            pools = [
                [n for n, r in lifts.get(name, []) if r == o.sort]
                for name, o in zip(names, cone.reduct)
            ]
            vertices = [n for n, r in lifts.get(inst.vertex, []) if r == cone.vertex_sort]
            for chosen in product(*pools, vertices):
                assignment = tuple((o.id, n) for o, n in zip(cone.reduct, chosen[:-1]))
                candidate = ConeInstance(cone.name, assignment, chosen[-1])
                witnesses = []
                for projection in cone.projections:
                    target_pid = correspondence.projection(projection.id)
                    shape = Counter(_pulled_shape(cone, candidate, projection))
                    found = next(
                        (
                            g.name
                            for g in pulled_from.get(dict(inst.witnesses).get(target_pid, ""), [])
                            if Counter(g.signature) == shape
                        ),
                        None,
                    )
                    if found is None:
                        break
                    witnesses.append((projection.id, found))
                else:
                    instances.append(
                        ConeInstance(cone.name, assignment, chosen[-1], tuple(witnesses))
                    )
    if t.equations:
        logger.info(f"Pulling '{t.name}' back along '{m.name}' drops its equations")
    return Sketch(
        name=f"{t.name}@{m.name}",
        doctrine=m.source,
        objects=objects,
        generators=tuple(generators),
        extremal=tuple(instances),
    )


def _pulled_shape(cone, inst: ConeInstance, projection):
    shape = [(inst.object_for(obj), sign) for obj, sign in projection.entries]
    shape.append((inst.vertex, cone.vertex_sign))
    return shape


# Translation of derivations


class _Translator:
    def __init__(self, m: DoctrineMap, source: Checker, target: Checker):
        self.m = m
        self.source = source
        self.target = target

    def fit(self, d: Derivation, wanted) -> Derivation:
        have = self.target.check(d).entries
        wanted = tuple(wanted)
        if have == wanted:
            return d
        sigma = fitting_map(self.target, have, wanted)
        if sigma is None:
            raise InvalidMap(f"Cannot align {Sequent(have)} with {Sequent(wanted)}")
        return StructRule(wanted, sigma, d)

    def image(self, d: Derivation) -> tuple[Entry, ...]:
        return tuple(translate_entry(self.m, e) for e in self.source.check(d))

    def run(self, d: Derivation) -> Derivation:
        m = self.m
        if isinstance(d, IdRule):
            return IdRule(translate_type(m, d.type))
        if isinstance(d, GenRule):
            return d
        if isinstance(d, CutRule):
            return CutRule(self.run(d.left), d.i, self.run(d.right), d.j)
        if isinstance(d, StructRule):
            target = tuple(translate_entry(m, e) for e in d.target)
            return StructRule(target, d.sigma, self.run(d.premise))
        correspondence = m.cone(d.cone)
        args = translate_type(m, Comp(d.cone, tuple(d.args))).args
        if isinstance(d, NonInvRule):
            node = NonInvRule(correspondence.target, args, correspondence.projection(d.projection))
            return self.fit(node, self.image(d))
        if isinstance(d, InvRule):
            cone = m.target.cone(correspondence.target)
            sides = tuple(translate_entry(m, e) for e in d.sides)
            premises = []
            for pid, premise in d.premises:
                target_pid = correspondence.projection(pid)
                wanted = tuple(projection_entries(cone, args, target_pid)) + sides
                premises.append((target_pid, self.fit(self.run(premise), wanted)))
            order = [p.id for p in cone.projections]
            premises.sort(key=lambda item: order.index(item[0]))
            return InvRule(cone.name, args, sides, tuple(premises))
        raise UncheckedInput(f"Cannot translate {type(d).__name__}")


def translate_derivation(
    m: DoctrineMap, s: Sketch, d: Derivation, target: Sketch | None = None
) -> Derivation:
    """
    Translate a checked derivation over ``s`` to the pushed sketch.

    The result checks over ``push_sketch(m, s)`` and concludes the entrywise
    image of ``d``'s conclusion.

    Raises:
        InvalidMap: if the map is not valid
        UncheckedInput: if d does not check over s
    """
    source_checker = Checker(s)
    try:
        conclusion = source_checker.check(d)
    except DoctrinaError as e:
        raise UncheckedInput(f"Derivation does not check: {e}") from None
    if target is None:
        target = push_sketch(m, s)
    target_checker = Checker(target)
    result = _Translator(m, source_checker, target_checker).run(d)
    got = target_checker.check(result)
    if got != translate_sequent(m, conclusion):
        raise InvalidMap(f"Translation concludes {got}, not the image of {conclusion}")
    return result
