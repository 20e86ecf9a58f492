from __future__ import annotations

"""
Sketches over a doctrine.

A sketch declares objects over base sorts, generator morphisms with signed
signatures, optional equations between derivations, and proto-extremal cone
instances whose projections are witnessed by generators.
"""

import logging
from collections import Counter
from dataclasses import dataclass, replace
from functools import cached_property
from itertools import product
from typing import Any

from doctrina.base import Sign, SignedSort, allowed
from doctrina.doctrine import Doctrine, ValidationReport
from doctrina.errors import (
    DoctrinaError,
    UnknownGenerator,
    UnknownObject,
    UnsortedDoctrine,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SketchObject:
    name: str
    sort: str


@dataclass(frozen=True)
class Generator:
    name: str
    signature: tuple[tuple[str, Sign], ...]

    def objects(self) -> set[str]:
        return {name for name, _ in self.signature}


@dataclass(frozen=True)
class ConeInstance:
    """A proto-extremal lift of a cone into the sketch."""

    cone: str
    assignment: tuple[tuple[str, str], ...]
    vertex: str
    witnesses: tuple[tuple[str, str], ...] = ()

    def object_for(self, reduct_id: str) -> str:
        for rid, name in self.assignment:
            if rid == reduct_id:
                return name
        raise UnknownObject(f"Instance of '{self.cone}' assigns nothing to '{reduct_id}'")

    def witness(self, projection_id: str) -> str:
        for pid, gen in self.witnesses:
            if pid == projection_id:
                return gen
        raise UnknownGenerator(
            f"Instance of '{self.cone}' has no witness for '{projection_id}'"
        )

    def objects(self) -> set[str]:
        return {name for _, name in self.assignment} | {self.vertex}

    def label(self) -> str:
        args = ", ".join(f"{rid} := {name}" for rid, name in self.assignment)
        return f"{self.cone}{{{args}; vertex := {self.vertex}}}"


@dataclass(frozen=True)
class Equation:
    name: str
    lhs: Any
    rhs: Any


@dataclass(frozen=True)
class Sketch:
    name: str
    doctrine: Doctrine
    objects: tuple[SketchObject, ...] = ()
    generators: tuple[Generator, ...] = ()
    equations: tuple[Equation, ...] = ()
    extremal: tuple[ConeInstance, ...] = ()

    @cached_property
    def _object_table(self) -> dict[str, SketchObject]:
        return {obj.name: obj for obj in self.objects}

    @cached_property
    def _generator_table(self) -> dict[str, Generator]:
        return {gen.name: gen for gen in self.generators}

    @property
    def is_free(self) -> bool:
        """No equations and no proto-extremal instances."""
        return not self.equations and not self.extremal

    def object(self, name: str) -> SketchObject:
        try:
            return self._object_table[name]
        except KeyError:
            raise UnknownObject(f"Sketch '{self.name}' has no object '{name}'") from None

    def has_object(self, name: str) -> bool:
        return name in self._object_table

    def generator(self, name: str) -> Generator:
        try:
            return self._generator_table[name]
        except KeyError:
            raise UnknownGenerator(
                f"Sketch '{self.name}' has no generator '{name}'"
            ) from None

    def signed_signature(self, gen: Generator) -> list[SignedSort]:
        base = self.doctrine.base
        return [base.signed(self.object(name).sort, sign) for name, sign in gen.signature]

    def instance_shape(self, inst: ConeInstance, projection_id: str) -> list[tuple[str, Sign]]:
        """Signed objects a witness for this projection must have, vertex last."""
        cone = self.doctrine.cone(inst.cone)
        projection = cone.projection(projection_id)
        shape = [(inst.object_for(obj), sign) for obj, sign in projection.entries]
        shape.append((inst.vertex, cone.vertex_sign))
        return shape


def validate_sketch(sketch: Sketch) -> ValidationReport:
    """
    Check every constituent of a sketch.

    Args:
        sketch: The sketch

    Returns:
        ValidationReport listing every violation
    """
    report = ValidationReport()
    doctrine = sketch.doctrine
    base = doctrine.base

    for name, count in Counter(o.name for o in sketch.objects).items():
        if count > 1:
            report.add("DuplicateObject", f"Object '{name}' declared {count} times", sketch.name)
    for obj in sketch.objects:
        if not base.has_sort(obj.sort):
            report.add("UnknownSort", f"Object '{obj.name}' has unknown sort '{obj.sort}'", obj.name)

    for name, count in Counter(g.name for g in sketch.generators).items():
        if count > 1:
            report.add("DuplicateGenerator", f"Generator '{name}' declared {count} times", sketch.name)
    for gen in sketch.generators:
        missing = sorted(n for n in gen.objects() if not sketch.has_object(n))
        if missing:
            report.add("UnknownObject", f"Generator mentions unknown objects {missing}", gen.name)
            continue
        image = sketch.signed_signature(gen)
        if not allowed(base, image):
            shown = ", ".join(str(s) for s in image)
            report.add(
                "UninhabitedGenerator",
                f"Signature ({shown}) is not admissible and inhabited in '{base.name}'",
                gen.name,
            )

    for index, inst in enumerate(sketch.extremal):
        for violation in _instance_problems(sketch, inst):
            report.add(violation[0], violation[1], f"extremal[{index}]")

    if sketch.equations:
        from doctrina.calculus import Checker

        checker = Checker(sketch)
        for eq in sketch.equations:
            try:
                left = checker.check(eq.lhs)
                right = checker.check(eq.rhs)
            except DoctrinaError as e:
                report.add(e.code, e.message, eq.name)
                continue
            if left != right:
                report.add("EquationMismatch", "Sides conclude different sequents", eq.name)
    return report


def _instance_problems(sketch: Sketch, inst: ConeInstance) -> list[tuple[str, str]]:
    doctrine = sketch.doctrine
    if not doctrine.has_cone(inst.cone):
        return [("UnknownCone", f"Unknown cone '{inst.cone}'")]
    cone = doctrine.cone(inst.cone)
    problems = []

    assigned = [rid for rid, _ in inst.assignment]
    expected = [obj.id for obj in cone.reduct]
    if sorted(assigned) != sorted(expected):
        problems.append(("AssignmentMismatch", f"Assignment covers {assigned}, cone has {expected}"))
        return problems
    for obj in cone.reduct:
        name = inst.object_for(obj.id)
        if not sketch.has_object(name):
            problems.append(("UnknownObject", f"Unknown object '{name}'"))
        elif sketch.object(name).sort != obj.sort:
            problems.append(
                ("SortMismatch", f"'{name}' has sort '{sketch.object(name).sort}', expected '{obj.sort}'")
            )
    if not sketch.has_object(inst.vertex):
        problems.append(("UnknownObject", f"Unknown vertex object '{inst.vertex}'"))
    elif sketch.object(inst.vertex).sort != cone.vertex_sort:
        problems.append(("SortMismatch", f"Vertex '{inst.vertex}' is not over '{cone.vertex_sort}'"))
    if problems:
        return problems

    witnessed = sorted(pid for pid, _ in inst.witnesses)
    if witnessed != sorted(p.id for p in cone.projections):
        problems.append(
            ("WitnessMismatch", f"Witnesses {witnessed} do not match projections of '{cone.name}'")
        )
        return problems
    for pid, gen_name in inst.witnesses:
        try:
            gen = sketch.generator(gen_name)
        except UnknownGenerator as e:
            problems.append((e.code, e.message))
            continue
        if Counter(gen.signature) != Counter(sketch.instance_shape(inst, pid)):
            problems.append(
                ("WitnessMismatch", f"Generator '{gen_name}' does not have the shape of projection '{pid}'")
            )
    return problems


def _require_sorted(sketch: Sketch) -> None:
    if not sketch.doctrine.is_sorted:
        raise UnsortedDoctrine(f"Doctrine '{sketch.doctrine.name}' has no sorting")


def is_well_sorted(sketch: Sketch) -> tuple[bool, dict[str, ConeInstance]]:
    """
    Check that every derived-sort object is the vertex of a sorting instance.

    Returns:
        (well_sorted, witness map from object name to instance)

    Raises:
        UnsortedDoctrine: if the doctrine has no sorting
    """
    _require_sorted(sketch)
    doctrine = sketch.doctrine
    witnesses: dict[str, ConeInstance] = {}
    ok = True
    for obj in sketch.objects:
        if doctrine.is_primitive(obj.sort):
            continue
        cone_name = doctrine.sorting.cone_for(obj.sort)
        found = next(
            (
                inst
                for inst in sketch.extremal
                if inst.cone == cone_name
                and inst.vertex == obj.name
                and not _instance_problems(sketch, inst)
            ),
            None,
        )
        if found is None:
            ok = False
        else:
            witnesses[obj.name] = found
    return ok, witnesses


def is_strictly_well_sorted(sketch: Sketch) -> bool:
    """Well-sorted, and every sorting instance lifts an object over a primitive sort."""
    ok, witnesses = is_well_sorted(sketch)
    if not ok:
        return False
    doctrine = sketch.doctrine
    return all(
        doctrine.is_primitive(sketch.object(inst.assignment[0][1]).sort)
        for inst in witnesses.values()
    )


def coreflect(sketch: Sketch) -> Sketch:
    """
    Largest well-sorted sub-sketch.

    Drops derived-sort objects lacking a sorting witness and everything that
    mentions them, repeating until nothing changes.

    Raises:
        UnsortedDoctrine: if the doctrine has no sorting
    """
    _require_sorted(sketch)
    from doctrina.calculus import mentions

    current = sketch
    while True:
        _, witnesses = is_well_sorted(current)
        keep = {
            obj.name
            for obj in current.objects
            if current.doctrine.is_primitive(obj.sort) or obj.name in witnesses
        }
        generators = tuple(g for g in current.generators if g.objects() <= keep)
        gen_names = {g.name for g in generators}
        extremal = tuple(
            inst
            for inst in current.extremal
            if inst.objects() <= keep and {g for _, g in inst.witnesses} <= gen_names
        )
        equations = []
        for eq in current.equations:
            objs_l, gens_l = mentions(eq.lhs)
            objs_r, gens_r = mentions(eq.rhs)
            if (objs_l | objs_r) <= keep and (gens_l | gens_r) <= gen_names:
                equations.append(eq)
        reduced = replace(
            current,
            objects=tuple(o for o in current.objects if o.name in keep),
            generators=generators,
            extremal=extremal,
            equations=tuple(equations),
        )
        if reduced == current:
            return current
        dropped = {o.name for o in current.objects} - keep
        if dropped:
            logger.info(f"Coreflection of '{sketch.name}' drops {sorted(dropped)}")
        current = reduced


def is_precomplete(sketch: Sketch) -> tuple[bool, list[str]]:
    """
    Every cone and every sort-correct assignment of sketch objects has an instance.

    Returns:
        (precomplete, labels of the missing lifts)
    """
    missing = []
    by_sort: dict[str, list[str]] = {}
    for obj in sketch.objects:
        by_sort.setdefault(obj.sort, []).append(obj.name)
    for cone in sketch.doctrine.cones:
        pools = [by_sort.get(obj.sort, []) for obj in cone.reduct]
        for names in product(*pools):
            assignment = tuple(zip((o.id for o in cone.reduct), names))
            if not any(
                inst.cone == cone.name and sorted(inst.assignment) == sorted(assignment)
                for inst in sketch.extremal
            ):
                shown = ", ".join(names)
                missing.append(f"{cone.name}[{shown}]")
    return not missing, missing
