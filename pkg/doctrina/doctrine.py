from __future__ import annotations

"""
Discrete abstract cones and doctrines.

A cone has an ordered reduct of objects (each over a base sort), a vertex
sort with a sign, and a set of projections. Each projection is an ordered
list of signed reduct objects; together with the vertex it names the shape of
one morphism of the universal property. A doctrine bundles a base theory with
named cones and optional sorting structure.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field, replace

from doctrina.base import (
    BaseSort,
    BaseTheory,
    Sign,
    SignedSort,
    allowed,
    builtin_base,
)
from doctrina.errors import UnknownBuiltin, UnknownCone, UnknownObject, UnknownProjection

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConeObject:
    id: str
    sort: str


@dataclass(frozen=True)
class Projection:
    id: str
    entries: tuple[tuple[str, Sign], ...] = ()


@dataclass(frozen=True)
class DiscreteCone:
    name: str
    reduct: tuple[ConeObject, ...]
    vertex_sort: str
    vertex_sign: Sign
    projections: tuple[Projection, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.reduct)

    @property
    def is_arrow_type(self) -> bool:
        return (
            len(self.reduct) == 1
            and len(self.projections) == 1
            and len(self.projections[0].entries) == 1
        )

    def object_index(self, object_id: str) -> int:
        for index, obj in enumerate(self.reduct):
            if obj.id == object_id:
                return index
        raise UnknownObject(f"Cone '{self.name}' has no reduct object '{object_id}'")

    def has_projection(self, projection_id: str) -> bool:
        return any(p.id == projection_id for p in self.projections)

    def projection(self, projection_id: str) -> Projection:
        for projection in self.projections:
            if projection.id == projection_id:
                return projection
        raise UnknownProjection(
            f"Cone '{self.name}' has no projection '{projection_id}'. "
            f"Available: {[p.id for p in self.projections]}"
        )

    def signed_image(self, base: BaseTheory, projection: Projection) -> list[SignedSort]:
        """Signed sorts of the projection entries followed by the vertex."""
        sorts = {obj.id: obj.sort for obj in self.reduct}
        image = [base.signed(sorts[obj], sign) for obj, sign in projection.entries]
        image.append(base.signed(self.vertex_sort, self.vertex_sign))
        return image

    def signature(self) -> str:
        """One-line description used by `doctrina builtins`."""
        objs = ", ".join(f"{o.id}:{o.sort}" for o in self.reduct)
        projs = "; ".join(
            f"{p.id}({', '.join(f'{o}{s.value}' for o, s in p.entries)})"
            for p in self.projections
        )
        return (
            f"{self.name}[{objs}] vertex {self.vertex_sort}{self.vertex_sign.value}"
            f" {{{projs}}}"
        )


@dataclass(frozen=True)
class Sorting:
    primitive: tuple[str, ...]
    derived: tuple[str, ...]
    sorting_cones: tuple[tuple[str, str], ...]

    def cone_for(self, sort_name: str) -> str | None:
        for derived, cone_name in self.sorting_cones:
            if derived == sort_name:
                return cone_name
        return None


@dataclass(frozen=True)
class Doctrine:
    name: str
    base: BaseTheory
    cones: tuple[DiscreteCone, ...]
    sorting: Sorting | None = None

    @property
    def is_sorted(self) -> bool:
        return self.sorting is not None

    def has_cone(self, name: str) -> bool:
        return any(cone.name == name for cone in self.cones)

    def cone(self, name: str) -> DiscreteCone:
        for cone in self.cones:
            if cone.name == name:
                return cone
        raise UnknownCone(
            f"Doctrine '{self.name}' has no cone '{name}'. "
            f"Available: {[c.name for c in self.cones]}"
        )

    def sort(self, name: str) -> BaseSort:
        return self.base.sort(name)

    def is_primitive(self, sort_name: str) -> bool:
        if self.sorting is None:
            return True
        return sort_name in self.sorting.primitive

    def sorting_cone(self, derived_sort: str) -> DiscreteCone | None:
        if self.sorting is None:
            return None
        name = self.sorting.cone_for(derived_sort)
        return self.cone(name) if name and self.has_cone(name) else None

    def coercion_cones(self, sort_name: str, entry_sign: Sign) -> list[DiscreteCone]:
        """Sorting cones whose reduct sort and projection-entry sign match."""
        if self.sorting is None:
            return []
        found = []
        for _, cone_name in self.sorting.sorting_cones:
            if not self.has_cone(cone_name):
                continue
            cone = self.cone(cone_name)
            if not cone.is_arrow_type:
                continue
            if cone.reduct[0].sort == sort_name and cone.projections[0].entries[0][1] is entry_sign:
                found.append(cone)
        return found

    def arrow_cones(
        self, reduct_sort: str, entry_sign: Sign, vertex_sign: Sign | None = None
    ) -> list[DiscreteCone]:
        """Arrow-type cones out of ``reduct_sort`` into a linear vertex."""
        found = []
        for cone in self.cones:
            if not cone.is_arrow_type or cone.reduct[0].sort != reduct_sort:
                continue
            if cone.projections[0].entries[0][1] is not entry_sign:
                continue
            if not self.base.sort(cone.vertex_sort).is_linear:
                continue
            if vertex_sign is not None and cone.vertex_sign is not vertex_sign:
                continue
            found.append(cone)
        return found

    def restrict(self, name: str, cone_names) -> Doctrine:
        """Sub-doctrine with the same base and sorting and a subset of cones."""
        keep = list(cone_names)
        for cone_name in keep:
            self.cone(cone_name)
        return replace(
            self, name=name, cones=tuple(c for c in self.cones if c.name in keep)
        )


@dataclass
class Violation:
    code: str
    message: str
    path: str = ""

    def __str__(self) -> str:
        where = f" [{self.path}]" if self.path else ""
        return f"{self.code}{where}: {self.message}"


@dataclass
class ValidationReport:
    """Collected violations; empty means valid."""

    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def add(self, code: str, message: str, path: str = "") -> None:
        self.violations.append(Violation(code, message, path))

    def extend(self, other: ValidationReport, prefix: str = "") -> None:
        for violation in other.violations:
            path = f"{prefix}.{violation.path}" if prefix and violation.path else (
                prefix or violation.path
            )
            self.violations.append(Violation(violation.code, violation.message, path))

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]


def validate_cone(base: BaseTheory, cone: DiscreteCone) -> ValidationReport:
    """
    Check the invariants of a discrete cone against a base theory.

    Args:
        base: Base theory the cone lives over
        cone: The cone

    Returns:
        ValidationReport listing every violated invariant
    """
    report = ValidationReport()
    ids = [obj.id for obj in cone.reduct]
    for object_id, count in Counter(ids).items():
        if count > 1:
            report.add("DuplicateObject", f"Reduct object '{object_id}' repeated", cone.name)
    for obj in cone.reduct:
        if not base.has_sort(obj.sort):
            report.add("UnknownSort", f"Reduct object '{obj.id}' has unknown sort '{obj.sort}'", cone.name)
    if not base.has_sort(cone.vertex_sort):
        report.add("UnknownSort", f"Vertex sort '{cone.vertex_sort}' is unknown", cone.name)
    if not report.valid:
        return report

    for projection_id, count in Counter(p.id for p in cone.projections).items():
        if count > 1:
            report.add("DuplicateProjection", f"Projection '{projection_id}' repeated", cone.name)

    signs: dict[str, set[Sign]] = {}
    for projection in cone.projections:
        path = f"{cone.name}.{projection.id}"
        unknown = [obj for obj, _ in projection.entries if obj not in ids]
        if unknown:
            report.add("UnknownReductObject", f"Entries mention {unknown}", path)
            continue
        for obj, sign in projection.entries:
            signs.setdefault(obj, set()).add(sign)
        image = cone.signed_image(base, projection)
        if not allowed(base, image):
            shown = ", ".join(str(s) for s in image)
            report.add(
                "UninhabitedProjection",
                f"Projection shape ({shown}) is not admissible and inhabited in '{base.name}'",
                path,
            )
    for obj, seen in signs.items():
        if len(seen) > 1:
            report.add(
                "ComposableProjections",
                f"Reduct object '{obj}' occurs with both signs across projections",
                cone.name,
            )
    return report


def validate_doctrine(doctrine: Doctrine) -> ValidationReport:
    """
    Validate every cone plus the sorting invariants.

    Args:
        doctrine: The doctrine

    Returns:
        Aggregated ValidationReport
    """
    report = ValidationReport()
    for problem in doctrine.base.validate():
        report.add("InvalidBase", problem, doctrine.base.name)
    for name, count in Counter(c.name for c in doctrine.cones).items():
        if count > 1:
            report.add("DuplicateCone", f"Cone '{name}' declared {count} times", doctrine.name)
    for cone in doctrine.cones:
        report.extend(validate_cone(doctrine.base, cone))

    sorting = doctrine.sorting
    if sorting is None:
        return report

    all_sorts = {s.name for s in doctrine.base.sorts}
    primitive = set(sorting.primitive)
    derived = set(sorting.derived)
    if primitive & derived or primitive | derived != all_sorts:
        report.add(
            "SortingPartition",
            f"Primitive {sorted(primitive)} and derived {sorted(derived)} "
            f"do not partition {sorted(all_sorts)}",
            doctrine.name,
        )
    for sort_name in sorted(derived):
        path = f"{doctrine.name}.sorting.{sort_name}"
        with_vertex = [c for c in doctrine.cones if c.vertex_sort == sort_name]
        if len(with_vertex) != 1:
            report.add(
                "DerivedVertexNotUnique",
                f"Derived sort '{sort_name}' is the vertex sort of "
                f"{len(with_vertex)} cones {[c.name for c in with_vertex]}",
                path,
            )
        cone_name = sorting.cone_for(sort_name)
        if cone_name is None:
            report.add("MissingSortingCone", f"No sorting cone for '{sort_name}'", path)
            continue
        if not doctrine.has_cone(cone_name):
            report.add("UnknownCone", f"Sorting cone '{cone_name}' is not declared", path)
            continue
        cone = doctrine.cone(cone_name)
        if cone.vertex_sort != sort_name:
            report.add(
                "SortingConeMismatch",
                f"Sorting cone '{cone_name}' has vertex sort '{cone.vertex_sort}'",
                path,
            )
        if not cone.is_arrow_type:
            report.add("NotArrowType", f"Sorting cone '{cone_name}' is not arrow-type", path)
        elif cone.reduct[0].sort not in primitive:
            report.add(
                "ReductNotPrimitive",
                f"Sorting cone '{cone_name}' reduct sort '{cone.reduct[0].sort}' is not primitive",
                path,
            )
    return report


# Cone library

P = Sign.POS
N = Sign.NEG


def _cone(name: str, objects, vertex: tuple[str, Sign], *projections) -> DiscreteCone:
    return DiscreteCone(
        name=name,
        reduct=tuple(ConeObject(i, s) for i, s in objects),
        vertex_sort=vertex[0],
        vertex_sign=vertex[1],
        projections=tuple(Projection(pid, tuple(entries)) for pid, entries in projections),
    )


def tensor(s: str, name: str = "Tensor") -> DiscreteCone:
    return _cone(name, [("a", s), ("b", s)], (s, P), ("p0", [("a", N), ("b", N)]))


def unit(s: str, name: str = "One") -> DiscreteCone:
    return _cone(name, [], (s, P), ("p0", []))


def par(s: str) -> DiscreteCone:
    return _cone("Par", [("a", s), ("b", s)], (s, N), ("p0", [("a", P), ("b", P)]))


def bottom(s: str) -> DiscreteCone:
    return _cone("Bot", [], (s, N), ("p0", []))


def dual(s: str) -> DiscreteCone:
    return _cone("Dual", [("a", s)], (s, N), ("p0", [("a", N)]))


def with_(s: str) -> DiscreteCone:
    return _cone("With", [("a", s), ("b", s)], (s, N), ("p0", [("a", P)]), ("p1", [("b", P)]))


def plus(s: str) -> DiscreteCone:
    return _cone("Plus", [("a", s), ("b", s)], (s, P), ("p0", [("a", N)]), ("p1", [("b", N)]))


def top(s: str) -> DiscreteCone:
    return _cone("Top", [], (s, N))


def zero(s: str) -> DiscreteCone:
    return _cone("Zero", [], (s, P))


def lolli(s: str, name: str = "Lolli") -> DiscreteCone:
    return _cone(name, [("a", s), ("b", s)], (s, N), ("p0", [("a", N), ("b", P)]))


def arrow(x: str) -> DiscreteCone:
    return lolli(x, "Arrow")


def sum_(x: str) -> DiscreteCone:
    return _cone("Sum", [("a", x), ("b", x)], (x, P), ("p0", [("a", N)]), ("p1", [("b", N)]))


def empty(x: str) -> DiscreteCone:
    return _cone("Empty", [], (x, P))


def free(x: str, a: str, name: str = "F") -> DiscreteCone:
    return _cone(name, [("a", x)], (a, P), ("p0", [("a", N)]))


def forget(a: str, x: str, name: str = "U") -> DiscreteCone:
    return _cone(name, [("a", a)], (x, N), ("p0", [("a", P)]))


def co_free(x: str, a: str, name: str = "Ft") -> DiscreteCone:
    return _cone(name, [("a", x)], (a, N), ("p0", [("a", N)]))


def co_forget(a: str, x: str, name: str = "Ut") -> DiscreteCone:
    return _cone(name, [("a", a)], (x, N), ("p0", [("a", N)]))


def _doctrine(name: str, base: str, cones, sorting: Sorting | None = None) -> Doctrine:
    return Doctrine(name, builtin_base(base), tuple(cones), sorting)


def _multiplicatives(a: str) -> list[DiscreteCone]:
    return [tensor(a), unit(a), lolli(a)]


def _cartesian(x: str) -> list[DiscreteCone]:
    return [tensor(x, "Prod"), unit(x, "Terminal"), arrow(x)]


BUILTIN_DOCTRINES: dict[str, Doctrine] = {
    d.name: d
    for d in (
        _doctrine("MILL", "symmulti", _multiplicatives("a")),
        _doctrine(
            "MALL",
            "sympoly",
            [tensor("a"), unit("a"), par("a"), bottom("a"), dual("a"),
             with_("a"), plus("a"), top("a"), zero("a")],
        ),
        _doctrine(
            "IMALL",
            "symmulti",
            _multiplicatives("a") + [with_("a"), plus("a"), top("a"), zero("a")],
        ),
        _doctrine("IL", "cartmulti", _cartesian("x") + [sum_("x"), empty("x")]),
        _doctrine(
            "DILL",
            "lnlmulti",
            _cartesian("x") + _multiplicatives("a") + [free("x", "a"), forget("a", "x")],
        ),
        _doctrine(
            "DILLK",
            "lnlmulti",
            _multiplicatives("a") + [free("x", "a"), forget("a", "x")],
            Sorting(primitive=("a",), derived=("x",), sorting_cones=(("x", "U"),)),
        ),
        _doctrine(
            "CLLX",
            "lnlpoly",
            [tensor("a"), unit("a"), par("a"), bottom("a"), dual("a"), lolli("a"),
             free("x", "a"), forget("a", "x"), co_free("x", "a"), co_forget("a", "x"),
             with_("a"), plus("a"), top("a"), zero("a")],
        ),
        _doctrine(
            "STORAGE",
            "dblsplit",
            [tensor("a"), unit("a"), par("a"), bottom("a"),
             free("xl", "a"), forget("a", "xl"), co_free("xr", "a"), co_forget("a", "xr")],
            Sorting(
                primitive=("a",),
                derived=("xl", "xr"),
                sorting_cones=(("xl", "U"), ("xr", "Ut")),
            ),
        ),
        _doctrine(
            "CBPV",
            "cbpv",
            _cartesian("x")
            + [
                _cone("MixedLolli", [("a", "x"), ("b", "a")], ("a", N), ("p0", [("a", N), ("b", P)])),
                free("x", "a"),
                forget("a", "x"),
            ],
        ),
        _doctrine(
            "ECBV",
            "ecbv",
            [
                tensor("x", "Prod"),
                unit("x", "Terminal"),
                _cone("LinArrow", [("a", "a"), ("b", "a")], ("x", N), ("p0", [("a", N), ("b", P)])),
                _cone("Semi", [("a", "x"), ("b", "a")], ("a", P), ("p0", [("a", N), ("b", N)])),
            ],
        ),
        _doctrine(
            "SKEW",
            "symskew",
            [
                _cone("G", [("a", "t")], ("l", N), ("p0", [("a", P)])),
                unit("t"),
                _cone("Tensor", [("a", "l"), ("b", "t")], ("t", P), ("p0", [("a", N), ("b", N)])),
                _cone("Lolli", [("a", "l"), ("b", "t")], ("t", N), ("p0", [("a", N), ("b", P)])),
            ],
            Sorting(primitive=("t",), derived=("l",), sorting_cones=(("l", "G"),)),
        ),
    )
}


def builtin_doctrine(name: str) -> Doctrine:
    """
    Look up a builtin doctrine.

    Raises:
        UnknownBuiltin: if the name is not in the catalog
    """
    if name not in BUILTIN_DOCTRINES:
        raise UnknownBuiltin(
            f"Unknown builtin doctrine '{name}'. Available: {sorted(BUILTIN_DOCTRINES)}"
        )
    return BUILTIN_DOCTRINES[name]
