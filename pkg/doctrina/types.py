from __future__ import annotations

"""
Type formation over a sketch and stratified type enumeration.

A type is either a sketch object ``Gen(name)`` or a cone applied to
arguments ``Comp(cone, args)``. Types print as ``A`` and ``Tensor[A, B]``
(``One[]`` for 0-ary cones); that text is also their canonical serialization.
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import TYPE_CHECKING, Iterator, Union

from doctrina.base import BaseSort
from doctrina.errors import ArityMismatch, ResourceLimit, SortMismatch

if TYPE_CHECKING:
    from doctrina.sketch import Sketch

logger = logging.getLogger(__name__)

DEFAULT_CEILING = 1_000_000


@dataclass(frozen=True)
class Gen:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Comp:
    cone: str
    args: tuple[TypeExpr, ...] = ()

    def __str__(self) -> str:
        return f"{self.cone}[{', '.join(str(a) for a in self.args)}]"


TypeExpr = Union[Gen, Comp]


def height(t: TypeExpr) -> int:
    if isinstance(t, Gen):
        return 0
    return 1 + max((height(a) for a in t.args), default=0)


def subterms(t: TypeExpr) -> Iterator[TypeExpr]:
    """All subterms, the type itself first."""
    yield t
    if isinstance(t, Comp):
        for arg in t.args:
            yield from subterms(arg)


def objects_in(t: TypeExpr) -> set[str]:
    return {s.name for s in subterms(t) if isinstance(s, Gen)}


def cones_in(t: TypeExpr) -> set[str]:
    return {s.cone for s in subterms(t) if isinstance(s, Comp)}


def check_type(sketch: Sketch, t: TypeExpr) -> BaseSort:
    """
    Check a type against a sketch and return its base sort.

    Raises:
        UnknownObject, UnknownCone, ArityMismatch, SortMismatch
    """
    base = sketch.doctrine.base
    if isinstance(t, Gen):
        return base.sort(sketch.object(t.name).sort)

    cone = sketch.doctrine.cone(t.cone)
    if len(t.args) != cone.arity:
        raise ArityMismatch(
            f"Cone '{cone.name}' takes {cone.arity} arguments, got {len(t.args)} in {t}"
        )
    for obj, arg in zip(cone.reduct, t.args):
        arg_sort = check_type(sketch, arg)
        if arg_sort.name != obj.sort:
            raise SortMismatch(
                f"Argument {arg} of {cone.name} has sort '{arg_sort.name}', "
                f"expected '{obj.sort}'"
            )
    return base.sort(cone.vertex_sort)


@dataclass
class TypeStrata:
    """Nested type sets T0 ⊆ T1 ⊆ ... ⊆ Th."""

    strata: list[list[TypeExpr]] = field(default_factory=list)

    @property
    def counts(self) -> list[int]:
        return [len(layer) for layer in self.strata]

    @property
    def top(self) -> list[TypeExpr]:
        return self.strata[-1] if self.strata else []


def _canonical(types) -> list[TypeExpr]:
    return sorted(set(types), key=str)


def enumerate_types(
    sketch: Sketch, max_height: int, ceiling: int = DEFAULT_CEILING
) -> TypeStrata:
    """
    Enumerate the strata T0 ... T_h of well-formed types.

    Args:
        sketch: Sketch providing objects and cones
        max_height: Highest stratum to build
        ceiling: Largest stratum size allowed

    Returns:
        TypeStrata with each stratum in canonical order

    Raises:
        ResourceLimit: if a stratum would exceed the ceiling
    """
    if max_height < 0:
        raise ValueError("Height bound must be nonnegative")

    gens = [Gen(obj.name) for obj in sketch.objects]
    current = _canonical(gens)
    result = TypeStrata(strata=[current])

    for level in range(1, max_height + 1):
        by_sort: dict[str, list[TypeExpr]] = {}
        for t in current:
            by_sort.setdefault(check_type(sketch, t).name, []).append(t)

        expected = len(gens)
        for cone in sketch.doctrine.cones:
            count = 1
            for obj in cone.reduct:
                count *= len(by_sort.get(obj.sort, []))
            expected += count
        if expected > ceiling:
            raise ResourceLimit(
                f"Stratum {level} would hold {expected} types, above the ceiling {ceiling}"
            )

        layer: list[TypeExpr] = list(gens)
        for cone in sketch.doctrine.cones:
            pools = [by_sort.get(obj.sort, []) for obj in cone.reduct]
            for args in product(*pools):
                layer.append(Comp(cone.name, tuple(args)))
        current = _canonical(layer)
        result.strata.append(current)
        logger.debug(f"Type stratum {level}: {len(current)} types")

    return result
