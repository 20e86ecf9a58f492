"""Tests for type formation and stratified enumeration."""

from itertools import product

import pytest

from doctrina.errors import ArityMismatch, ResourceLimit, SortMismatch, UnknownCone
from doctrina.types import Comp, Gen, check_type, cones_in, enumerate_types, height, objects_in


class TestTypeFormation:
    """Tests for check_type and type helpers."""

    def test_rendering(self, A, B):
        """Types print in their canonical form."""
        assert str(Comp("Tensor", (A, B))) == "Tensor[A, B]"
        assert str(Comp("One")) == "One[]"

    def test_height(self, A, B):
        """Objects have height zero and each cone adds one."""
        t = Comp("Tensor", (A, Comp("Lolli", (A, B))))
        assert height(A) == 0
        assert height(Comp("One")) == 1
        assert height(t) == 2
        assert objects_in(t) == {"A", "B"}
        assert cones_in(t) == {"Tensor", "Lolli"}

    def test_check_type_returns_vertex_sort(self, lnl):
        """A type's sort is the vertex sort of its outermost cone."""
        assert check_type(lnl, Comp("F", (Gen("X"),))).name == "a"
        assert check_type(lnl, Comp("U", (Gen("A"),))).name == "x"
        assert check_type(lnl, Gen("Y")).name == "x"

    def test_arity_mismatch(self, free_mill, A):
        """Cones must receive exactly their arity."""
        with pytest.raises(ArityMismatch):
            check_type(free_mill, Comp("Tensor", (A,)))

    def test_sort_mismatch(self, lnl):
        """Arguments must have the reduct sort."""
        with pytest.raises(SortMismatch):
            check_type(lnl, Comp("F", (Gen("A"),)))

    def test_unknown_cone(self, free_mill, A):
        """Cones must belong to the doctrine."""
        with pytest.raises(UnknownCone):
            check_type(free_mill, Comp("With", (A, A)))


def brute_force_strata(sketch, max_height):
    """Types of height at most h, built recursively from object and vertex sorts."""
    doctrine = sketch.doctrine

    def sort_of(t):
        if isinstance(t, Gen):
            return sketch.object(t.name).sort
        return doctrine.cone(t.cone).vertex_sort

    def types_up_to(h):
        found = {Gen(obj.name) for obj in sketch.objects}
        if h == 0:
            return found
        lower = types_up_to(h - 1)
        for cone in doctrine.cones:
            pools = [[t for t in lower if sort_of(t) == obj.sort] for obj in cone.reduct]
            found.update(Comp(cone.name, tuple(args)) for args in product(*pools))
        return found

    return [types_up_to(h) for h in range(max_height + 1)]


def recurrence_counts(sketch, max_height):
    """|T0| = |objects|, |T(n+1)| = |objects| + sum over cones of |Tn| ** arity (one sort)."""
    counts = [len(sketch.objects)]
    for _ in range(max_height):
        counts.append(
            len(sketch.objects) + sum(counts[-1] ** cone.arity for cone in sketch.doctrine.cones)
        )
    return counts


class TestEnumerateTypes:
    """Tests for the type strata."""

    def test_counts_over_one_object(self, one_object_mill):
        """MILL over one object has 1, 4 and 34 types up to height 2."""
        strata = enumerate_types(one_object_mill, 2)
        assert strata.counts == [1, 4, 34]

    def test_counts_match_recurrence(self, one_object_mill):
        """Stratum sizes up to height 3 follow the single-sort recurrence."""
        strata = enumerate_types(one_object_mill, 3)
        assert strata.counts == recurrence_counts(one_object_mill, 3)

    @pytest.mark.parametrize("fixture", ["free_mill", "lnl", "kleisli"])
    def test_strata_match_brute_force(self, fixture, request):
        """Every stratum equals the recursively built set of types."""
        sketch = request.getfixturevalue(fixture)
        strata = enumerate_types(sketch, 2)
        assert [set(layer) for layer in strata.strata] == brute_force_strata(sketch, 2)

    @pytest.mark.parametrize("fixture", ["free_mill", "lnl", "kleisli"])
    def test_enumerated_types_check(self, fixture, request):
        """check_type accepts every enumerated type."""
        sketch = request.getfixturevalue(fixture)
        for t in enumerate_types(sketch, 2).top:
            check_type(sketch, t)

    def test_strata_are_nested(self, free_mill):
        """Each stratum contains the previous one."""
        strata = enumerate_types(free_mill, 2)
        for lower, upper in zip(strata.strata, strata.strata[1:]):
            assert set(lower) <= set(upper)

    def test_canonical_order(self, one_object_mill):
        """Strata are sorted by their printed form."""
        layer = enumerate_types(one_object_mill, 1).top
        assert [str(t) for t in layer] == ["A", "Lolli[A, A]", "One[]", "Tensor[A, A]"]

    def test_sorts_respected(self, lnl):
        """F only applies to nonlinear arguments."""
        layer = enumerate_types(lnl, 1).top
        assert Comp("F", (Gen("X"),)) in layer
        assert Comp("F", (Gen("A"),)) not in layer

    def test_ceiling(self, one_object_mill):
        """Strata above the ceiling raise ResourceLimit."""
        with pytest.raises(ResourceLimit):
            enumerate_types(one_object_mill, 2, ceiling=10)

    def test_negative_height(self, one_object_mill):
        """The height bound must be nonnegative."""
        with pytest.raises(ValueError):
            enumerate_types(one_object_mill, -1)
