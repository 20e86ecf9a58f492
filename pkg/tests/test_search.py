"""Tests for bounded proof search."""

import pytest

from doctrina.base import builtin_base
from doctrina.calculus import Checker, InvRule, Sequent, StructRule, neg, pos
from doctrina.doctrine import Doctrine, tensor, with_
from doctrina.search import SearchBudget, search
from doctrina.types import Comp, Gen


def goal(*items):
    return Sequent(tuple(items))


class TestSearch:
    """Tests for search."""

    def test_swap(self, free_mill, A, B):
        """The tensor swap is found with one invertible step."""
        target = goal(neg(Comp("Tensor", (A, B))), pos(Comp("Tensor", (B, A))))
        d = search(free_mill, target)
        assert d is not None
        assert Checker(free_mill).check(d) == target

    def test_diagonal(self, cart):
        """Contraction fits a product introduction to the diagonal."""
        X = Gen("X")
        target = goal(neg(X), pos(Comp("Prod", (X, X))))
        d = search(cart, target)
        assert d is not None
        assert Checker(cart).check(d) == target

    def test_introduce_through_generator(self, lnl):
        """F[X] is reached from Y by introducing F over the generator h."""
        X, Y = Gen("X"), Gen("Y")
        target = goal(neg(Y), pos(Comp("F", (X,))))
        d = search(lnl, target)
        assert d is not None
        assert Checker(lnl).check(d) == target

    def test_top(self, sketch_factory, A):
        """Top is introduced with no premises."""
        imall = sketch_factory("IMALL", {"A": "a"})
        target = goal(pos(Comp("Top")), neg(A))
        d = search(imall, target)
        assert isinstance(d, InvRule)
        assert d.premises == ()

    def test_later_invertible_entry(self, sketch_factory, A, B):
        """A disallowed premise on one entry does not stop the invertible rule on the next."""
        doctrine = Doctrine("Cat", builtin_base("cat"), (tensor("a"), with_("a")))
        sketch = sketch_factory(doctrine, {"A": "a", "B": "a"})
        t = Comp("Tensor", (A, B))
        target = goal(neg(t), pos(Comp("With", (t, t))))
        d = search(sketch, target, SearchBudget(max_depth=2, max_cut_depth=0))
        assert isinstance(d, StructRule)
        assert isinstance(d.premise, InvRule)
        assert d.premise.cone == "With"

    def test_underivable(self, free_mill, A, B):
        """Distinct free objects are not connected."""
        assert search(free_mill, goal(neg(A), pos(B)), SearchBudget(max_depth=3)) is None

    def test_node_budget(self, free_mill, A):
        """A zero node budget finds nothing, even for identities."""
        assert search(free_mill, goal(neg(A), pos(A)), SearchBudget(max_nodes=0)) is None

    def test_negative_budget(self):
        """Budgets must be nonnegative."""
        with pytest.raises(ValueError):
            SearchBudget(max_depth=-1)
