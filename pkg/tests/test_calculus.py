"""Tests for rule checking, zones and elaboration of surface terms."""

import pytest

from doctrina.base import StructuralMap
from doctrina.calculus import (
    Checker,
    CutRule,
    Derelict,
    Elaborator,
    Factor,
    GenRule,
    IdRule,
    Intro,
    InvRule,
    NonInvRule,
    Promote,
    Ref,
    Reindex,
    Sequent,
    StructRule,
    SurfaceSequent,
    check_derivation,
    elaborate_sequent,
    elaborate_split_context,
    fitting_map,
    neg,
    pos,
    render_sequent,
    same_up_to_zones,
)
from doctrina.errors import (
    AmbiguousZone,
    BadStructuralMap,
    CutSignMismatch,
    CutTypeMismatch,
    InadmissibleConclusion,
    MissingProjectionPremise,
    NotSorted,
    PremiseShapeMismatch,
    SideConditionFailed,
    UncheckedInput,
    UnknownGenerator,
    UnknownItem,
)
from doctrina.types import Comp, Gen


def tensor(*args):
    return Comp("Tensor", tuple(args))


def entries(*items):
    return Sequent(tuple(items))


class TestCoreRules:
    """Tests for the six core rules."""

    def test_identity(self, free_mill, A):
        """id A concludes A-, A+."""
        assert Checker(free_mill).check(IdRule(A)) == entries(neg(A), pos(A))

    def test_generator(self, arrows, A):
        """Generators conclude their signature."""
        assert Checker(arrows).check(GenRule("f")) == entries(neg(A), pos(A))

    def test_unknown_generator(self, arrows):
        """Unknown generators are reported at their node."""
        with pytest.raises(UnknownGenerator) as exc:
            Checker(arrows).check(GenRule("h"))
        assert exc.value.path == "root"

    def test_noninvertible(self, free_mill, A, B):
        """Projection entries come first, then the vertex."""
        conclusion = Checker(free_mill).check(NonInvRule("Tensor", (A, B), "p0"))
        assert conclusion == entries(neg(A), neg(B), pos(tensor(A, B)))

    def test_cut(self, free_mill, A):
        """Cutting two identities yields the identity shape."""
        d = CutRule(IdRule(A), 1, IdRule(A), 0)
        assert Checker(free_mill).check(d) == entries(neg(A), pos(A))

    def test_cut_type_mismatch_path(self, free_mill, A, B):
        """Errors carry the path of the failing node."""
        inner = CutRule(IdRule(A), 1, IdRule(B), 0)
        with pytest.raises(CutTypeMismatch) as exc:
            Checker(free_mill).check(CutRule(IdRule(A), 1, inner, 0))
        assert exc.value.path == "root.right"

    def test_cut_sign_mismatch(self, free_mill, A):
        """Cut entries need opposite signs."""
        with pytest.raises(CutSignMismatch):
            Checker(free_mill).check(CutRule(IdRule(A), 0, IdRule(A), 0))

    def test_exchange(self, free_mill, A, B):
        """A structural rule may permute entries."""
        target = (neg(B), neg(A), pos(tensor(A, B)))
        d = StructRule(target, StructuralMap.of(3, [1, 0, 2]), NonInvRule("Tensor", (A, B), "p0"))
        assert Checker(free_mill).check(d).entries == target

    def test_linear_weakening_rejected(self, free_mill, A, B):
        """Linear entries cannot be weakened."""
        d = StructRule((neg(A), neg(B), pos(A)), StructuralMap.of(3, [0, 2]), IdRule(A))
        with pytest.raises(BadStructuralMap, match="drops"):
            Checker(free_mill).check(d)

    def test_nonlinear_weakening(self, cart):
        """Negative nonlinear entries may be weakened."""
        X, Y = Gen("X"), Gen("Y")
        d = StructRule((neg(X), neg(Y), pos(X)), StructuralMap.of(3, [0, 2]), IdRule(X))
        assert len(Checker(cart).check(d)) == 3

    def test_invertible_swap(self, free_mill, A, B):
        """An invertible rule concludes the flipped vertex and its sides."""
        ab, ba = tensor(A, B), tensor(B, A)
        premise = StructRule(
            (neg(A), neg(B), pos(ba)),
            StructuralMap.of(3, [1, 0, 2]),
            NonInvRule("Tensor", (B, A), "p0"),
        )
        d = InvRule("Tensor", (A, B), (pos(ba),), (("p0", premise),))
        assert Checker(free_mill).check(d) == entries(neg(ab), pos(ba))

    def test_top_side_condition(self, sketch_factory, A, B):
        """Top accepts any sides the base allows next to its flipped vertex."""
        imall = sketch_factory("IMALL", {"A": "a", "B": "a"})
        checker = Checker(imall)
        top = Comp("Top")
        assert checker.check(InvRule("Top", (), (neg(A), neg(B)))) == entries(
            pos(top), neg(A), neg(B)
        )
        with pytest.raises(SideConditionFailed):
            checker.check(InvRule("Top", (), (pos(A),)))

    def test_missing_premise(self, sketch_factory, A, B):
        """Every projection needs a premise."""
        imall = sketch_factory("IMALL", {"A": "a", "B": "a"})
        with pytest.raises(MissingProjectionPremise):
            Checker(imall).check(InvRule("With", (A, B), (neg(A),)))

    def test_admit(self, free_mill, A):
        """Conclusions must be admissible and inhabited."""
        with pytest.raises(InadmissibleConclusion):
            Checker(free_mill).admit([pos(A), pos(A)])

    def test_surface_terms_are_not_checked(self, free_mill):
        """Only core rules can be checked directly."""
        with pytest.raises(UncheckedInput):
            Checker(free_mill).check(Ref("x"))


class TestZones:
    """Tests for split-context rendering and elaboration."""

    def test_render_linear(self, free_mill, A, B):
        """Linear sequents render with empty Θ."""
        checker = Checker(free_mill)
        sequent = entries(neg(A), neg(B), pos(tensor(A, B)))
        assert render_sequent(checker, sequent) == ". | A, B |- Tensor[A, B]"
        assert render_sequent(checker, sequent, entries_only=True) == "|- A-, B-, Tensor[A, B]+"

    def test_render_nonlinear_positive(self, cart):
        """A nonlinear positive renders as a cartesian sequent."""
        X = Gen("X")
        assert render_sequent(Checker(cart), entries(neg(X), pos(X))) == "X |- X"

    def test_render_uncoerces_theta(self, kleisli, A):
        """U-wrapped hypotheses render as their linear argument in Θ."""
        sequent = entries(neg(Comp("U", (A,))), pos(A))
        assert render_sequent(Checker(kleisli), sequent) == "A | . |- A"

    def test_render_upsilon(self, sketch_factory, A):
        """Ut-wrapped hypotheses render in the trailing zone."""
        storage = sketch_factory("STORAGE", {"A": "a"})
        sequent = entries(neg(Comp("Ut", (A,))), pos(A))
        assert render_sequent(Checker(storage), sequent) == ". | . |- A | A"

    def test_split_sequent(self, kleisli, A, B):
        """Θ entries are coerced through the sorting cone."""
        surface = SurfaceSequent("split", ((A,), (B,), (B,)))
        sequent = elaborate_sequent(Checker(kleisli), surface)
        assert sequent == entries(neg(Comp("U", (A,))), neg(B), pos(B))

    def test_plain_sequent(self, free_mill, A):
        """Plain sequents negate the left and keep the right positive."""
        surface = SurfaceSequent("plain", ((A,), (A,)))
        assert elaborate_sequent(Checker(free_mill), surface) == entries(neg(A), pos(A))

    def test_split_needs_sorting(self, lnl, A, B):
        """Unsorted doctrines cannot place linear types in Θ."""
        with pytest.raises(NotSorted):
            elaborate_sequent(Checker(lnl), SurfaceSequent("split", ((A,), (), (B,))))

    def test_nonlinear_in_linear_zone(self, kleisli, A):
        """Nonlinear types may not be written in Γ or Δ."""
        surface = SurfaceSequent("split", ((), (Comp("U", (A,)),), (A,)))
        with pytest.raises(AmbiguousZone):
            elaborate_sequent(Checker(kleisli), surface)

    def test_same_up_to_zones(self, kleisli, A, B):
        """Sequents differing only across zones compare equal."""
        ua = Comp("U", (A,))
        checker = Checker(kleisli)
        assert same_up_to_zones(
            checker, entries(neg(B), neg(ua), pos(B)), entries(neg(ua), neg(B), pos(B))
        )
        assert not same_up_to_zones(
            checker, entries(neg(A), neg(B), pos(B)), entries(neg(B), neg(A), pos(B))
        )


class TestFittingMap:
    """Tests for fitting_map."""

    def test_weakening(self, cart):
        """Missing negative nonlinear entries are weakened."""
        X, Y = Gen("X"), Gen("Y")
        sigma = fitting_map(Checker(cart), (neg(X), pos(X)), (neg(X), neg(Y), pos(X)))
        assert sigma.index == (0, 2)

    def test_contraction(self, cart):
        """Repeated negative nonlinear entries are contracted."""
        X = Gen("X")
        sigma = fitting_map(Checker(cart), (neg(X), neg(X), pos(X)), (neg(X), pos(X)))
        assert sigma.index == (0, 0, 1)

    def test_linear_does_not_fit(self, free_mill, A, B):
        """Linear entries cannot be invented."""
        assert fitting_map(Checker(free_mill), (neg(A), pos(A)), (neg(A), neg(B), pos(A))) is None


class TestElaborator:
    """Tests for surface sugar."""

    def test_intro(self, free_mill, A, B):
        """intro cuts each premise into the projection."""
        term = Intro("Tensor", (A, B), "p0", (IdRule(A), IdRule(B)))
        elaborator = Elaborator(free_mill)
        d = elaborator.elaborate(term)
        assert elaborator.checker.check(d) == entries(neg(B), neg(A), pos(tensor(A, B)))

    def test_factor_infers_sides(self, free_mill, A, B):
        """Sides are inferred from the first premise and premises are fitted."""
        term = Factor("Tensor", (A, B), None, (("p0", NonInvRule("Tensor", (B, A), "p0")),))
        elaborator = Elaborator(free_mill)
        d = elaborator.elaborate(term)
        assert isinstance(d, InvRule)
        assert d.sides == (pos(tensor(B, A)),)
        assert elaborator.checker.check(d) == entries(neg(tensor(A, B)), pos(tensor(B, A)))

    def test_factor_premise_does_not_fit(self, free_mill, A, B):
        """A premise no structural rule can fit is reported at that premise."""
        term = Factor("Tensor", (A, B), (pos(B),), (("p0", IdRule(A)),))
        with pytest.raises(PremiseShapeMismatch) as exc:
            Elaborator(free_mill).elaborate(term)
        assert exc.value.path.endswith("premises.p0")

    def test_factor_side_condition_first(self, free_mill, A, B):
        """A side context the base rejects is reported before premise fitting."""
        term = Factor("Tensor", (A, B), (pos(A), pos(B)), (("p0", IdRule(A)),))
        with pytest.raises(SideConditionFailed):
            Elaborator(free_mill).elaborate(term)

    def test_reindex_infers_target(self, free_mill, A):
        """A surjective index list determines the conclusion."""
        d = Elaborator(free_mill).elaborate(Reindex((1, 0), IdRule(A)))
        assert d.target == (pos(A), neg(A))

    def test_reindex_hole(self, free_mill, A):
        """Unfilled positions need an explicit conclusion."""
        with pytest.raises(BadStructuralMap):
            Elaborator(free_mill).elaborate(Reindex((0, 2), IdRule(A)))

    def test_ref(self, free_mill, A):
        """ref resolves named proofs."""
        elaborator = Elaborator(free_mill, {"ident": IdRule(A)})
        assert elaborator.elaborate(Ref("ident")) == IdRule(A)
        with pytest.raises(UnknownItem):
            elaborator.elaborate(Ref("missing"))

    def test_derelict(self, kleisli, A):
        """derelict moves a linear hypothesis into Θ."""
        elaborator = Elaborator(kleisli)
        d = elaborator.elaborate(Derelict(0, IdRule(A)))
        conclusion = elaborator.checker.check(d)
        assert conclusion == entries(neg(Comp("U", (A,))), pos(A))
        assert render_sequent(elaborator.checker, conclusion) == "A | . |- A"

    def test_promote(self, kleisli, A):
        """promote stores a U-projection behind F."""
        ua = Comp("U", (A,))
        elaborator = Elaborator(kleisli)
        d = elaborator.elaborate(Promote(NonInvRule("U", (A,), "p0")))
        assert elaborator.checker.check(d) == entries(neg(ua), pos(Comp("F", (ua,))))

    def test_promote_needs_sorting(self, lnl, A):
        """Unsorted doctrines have no promotion."""
        with pytest.raises(NotSorted):
            Elaborator(lnl).elaborate(Promote(NonInvRule("U", (A,), "p0")))

    def test_derelict_needs_sorting(self, lnl, A):
        """Unsorted doctrines have no dereliction."""
        with pytest.raises(NotSorted):
            Elaborator(lnl).elaborate(Derelict(0, IdRule(A)))


class TestEntryPoints:
    """Tests for check_derivation and elaborate_split_context."""

    def test_check_derivation(self, free_mill, A):
        """Module-level checking matches the checker."""
        assert check_derivation(free_mill, IdRule(A)) == entries(neg(A), pos(A))

    def test_elaborate_sequent(self, kleisli, A, B):
        """Written sequents elaborate to entries."""
        surface = SurfaceSequent("split", ((A,), (B,), (B,)))
        sequent = elaborate_split_context(kleisli, surface)
        assert sequent == entries(neg(Comp("U", (A,))), neg(B), pos(B))

    def test_elaborate_proof(self, free_mill, A, B):
        """Surface proofs elaborate to checked core derivations."""
        term = Intro("Tensor", (A, B), "p0", (IdRule(A), IdRule(B)))
        d = elaborate_split_context(free_mill, term)
        assert check_derivation(free_mill, d) == entries(neg(B), neg(A), pos(tensor(A, B)))

    def test_elaborate_ref(self, free_mill, A):
        """Named proofs are available to ref."""
        assert elaborate_split_context(free_mill, Ref("ident"), {"ident": IdRule(A)}) == IdRule(A)
