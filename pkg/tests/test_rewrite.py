"""Tests for beta steps, normalization and derivation equality."""

import random
from dataclasses import replace

import pytest

from doctrina.base import StructuralMap
from doctrina.calculus import (
    Checker,
    CutRule,
    GenRule,
    IdRule,
    InvRule,
    NonInvRule,
    StructRule,
    neg,
    pos,
)
from doctrina.errors import ConclusionMismatch, FuelExhausted, UncheckedInput
from doctrina.rewrite import EqVerdict, Normalizer, beta_step, equal, normalize
from doctrina.sampling import random_derivation, random_redex
from doctrina.sketch import Equation
from doctrina.syntax import format_term
from doctrina.types import Comp


@pytest.fixture
def swap(A, B):
    """Contractum of the tensor redex: proj Tensor[B, A] with A and B exchanged."""
    ba = Comp("Tensor", (B, A))
    return StructRule(
        (neg(A), neg(B), pos(ba)),
        StructuralMap.of(3, [1, 0, 2]),
        NonInvRule("Tensor", (B, A), "p0"),
    )


@pytest.fixture
def redex(A, B, swap):
    """proj Tensor[A, B] cut against the swap factorization."""
    ba = Comp("Tensor", (B, A))
    inv = InvRule("Tensor", (A, B), (pos(ba),), (("p0", swap),))
    return CutRule(NonInvRule("Tensor", (A, B), "p0"), 2, inv, 0)


class TestBetaStep:
    """Tests for beta_step."""

    def test_contracts_principal_cut(self, free_mill, redex, swap):
        """The principal cut steps to the matching premise."""
        assert beta_step(free_mill, redex) == swap

    def test_normal_input(self, free_mill, A):
        """Derivations without redexes do not step."""
        assert beta_step(free_mill, IdRule(A)) is None

    def test_unchecked(self, arrows):
        """Inputs must check."""
        with pytest.raises(UncheckedInput):
            beta_step(arrows, GenRule("missing"))


class TestNormalize:
    """Tests for normalize."""

    def test_normal_form(self, free_mill, redex):
        """The tensor redex normalizes to an exchanged projection."""
        result = normalize(free_mill, redex)
        assert format_term(result) == "map{1, 0, 2}(proj Tensor[B, A].p0)"

    def test_conclusion_preserved(self, free_mill, redex):
        """Normalization keeps the exact conclusion."""
        checker = Checker(free_mill)
        assert checker.check(normalize(free_mill, redex)) == checker.check(redex)

    def test_identity_cut_spliced(self, arrows, A):
        """Cutting against an identity leaves the generator."""
        d = CutRule(GenRule("f"), 1, IdRule(A), 0)
        assert normalize(arrows, d) == GenRule("f")

    def test_fuel(self, free_mill, redex):
        """Running out of fuel reports the last complete form."""
        with pytest.raises(FuelExhausted) as exc:
            normalize(free_mill, redex, fuel=0)
        assert exc.value.partial == redex

    def test_unknown_strategy(self, free_mill):
        """Only the known strategies are accepted."""
        with pytest.raises(ValueError):
            Normalizer(free_mill, strategy="sideways")

    def test_random_redexes_step_consistently(self, free_mill):
        """A beta step does not change the normal form."""
        checker = Checker(free_mill)
        rng = random.Random(9)
        for _ in range(10):
            d = random_redex(free_mill, rng)
            if d is None:
                continue
            stepped = beta_step(free_mill, d, checker)
            assert stepped is not None
            assert checker.check(stepped) == checker.check(d)
            assert normalize(free_mill, stepped, checker=checker) == normalize(
                free_mill, d, checker=checker
            )


@pytest.mark.slow
class TestNormalizationProperties:
    """Sampled properties of normalization over random derivations."""

    SAMPLES = 1000

    def test_random_derivations(self, free_mill):
        """Normal forms keep the conclusion, are fixed points and agree across strategies."""
        checker = Checker(free_mill)
        rng = random.Random(2024)
        checked = 0
        for _ in range(self.SAMPLES):
            d = random_derivation(free_mill, rng, max_nodes=12)
            if d is None:
                continue
            checked += 1
            outer = normalize(free_mill, d, checker=checker)
            assert checker.check(outer) == checker.check(d), format_term(d)
            assert normalize(free_mill, outer, checker=checker) == outer, format_term(d)
            inner = normalize(free_mill, d, strategy="innermost", checker=checker)
            assert checker.check(inner) == checker.check(d), format_term(d)
            verdict = equal(free_mill, outer, inner, checker=checker)
            assert verdict is EqVerdict.EQUAL, format_term(d)
        assert checked > self.SAMPLES // 2


class TestEqual:
    """Tests for equal."""

    def test_redex_equals_contractum(self, free_mill, redex, swap):
        """A redex is equal to its contractum."""
        assert equal(free_mill, redex, swap) is EqVerdict.EQUAL

    def test_distinct_generators(self, arrows):
        """Distinct generators of a free sketch differ."""
        assert equal(arrows, GenRule("f"), GenRule("g")) is EqVerdict.NOT_EQUAL

    def test_not_free_is_unknown(self, arrows):
        """With equations present, distinct atoms are not separated."""
        sketch = replace(arrows, equations=(Equation("trivial", GenRule("f"), GenRule("f")),))
        assert equal(sketch, GenRule("f"), GenRule("g")) is EqVerdict.UNKNOWN

    def test_equations_identify(self, arrows):
        """A sketch equation makes its sides equal."""
        sketch = replace(arrows, equations=(Equation("fg", GenRule("f"), GenRule("g")),))
        assert equal(sketch, GenRule("f"), GenRule("g")) is EqVerdict.EQUAL

    def test_conclusion_mismatch(self, free_mill, A, B):
        """Only derivations of the same sequent compare."""
        with pytest.raises(ConclusionMismatch):
            equal(free_mill, IdRule(A), IdRule(B))

    def test_unchecked(self, arrows):
        """Both sides must check."""
        with pytest.raises(UncheckedInput):
            equal(arrows, GenRule("missing"), GenRule("f"))
