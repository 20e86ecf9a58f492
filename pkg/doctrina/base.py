from __future__ import annotations

"""
Base LNL polycategories (mode theories).

A base theory names its sorts, each linear or nonlinear, and decides which
signed lists of sorts are inhabited through a small table of clauses. All
builtin bases are subterminal: every hom-set is empty or a singleton, so a
clause table over per-sort sign counts describes them completely.

Indices in this module are 0-based.
"""

import logging
import random
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations_with_replacement
from typing import Union

from doctrina.errors import (
    InadmissibleList,
    LengthMismatch,
    SignMismatch,
    SortMismatch,
    UnknownBuiltin,
)

logger = logging.getLogger(__name__)


class Linearity(str, Enum):
    LINEAR = "lin"
    NONLINEAR = "nonlin"


class Sign(str, Enum):
    POS = "+"
    NEG = "-"

    def flip(self) -> Sign:
        return Sign.NEG if self is Sign.POS else Sign.POS


@dataclass(frozen=True)
class BaseSort:
    name: str
    linearity: Linearity

    @property
    def is_linear(self) -> bool:
        return self.linearity is Linearity.LINEAR


@dataclass(frozen=True)
class SignedSort:
    sort: BaseSort
    sign: Sign

    def flip(self) -> SignedSort:
        return SignedSort(self.sort, self.sign.flip())

    @property
    def is_positive_nonlinear(self) -> bool:
        return self.sign is Sign.POS and not self.sort.is_linear

    @property
    def is_negative_nonlinear(self) -> bool:
        return self.sign is Sign.NEG and not self.sort.is_linear

    def __str__(self) -> str:
        return f"{self.sort.name}{self.sign.value}"


class Bound(str, Enum):
    """How many negative occurrences of a sort a clause allows."""

    ZERO = "zero"
    EXACTLY_ONE = "one"
    AT_MOST_ONE = "opt"
    UNBOUNDED = "many"

    def allows(self, count: int) -> bool:
        if self is Bound.ZERO:
            return count == 0
        if self is Bound.EXACTLY_ONE:
            return count == 1
        if self is Bound.AT_MOST_ONE:
            return count <= 1
        return True


@dataclass(frozen=True)
class Exact:
    """Positive entries form exactly this multiset of sorts."""

    sorts: tuple[str, ...]

    def matches(self, positives: Counter) -> bool:
        return positives == Counter(self.sorts)

    def mentions(self) -> set[str]:
        return set(self.sorts)


@dataclass(frozen=True)
class ExactlyOneOf:
    """Exactly one positive entry, of one of these sorts."""

    sorts: frozenset[str]

    def matches(self, positives: Counter) -> bool:
        total = sum(positives.values())
        return total == 1 and next(iter(positives.elements())) in self.sorts

    def mentions(self) -> set[str]:
        return set(self.sorts)


@dataclass(frozen=True)
class AnyOver:
    """Any number of positive entries, all of these sorts."""

    sorts: frozenset[str]

    def matches(self, positives: Counter) -> bool:
        return all(name in self.sorts for name in positives)

    def mentions(self) -> set[str]:
        return set(self.sorts)


Positives = Union[Exact, ExactlyOneOf, AnyOver]


@dataclass(frozen=True)
class InhabitClause:
    positives: Positives
    negatives: tuple[tuple[str, Bound], ...] = ()

    def bound(self, sort_name: str) -> Bound:
        for name, bound in self.negatives:
            if name == sort_name:
                return bound
        return Bound.ZERO

    def matches(self, positives: Counter, negatives: Counter) -> bool:
        if not self.positives.matches(positives):
            return False
        names = set(negatives) | {name for name, _ in self.negatives}
        return all(self.bound(name).allows(negatives.get(name, 0)) for name in names)

    def mentions(self) -> set[str]:
        return self.positives.mentions() | {name for name, _ in self.negatives}


@dataclass(frozen=True)
class BaseTheory:
    name: str
    sorts: tuple[BaseSort, ...]
    clauses: tuple[InhabitClause, ...] = ()

    def sort(self, name: str) -> BaseSort:
        for sort in self.sorts:
            if sort.name == name:
                return sort
        raise SortMismatch(
            f"Sort '{name}' not found in base '{self.name}'. "
            f"Available: {[s.name for s in self.sorts]}"
        )

    def has_sort(self, name: str) -> bool:
        return any(sort.name == name for sort in self.sorts)

    def sorts_of(self, linearity: Linearity) -> list[BaseSort]:
        return [sort for sort in self.sorts if sort.linearity is linearity]

    def signed(self, name: str, sign: Sign) -> SignedSort:
        return SignedSort(self.sort(name), sign)

    def validate(self) -> list[str]:
        """List structural problems with the declaration itself."""
        problems = []
        names = [sort.name for sort in self.sorts]
        for name, count in Counter(names).items():
            if count > 1:
                problems.append(f"Sort '{name}' declared {count} times")
        for index, clause in enumerate(self.clauses):
            for name in sorted(clause.mentions()):
                if name not in names:
                    problems.append(f"Clause {index} mentions unknown sort '{name}'")
        return problems


@dataclass(frozen=True)
class StructuralMap:
    """
    Index map of a structural rule.

    ``index[k]`` is the position in the source list Φ (length
    ``source_len``) that provides entry ``k`` of the target list Ψ
    (length ``target_len``).
    """

    source_len: int
    target_len: int
    index: tuple[int, ...]

    def __post_init__(self):
        if len(self.index) != self.target_len:
            raise LengthMismatch(
                f"Structural map lists {len(self.index)} indices "
                f"for target length {self.target_len}"
            )
        for value in self.index:
            if not 0 <= value < self.source_len:
                raise LengthMismatch(
                    f"Structural map index {value} out of range for "
                    f"source length {self.source_len}"
                )

    @classmethod
    def identity(cls, length: int) -> StructuralMap:
        return cls(length, length, tuple(range(length)))

    @classmethod
    def of(cls, source_len: int, index) -> StructuralMap:
        index = tuple(index)
        return cls(source_len, len(index), index)

    def preimage_counts(self) -> list[int]:
        counts = [0] * self.source_len
        for value in self.index:
            counts[value] += 1
        return counts

    @property
    def is_identity(self) -> bool:
        return self.source_len == self.target_len and self.index == tuple(
            range(self.source_len)
        )

    @property
    def is_permutation(self) -> bool:
        return self.source_len == self.target_len and sorted(self.index) == list(
            range(self.source_len)
        )

    def compose(self, inner: StructuralMap) -> StructuralMap:
        """The map of Struct(self, Struct(inner, d))."""
        if inner.source_len != self.target_len:
            raise LengthMismatch(
                f"Cannot compose structural maps: inner source {inner.source_len} "
                f"vs outer target {self.target_len}"
            )
        return StructuralMap(
            self.source_len,
            inner.target_len,
            tuple(self.index[value] for value in inner.index),
        )


@dataclass
class StructuralCheck:
    """Result of validating a structural map against a source list."""

    target: list = field(default_factory=list)
    offending: list[int] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.offending


def admissible(entries) -> bool:
    """At most one positive nonlinear entry, and then no linear entries."""
    positives_nonlinear = 0
    linear = 0
    for entry in entries:
        if entry.is_positive_nonlinear:
            positives_nonlinear += 1
        elif entry.sort.is_linear:
            linear += 1
    if positives_nonlinear > 1:
        return False
    return not (positives_nonlinear == 1 and linear > 0)


def sign_counts(entries) -> tuple[Counter, Counter]:
    positives: Counter = Counter()
    negatives: Counter = Counter()
    for entry in entries:
        target = positives if entry.sign is Sign.POS else negatives
        target[entry.sort.name] += 1
    return positives, negatives


def inhabited(base: BaseTheory, entries) -> bool:
    """
    Decide inhabitation of an admissible signed list.

    Raises:
        InadmissibleList: if the list is not admissible
    """
    entries = list(entries)
    if not admissible(entries):
        raise InadmissibleList(
            f"List ({', '.join(str(e) for e in entries)}) is not admissible"
        )
    positives, negatives = sign_counts(entries)
    return any(clause.matches(positives, negatives) for clause in base.clauses)


def allowed(base: BaseTheory, entries) -> bool:
    """Admissible and inhabited, without raising."""
    entries = list(entries)
    return admissible(entries) and inhabited(base, entries)


def validate_structural_map(source, sigma: StructuralMap) -> StructuralCheck:
    """
    Check that a structural map only copies or drops negative nonlinear entries.

    Args:
        source: The list Φ the map indexes into
        sigma: The structural map

    Returns:
        StructuralCheck with the induced target Ψ (Ψ[k] = Φ[σ(k)])
    """
    source = list(source)
    if sigma.source_len != len(source):
        raise LengthMismatch(
            f"Structural map expects source length {sigma.source_len}, "
            f"got {len(source)}"
        )
    result = StructuralCheck(target=[source[value] for value in sigma.index])
    for position, count in enumerate(sigma.preimage_counts()):
        if count != 1 and not source[position].is_negative_nonlinear:
            result.offending.append(position)
    return result


def cut_shape(left, i: int, right, j: int) -> list:
    """
    Shape of a cut: ``left`` without entry i, then ``right`` without entry j.

    Raises:
        SortMismatch, SignMismatch, InadmissibleList
    """
    left = list(left)
    right = list(right)
    if not (0 <= i < len(left) and 0 <= j < len(right)):
        raise LengthMismatch(f"Cut positions ({i}, {j}) out of range")
    if left[i].sort != right[j].sort:
        raise SortMismatch(
            f"Cut entries have sorts {left[i].sort.name} and {right[j].sort.name}"
        )
    if left[i].sign is right[j].sign:
        raise SignMismatch(f"Cut entries both have sign {left[i].sign.value}")
    for side in (left, right):
        if not admissible(side):
            raise InadmissibleList("Cut premise shape is not admissible")
    result = left[:i] + left[i + 1 :] + right[:j] + right[j + 1 :]
    if not admissible(result):
        raise InadmissibleList("Cut result is not admissible")
    return result


def _signed_alphabet(base: BaseTheory) -> list[SignedSort]:
    return [SignedSort(sort, sign) for sort in base.sorts for sign in Sign]


def check_closure(
    base: BaseTheory,
    trials: int = 2000,
    seed: int = 1729,
    exhaustive_length: int = 5,
) -> list[str]:
    """
    Test that inhabitation is closed under structural action and cut.

    Multisets up to ``exhaustive_length`` are checked exhaustively for
    weakening and contraction, shorter ones for cut; random ordered
    instances are checked on top.

    Returns:
        Human-readable counterexamples (empty when none were found)
    """
    from doctrina.sampling import random_cut_instance, random_structural_instance

    failures: list[str] = []
    alphabet = _signed_alphabet(base)

    inhabited_multisets = []
    for length in range(exhaustive_length + 1):
        for combo in combinations_with_replacement(range(len(alphabet)), length):
            entries = [alphabet[k] for k in combo]
            if allowed(base, entries):
                inhabited_multisets.append(entries)

    for entries in inhabited_multisets:
        for candidate in alphabet:
            if not candidate.is_negative_nonlinear:
                continue
            weakened = entries + [candidate]
            if admissible(weakened) and not inhabited(base, weakened):
                failures.append(
                    f"weakening by {candidate} leaves ({_show(entries)}) uninhabited"
                )
            if entries.count(candidate) >= 2:
                contracted = list(entries)
                contracted.remove(candidate)
                if not inhabited(base, contracted):
                    failures.append(
                        f"contraction of {candidate} in ({_show(entries)}) is uninhabited"
                    )

    short = [e for e in inhabited_multisets if len(e) <= max(exhaustive_length - 2, 1)]
    for left in short:
        for right in short:
            for k, entry in enumerate(left):
                flipped = entry.flip()
                if flipped not in right:
                    continue
                j = right.index(flipped)
                result = left[:k] + left[k + 1 :] + right[:j] + right[j + 1 :]
                if not admissible(result) or not inhabited(base, result):
                    failures.append(
                        f"cut of ({_show(left)}) and ({_show(right)}) on {entry} "
                        f"is not inhabited"
                    )

    rng = random.Random(seed)
    for _ in range(trials):
        instance = random_structural_instance(base, rng)
        if instance is not None:
            source, sigma = instance
            target = [source[value] for value in sigma.index]
            if allowed(base, target) and not allowed(base, source):
                failures.append(
                    f"structural map {sigma.index} from ({_show(source)}) "
                    f"breaks inhabitation"
                )
        cut = random_cut_instance(base, rng)
        if cut is not None:
            left, i, right, j = cut
            try:
                result = cut_shape(left, i, right, j)
            except InadmissibleList:
                failures.append(
                    f"cut of ({_show(left)}) and ({_show(right)}) is not admissible"
                )
                continue
            if not inhabited(base, result):
                failures.append(
                    f"cut of ({_show(left)}) and ({_show(right)}) is not inhabited"
                )
        if len(failures) > 20:
            break

    if failures:
        logger.warning(f"Base '{base.name}' failed {len(failures)} closure checks")
    return failures


def _show(entries) -> str:
    return ", ".join(str(e) for e in entries)


# Builtin subterminal bases

LIN = Linearity.LINEAR
NONLIN = Linearity.NONLINEAR
MANY = Bound.UNBOUNDED
ONE = Bound.EXACTLY_ONE
OPT = Bound.AT_MOST_ONE


def _base(name: str, sorts: dict[str, Linearity], *clauses: InhabitClause) -> BaseTheory:
    return BaseTheory(
        name=name,
        sorts=tuple(BaseSort(n, lin) for n, lin in sorts.items()),
        clauses=tuple(clauses),
    )


def _clause(positives: Positives, **negatives: Bound) -> InhabitClause:
    return InhabitClause(positives, tuple(sorted(negatives.items())))


def _one_of(*names: str) -> ExactlyOneOf:
    return ExactlyOneOf(frozenset(names))


def _any_of(*names: str) -> AnyOver:
    return AnyOver(frozenset(names))


BUILTIN_BASES: dict[str, BaseTheory] = {
    base.name: base
    for base in (
        _base("lnlpoly", {"a": LIN, "x": NONLIN}, _clause(_any_of("a", "x"), a=MANY, x=MANY)),
        _base("sympoly", {"a": LIN}, _clause(_any_of("a"), a=MANY)),
        _base("symmulti", {"a": LIN}, _clause(_one_of("a"), a=MANY)),
        _base("cat", {"a": LIN}, _clause(Exact(("a",)), a=ONE)),
        _base("cartmulti", {"x": NONLIN}, _clause(_one_of("x"), x=MANY)),
        _base(
            "lnlmulti",
            {"a": LIN, "x": NONLIN},
            _clause(_one_of("x"), x=MANY),
            _clause(_one_of("a"), a=MANY, x=MANY),
        ),
        _base(
            "cbpv",
            {"a": LIN, "x": NONLIN},
            _clause(_one_of("x"), x=MANY),
            _clause(_one_of("a"), a=OPT, x=MANY),
        ),
        _base(
            "ecbv",
            {"a": LIN, "x": NONLIN},
            _clause(_one_of("x"), x=MANY),
            _clause(_one_of("a"), a=ONE, x=MANY),
        ),
        _base(
            "dblsplit",
            {"a": LIN, "xl": NONLIN, "xr": NONLIN},
            _clause(_any_of("a"), a=MANY, xl=MANY, xr=MANY),
            _clause(_one_of("xl", "xr"), xl=MANY, xr=MANY),
        ),
        _base(
            "linpol",
            {"p": LIN, "n": LIN},
            _clause(Exact(("p",)), p=MANY),
            _clause(Exact(("n",)), p=MANY, n=OPT),
        ),
        _base(
            "smadj",
            {"p": LIN, "n": LIN},
            _clause(Exact(("p",)), p=MANY),
            _clause(Exact(("n",)), p=MANY, n=MANY),
        ),
        _base(
            "lnlpol",
            {"p": LIN, "n": LIN, "x": NONLIN},
            _clause(_one_of("x"), x=MANY),
            _clause(Exact(("p",)), p=MANY, x=MANY),
            _clause(Exact(("n",)), p=MANY, n=OPT, x=MANY),
        ),
        _base(
            "symskew",
            {"l": LIN, "t": LIN},
            _clause(Exact(("l",)), l=MANY),
            _clause(Exact(("t",)), l=MANY, t=OPT),
        ),
    )
}


def builtin_base(name: str) -> BaseTheory:
    """
    Look up a builtin base theory.

    Raises:
        UnknownBuiltin: if the name is not in the catalog
    """
    if name not in BUILTIN_BASES:
        raise UnknownBuiltin(
            f"Unknown builtin base '{name}'. Available: {sorted(BUILTIN_BASES)}"
        )
    return BUILTIN_BASES[name]
