from __future__ import annotations

"""
Bounded presentation of the free completion of a sketch.

Object stages are the type strata. Hom-sets are approximated by enumerating
derivations up to a node bound and grouping them into classes with
the equality procedure. Extremality of a proto-extremal cone instance is
probed against expansions drawn from sketch objects. A failed probe is a
counterexample backed by a truth assignment; a family that found no
factorization within the node bound only makes the probe inconclusive,
and a passed probe only covers the bounds it ran with.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product

from doctrina.base import Sign, StructuralMap, allowed
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
from doctrina.errors import DoctrinaError, ResourceLimit
from doctrina.rewrite import EqVerdict, equal, normalize
from doctrina.sketch import ConeInstance, Sketch, is_precomplete
from doctrina.syntax import format_term
from doctrina.types import (
    DEFAULT_CEILING,
    Comp,
    Gen,
    TypeExpr,
    TypeStrata,
    enumerate_types,
    subterms,
)

logger = logging.getLogger(__name__)

Goal = tuple[Entry, ...]


def stage_objects(sketch: Sketch, n: int, ceiling: int = DEFAULT_CEILING) -> TypeStrata:
    """Objects of the stages S0 ... Sn; stage k holds the types of height at most k."""
    return enumerate_types(sketch, n, ceiling)


# Derivation enumeration


def structural_fittings(checker: Checker, have, goal) -> list[StructuralMap]:
    """
    Every structural map turning a conclusion ``have`` into ``goal``.

    Positions of ``goal`` that are not negative nonlinear must be hit exactly
    once; the identity comes first when it applies.
    """
    have = tuple(have)
    goal = tuple(goal)
    flexible = [checker.signed(e).is_negative_nonlinear for e in goal]
    options = [[t for t, g in enumerate(goal) if g == entry] for entry in have]
    if any(not choices for choices in options):
        return []
    found: list[StructuralMap] = []
    hits = [0] * len(goal)
    index: list[int] = []

    def walk(k: int) -> None:
        if k == len(have):
            if all(flexible[t] or hits[t] == 1 for t in range(len(goal))):
                found.append(StructuralMap.of(len(goal), index))
            return
        for t in options[k]:
            if not flexible[t] and hits[t]:
                continue
            hits[t] += 1
            index.append(t)
            walk(k + 1)
            index.pop()
            hits[t] -= 1

    walk(0)
    found.sort(key=lambda sigma: (not sigma.is_identity, sigma.index))
    return found


class DerivationEnumerator:
    """
    Enumerates analytic derivations of a sequent up to a node bound.

    Cut formulas are the subterms of the sequent being derived and the
    sketch objects; structural rules sit only directly below leaves, cuts
    and invertible rules. Without proto-extremal instances every derivation
    equals one of this shape, so the enumeration covers every class. With
    instances a cut on any other type may reach a new class, and ``pruned``
    records that such cuts were skipped. Results are memoized per
    (goal, bound).
    """

    def __init__(
        self,
        sketch: Sketch,
        checker: Checker | None = None,
        max_derivations: int = 200_000,
        partial: bool = False,
    ):
        self.sketch = sketch
        self.doctrine = sketch.doctrine
        self.checker = checker or Checker(sketch)
        self.max_derivations = max_derivations
        self.partial = partial
        self.produced = 0
        self.capped = False
        self._memo: dict[tuple[Goal, int], list[tuple[Derivation, int]]] = {}
        self.pruned = False
        self._object_types = [Gen(name) for name in sorted(obj.name for obj in sketch.objects)]

    def _allowed(self, entries) -> bool:
        try:
            return allowed(self.doctrine.base, [self.checker.signed(e) for e in entries])
        except DoctrinaError:
            return False

    def _record(self, results: list, d: Derivation, cost: int) -> None:
        if self.capped:
            return
        self.produced += 1
        if self.produced > self.max_derivations:
            if not self.partial:
                raise ResourceLimit(
                    f"Enumeration produced more than {self.max_derivations} derivations"
                )
            self.capped = True
            return
        results.append((d, cost))

    def _emit(self, results: list, d: Derivation, cost: int, goal: Goal, bound: int) -> None:
        try:
            have = self.checker.check(d).entries
        except DoctrinaError:
            return
        for sigma in structural_fittings(self.checker, have, goal):
            if sigma.is_identity and have == goal:
                if cost <= bound:
                    self._record(results, d, cost)
            elif cost + 1 <= bound:
                self._record(results, StructRule(goal, sigma, d), cost + 1)

    def derive(self, goal: Goal, bound: int) -> list[tuple[Derivation, int]]:
        """All enumerated derivations of ``goal`` with at most ``bound`` nodes, with sizes."""
        goal = tuple(goal)
        key = (goal, bound)
        if key in self._memo:
            return self._memo[key]
        results: list[tuple[Derivation, int]] = []
        if bound > 0 and self._allowed(goal):
            for leaf in self._leaves(goal):
                self._emit(results, leaf, 1, goal, bound)
            self._invertible(goal, bound, results)
            self._cuts(goal, bound, results)
        self._memo[key] = results
        return results

    def _leaves(self, goal: Goal):
        types = []
        for entry in goal:
            if entry.type not in types:
                types.append(entry.type)
        for t in types:
            if Entry(t, Sign.NEG) in goal and Entry(t, Sign.POS) in goal:
                yield IdRule(t)
        for gen in self.sketch.generators:
            yield GenRule(gen.name)
        for t in types:
            if not isinstance(t, Comp) or not self.doctrine.has_cone(t.cone):
                continue
            cone = self.doctrine.cone(t.cone)
            if Entry(t, cone.vertex_sign) in goal:
                for projection in cone.projections:
                    yield NonInvRule(cone.name, t.args, projection.id)

    def _invertible(self, goal: Goal, bound: int, results: list) -> None:
        seen = set()
        for k, entry in enumerate(goal):
            t = entry.type
            if entry in seen or not isinstance(t, Comp) or not self.doctrine.has_cone(t.cone):
                continue
            seen.add(entry)
            cone = self.doctrine.cone(t.cone)
            if entry.sign is not cone.vertex_sign.flip():
                continue
            sides = goal[:k] + goal[k + 1 :]
            subgoals = [
                (p.id, tuple(projection_entries(cone, t.args, p.id)) + sides)
                for p in cone.projections
            ]
            room = bound - 1 - len(subgoals)
            options = [self.derive(sub, room + 1) for _, sub in subgoals]
            for family in product(*options):
                cost = 1 + sum(c for _, c in family)
                if cost > bound:
                    continue
                premises = tuple((pid, d) for (pid, _), (d, _) in zip(subgoals, family))
                self._emit(results, InvRule(cone.name, t.args, sides, premises), cost, goal, bound)

    def _splits(self, goal: Goal):
        shared = [e for e in goal if self.checker.signed(e).is_negative_nonlinear]
        split = [e for e in goal if not self.checker.signed(e).is_negative_nonlinear]
        for choice in product((0, 1), repeat=len(split)):
            left = list(shared) + [e for e, side in zip(split, choice) if side == 0]
            right = list(shared) + [e for e, side in zip(split, choice) if side == 1]
            yield tuple(left), tuple(right)

    def _cut_formulas(self, goal: Goal) -> list[TypeExpr]:
        found: list[TypeExpr] = []
        for entry in goal:
            for t in subterms(entry.type):
                if t not in found:
                    found.append(t)
        for t in self._object_types:
            if t not in found:
                found.append(t)
        return found

    def _cuts(self, goal: Goal, bound: int, results: list) -> None:
        if bound < 3:
            return
        if self.sketch.extremal:
            self.pruned = True
        for t in self._cut_formulas(goal):
            for part0, part1 in self._splits(goal):
                left_goal = part0 + (Entry(t, Sign.POS),)
                right_goal = (Entry(t, Sign.NEG),) + part1
                if not (self._allowed(left_goal) and self._allowed(right_goal)):
                    continue
                for left, lc in self.derive(left_goal, bound - 2):
                    for right, rc in self.derive(right_goal, bound - 1 - lc):
                        node = CutRule(left, len(left_goal) - 1, right, 0)
                        self._emit(results, node, 1 + lc + rc, goal, bound)


def enumerate_derivations(
    sketch: Sketch,
    sequent: Sequent,
    bound: int,
    max_derivations: int = 200_000,
    checker: Checker | None = None,
    partial: bool = False,
) -> list[Derivation]:
    """
    Analytic derivations of ``sequent`` with at most ``bound`` nodes.

    Returns:
        Distinct derivations ordered by size, then canonical text

    Raises:
        ResourceLimit: if more than ``max_derivations`` were produced and
            ``partial`` is False
    """
    enumerator = DerivationEnumerator(sketch, checker, max_derivations, partial)
    found = enumerator.derive(tuple(sequent.entries), bound)
    unique = {format_term(d): (c, d) for d, c in found}
    ordered = sorted(unique.items(), key=lambda item: (item[1][0], item[0]))
    return [d for _, (_, d) in ordered]


@dataclass
class HomEnumeration:
    sequent: Sequent
    bound: int
    classes: list[Derivation] = field(default_factory=list)
    exhaustive: bool = True
    unknown_pairs: list[tuple[int, int]] = field(default_factory=list)
    derivations: list[Derivation] = field(default_factory=list)

    @property
    def derivations_seen(self) -> int:
        return len(self.derivations)

    @property
    def has_unknown(self) -> bool:
        return bool(self.unknown_pairs)


def enumerate_homset(
    sketch: Sketch,
    sequent: Sequent,
    bound: int,
    max_derivations: int = 200_000,
    equality: dict | None = None,
    checker: Checker | None = None,
    partial: bool = False,
) -> HomEnumeration:
    """
    Group the enumerated derivations of a sequent into equality classes.

    Args:
        sketch: Sketch the hom-set lives in
        sequent: Target sequent
        bound: Largest derivation size, in core nodes
        max_derivations: Cap on enumerated derivations
        equality: Keyword arguments for rewrite.equal (depth, budget, fuel)
        checker: Checker to share
        partial: Return what was found instead of raising when the cap is hit

    Returns:
        HomEnumeration; ``exhaustive`` is False when the cap was hit or when
        cuts outside the enumerated cut formulas were skipped in a sketch
        with proto-extremal instances

    Raises:
        ResourceLimit: if the cap is hit and ``partial`` is False
    """
    checker = checker or Checker(sketch)
    equality = dict(equality or {})
    enumerator = DerivationEnumerator(sketch, checker, max_derivations, partial)
    found = enumerator.derive(tuple(sequent.entries), bound)
    unique = {format_term(d): (c, d) for d, c in found}
    ordered = [d for _, (_, d) in sorted(unique.items(), key=lambda i: (i[1][0], i[0]))]

    exhaustive = not (enumerator.capped or enumerator.pruned)
    result = HomEnumeration(sequent=sequent, bound=bound, exhaustive=exhaustive)
    result.derivations = ordered
    normals: list[Derivation | None] = []
    fuel = equality.get("fuel", 5000)
    for d in ordered:
        try:
            nd = normalize(sketch, d, fuel=fuel, checker=checker)
        except DoctrinaError:
            nd = None
        if nd is not None and nd in normals:
            continue
        verdicts = [
            (index, equal(sketch, d, rep, checker=checker, **equality))
            for index, rep in enumerate(result.classes)
        ]
        if any(v is EqVerdict.EQUAL for _, v in verdicts):
            continue
        fresh = len(result.classes)
        result.unknown_pairs.extend(
            (index, fresh) for index, v in verdicts if v is EqVerdict.UNKNOWN
        )
        result.classes.append(d)
        normals.append(nd)
    logger.debug(
        f"Hom-set {sequent} at bound {bound}: {len(ordered)} derivations, "
        f"{len(result.classes)} classes"
    )
    return result


# Extremality


@dataclass
class ProbeFailure:
    expansion: tuple[Entry, ...]
    expanders: tuple[Derivation, ...]
    reason: str

    def __str__(self) -> str:
        shown = ", ".join(str(e) for e in self.expansion) or "."
        return f"{self.reason} for expansion ({shown})"


@dataclass
class ProbeReport:
    """Outcome of one extremality probe; a pass only covers the bounds used."""

    instance: str
    bound: int
    node_bound: int
    expansions: int = 0
    families: int = 0
    unknown: int = 0
    failures: list[ProbeFailure] = field(default_factory=list)
    misses: list[ProbeFailure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not (self.failures or self.misses)

    @property
    def inconclusive(self) -> bool:
        return not self.failures and bool(self.misses)

    @property
    def verdict(self) -> str:
        if self.failures:
            return "fail"
        if self.misses:
            return f"inconclusive ({len(self.misses)} families without a factorization of <= {self.node_bound} nodes)"
        return f"pass (bounded: expansions <= {self.bound}, derivations <= {self.node_bound} nodes)"


# truth assignments are tried exhaustively up to this many objects
MAX_REFUTATION_OBJECTS = 16


def refuted(sketch: Sketch, entries: tuple[Entry, ...]) -> bool:
    """
    True when some truth assignment to the objects satisfies every generator
    and falsifies ``entries``.

    Every rule stays valid when a sequent is read classically, negative
    entries as hypotheses and positive ones as alternatives, so such an
    assignment shows the sequent has no derivation of any size. Only
    sequents of sketch objects are considered.
    """
    if not all(isinstance(e.type, Gen) for e in entries):
        return False
    names = sorted(obj.name for obj in sketch.objects)
    if len(names) > MAX_REFUTATION_OBJECTS:
        return False

    def holds(values: dict[str, bool], signed) -> bool:
        return any(values[name] is (sign is Sign.POS) for name, sign in signed)

    goal = [(e.type.name, e.sign) for e in entries]
    for choice in product((False, True), repeat=len(names)):
        values = dict(zip(names, choice))
        if not holds(values, goal) and all(holds(values, g.signature) for g in sketch.generators):
            return True
    return False


def _expansions(sketch: Sketch, checker: Checker, cone, bound: int):
    alphabet = [
        Entry(Gen(obj.name), sign)
        for obj in sorted(sketch.objects, key=lambda o: o.name)
        for sign in (Sign.NEG, Sign.POS)
    ]
    base = sketch.doctrine.base
    head = base.signed(cone.vertex_sort, cone.vertex_sign.flip())
    for length in range(bound + 1):
        for omega in combinations_with_replacement(alphabet, length):
            if allowed(base, [head] + [checker.signed(e) for e in omega]):
                yield tuple(omega)


def extremality_probe(
    sketch: Sketch,
    inst: ConeInstance,
    bound: int = 2,
    node_bound: int = 4,
    max_derivations: int = 200_000,
    equality: dict | None = None,
    checker: Checker | None = None,
) -> ProbeReport:
    """
    Probe the universal property of a proto-extremal instance.

    For every expansion Ω of sketch objects with |Ω| <= bound and every
    family of expander derivations (one per projection, at most
    ``node_bound`` nodes), look for factorizations through the vertex among
    derivations of at most ``node_bound`` nodes and check they are unique.
    Finding none is a failure only when no factorization can exist at all;
    otherwise the family is recorded as a miss and the verdict is
    inconclusive.

    Raises:
        ResourceLimit: if enumeration exceeds ``max_derivations``
    """
    checker = checker or Checker(sketch)
    equality = dict(equality or {})
    cone = sketch.doctrine.cone(inst.cone)
    report = ProbeReport(instance=inst.label(), bound=bound, node_bound=node_bound)
    vertex = Entry(Gen(inst.vertex), cone.vertex_sign)

    witnesses = []
    for projection in cone.projections:
        gen = sketch.generator(inst.witness(projection.id))
        shape = sketch.instance_shape(inst, projection.id)
        entries = tuple(Entry(Gen(name), sign) for name, sign in shape[:-1])
        signature = [Entry(Gen(name), sign) for name, sign in gen.signature]
        witnesses.append((entries, GenRule(gen.name), signature.index(vertex)))

    for omega in _expansions(sketch, checker, cone, bound):
        report.expansions += 1
        options = [
            enumerate_derivations(sketch, Sequent(entries + omega), node_bound, max_derivations, checker)
            for entries, _, _ in witnesses
        ]
        wanted = (vertex.flip(),) + omega
        candidates = enumerate_derivations(sketch, Sequent(wanted), node_bound, max_derivations, checker)
        # a refuted sequent has no factorization at any node bound
        impossible = not candidates and refuted(sketch, wanted)
        for family in product(*options):
            report.families += 1
            factorizations = []
            for chi in candidates:
                if _factors(sketch, checker, chi, family, witnesses, omega, equality, report):
                    factorizations.append(chi)
            if impossible:
                report.failures.append(ProbeFailure(omega, family, "no factorization"))
                continue
            if not factorizations:
                report.misses.append(ProbeFailure(omega, family, "no factorization within the node bound"))
                continue
            first = factorizations[0]
            for other in factorizations[1:]:
                verdict = equal(sketch, first, other, checker=checker, **equality)
                if verdict is EqVerdict.NOT_EQUAL:
                    report.failures.append(ProbeFailure(omega, family, "factorization not unique"))
                    break
                if verdict is EqVerdict.UNKNOWN:
                    report.unknown += 1
    logger.info(f"Extremality probe of {report.instance}: {report.verdict}")
    return report


def _factors(sketch, checker, chi, family, witnesses, omega, equality, report) -> bool:
    for (entries, witness, at), expander in zip(witnesses, family):
        composite: Derivation = CutRule(witness, at, chi, 0)
        have = checker.check(composite).entries
        target = entries + omega
        if have != target:
            sigma = fitting_map(checker, have, target)
            if sigma is None:
                return False
            composite = StructRule(target, sigma, composite)
        verdict = equal(sketch, composite, expander, checker=checker, **equality)
        if verdict is EqVerdict.UNKNOWN:
            report.unknown += 1
        if verdict is not EqVerdict.EQUAL:
            return False
    return True


# Completeness predicates


@dataclass
class CompletenessReport:
    sketch: str
    precomplete: bool
    missing: list[str] = field(default_factory=list)
    probes: list[ProbeReport] = field(default_factory=list)
    unsaturated: list[str] = field(default_factory=list)

    @property
    def realized(self) -> bool:
        return all(p.passed for p in self.probes)

    @property
    def saturated(self) -> bool:
        return not self.unsaturated


def _isomorphic(sketch: Sketch, checker: Checker, a: str, b: str, equality: dict) -> bool:
    """Generators i: a -> b and j: b -> a whose composites are identities."""
    there = [g for g in sketch.generators if g.signature == ((a, Sign.NEG), (b, Sign.POS))]
    back = [g for g in sketch.generators if g.signature == ((b, Sign.NEG), (a, Sign.POS))]
    for i, j in product(there, back):
        gi, gj = GenRule(i.name), GenRule(j.name)
        try:
            round_a = equal(sketch, CutRule(gi, 1, gj, 0), IdRule(Gen(a)), checker=checker, **equality)
            round_b = equal(sketch, CutRule(gj, 1, gi, 0), IdRule(Gen(b)), checker=checker, **equality)
        except DoctrinaError:
            continue
        if round_a is EqVerdict.EQUAL and round_b is EqVerdict.EQUAL:
            return True
    return False


def completeness_report(
    sketch: Sketch,
    bound: int = 2,
    node_bound: int = 4,
    max_derivations: int = 200_000,
    equality: dict | None = None,
) -> CompletenessReport:
    """
    Precomplete, realized and saturated checks on a finite sketch.

    Realized means every instance passes the bounded probe. Saturated means
    that whenever generators witness an isomorphism between a vertex and
    another object, an instance with the same cone and assignment exists at
    that object too.
    """
    checker = Checker(sketch)
    equality = dict(equality or {})
    ok, missing = is_precomplete(sketch)
    report = CompletenessReport(sketch=sketch.name, precomplete=ok, missing=missing)
    for inst in sketch.extremal:
        report.probes.append(
            extremality_probe(sketch, inst, bound, node_bound, max_derivations, equality, checker)
        )
    for inst in sketch.extremal:
        vertex_sort = sketch.object(inst.vertex).sort
        for obj in sketch.objects:
            if obj.name == inst.vertex or obj.sort != vertex_sort:
                continue
            if not _isomorphic(sketch, checker, inst.vertex, obj.name, equality):
                continue
            twin = any(
                other.cone == inst.cone
                and sorted(other.assignment) == sorted(inst.assignment)
                and other.vertex == obj.name
                for other in sketch.extremal
            )
            if not twin:
                report.unsaturated.append(f"{inst.label()} has no twin at '{obj.name}'")
    return report
