from __future__ import annotations

"""
Bounded backward proof search.

The invertible rule on the first entry that admits one is tried first,
then leaves (identity, generators, noninvertible rules) fitted to the goal
with a structural rule, then noninvertible introduction with split
contexts, then cuts on subformulas of the goal and sketch objects.
Absence of a result means the budget ran out, not that the goal is
underivable.
"""

import logging
from dataclasses import dataclass
from itertools import product

from doctrina.base import Sign, allowed
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
from doctrina.errors import DoctrinaError
from doctrina.sketch import Sketch
from doctrina.types import Comp, Gen, TypeExpr, subterms

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchBudget:
    max_depth: int = 6
    max_cut_depth: int = 1
    max_nodes: int = 20_000

    def __post_init__(self):
        for name in ("max_depth", "max_cut_depth", "max_nodes"):
            if getattr(self, name) < 0:
                raise ValueError(f"Search budget '{name}' must be nonnegative")


class _Exhausted(Exception):
    pass


Goal = tuple[Entry, ...]


class ProofSearch:
    """One search run; memoizes failed subgoals per remaining budget."""

    def __init__(self, sketch: Sketch, budget: SearchBudget, checker: Checker | None = None):
        self.sketch = sketch
        self.doctrine = sketch.doctrine
        self.budget = budget
        self.checker = checker or Checker(sketch)
        self.nodes = 0
        self._failed: set[tuple[Goal, int, int]] = set()
        self._cut_types = self._collect_cut_types()

    def _collect_cut_types(self) -> list[TypeExpr]:
        found: dict[str, TypeExpr] = {}
        for obj in self.sketch.objects:
            found.setdefault(obj.name, Gen(obj.name))
        return [found[k] for k in sorted(found)]

    def run(self, goal: Sequent) -> Derivation | None:
        try:
            result = self._prove(goal.entries, self.budget.max_depth, self.budget.max_cut_depth)
        except _Exhausted:
            logger.debug(f"Search for {goal} stopped after {self.nodes} nodes")
            return None
        if result is not None and self.checker.check(result).entries != goal.entries:
            raise AssertionError(f"Search produced a derivation of the wrong sequent for {goal}")
        logger.debug(f"Search for {goal}: {'found' if result else 'nothing'} in {self.nodes} nodes")
        return result

    def _allowed(self, entries) -> bool:
        try:
            return allowed(self.doctrine.base, [self.checker.signed(e) for e in entries])
        except DoctrinaError:
            return False

    def _fit(self, d: Derivation, goal: Goal) -> Derivation | None:
        have = self.checker.check(d).entries
        if have == goal:
            return d
        sigma = fitting_map(self.checker, have, goal)
        return None if sigma is None else StructRule(goal, sigma, d)

    def _prove(self, goal: Goal, depth: int, cuts: int) -> Derivation | None:
        key = (goal, depth, cuts)
        if key in self._failed:
            return None
        self.nodes += 1
        if self.nodes > self.budget.max_nodes:
            raise _Exhausted()

        result = self._invertible(goal, depth, cuts) if depth > 0 else None
        if result is None:
            result = self._leaf(goal)
        if result is None and depth > 0:
            result = self._introduce(goal, depth, cuts)
            if result is None and cuts > 0:
                result = self._cut(goal, depth, cuts)
        if result is None:
            self._failed.add(key)
        return result

    def _leaf_candidates(self, goal: Goal):
        types = []
        for entry in goal:
            if entry.type not in types:
                types.append(entry.type)
        for t in types:
            if Entry(t, Sign.NEG) in goal and Entry(t, Sign.POS) in goal:
                yield IdRule(t)
        for gen in self.sketch.generators:
            yield GenRule(gen.name)
        for entry in goal:
            t = entry.type
            if not isinstance(t, Comp) or not self.doctrine.has_cone(t.cone):
                continue
            cone = self.doctrine.cone(t.cone)
            if entry.sign is cone.vertex_sign:
                for projection in cone.projections:
                    yield NonInvRule(cone.name, t.args, projection.id)

    def _leaf(self, goal: Goal) -> Derivation | None:
        for leaf in self._leaf_candidates(goal):
            try:
                fitted = self._fit(leaf, goal)
            except DoctrinaError:
                continue
            if fitted is not None:
                return fitted
        return None

    def _invertible(self, goal: Goal, depth: int, cuts: int) -> Derivation | None:
        for k, entry in enumerate(goal):
            t = entry.type
            if not isinstance(t, Comp) or not self.doctrine.has_cone(t.cone):
                continue
            cone = self.doctrine.cone(t.cone)
            if entry.sign is not cone.vertex_sign.flip():
                continue
            sides = goal[:k] + goal[k + 1 :]
            condition = [self.doctrine.base.signed(cone.vertex_sort, entry.sign)]
            condition += [self.checker.signed(e) for e in sides]
            if not allowed(self.doctrine.base, condition):
                continue
            subgoals = [
                (projection.id, tuple(projection_entries(cone, t.args, projection.id)) + sides)
                for projection in cone.projections
            ]
            if not all(self._allowed(subgoal) for _, subgoal in subgoals):
                continue
            premises = []
            for pid, subgoal in subgoals:
                premise = self._prove(subgoal, depth - 1, cuts)
                if premise is None:
                    return None
                premises.append((pid, premise))
            return self._fit(InvRule(cone.name, t.args, sides, tuple(premises)), goal)
        return None

    def _splits(self, rest: Goal, parts: int):
        """Assign each entry to one part; negative nonlinear entries go to every part."""
        shared = [e for e in rest if self.checker.signed(e).is_negative_nonlinear]
        split = [e for e in rest if not self.checker.signed(e).is_negative_nonlinear]
        for choice in product(range(parts), repeat=len(split)):
            buckets = [list(shared) for _ in range(parts)]
            for entry, part in zip(split, choice):
                buckets[part].append(entry)
            yield [tuple(b) for b in buckets]

    def _introduce(self, goal: Goal, depth: int, cuts: int) -> Derivation | None:
        for k, entry in enumerate(goal):
            t = entry.type
            if not isinstance(t, Comp) or not self.doctrine.has_cone(t.cone):
                continue
            cone = self.doctrine.cone(t.cone)
            if entry.sign is not cone.vertex_sign:
                continue
            rest = goal[:k] + goal[k + 1 :]
            for projection in cone.projections:
                wanted = projection_entries(cone, t.args, projection.id)
                if not wanted:
                    continue
                for parts in self._splits(rest, len(wanted)):
                    built = self._build_intro(cone.name, t.args, projection.id, wanted, parts, depth, cuts)
                    if built is not None:
                        fitted = self._fit(built, goal)
                        if fitted is not None:
                            return fitted
        return None

    def _build_intro(self, cone, args, projection_id, wanted, parts, depth, cuts):
        current: Derivation = NonInvRule(cone, args, projection_id)
        pending = list(range(len(wanted)))
        for k, entry in enumerate(wanted):
            subgoal = (entry.flip(),) + parts[k]
            if not self._allowed(subgoal):
                return None
            premise = self._prove(subgoal, depth - 1, cuts)
            if premise is None:
                return None
            at = pending[k]
            current = CutRule(premise, 0, current, at)
            shift = len(subgoal) - 1
            pending = [
                p if index <= k else (p - 1 if p > at else p) + shift
                for index, p in enumerate(pending)
            ]
        return current

    def _cut_formulas(self, goal: Goal) -> list[TypeExpr]:
        found: list[TypeExpr] = []
        for entry in goal:
            for t in subterms(entry.type):
                if t not in found:
                    found.append(t)
        for t in self._cut_types:
            if t not in found:
                found.append(t)
        return found

    def _cut(self, goal: Goal, depth: int, cuts: int) -> Derivation | None:
        for t in self._cut_formulas(goal):
            for parts in self._splits(goal, 2):
                left_goal = parts[0] + (Entry(t, Sign.POS),)
                right_goal = (Entry(t, Sign.NEG),) + parts[1]
                if not (self._allowed(left_goal) and self._allowed(right_goal)):
                    continue
                left = self._prove(left_goal, depth - 1, cuts - 1)
                if left is None:
                    continue
                right = self._prove(right_goal, depth - 1, cuts - 1)
                if right is None:
                    continue
                fitted = self._fit(CutRule(left, len(left_goal) - 1, right, 0), goal)
                if fitted is not None:
                    return fitted
        return None


def search(
    sketch: Sketch, goal: Sequent, budget: SearchBudget | None = None
) -> Derivation | None:
    """
    Search for a derivation of ``goal``.

    Args:
        sketch: Sketch providing generators and cones
        goal: Target sequent
        budget: Depth, cut-depth and node limits

    Returns:
        A derivation whose conclusion is exactly ``goal``, or None
    """
    return ProofSearch(sketch, budget or SearchBudget()).run(goal)
