from __future__ import annotations

"""
Derivation equality: β-reduction, canonical normal forms and bounded η.

Normalization works on cut nets. A derivation is flattened into components
(every node that is not a cut) joined by links (the cuts) and bound to the
positions of the original conclusion. On the net, structural rules are
opened into their premises (weakening deletes the branch cut against a
dropped entry), β-redexes between a noninvertible vertex and an invertible
rule of the same cone are contracted, and identities are spliced out. The
net is then rebuilt deterministically from the least component by
canonical serialization, and one outer structural rule restores the exact
conclusion. Associativity, interchange and equivariance of cut therefore
hold by construction.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum

from doctrina.base import StructuralMap
from doctrina.calculus import (
    Checker,
    CutRule,
    Derivation,
    IdRule,
    InvRule,
    NonInvRule,
    StructRule,
    children,
    fitting_map,
)
from doctrina.errors import (
    ConclusionMismatch,
    DoctrinaError,
    FuelExhausted,
    UncheckedInput,
)
from doctrina.sketch import Sketch
from doctrina.syntax import format_term
from doctrina.types import Comp

logger = logging.getLogger(__name__)

STRATEGIES = ("outermost", "innermost")

Port = tuple[int, int]


class EqVerdict(str, Enum):
    EQUAL = "equal"
    NOT_EQUAL = "not-equal"
    UNKNOWN = "unknown"


def _require_checked(checker: Checker, d: Derivation):
    try:
        return checker.check(d)
    except DoctrinaError as e:
        raise UncheckedInput(f"Input derivation does not check: {e}") from e


# β-step


def _contract(checker: Checker, node: CutRule) -> Derivation | None:
    left, right = node.left, node.right
    if isinstance(left, NonInvRule) and isinstance(right, InvRule):
        if node.i == len(checker.check(left)) - 1 and node.j == 0:
            if (left.cone, tuple(left.args)) == (right.cone, tuple(right.args)):
                return right.premise(left.projection)
    if isinstance(left, InvRule) and isinstance(right, NonInvRule):
        if node.i == 0 and node.j == len(checker.check(right)) - 1:
            if (left.cone, tuple(left.args)) == (right.cone, tuple(right.args)):
                premise = left.premise(right.projection)
                have = checker.check(premise).entries
                target = checker.check(node).entries
                if have == target:
                    return premise
                return StructRule(target, fitting_map(checker, have, target), premise)
    return None


def beta_step(sketch: Sketch, d: Derivation, checker: Checker | None = None) -> Derivation | None:
    """
    Contract the leftmost-outermost β-redex.

    Returns:
        The contractum in place (same conclusion), or None when d is β-normal

    Raises:
        UncheckedInput: if d does not check
    """
    checker = checker or Checker(sketch)
    _require_checked(checker, d)

    def step(node: Derivation) -> Derivation | None:
        if isinstance(node, CutRule):
            reduced = _contract(checker, node)
            if reduced is not None:
                return reduced
            left = step(node.left)
            if left is not None:
                return CutRule(left, node.i, node.right, node.j)
            right = step(node.right)
            if right is not None:
                return CutRule(node.left, node.i, right, node.j)
            return None
        if isinstance(node, StructRule):
            premise = step(node.premise)
            return None if premise is None else StructRule(node.target, node.sigma, premise)
        if isinstance(node, InvRule):
            for k, (pid, premise) in enumerate(node.premises):
                reduced = step(premise)
                if reduced is not None:
                    premises = list(node.premises)
                    premises[k] = (pid, reduced)
                    return InvRule(node.cone, node.args, node.sides, tuple(premises))
        return None

    return step(d)


# Cut nets


@dataclass
class _Net:
    checker: Checker
    outer: tuple
    nodes: dict[int, Derivation] = field(default_factory=dict)
    links: dict[Port, Port] = field(default_factory=dict)
    bound: dict[Port, int] = field(default_factory=dict)
    next_id: int = 0

    @classmethod
    def of(cls, checker: Checker, d: Derivation) -> _Net:
        net = cls(checker, checker.check(d).entries)
        for position, port in enumerate(net.absorb(d)):
            net.bound[port] = position
        return net

    def absorb(self, d: Derivation) -> list[Port]:
        """Add the components of ``d``; returns its free ports in conclusion order."""
        if isinstance(d, CutRule):
            left = self.absorb(d.left)
            right = self.absorb(d.right)
            self.link(left[d.i], right[d.j])
            return left[: d.i] + left[d.i + 1 :] + right[: d.j] + right[d.j + 1 :]
        cid = self.next_id
        self.next_id += 1
        self.nodes[cid] = d
        return [(cid, k) for k in range(len(self.checker.check(d)))]

    def link(self, a: Port, b: Port) -> None:
        self.links[a] = b
        self.links[b] = a

    def arity(self, cid: int) -> int:
        return len(self.checker.check(self.nodes[cid]))

    def transfer(self, old: Port, new: Port) -> None:
        if old in self.bound:
            self.bound[new] = self.bound.pop(old)
        else:
            other = self.links.pop(old)
            del self.links[other]
            self.link(new, other)

    def unplug(self, port: Port) -> Port | None:
        """Detach a port; returns the linked partner, if any."""
        if port in self.bound:
            del self.bound[port]
            return None
        other = self.links.pop(port)
        del self.links[other]
        return other

    def delete_branch(self, port: Port) -> None:
        """Remove the component owning ``port`` and everything beyond its other ports."""
        cid = port[0]
        arity = self.arity(cid)
        del self.nodes[cid]
        for k in range(arity):
            if k == port[1]:
                continue
            partner = self.unplug((cid, k))
            if partner is not None:
                self.delete_branch(partner)

    # reductions

    def open_struct(self, cid: int) -> bool:
        node = self.nodes[cid]
        preimages = [[] for _ in range(node.sigma.source_len)]
        for l, value in enumerate(node.sigma.index):
            preimages[value].append(l)
        for k, pre in enumerate(preimages):
            if (cid, k) in self.links and len(pre) > 1:
                return False
        inner = self.absorb(node.premise)
        for k, pre in enumerate(preimages):
            port = (cid, k)
            if port in self.bound:
                position = self.bound.pop(port)
                for l in pre:
                    self.bound[inner[l]] = position
                continue
            partner = self.unplug(port)
            if pre:
                self.link(inner[pre[0]], partner)
            else:
                self.delete_branch(partner)
        del self.nodes[cid]
        return True

    def beta(self, n: int, i: int) -> bool:
        noninv, inv = self.nodes[n], self.nodes[i]
        if (noninv.cone, tuple(noninv.args)) != (inv.cone, tuple(inv.args)):
            return False
        m = self.arity(n)
        if self.links.get((n, m - 1)) != (i, 0):
            return False
        contractum = inv.premise(noninv.projection)
        self.unplug((n, m - 1))
        inner = self.absorb(contractum)
        for x in range(m - 1):
            self.transfer((n, x), inner[x])
        for y in range(1, self.arity(i)):
            self.transfer((i, y), inner[m - 1 + y - 1])
        del self.nodes[n]
        del self.nodes[i]
        return True

    def splice_identity(self, cid: int) -> bool:
        a, b = (cid, 0), (cid, 1)
        if a in self.bound and b in self.bound:
            return False
        if a in self.links and b in self.links:
            q, r = self.unplug(a), self.unplug(b)
            self.link(q, r)
        else:
            linked, free = (a, b) if a in self.links else (b, a)
            q = self.unplug(linked)
            self.bound[q] = self.bound.pop(free)
        del self.nodes[cid]
        return True

    def reduce_once(self) -> bool:
        for cid in sorted(self.nodes):
            node = self.nodes.get(cid)
            if isinstance(node, StructRule) and self.open_struct(cid):
                return True
        for cid in sorted(self.nodes):
            node = self.nodes.get(cid)
            if not isinstance(node, NonInvRule):
                continue
            partner = self.links.get((cid, self.arity(cid) - 1))
            if partner is None or partner[1] != 0:
                continue
            if isinstance(self.nodes[partner[0]], InvRule) and self.beta(cid, partner[0]):
                return True
        for cid in sorted(self.nodes):
            if isinstance(self.nodes.get(cid), IdRule) and self.splice_identity(cid):
                return True
        return False

    # rebuilding

    def rebuild(self) -> Derivation:
        keys = {cid: format_term(node) for cid, node in self.nodes.items()}
        least = min(keys.values())
        candidates = [self._rebuild_from(cid, keys) for cid in sorted(keys) if keys[cid] == least]
        return min(candidates, key=format_term)

    def _rebuild_from(self, start: int, keys: dict[int, str]) -> Derivation:
        tree = self.nodes[start]
        ports = [(start, k) for k in range(self.arity(start))]
        built = {start}
        while len(built) < len(self.nodes):
            best = None
            for position, port in enumerate(ports):
                partner = self.links.get(port)
                if partner is None or partner[0] in built:
                    continue
                rank = (keys[partner[0]], partner[1], position)
                if best is None or rank < best[0]:
                    best = (rank, position, partner)
            _, position, (cid, k) = best
            tree = CutRule(tree, position, self.nodes[cid], k)
            ports = ports[:position] + ports[position + 1 :]
            ports += [(cid, x) for x in range(self.arity(cid)) if x != k]
            built.add(cid)
        sigma = StructuralMap.of(len(self.outer), [self.bound[p] for p in ports])
        if sigma.is_identity:
            return tree
        return StructRule(self.outer, sigma, tree)


# Normalization


class Normalizer:
    """Normalizes derivations of one sketch under a shared fuel counter."""

    def __init__(
        self,
        sketch: Sketch,
        fuel: int = 5000,
        strategy: str = "outermost",
        checker: Checker | None = None,
        use_equations: bool = True,
    ):
        if strategy not in STRATEGIES:
            raise ValueError(f"Unknown strategy '{strategy}'. Available: {list(STRATEGIES)}")
        self.sketch = sketch
        self.checker = checker or Checker(sketch)
        self.fuel = fuel
        self.strategy = strategy
        self.steps = 0
        self._rules: list[tuple[Derivation, Derivation]] = []
        if use_equations and sketch.equations:
            self._rules = self._orient_equations()

    def _orient_equations(self) -> list[tuple[Derivation, Derivation]]:
        plain = Normalizer(self.sketch, self.fuel, self.strategy, self.checker, False)
        rules = []
        for eq in self.sketch.equations:
            lhs, rhs = plain.normalize(eq.lhs), plain.normalize(eq.rhs)
            if lhs == rhs:
                continue
            small, big = sorted((lhs, rhs), key=lambda t: (len(format_term(t)), format_term(t)))
            rules.append((big, small))
        return rules

    def _spend(self, partial: Derivation) -> None:
        self.steps += 1
        if self.steps > self.fuel:
            raise FuelExhausted(f"Normalization used more than {self.fuel} steps", partial=partial)

    def normalize(self, d: Derivation) -> Derivation:
        _require_checked(self.checker, d)
        current = d
        while True:
            nxt = self._pass(current)
            rewritten = self._rewrite_equations(nxt)
            if rewritten is not None:
                nxt = rewritten
            if nxt == current:
                return current
            self._spend(current)
            current = nxt

    def _normalize_premises(self, net: _Net) -> None:
        for cid, node in list(net.nodes.items()):
            if isinstance(node, InvRule) and node.premises:
                premises = tuple((pid, self.normalize(p)) for pid, p in node.premises)
                net.nodes[cid] = InvRule(node.cone, node.args, node.sides, premises)
            elif isinstance(node, StructRule):
                net.nodes[cid] = StructRule(node.target, node.sigma, self.normalize(node.premise))

    def _pass(self, d: Derivation) -> Derivation:
        net = _Net.of(self.checker, d)
        if self.strategy == "innermost":
            self._normalize_premises(net)
        while net.reduce_once():
            self._spend(d)
        if self.strategy == "outermost":
            self._normalize_premises(net)
        return net.rebuild()

    def _rewrite_equations(self, d: Derivation) -> Derivation | None:
        if not self._rules:
            return None

        def visit(node: Derivation) -> Derivation | None:
            for big, small in self._rules:
                if node == big:
                    return small
            if isinstance(node, CutRule):
                left = visit(node.left)
                if left is not None:
                    return CutRule(left, node.i, node.right, node.j)
                right = visit(node.right)
                if right is not None:
                    return CutRule(node.left, node.i, right, node.j)
            elif isinstance(node, StructRule):
                premise = visit(node.premise)
                if premise is not None:
                    return StructRule(node.target, node.sigma, premise)
            elif isinstance(node, InvRule):
                for k, (pid, premise) in enumerate(node.premises):
                    reduced = visit(premise)
                    if reduced is not None:
                        premises = list(node.premises)
                        premises[k] = (pid, reduced)
                        return InvRule(node.cone, node.args, node.sides, tuple(premises))
            return None

        return visit(d)


def normalize(
    sketch: Sketch,
    d: Derivation,
    fuel: int = 5000,
    strategy: str = "outermost",
    checker: Checker | None = None,
) -> Derivation:
    """
    Normal form of a checked derivation; the conclusion is preserved exactly.

    Raises:
        UncheckedInput: if d does not check
        FuelExhausted: carrying the last complete form reached
    """
    return Normalizer(sketch, fuel, strategy, checker).normalize(d)


# Equality


class _Budget(Exception):
    pass


class _Comparison:
    def __init__(self, sketch: Sketch, depth: int, budget: int, fuel: int, checker: Checker):
        self.sketch = sketch
        self.depth = depth
        self.budget = budget
        self.fuel = fuel
        self.checker = checker
        self.spent = 0

    def normal(self, d: Derivation) -> Derivation:
        return Normalizer(self.sketch, self.fuel, checker=self.checker).normalize(d)

    def compare(self, d1: Derivation, d2: Derivation, depth: int) -> EqVerdict:
        self.spent += 1
        if self.spent > self.budget:
            raise _Budget()
        n1, n2 = self.normal(d1), self.normal(d2)
        if n1 == n2:
            return EqVerdict.EQUAL

        conclusion = self.checker.check(n1)
        position = _eta_position(self.sketch, conclusion)
        if position is not None:
            if depth <= 0:
                return EqVerdict.UNKNOWN
            k, t, cone = position
            verdicts = []
            for projection in cone.projections:
                probe = NonInvRule(cone.name, t.args, projection.id)
                last = len(self.checker.check(probe)) - 1
                verdicts.append(
                    self.compare(CutRule(probe, last, n1, k), CutRule(probe, last, n2, k), depth - 1)
                )
            if EqVerdict.NOT_EQUAL in verdicts:
                return EqVerdict.NOT_EQUAL
            if all(v is EqVerdict.EQUAL for v in verdicts):
                return EqVerdict.EQUAL
            return EqVerdict.UNKNOWN
        return self.rigid(n1, n2, depth)

    def rigid(self, n1: Derivation, n2: Derivation, depth: int) -> EqVerdict:
        if not self.sketch.is_free:
            return EqVerdict.UNKNOWN
        if isinstance(n1, InvRule) and isinstance(n2, InvRule):
            if (n1.cone, n1.args, n1.sides) != (n2.cone, n2.args, n2.sides):
                return EqVerdict.UNKNOWN
            verdicts = [
                self.compare(p1, n2.premise(pid), depth) for pid, p1 in n1.premises
            ]
            if EqVerdict.NOT_EQUAL in verdicts:
                return EqVerdict.NOT_EQUAL
            if all(v is EqVerdict.EQUAL for v in verdicts):
                return EqVerdict.EQUAL
            return EqVerdict.UNKNOWN
        a1, a2 = _atom(n1), _atom(n2)
        if a1 is not None and a2 is not None:
            return EqVerdict.NOT_EQUAL
        return EqVerdict.UNKNOWN


def _atom(d: Derivation):
    """A rule leaf, possibly under one exchange; None for anything else."""
    if isinstance(d, StructRule):
        if not d.sigma.is_permutation:
            return None
        d = d.premise
    if children(d):
        return None
    return d


def _eta_position(sketch: Sketch, conclusion):
    doctrine = sketch.doctrine
    for k, entry in enumerate(conclusion):
        t = entry.type
        if isinstance(t, Comp) and doctrine.has_cone(t.cone):
            cone = doctrine.cone(t.cone)
            if entry.sign is cone.vertex_sign.flip():
                return k, t, cone
    return None


def equal(
    sketch: Sketch,
    d1: Derivation,
    d2: Derivation,
    depth: int = 4,
    budget: int = 10_000,
    fuel: int = 5000,
    checker: Checker | None = None,
) -> EqVerdict:
    """
    Compare two derivations of the same sequent.

    Equal and NotEqual are definitive; Unknown means no decision was reached
    within the η depth, node budget or fuel.

    Raises:
        UncheckedInput: if either side does not check
        ConclusionMismatch: if the conclusions differ
    """
    checker = checker or Checker(sketch)
    c1 = _require_checked(checker, d1)
    c2 = _require_checked(checker, d2)
    if c1 != c2:
        raise ConclusionMismatch(f"Conclusions differ: {c1} versus {c2}")
    comparison = _Comparison(sketch, depth, budget, fuel, checker)
    try:
        verdict = comparison.compare(d1, d2, depth)
    except (_Budget, FuelExhausted):
        logger.debug(f"Equality budget exhausted after {comparison.spent} comparisons")
        return EqVerdict.UNKNOWN
    logger.debug(f"Equality verdict {verdict.value} after {comparison.spent} comparisons")
    return verdict
