from __future__ import annotations

"""
Workspace loading: name resolution, includes, elaboration and validation.

A workspace is one file (plus ``use "file";`` includes) holding bases,
doctrines, sketches, doctrine maps, goals, proofs, expected rejections,
expectations and budget directives. Loading never stops at the first bad
item: every problem is recorded with its code and source position.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

from doctrina.base import (
    AnyOver,
    BaseSort,
    BaseTheory,
    Bound,
    Exact,
    ExactlyOneOf,
    InhabitClause,
    Linearity,
    builtin_base,
    check_closure,
)
from doctrina.calculus import (
    Checker,
    Derivation,
    Elaborator,
    Sequent,
    elaborate_sequent,
    same_up_to_zones,
)
from doctrina.config_loader import DIRECTIVES, Config
from doctrina.doctrine import (
    ConeObject,
    DiscreteCone,
    Doctrine,
    Projection,
    Sorting,
    builtin_doctrine,
    validate_doctrine,
)
from doctrina.errors import (
    ConclusionMismatch,
    DoctrinaError,
    UnknownBuiltin,
    UnknownItem,
    ValidationError,
)
from doctrina.sketch import (
    ConeInstance,
    Equation,
    Generator,
    Sketch,
    SketchObject,
    validate_sketch,
)
from doctrina.syntax import (
    BaseDecl,
    DoctrineDecl,
    ExpectEq,
    ExpectNormal,
    GoalDecl,
    MapDecl,
    ProofDecl,
    RejectDecl,
    RestrictDecl,
    SetDirective,
    SketchDecl,
    UseBase,
    UseDoctrine,
    UseFile,
    parse_items,
)
from doctrina.translate import ConeCorrespondence, DoctrineMap, validate_map

logger = logging.getLogger(__name__)

Span = tuple[int, int]


@dataclass
class Problem:
    """A validation failure found while loading."""

    item: str
    code: str
    message: str
    span: Span = (0, 0)
    path: str = ""

    def __str__(self) -> str:
        return f"{self.code} in '{self.item}' at line {self.span[0]}: {self.message}"


@dataclass
class GoalRecord:
    name: str
    sketch: str
    sequent: Sequent | None = None
    error: DoctrinaError | None = None
    span: Span = (0, 0)


@dataclass
class ProofRecord:
    name: str
    sketch: str
    term: Derivation
    derivation: Derivation | None = None
    conclusion: Sequent | None = None
    error: DoctrinaError | None = None
    span: Span = (0, 0)

    @property
    def ok(self) -> bool:
        return self.error is None and self.derivation is not None


@dataclass
class RejectRecord:
    name: str
    sketch: str
    expected: str
    actual: str | None = None
    span: Span = (0, 0)

    @property
    def satisfied(self) -> bool:
        return self.actual == self.expected


@dataclass
class Workspace:
    path: Path | None = None
    bases: dict[str, BaseTheory] = field(default_factory=dict)
    doctrines: dict[str, Doctrine] = field(default_factory=dict)
    sketches: dict[str, Sketch] = field(default_factory=dict)
    maps: dict[str, DoctrineMap] = field(default_factory=dict)
    goals: dict[str, GoalRecord] = field(default_factory=dict)
    proofs: dict[str, ProofRecord] = field(default_factory=dict)
    rejects: list[RejectRecord] = field(default_factory=list)
    expectations: list = field(default_factory=list)
    directives: dict[str, int] = field(default_factory=dict)
    problems: list[Problem] = field(default_factory=list)
    spans: dict[str, Span] = field(default_factory=dict)
    checkers: dict[str, Checker] = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return not self.problems

    def sketch(self, name: str) -> Sketch:
        if name not in self.sketches:
            raise UnknownItem(f"No sketch named '{name}'. Available: {sorted(self.sketches)}")
        return self.sketches[name]

    def checker(self, sketch_name: str) -> Checker:
        if sketch_name not in self.checkers:
            self.checkers[sketch_name] = Checker(self.sketch(sketch_name))
        return self.checkers[sketch_name]

    def doctrine(self, name: str) -> Doctrine:
        if name in self.doctrines:
            return self.doctrines[name]
        try:
            return builtin_doctrine(name)
        except UnknownBuiltin:
            raise UnknownItem(f"No doctrine named '{name}'") from None

    def base(self, name: str) -> BaseTheory:
        if name in self.bases:
            return self.bases[name]
        try:
            return builtin_base(name)
        except UnknownBuiltin:
            raise UnknownItem(f"No base named '{name}'") from None

    def map(self, name: str) -> DoctrineMap:
        if name not in self.maps:
            raise UnknownItem(f"No map named '{name}'. Available: {sorted(self.maps)}")
        return self.maps[name]

    def proof(self, name: str) -> ProofRecord:
        if name not in self.proofs:
            raise UnknownItem(f"No proof named '{name}'. Available: {sorted(self.proofs)}")
        return self.proofs[name]

    def goal(self, name: str) -> GoalRecord:
        if name not in self.goals:
            raise UnknownItem(f"No goal named '{name}'. Available: {sorted(self.goals)}")
        return self.goals[name]

    def derivation(self, name: str) -> Derivation:
        """The checked derivation of a proof; raises the error it failed with."""
        record = self.proof(name)
        if record.error is not None:
            raise record.error
        return record.derivation

    def proofs_in(self, sketch_name: str) -> dict[str, Derivation]:
        return {
            name: record.derivation
            for name, record in self.proofs.items()
            if record.sketch == sketch_name and record.ok
        }


class _Loader:
    def __init__(self, workspace: Workspace, config: Config | None):
        self.ws = workspace
        self.config = config
        self.current_sketch: str | None = None
        self._stack: list[Path] = []

    def problem(self, item: str, code: str, message: str, span: Span, path: str = "") -> None:
        self.ws.problems.append(Problem(item, code, message, span, path))

    def claim(self, name: str, span: Span) -> bool:
        if name in self.ws.spans:
            self.problem(name, "DuplicateItem", f"'{name}' is already declared", span)
            return False
        self.ws.spans[name] = span
        return True

    def load_text(self, text: str, path: Path | None) -> None:
        items = parse_items(text)
        if path is not None:
            self._stack.append(path.resolve())
        try:
            for item in items:
                try:
                    self.load_item(item)
                except DoctrinaError as e:
                    name = getattr(item, "name", type(item).__name__)
                    self.problem(name, e.code, e.message, item.span, e.path or "")
        finally:
            if path is not None:
                self._stack.pop()

    def load_item(self, item) -> None:
        handler = {
            UseDoctrine: self._use_doctrine,
            UseBase: self._use_base,
            UseFile: self._use_file,
            BaseDecl: self._base,
            DoctrineDecl: self._doctrine,
            RestrictDecl: self._restrict,
            SketchDecl: self._sketch,
            MapDecl: self._map,
            GoalDecl: self._goal,
            ProofDecl: self._proof,
            RejectDecl: self._reject,
            ExpectEq: self._expectation,
            ExpectNormal: self._expectation,
            SetDirective: self._directive,
        }[type(item)]
        handler(item)

    # includes

    def _use_doctrine(self, item: UseDoctrine) -> None:
        self.ws.doctrines.setdefault(item.name, builtin_doctrine(item.name))

    def _use_base(self, item: UseBase) -> None:
        self.ws.bases.setdefault(item.name, builtin_base(item.name))

    def _use_file(self, item: UseFile) -> None:
        here = self._stack[-1].parent if self._stack else Path.cwd()
        target = (here / item.path).resolve()
        if target in self._stack:
            raise ValidationError(f"Include cycle through '{item.path}'")
        if not target.exists():
            raise UnknownItem(f"Included file '{item.path}' not found")
        logger.info(f"Including {target}")
        self.load_text(target.read_text(), target)

    # declarations

    def _base(self, item: BaseDecl) -> None:
        if not self.claim(item.name, item.span):
            return
        sorts = []
        for name, linearity in item.sorts:
            if linearity not in ("lin", "nonlin"):
                self.problem(item.name, "UnknownSort", f"Linearity must be lin or nonlin, not '{linearity}'", item.span)
                return
            sorts.append(BaseSort(name, Linearity(linearity)))
        clauses = []
        for kind, names, bounds in item.clauses:
            if kind == "exact":
                positives = Exact(tuple(names))
            elif kind == "one_of":
                positives = ExactlyOneOf(frozenset(names))
            else:
                positives = AnyOver(frozenset(names))
            try:
                negatives = tuple(sorted((name, Bound(value)) for name, value in bounds))
            except ValueError as e:
                self.problem(item.name, "InvalidBase", str(e), item.span)
                return
            clauses.append(InhabitClause(positives, negatives))
        base = BaseTheory(item.name, tuple(sorts), tuple(clauses))
        problems = base.validate()
        for problem in problems:
            self.problem(item.name, "InvalidBase", problem, item.span)
        if not problems:
            settings = self.config.closure_settings() if self.config else {}
            for failure in check_closure(base, **settings):
                self.problem(item.name, "ClosureFailure", failure, item.span)
        self.ws.bases[item.name] = base

    def _doctrine(self, item: DoctrineDecl) -> None:
        if not self.claim(item.name, item.span):
            return
        base = self.ws.base(item.base)
        cones = []
        for decl in item.cones:
            if decl.vertex is None:
                self.problem(item.name, "InvalidCone", f"Cone '{decl.name}' has no vertex", decl.span)
                return
            cones.append(
                DiscreteCone(
                    name=decl.name,
                    reduct=tuple(ConeObject(i, s) for i, s in decl.objects),
                    vertex_sort=decl.vertex[0],
                    vertex_sign=decl.vertex[1],
                    projections=tuple(Projection(pid, tuple(e)) for pid, e in decl.projections),
                )
            )
        sorting = None
        if item.sorted:
            sorting = Sorting(
                primitive=tuple(item.primitive),
                derived=tuple(sort for sort, _ in item.derived),
                sorting_cones=tuple(item.derived),
            )
        doctrine = Doctrine(item.name, base, tuple(cones), sorting)
        for v in validate_doctrine(doctrine).violations:
            self.problem(item.name, v.code, v.message, item.span, v.path)
        self.ws.doctrines[item.name] = doctrine

    def _restrict(self, item: RestrictDecl) -> None:
        if not self.claim(item.name, item.span):
            return
        self.ws.doctrines[item.name] = self.ws.doctrine(item.parent).restrict(item.name, item.cones)

    def _resolve_sort(self, base: BaseTheory, name: str) -> str:
        if name in ("lin", "nonlin") and not base.has_sort(name):
            candidates = base.sorts_of(Linearity(name))
            if len(candidates) == 1:
                return candidates[0].name
            raise ValidationError(
                f"'{name}' is ambiguous in base '{base.name}': {[s.name for s in candidates]}"
            )
        return name

    def _sketch(self, item: SketchDecl) -> None:
        if not self.claim(item.name, item.span):
            return
        doctrine = self.ws.doctrine(item.doctrine)
        objects = tuple(
            SketchObject(name, self._resolve_sort(doctrine.base, sort)) for name, sort in item.objects
        )
        generators = tuple(Generator(name, tuple(sig)) for name, sig in item.generators)
        instances = []
        for cone_name, pairs in item.extremal:
            reduct_ids = (
                {o.id for o in doctrine.cone(cone_name).reduct}
                if doctrine.has_cone(cone_name)
                else {key for key, _ in pairs if key != "vertex"}
            )
            vertex = next((value for key, value in pairs if key == "vertex"), "")
            instances.append(
                ConeInstance(
                    cone=cone_name,
                    assignment=tuple((k, v) for k, v in pairs if k in reduct_ids),
                    vertex=vertex,
                    witnesses=tuple(
                        (k, v) for k, v in pairs if k != "vertex" and k not in reduct_ids
                    ),
                )
            )
        sketch = Sketch(item.name, doctrine, objects, generators, (), tuple(instances))
        if item.equations:
            elaborator = Elaborator(sketch)
            equations = tuple(
                Equation(
                    name,
                    elaborator.elaborate(lhs, f"{name}.lhs"),
                    elaborator.elaborate(rhs, f"{name}.rhs"),
                )
                for name, lhs, rhs in item.equations
            )
            sketch = Sketch(item.name, doctrine, objects, generators, equations, tuple(instances))
        for v in validate_sketch(sketch).violations:
            self.problem(item.name, v.code, v.message, item.span, v.path)
        self.ws.sketches[item.name] = sketch
        self.current_sketch = item.name
        logger.info(
            f"Loaded sketch '{item.name}' over {doctrine.name}: {len(objects)} objects, "
            f"{len(generators)} generators"
        )

    def _map(self, item: MapDecl) -> None:
        if not self.claim(item.name, item.span):
            return
        source = self.ws.doctrine(item.source)
        target = self.ws.doctrine(item.target)
        sorts = {s.name: s.name for s in source.base.sorts if target.base.has_sort(s.name)}
        for a, b in item.sorts:
            sorts[a] = self._resolve_sort(target.base, b)
        cones = []
        for source_cone, target_cone, pairs in item.cones:
            reduct = (
                {o.id for o in source.cone(source_cone).reduct}
                if source.has_cone(source_cone)
                else set()
            )
            cones.append(
                ConeCorrespondence(
                    source=source_cone,
                    target=target_cone,
                    objects=tuple((a, b) for a, b in pairs if a in reduct),
                    projections=tuple((a, b) for a, b in pairs if a not in reduct),
                )
            )
        m = DoctrineMap(item.name, source, target, tuple(sorted(sorts.items())), tuple(cones))
        settings = self.config.closure_settings() if self.config else {}
        result = validate_map(m, **settings)
        for v in result.report.violations:
            self.problem(item.name, v.code, v.message, item.span, v.path)
        self.ws.maps[item.name] = m

    # goals and proofs

    def _sketch_for(self, name: str | None) -> str:
        chosen = name or self.current_sketch
        if chosen is None:
            raise UnknownItem("No sketch declared yet; write 'in SKETCH'")
        self.ws.sketch(chosen)
        return chosen

    def _goal(self, item: GoalDecl) -> None:
        if not self.claim(item.name, item.span):
            return
        sketch_name = self._sketch_for(item.sketch)
        record = GoalRecord(item.name, sketch_name, span=item.span)
        try:
            record.sequent = elaborate_sequent(self.ws.checker(sketch_name), item.sequent)
        except DoctrinaError as e:
            e.span = e.span or item.span
            record.error = e
        self.ws.goals[item.name] = record

    def _proof(self, item: ProofDecl) -> None:
        if not self.claim(item.name, item.span):
            return
        sketch_name = self._sketch_for(item.sketch)
        record = ProofRecord(item.name, sketch_name, item.term, span=item.span)
        checker = self.ws.checker(sketch_name)
        sketch = self.ws.sketch(sketch_name)
        try:
            d = Elaborator(sketch, self.ws.proofs_in(sketch_name), checker).elaborate(item.term)
            conclusion = checker.check(d)
            if item.sequent is not None:
                declared = elaborate_sequent(checker, item.sequent)
                if not same_up_to_zones(checker, declared, conclusion):
                    raise ConclusionMismatch(
                        f"Proof concludes {conclusion}, declared {declared}", path="root"
                    )
            record.derivation = d
            record.conclusion = conclusion
        except DoctrinaError as e:
            e.span = e.span or item.span
            record.error = e
        self.ws.proofs[item.name] = record

    def _reject(self, item: RejectDecl) -> None:
        if not self.claim(item.name, item.span):
            return
        sketch_name = self._sketch_for(item.sketch)
        record = RejectRecord(item.name, sketch_name, item.code, span=item.span)
        checker = self.ws.checker(sketch_name)
        try:
            d = Elaborator(self.ws.sketch(sketch_name), self.ws.proofs_in(sketch_name), checker).elaborate(item.term)
            checker.check(d)
        except DoctrinaError as e:
            record.actual = e.code
        self.ws.rejects.append(record)

    def _expectation(self, item) -> None:
        self.ws.expectations.append(item)

    def _directive(self, item: SetDirective) -> None:
        if item.name not in DIRECTIVES:
            self.problem(
                item.name, "UnknownDirective", f"Known directives: {sorted(DIRECTIVES)}", item.span
            )
            return
        self.ws.directives[item.name] = item.value


def parse_workspace(
    text: str, path: str | Path | None = None, config: Config | None = None
) -> Workspace:
    """
    Parse and load workspace text.

    Args:
        text: Workspace source
        path: File the text came from, used to resolve includes
        config: Configuration supplying closure-check settings

    Returns:
        Workspace with every item loaded and every problem recorded

    Raises:
        ParseError: on the first syntax error, with line and column
    """
    path = Path(path) if path is not None else None
    workspace = Workspace(path=path)
    _Loader(workspace, config).load_text(text, path)
    logger.info(
        f"Workspace {path or '<text>'}: {len(workspace.sketches)} sketches, "
        f"{len(workspace.proofs)} proofs, {len(workspace.problems)} problems"
    )
    return workspace


def load_workspace(path: str | Path, config: Config | None = None) -> Workspace:
    path = Path(path)
    return parse_workspace(path.read_text(), path, config)
