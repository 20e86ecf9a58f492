from __future__ import annotations

"""
Workspace grammar, surface items and the proof-term printer.

Workspace files hold bases, doctrines, sketches, doctrine maps, goals,
proofs, expected rejections and expectations. Parsing produces surface items
with their source position; name resolution and elaboration happen in
``doctrina.workspace``.
"""

import logging
from dataclasses import dataclass

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedEOF, UnexpectedInput, VisitError

from doctrina.base import Sign
from doctrina.calculus import (
    CutRule,
    Derelict,
    Derivation,
    Entry,
    Factor,
    GenRule,
    IdRule,
    Intro,
    InvRule,
    NonInvRule,
    Promote,
    Ref,
    Reindex,
    Store,
    StructRule,
    SurfaceSequent,
)
from doctrina.errors import ParseError
from doctrina.types import Comp, Gen, TypeExpr

logger = logging.getLogger(__name__)

GRAMMAR = r"""
start: _item*

_item: use_doctrine | use_base | use_file | base_item | doctrine_item
     | restrict_item | sketch_item | map_item | goal_item | proof_item
     | reject_item | expect_eq | expect_normal | set_item

use_doctrine: "use" "doctrine" NAME ";"
use_base: "use" "base" NAME ";"
use_file: "use" ESCAPED_STRING ";"

base_item: "base" NAME "{" (sort_decl | hom_decl)* "}"
sort_decl: "sort" NAME ":" NAME ";"
hom_decl: "hom" "{" "pos" "=" positives ";" "neg" "=" "{" bound_list "}" ";"? "}"
positives: POSITIVE_KIND "(" name_list ")"
POSITIVE_KIND: "exact" | "one_of" | "any_of"
bound_list: (bound_pair ("," bound_pair)*)?
bound_pair: NAME ":" NAME

doctrine_item: "doctrine" NAME "on" NAME "{" (cone_decl | sorting_decl)* "}"
cone_decl: "cone" NAME "{" (cone_obj | cone_vertex | cone_proj)* "}"
cone_obj: "obj" NAME ":" NAME ";"?
cone_vertex: "vertex" NAME SIGN ";"?
cone_proj: "proj" NAME "(" signed_names ")" ";"?
sorting_decl: "sorting" "{" (sorting_primitive | sorting_derived)* "}"
sorting_primitive: "primitive" NAME ("," NAME)* ";"?
sorting_derived: "derived" NAME "via" NAME ";"?
restrict_item: "doctrine" NAME "restricts" NAME "{" name_list "}"

sketch_item: "sketch" NAME "over" NAME "{" (obj_decl | gen_decl | extremal_decl | equation_decl)* "}"
obj_decl: "obj" NAME ("," NAME)* ":" NAME ";"?
gen_decl: "gen" NAME ":" "(" signed_names ")" ";"?
extremal_decl: "extremal" NAME "{" (assign ";"?)* "}"
assign: NAME ":=" NAME
equation_decl: "equation" NAME ":" term "=" term ";"?

map_item: "map" NAME ":" NAME "->" NAME "{" (sort_map | cone_map)* "}"
sort_map: "sort" NAME "->" NAME ";"?
cone_map: "cone" NAME "->" NAME ("{" map_pairs "}")? ";"?
map_pairs: (map_pair (_SEP map_pair)* _SEP?)?
map_pair: NAME "->" NAME
_SEP: "," | ";"

goal_item: "goal" NAME ("in" NAME)? ":" sequent ";"
proof_item: "proof" NAME ("in" NAME)? (":" sequent)? "=" term ";"
reject_item: "reject" NAME ("in" NAME)? "=" term "expect" NAME ";"
expect_eq: "expect" "eq" NAME "," NAME "=>" VERDICT ";"
expect_normal: "expect" "normal" NAME "=>" term ";"
set_item: "set" NAME "=" INT ";"
VERDICT: "equal" | "not-equal" | "unknown"

sequent: _TURNSTILE entry_zone                                   -> seq_entries
       | type_zone _TURNSTILE type_zone                          -> seq_plain
       | type_zone "|" type_zone _TURNSTILE type_zone            -> seq_split
       | type_zone "|" type_zone _TURNSTILE type_zone "|" type_zone -> seq_split
entry_zone: _EMPTY | entry ("," entry)*
type_zone: _EMPTY | type ("," type)*
_TURNSTILE: "|-" | "⊢"
_EMPTY: "." | "·"

type: NAME                          -> type_gen
    | NAME "[" type_list "]"        -> type_comp
type_list: (type ("," type)*)?
entry: type SIGN
entry_list: (entry ("," entry)*)?
signed_names: (signed_name ("," signed_name)*)?
signed_name: NAME SIGN
name_list: (NAME ("," NAME)*)?
int_list: (INT ("," INT)*)?

?term: "id" type                                                -> t_id
     | "gen" NAME                                               -> t_gen
     | "ref" NAME                                               -> t_ref
     | "cut" "[" INT "," INT "]" "(" term ";" term ")"          -> t_cut
     | "map" "{" int_list "}" "(" term ")"                      -> t_map
     | "map" "{" int_list "|" entry_list "}" "(" term ")"       -> t_map_to
     | "proj" NAME "[" type_list "]" "." NAME                   -> t_proj
     | "factor" NAME "[" type_list "]" "{" premise_list "}"     -> t_factor
     | "factor" NAME "[" type_list "]" "|" "sides" "(" entry_list ")" "{" premise_list "}" -> t_factor_sides
     | "intro" NAME "[" type_list "]" "." NAME "(" term_list ")" -> t_intro
     | "derelict" "[" INT "]" "(" term ")"                      -> t_derelict
     | "promote" "(" term ")"                                   -> t_promote
     | "store" "[" INT "]" "(" term ")"                         -> t_store
     | "(" term ")"
term_list: (term ("," term)*)?
premise_list: (premise ("," premise)*)?
premise: NAME "=>" term

SIGN: "+" | "-"
NAME: /[A-Za-z_][A-Za-z0-9_'@]*/
COMMENT: /\/\/[^\n]*/

%import common.INT
%import common.ESCAPED_STRING
%import common.WS
%ignore WS
%ignore COMMENT
"""

_parser = Lark(
    GRAMMAR,
    parser="earley",
    start=["start", "term", "sequent", "type"],
    propagate_positions=True,
    maybe_placeholders=False,
)


# Surface items


@dataclass(frozen=True)
class UseDoctrine:
    name: str
    span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class UseBase:
    name: str
    span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class UseFile:
    path: str
    span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class BaseDecl:
    name: str
    sorts: tuple[tuple[str, str], ...]
    clauses: tuple[tuple[str, tuple[str, ...], tuple[tuple[str, str], ...]], ...]
    span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class ConeDecl:
    name: str
    objects: tuple[tuple[str, str], ...]
    vertex: tuple[str, Sign] | None
    projections: tuple[tuple[str, tuple[tuple[str, Sign], ...]], ...]
    span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class DoctrineDecl:
    name: str
    base: str
    cones: tuple[ConeDecl, ...]
    primitive: tuple[str, ...] = ()
    derived: tuple[tuple[str, str], ...] = ()
    sorted: bool = False
    span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class RestrictDecl:
    name: str
    parent: str
    cones: tuple[str, ...]
    span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class SketchDecl:
    name: str
    doctrine: str
    objects: tuple[tuple[str, str], ...]
    generators: tuple[tuple[str, tuple[tuple[str, Sign], ...]], ...]
    extremal: tuple[tuple[str, tuple[tuple[str, str], ...]], ...]
    equations: tuple[tuple[str, Derivation, Derivation], ...]
    span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class MapDecl:
    name: str
    source: str
    target: str
    sorts: tuple[tuple[str, str], ...]
    cones: tuple[tuple[str, str, tuple[tuple[str, str], ...]], ...]
    span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class GoalDecl:
    name: str
    sketch: str | None
    sequent: SurfaceSequent
    span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class ProofDecl:
    name: str
    sketch: str | None
    sequent: SurfaceSequent | None
    term: Derivation
    span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class RejectDecl:
    name: str
    sketch: str | None
    term: Derivation
    code: str
    span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class ExpectEq:
    lhs: str
    rhs: str
    verdict: str
    span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class ExpectNormal:
    proof: str
    term: Derivation
    span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class SetDirective:
    name: str
    value: int
    span: tuple[int, int] = (0, 0)


def _span(meta) -> tuple[int, int]:
    return (getattr(meta, "line", 0), getattr(meta, "column", 0))


def _names(children) -> list[str]:
    return [str(c) for c in children if isinstance(c, Token) and c.type == "NAME"]


class _Builder(Transformer):
    """Turns parse trees into surface items and terms."""

    # shared pieces

    def type_gen(self, children):
        return Gen(str(children[0]))

    def type_comp(self, children):
        return Comp(str(children[0]), tuple(children[1]))

    def type_list(self, children):
        return tuple(children)

    def entry(self, children):
        return Entry(children[0], Sign(str(children[1])))

    def entry_list(self, children):
        return tuple(children)

    def entry_zone(self, children):
        return tuple(children)

    def type_zone(self, children):
        return tuple(children)

    def signed_name(self, children):
        return (str(children[0]), Sign(str(children[1])))

    def signed_names(self, children):
        return tuple(children)

    def name_list(self, children):
        return tuple(str(c) for c in children)

    def int_list(self, children):
        return tuple(int(c) for c in children)

    def term_list(self, children):
        return tuple(children)

    def premise(self, children):
        return (str(children[0]), children[1])

    def premise_list(self, children):
        return tuple(children)

    # sequents

    def seq_entries(self, children):
        return SurfaceSequent("entries", (children[0],))

    def seq_plain(self, children):
        return SurfaceSequent("plain", (children[0], children[1]))

    def seq_split(self, children):
        return SurfaceSequent("split", tuple(children))

    # terms

    def t_id(self, children):
        return IdRule(children[0])

    def t_gen(self, children):
        return GenRule(str(children[0]))

    def t_ref(self, children):
        return Ref(str(children[0]))

    def t_cut(self, children):
        i, j, left, right = children
        return CutRule(left, int(i), right, int(j))

    def t_map(self, children):
        return Reindex(children[0], children[1])

    def t_map_to(self, children):
        return Reindex(children[0], children[2], children[1])

    def t_proj(self, children):
        return NonInvRule(str(children[0]), children[1], str(children[2]))

    def t_factor(self, children):
        return Factor(str(children[0]), children[1], None, children[2])

    def t_factor_sides(self, children):
        return Factor(str(children[0]), children[1], children[2], children[3])

    def t_intro(self, children):
        return Intro(str(children[0]), children[1], str(children[2]), children[3])

    def t_derelict(self, children):
        return Derelict(int(children[0]), children[1])

    def t_promote(self, children):
        return Promote(children[0])

    def t_store(self, children):
        return Store(int(children[0]), children[1])

    # bases

    def sort_decl(self, children):
        return ("sort", str(children[0]), str(children[1]))

    def positives(self, children):
        return (str(children[0]), children[1])

    def bound_pair(self, children):
        return (str(children[0]), str(children[1]))

    def bound_list(self, children):
        return tuple(children)

    def hom_decl(self, children):
        kind, names = children[0]
        return ("hom", kind, names, children[1])

    @v_args(meta=True)
    def base_item(self, meta, children):
        name = str(children[0])
        sorts = tuple((d[1], d[2]) for d in children[1:] if d[0] == "sort")
        clauses = tuple((d[1], d[2], d[3]) for d in children[1:] if d[0] == "hom")
        return BaseDecl(name, sorts, clauses, _span(meta))

    # doctrines

    def cone_obj(self, children):
        return ("obj", str(children[0]), str(children[1]))

    def cone_vertex(self, children):
        return ("vertex", str(children[0]), Sign(str(children[1])))

    def cone_proj(self, children):
        return ("proj", str(children[0]), children[1])

    @v_args(meta=True)
    def cone_decl(self, meta, children):
        parts = children[1:]
        vertices = [(p[1], p[2]) for p in parts if p[0] == "vertex"]
        return ConeDecl(
            name=str(children[0]),
            objects=tuple((p[1], p[2]) for p in parts if p[0] == "obj"),
            vertex=vertices[-1] if vertices else None,
            projections=tuple((p[1], p[2]) for p in parts if p[0] == "proj"),
            span=_span(meta),
        )

    def sorting_primitive(self, children):
        return ("primitive", tuple(_names(children)))

    def sorting_derived(self, children):
        return ("derived", (str(children[0]), str(children[1])))

    def sorting_decl(self, children):
        return ("sorting", tuple(children))

    @v_args(meta=True)
    def doctrine_item(self, meta, children):
        name, base = str(children[0]), str(children[1])
        cones = tuple(c for c in children[2:] if isinstance(c, ConeDecl))
        primitive: list[str] = []
        derived: list[tuple[str, str]] = []
        has_sorting = False
        for part in children[2:]:
            if isinstance(part, tuple) and part[0] == "sorting":
                has_sorting = True
                for kind, value in part[1]:
                    if kind == "primitive":
                        primitive.extend(value)
                    else:
                        derived.append(value)
        return DoctrineDecl(
            name, base, cones, tuple(primitive), tuple(derived), has_sorting, _span(meta)
        )

    @v_args(meta=True)
    def restrict_item(self, meta, children):
        return RestrictDecl(str(children[0]), str(children[1]), children[2], _span(meta))

    # sketches

    def obj_decl(self, children):
        names = _names(children)
        return ("obj", tuple((n, names[-1]) for n in names[:-1]))

    def gen_decl(self, children):
        return ("gen", (str(children[0]), children[1]))

    def assign(self, children):
        return (str(children[0]), str(children[1]))

    def extremal_decl(self, children):
        return ("extremal", (str(children[0]), tuple(children[1:])))

    def equation_decl(self, children):
        return ("equation", (str(children[0]), children[1], children[2]))

    @v_args(meta=True)
    def sketch_item(self, meta, children):
        parts = children[2:]
        objects = tuple(pair for kind, value in parts if kind == "obj" for pair in value)
        return SketchDecl(
            name=str(children[0]),
            doctrine=str(children[1]),
            objects=objects,
            generators=tuple(v for k, v in parts if k == "gen"),
            extremal=tuple(v for k, v in parts if k == "extremal"),
            equations=tuple(v for k, v in parts if k == "equation"),
            span=_span(meta),
        )

    # maps

    def sort_map(self, children):
        return ("sort", (str(children[0]), str(children[1])))

    def map_pair(self, children):
        return (str(children[0]), str(children[1]))

    def map_pairs(self, children):
        return tuple(children)

    def cone_map(self, children):
        pairs = children[2] if len(children) > 2 else ()
        return ("cone", (str(children[0]), str(children[1]), pairs))

    @v_args(meta=True)
    def map_item(self, meta, children):
        parts = children[3:]
        return MapDecl(
            name=str(children[0]),
            source=str(children[1]),
            target=str(children[2]),
            sorts=tuple(v for k, v in parts if k == "sort"),
            cones=tuple(v for k, v in parts if k == "cone"),
            span=_span(meta),
        )

    # top-level items

    @v_args(meta=True)
    def use_doctrine(self, meta, children):
        return UseDoctrine(str(children[0]), _span(meta))

    @v_args(meta=True)
    def use_base(self, meta, children):
        return UseBase(str(children[0]), _span(meta))

    @v_args(meta=True)
    def use_file(self, meta, children):
        return UseFile(str(children[0])[1:-1], _span(meta))

    @v_args(meta=True)
    def goal_item(self, meta, children):
        names = _names(children)
        sketch = names[1] if len(names) > 1 else None
        return GoalDecl(names[0], sketch, children[-1], _span(meta))

    @v_args(meta=True)
    def proof_item(self, meta, children):
        names = _names(children)
        sketch = names[1] if len(names) > 1 else None
        sequent = next((c for c in children if isinstance(c, SurfaceSequent)), None)
        return ProofDecl(names[0], sketch, sequent, children[-1], _span(meta))

    @v_args(meta=True)
    def reject_item(self, meta, children):
        term = next(c for c in children if isinstance(c, Derivation))
        names = _names(children)
        sketch = names[1] if len(names) > 2 else None
        return RejectDecl(names[0], sketch, term, names[-1], _span(meta))

    @v_args(meta=True)
    def expect_eq(self, meta, children):
        return ExpectEq(str(children[0]), str(children[1]), str(children[2]), _span(meta))

    @v_args(meta=True)
    def expect_normal(self, meta, children):
        return ExpectNormal(str(children[0]), children[1], _span(meta))

    @v_args(meta=True)
    def set_item(self, meta, children):
        return SetDirective(str(children[0]), int(children[1]), _span(meta))

    def start(self, children):
        return list(children)


def _end_of(text: str) -> tuple[int, int]:
    lines = text.split("\n")
    return len(lines), len(lines[-1]) + 1


def _parse(text: str, start: str):
    try:
        tree = _parser.parse(text, start=start)
    except UnexpectedEOF as e:
        line, column = _end_of(text)
        raise ParseError(f"Unexpected end of input; expected one of {sorted(e.expected)}", line, column)
    except UnexpectedInput as e:
        line, column = e.line, e.column
        if line is None or line < 1:
            line, column = _end_of(text)
        context = e.get_context(text).strip() if line >= 1 else ""
        raise ParseError(f"Unexpected input near: {context}", line, column)
    try:
        return _Builder().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, ParseError):
            raise e.orig_exc
        meta = getattr(e.obj, "meta", None)
        raise ParseError(str(e.orig_exc), *_span(meta))


def parse_items(text: str) -> list:
    """
    Parse workspace text into surface items.

    Raises:
        ParseError: with line and column of the first syntax error
    """
    return _parse(text, "start")


def parse_term(text: str) -> Derivation:
    """Parse a single (surface) proof term."""
    return _parse(text, "term")


def parse_sequent(text: str) -> SurfaceSequent:
    return _parse(text, "sequent")


def parse_type(text: str) -> TypeExpr:
    return _parse(text, "type")


# Printing


def format_entries(entries) -> str:
    return ", ".join(str(e) for e in entries)


def _args(args) -> str:
    return ", ".join(str(a) for a in args)


def _is_surjective(sigma) -> bool:
    return all(count > 0 for count in sigma.preimage_counts())


def format_term(d: Derivation) -> str:
    """Canonical one-line text of a term; parsing and elaborating it gives it back."""
    if isinstance(d, IdRule):
        return f"id {d.type}"
    if isinstance(d, GenRule):
        return f"gen {d.name}"
    if isinstance(d, Ref):
        return f"ref {d.name}"
    if isinstance(d, CutRule):
        return f"cut[{d.i},{d.j}]({format_term(d.left)}; {format_term(d.right)})"
    if isinstance(d, StructRule):
        index = ", ".join(str(v) for v in d.sigma.index)
        if _is_surjective(d.sigma):
            return f"map{{{index}}}({format_term(d.premise)})"
        return f"map{{{index} | {format_entries(d.target)}}}({format_term(d.premise)})"
    if isinstance(d, Reindex):
        index = ", ".join(str(v) for v in d.index)
        if d.target is None:
            return f"map{{{index}}}({format_term(d.premise)})"
        return f"map{{{index} | {format_entries(d.target)}}}({format_term(d.premise)})"
    if isinstance(d, NonInvRule):
        return f"proj {d.cone}[{_args(d.args)}].{d.projection}"
    if isinstance(d, (InvRule, Factor)):
        premises = ", ".join(f"{pid} => {format_term(p)}" for pid, p in d.premises)
        body = f"{{ {premises} }}" if premises else "{ }"
        if d.sides is None:
            return f"factor {d.cone}[{_args(d.args)}] {body}"
        return f"factor {d.cone}[{_args(d.args)}] | sides ({format_entries(d.sides)}) {body}"
    if isinstance(d, Intro):
        premises = ", ".join(format_term(p) for p in d.premises)
        return f"intro {d.cone}[{_args(d.args)}].{d.projection}({premises})"
    if isinstance(d, Derelict):
        return f"derelict[{d.index}]({format_term(d.premise)})"
    if isinstance(d, Promote):
        return f"promote({format_term(d.premise)})"
    if isinstance(d, Store):
        return f"store[{d.index}]({format_term(d.premise)})"
    raise TypeError(f"Cannot format {type(d).__name__}")
