"""Tests for the workspace grammar and the term printer."""

import pytest

from doctrina.base import Sign
from doctrina.calculus import Entry, IdRule, Reindex
from doctrina.errors import ParseError
from doctrina.syntax import (
    BaseDecl,
    DoctrineDecl,
    ProofDecl,
    RejectDecl,
    SketchDecl,
    UseDoctrine,
    format_term,
    parse_items,
    parse_sequent,
    parse_term,
    parse_type,
)
from doctrina.types import Comp, Gen

WORKSPACE = """\
use doctrine MILL;

sketch Lifted over DILLK {
  obj A : lin;
  obj X : nonlin;
  gen e : (A+, X-);
  extremal U { a := A; vertex := X; p0 := e }
}

proof p in Lifted : A | . |- A = derelict[0](id A);
reject r = map{0, 0, 1}(proj Tensor[A, A].p0) expect BadStructuralMap;
"""


class TestParseItems:
    """Tests for parse_items."""

    def test_items(self):
        """Items come back in order with their kinds."""
        items = parse_items(WORKSPACE)
        assert [type(i) for i in items] == [UseDoctrine, SketchDecl, ProofDecl, RejectDecl]

    def test_sketch(self):
        """Sketch bodies collect objects, generators and instances."""
        sketch = parse_items(WORKSPACE)[1]
        assert sketch.name == "Lifted"
        assert sketch.doctrine == "DILLK"
        assert sketch.objects == (("A", "lin"), ("X", "nonlin"))
        assert sketch.generators == (("e", (("A", Sign.POS), ("X", Sign.NEG))),)
        assert sketch.extremal == (("U", (("a", "A"), ("vertex", "X"), ("p0", "e"))),)

    def test_proof_and_reject(self):
        """Proofs keep their sketch and declared sequent; rejections their code."""
        _, _, proof, reject = parse_items(WORKSPACE)
        assert proof.sketch == "Lifted"
        assert proof.sequent.form == "split"
        assert proof.span[0] == 10
        assert reject.sketch is None
        assert reject.code == "BadStructuralMap"

    def test_base_and_doctrine(self):
        """Bases and doctrines parse into declarations."""
        text = """
        base mine {
          sort a : lin;
          hom { pos = one_of(a); neg = {a: many}; }
        }
        doctrine D on mine {
          cone T { obj a : a; obj b : a; vertex a+; proj p0 (a-, b-); }
        }
        """
        base, doctrine = parse_items(text)
        assert isinstance(base, BaseDecl)
        assert base.sorts == (("a", "lin"),)
        assert base.clauses == (("one_of", ("a",), (("a", "many"),)),)
        assert isinstance(doctrine, DoctrineDecl)
        assert doctrine.cones[0].vertex == ("a", Sign.POS)
        assert doctrine.cones[0].projections == (("p0", (("a", Sign.NEG), ("b", Sign.NEG))),)
        assert not doctrine.sorted

    def test_parse_error_position(self):
        """Syntax errors report their line."""
        text = "use doctrine MILL;\nsketch S over MILL { obj A : lin; }\nproof p = id ;\n"
        with pytest.raises(ParseError) as exc:
            parse_items(text)
        assert exc.value.line == 3
        assert exc.value.span[0] == 3

    def test_comments(self):
        """Line comments are ignored."""
        assert parse_items("// nothing here\nuse doctrine IL; // trailing\n") == [
            UseDoctrine("IL", (2, 1))
        ]


class TestTerms:
    """Tests for parse_term and format_term."""

    @pytest.mark.parametrize(
        "text",
        [
            "id A",
            "gen f",
            "ref p",
            "cut[1,0](id A; id A)",
            "map{1, 0}(id A)",
            "map{0, 2 | X-, Y-, X+}(id X)",
            "proj Tensor[A, B].p0",
            "factor Tensor[A, B] { p0 => proj Tensor[B, A].p0 }",
            "factor Top[] | sides (A-, B-) { }",
            "intro Tensor[A, B].p0(id A, id B)",
            "derelict[0](id A)",
            "promote(proj U[A].p0)",
            "store[1](gen f)",
        ],
    )
    def test_canonical_text(self, text):
        """Canonical term text survives parsing and printing."""
        assert format_term(parse_term(text)) == text

    def test_parentheses(self):
        """Parenthesized terms parse as their contents."""
        assert parse_term("(id A)") == IdRule(Gen("A"))

    def test_map_with_target(self):
        """An explicit conclusion is kept on the reindexing."""
        term = parse_term("map{0 | A-, A+}(id A)")
        assert isinstance(term, Reindex)
        assert term.target == (Entry(Gen("A"), Sign.NEG), Entry(Gen("A"), Sign.POS))


class TestSequentsAndTypes:
    """Tests for parse_sequent and parse_type."""

    def test_entries_form(self):
        """Entries-only sequents start with the turnstile."""
        sequent = parse_sequent("|- A-, B+")
        assert sequent.form == "entries"
        assert sequent.zones == ((Entry(Gen("A"), Sign.NEG), Entry(Gen("B"), Sign.POS)),)

    def test_plain_form(self):
        """Plain sequents have two zones."""
        sequent = parse_sequent("A, B |- Tensor[A, B]")
        assert sequent.form == "plain"
        assert sequent.zones[1] == (Comp("Tensor", (Gen("A"), Gen("B"))),)

    def test_split_form(self):
        """Split sequents have three or four zones; a dot is an empty zone."""
        assert parse_sequent("A | . |- B").zones == ((Gen("A"),), (), (Gen("B"),))
        assert len(parse_sequent(". | . |- A | A").zones) == 4

    def test_unicode_turnstile(self):
        """The unicode turnstile is accepted."""
        assert parse_sequent("A ⊢ A").form == "plain"

    def test_type(self):
        """Nested types print back unchanged."""
        assert str(parse_type("Tensor[A, One[]]")) == "Tensor[A, One[]]"
