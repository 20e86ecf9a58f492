"""Tests for CLI module."""

import json

import pytest
from click.testing import CliRunner

from doctrina.cli import main

WORKSPACE = """\
sketch Free over MILL {
  obj A, B : lin;
}

goal swap : Tensor[A, B] |- Tensor[B, A];
goal apart : A |- B;

proof beta =
  cut[2,0](proj Tensor[A, B].p0; factor Tensor[A, B] { p0 => proj Tensor[B, A].p0 });
proof direct = map{1, 0, 2}(proj Tensor[B, A].p0);
"""


@pytest.fixture
def runner():
    """Create a CLI runner."""
    return CliRunner()


@pytest.fixture
def workspace_file(write_workspace):
    return write_workspace(WORKSPACE)


def run_json(runner, args):
    result = runner.invoke(main, args + ["--report", "json"])
    return result, json.loads(result.stdout)


class TestMainGroup:
    """Tests for the main CLI group."""

    def test_version(self, runner):
        """Test --version flag."""
        result = runner.invoke(main, ["--version"])
        assert result.exit_code == 0
        assert "0.1.0" in result.output

    def test_help(self, runner):
        """Test --help flag."""
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        assert "Doctrina" in result.output
        for command in ("validate", "check", "search", "normalize", "eq", "enumerate", "translate"):
            assert command in result.output

    def test_explicit_config(self, runner, temp_config_dir):
        """--config points at another configuration file."""
        config = str(temp_config_dir / "configuration.yaml")
        result = runner.invoke(main, ["--config", config, "builtins"])
        assert result.exit_code == 0


class TestBuiltins:
    """Tests for the builtins command."""

    def test_lists_catalog(self, runner):
        """Bases and doctrines are listed with their cones."""
        result, data = run_json(runner, ["builtins"])
        assert result.exit_code == 0
        names = [item["name"] for item in data["items"]]
        assert "base symmulti" in names
        assert "doctrine MILL over symmulti" in names


class TestCheck:
    """Tests for the check command."""

    def test_clean_workspace(self, runner, workspace_file):
        """Checking proofs that elaborate exits 0."""
        result, data = run_json(runner, ["check", str(workspace_file)])
        assert result.exit_code == 0
        assert data["status"] == "ok"
        assert [item["name"] for item in data["items"]] == ["beta", "direct"]

    def test_single_proof(self, runner, workspace_file):
        """--proof restricts the report to one proof."""
        result, data = run_json(runner, ["check", str(workspace_file), "--proof", "direct"])
        assert result.exit_code == 0
        assert [item["name"] for item in data["items"]] == ["direct"]

    def test_proof_error(self, runner, write_workspace):
        """A proof that fails its declared sequent exits 1 with the error code."""
        path = write_workspace(WORKSPACE + "proof wrong : A |- B = id A;\n")
        result, data = run_json(runner, ["check", str(path)])
        assert result.exit_code == 1
        assert data["status"] == "proof-error"
        (failure,) = [item for item in data["items"] if item["status"] != "ok"]
        assert failure["name"] == "wrong"
        assert failure["error_code"] == "ConclusionMismatch"
        assert failure["span"]["line"] == 11

    def test_parse_error(self, runner, write_workspace):
        """Syntax errors exit 2 with their position."""
        path = write_workspace("sketch S over MILL {\n  obj A : lin;\n  proof\n")
        result, data = run_json(runner, ["check", str(path)])
        assert result.exit_code == 2
        assert data["status"] == "parse-error"
        assert data["items"][0]["span"]["line"] == 3

    def test_validation_error(self, runner, write_workspace):
        """Load problems exit 1 as validation errors."""
        path = write_workspace(WORKSPACE + "set speed = 3;\n")
        result, data = run_json(runner, ["check", str(path)])
        assert result.exit_code == 1
        assert data["status"] == "validation-error"

    def test_expectations(self, runner, write_workspace):
        """Met expectations pass; a wrong verdict is a mismatch."""
        path = write_workspace(
            WORKSPACE + "expect eq beta, direct => equal;\nexpect eq beta, direct => not-equal;\n"
        )
        result, data = run_json(runner, ["check", str(path)])
        assert result.exit_code == 1
        codes = [item["error_code"] for item in data["items"]]
        assert codes.count("VerdictMismatch") == 1

    def test_text_report(self, runner, workspace_file):
        """The text report ends with the status line."""
        result = runner.invoke(main, ["check", str(workspace_file), "--report", "text"])
        assert result.exit_code == 0
        assert "ok    direct : . | A, B |- Tensor[B, A]" in result.output
        assert "status: ok (exit 0)" in result.output

    def test_entries_only(self, runner, workspace_file):
        """--entries-only prints signed entry lists."""
        result = runner.invoke(
            main, ["check", str(workspace_file), "--proof", "direct", "--entries-only"]
        )
        assert "|- A-, B-, Tensor[B, A]+" in result.output


class TestSearch:
    """Tests for the search command."""

    def test_found(self, runner, workspace_file):
        """A derivable goal exits 0 with the derivation."""
        result, data = run_json(runner, ["search", str(workspace_file), "--goal", "swap"])
        assert result.exit_code == 0
        assert data["items"][0]["detail"]

    def test_not_found(self, runner, workspace_file):
        """Search that finds nothing within budget is a resource limit."""
        result, data = run_json(
            runner, ["search", str(workspace_file), "--goal", "apart", "--depth", "2"]
        )
        assert result.exit_code == 4
        assert data["items"][0]["error_code"] == "ResourceLimit"

    def test_unknown_goal(self, runner, workspace_file):
        """Unknown goals are reported as errors."""
        result, data = run_json(runner, ["search", str(workspace_file), "--goal", "nope"])
        assert result.exit_code == 1
        assert data["items"][0]["error_code"] == "UnknownItem"


class TestNormalize:
    """Tests for the normalize command."""

    def test_normal_form(self, runner, workspace_file):
        """The tensor redex normalizes to an exchanged projection."""
        result, data = run_json(runner, ["normalize", str(workspace_file), "--proof", "beta"])
        assert result.exit_code == 0
        assert "proj Tensor[B, A].p0" in data["items"][0]["detail"]
        assert "cut" not in data["items"][0]["detail"]

    def test_fuel_directive(self, runner, write_workspace):
        """A workspace fuel directive of zero stops normalization."""
        path = write_workspace("set fuel = 0;\n" + WORKSPACE)
        result, data = run_json(runner, ["normalize", str(path), "--proof", "beta"])
        assert result.exit_code == 4
        assert data["items"][0]["error_code"] == "FuelExhausted"
        assert "last form cut[2,0]" in data["items"][0]["detail"]


class TestEq:
    """Tests for the eq command."""

    def test_equal(self, runner, workspace_file):
        """A redex equals its contractum."""
        result = runner.invoke(main, ["eq", str(workspace_file), "--lhs", "beta", "--rhs", "direct"])
        assert result.exit_code == 0

    def test_not_equal(self, runner, write_workspace):
        """Distinct generators of a free sketch are not equal."""
        text = """
        sketch Arrows over MILL { obj A : lin; gen f : (A-, A+); gen g : (A-, A+); }
        proof f = gen f;
        proof g = gen g;
        """
        result, data = run_json(runner, ["eq", str(write_workspace(text)), "--lhs", "f", "--rhs", "g"])
        assert result.exit_code == 1
        assert data["items"][0]["error_code"] == "NotEqual"


class TestEnumerate:
    """Tests for the enumerate command."""

    def test_types(self, runner, write_workspace):
        """Type strata counts are printed in the footer."""
        path = write_workspace("sketch One over MILL { obj A : lin; }\n")
        result = runner.invoke(main, ["enumerate", str(path), "--types", "--height", "1"])
        assert result.exit_code == 0
        assert "T0: 1" in result.output
        assert "T1: 4" in result.output

    def test_hom(self, runner, write_workspace):
        """Identity and two generators give three classes."""
        text = "sketch Arrows over MILL { obj A : lin; gen f : (A-, A+); gen g : (A-, A+); }\n"
        result, data = run_json(
            runner, ["enumerate", str(write_workspace(text)), "--hom", "A |- A", "--size", "1"]
        )
        assert result.exit_code == 0
        assert len(data["items"]) == 3

    def test_needs_one_mode(self, runner, workspace_file):
        """Exactly one of --types and --hom is required."""
        result = runner.invoke(main, ["enumerate", str(workspace_file)])
        assert result.exit_code == 1


class TestTranslate:
    """Tests for the translate command."""

    def test_translate_sketch(self, runner, write_workspace):
        """Every proof of a source sketch is translated."""
        text = """
        map ToDILL : MILL -> DILL {
          cone Tensor -> Tensor;
          cone One -> One;
          cone Lolli -> Lolli;
        }
        sketch M over MILL { obj A, B : lin; }
        proof m_swap = factor Tensor[A, B] { p0 => proj Tensor[B, A].p0 };
        """
        path = write_workspace(text)
        result, data = run_json(runner, ["translate", str(path), "--map", "ToDILL"])
        assert result.exit_code == 0
        assert [item["name"] for item in data["items"]] == ["m_swap"]

    def test_unknown_map(self, runner, workspace_file):
        """Unknown maps are reported."""
        result, data = run_json(runner, ["translate", str(workspace_file), "--map", "Nope"])
        assert result.exit_code == 1
        assert data["items"][0]["error_code"] == "UnknownItem"


class TestValidate:
    """Tests for the validate command."""

    def test_clean(self, runner, workspace_file):
        """A clean workspace lists its sketches."""
        result, data = run_json(runner, ["validate", str(workspace_file)])
        assert result.exit_code == 0
        assert "Free" in [item["name"] for item in data["items"]]

    def test_probe_rigged_lift(self, runner, write_workspace):
        """A vertex that does not reach the lifted object fails the probe."""
        text = """
        sketch Rigged over DILLK {
          obj A : lin;
          obj V, X : nonlin;
          gen r : (A+, V-);
          gen e : (A+, X-);
          extremal U { a := A; vertex := V; p0 := r }
        }
        """
        result, data = run_json(runner, ["validate", str(write_workspace(text)), "--probe"])
        assert result.exit_code == 1
        codes = [item["error_code"] for item in data["items"]]
        assert "NotRealized" in codes
        assert "NotPrecomplete" in codes

    def test_bound_miss_is_unknown(self, runner, write_workspace, temp_config_dir):
        """A factorization missing only within the node bound is an unknown verdict."""
        text = """
        sketch Chain over DILLK {
          obj A : lin;
          obj X, Y, Z : nonlin;
          gen e : (A+, X-);
          gen g : (A+, Y-);
          gen k1 : (Z-, X+);
          gen k2 : (Y-, Z+);
          extremal U { a := A; vertex := X; p0 := e }
        }
        """
        config = str(temp_config_dir / "configuration.yaml")
        result, data = run_json(
            runner, ["--config", config, "validate", str(write_workspace(text)), "--probe"]
        )
        codes = [item["error_code"] for item in data["items"]]
        assert "Unknown" in codes
        assert "NotRealized" not in codes
        assert any(item["detail"].startswith("inconclusive") for item in data["items"])
