"""Tests for command reports."""

import json

from doctrina.errors import FuelExhausted, ParseError, ResourceLimit, SideConditionFailed
from doctrina.report import EXIT_CODES, Report, ReportItem, Status, status_for


class TestStatus:
    """Tests for status_for and the exit codes."""

    def test_status_for(self):
        """Errors map to statuses by kind."""
        assert status_for(ParseError("bad", 1, 2)) is Status.PARSE_ERROR
        assert status_for(ResourceLimit("big")) is Status.RESOURCE_LIMIT
        assert status_for(FuelExhausted("dry", None)) is Status.RESOURCE_LIMIT
        assert status_for(SideConditionFailed("no")) is Status.PROOF_ERROR

    def test_exit_codes(self):
        """Each status has its exit code."""
        assert [EXIT_CODES[s] for s in Status] == [0, 1, 2, 1, 3, 4]


class TestReport:
    """Tests for Report."""

    def test_empty_is_ok(self):
        """A report without items is ok."""
        report = Report("check")
        assert report.status is Status.OK
        assert report.exit_code == 0

    def test_most_severe_wins(self):
        """Parse errors outrank proof errors, which outrank unknown verdicts."""
        report = Report("check")
        report.add(ReportItem("a", Status.UNKNOWN))
        report.add(ReportItem("b", Status.PROOF_ERROR))
        assert report.exit_code == 1
        report.add(ReportItem("c", Status.PARSE_ERROR))
        assert report.status is Status.PARSE_ERROR
        assert report.exit_code == 2
        assert [item.name for item in report.failures] == ["a", "b", "c"]

    def test_resource_limit_outranks_unknown(self):
        """Resource limits outrank unknown verdicts."""
        report = Report("enumerate")
        report.add(ReportItem("a", Status.UNKNOWN))
        report.add(ReportItem("b", Status.RESOURCE_LIMIT))
        assert report.exit_code == 4

    def test_from_error(self):
        """Error items carry code, path and position."""
        error = SideConditionFailed("extra positive entry", path="root.left")
        error.span = (4, 7)
        item = ReportItem.from_error("p", error)
        assert item.status is Status.PROOF_ERROR
        assert item.error_code == "SideConditionFailed"
        assert "FAIL  p: SideConditionFailed (at root.left; line 4, column 7)" in item.to_text()

    def test_json(self):
        """JSON reports list every item."""
        report = Report("check")
        report.add(ReportItem("p", conclusion=". | A |- A", span=(2, 1)))
        data = json.loads(report.to_json())
        assert data["status"] == "ok"
        assert data["exit_code"] == 0
        assert data["items"][0]["span"] == {"line": 2, "column": 1}

    def test_text(self):
        """Text reports end with the status line."""
        report = Report("check")
        report.add(ReportItem("p", conclusion=". | A |- A"))
        report.footer = ["classes: 1"]
        assert report.render("text") == "ok    p : . | A |- A\nclasses: 1\nstatus: ok (exit 0)"
