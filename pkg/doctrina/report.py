from __future__ import annotations

"""
Command reports.

A report holds one record per item (proof, goal, expectation, class
representative, ...). Its status is the most severe item status and the
exit code is a function of the status alone.
"""

import json
from dataclasses import dataclass, field
from enum import Enum

from doctrina.errors import DoctrinaError, FuelExhausted, ParseError, ResourceLimit


class Status(str, Enum):
    OK = "ok"
    PROOF_ERROR = "proof-error"
    PARSE_ERROR = "parse-error"
    VALIDATION_ERROR = "validation-error"
    UNKNOWN = "unknown-verdict"
    RESOURCE_LIMIT = "resource-limit"


EXIT_CODES = {
    Status.OK: 0,
    Status.PROOF_ERROR: 1,
    Status.VALIDATION_ERROR: 1,
    Status.PARSE_ERROR: 2,
    Status.UNKNOWN: 3,
    Status.RESOURCE_LIMIT: 4,
}

# Most severe first
SEVERITY = (
    Status.PARSE_ERROR,
    Status.PROOF_ERROR,
    Status.VALIDATION_ERROR,
    Status.RESOURCE_LIMIT,
    Status.UNKNOWN,
    Status.OK,
)


def status_for(error: DoctrinaError) -> Status:
    if isinstance(error, ParseError):
        return Status.PARSE_ERROR
    if isinstance(error, (ResourceLimit, FuelExhausted)):
        return Status.RESOURCE_LIMIT
    return Status.PROOF_ERROR


@dataclass
class ReportItem:
    name: str
    status: Status = Status.OK
    conclusion: str = ""
    error_code: str | None = None
    path: str | None = None
    span: tuple[int, int] | None = None
    detail: str = ""

    @classmethod
    def from_error(
        cls, name: str, error: DoctrinaError, status: Status | None = None, conclusion: str = ""
    ) -> ReportItem:
        return cls(
            name=name,
            status=status or status_for(error),
            conclusion=conclusion,
            error_code=error.code,
            path=error.path,
            span=error.span,
            detail=error.message,
        )

    @property
    def ok(self) -> bool:
        return self.status is Status.OK

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status.value,
            "conclusion": self.conclusion,
            "error_code": self.error_code,
            "path": self.path,
            "span": {"line": self.span[0], "column": self.span[1]} if self.span else None,
            "detail": self.detail,
        }

    def to_text(self) -> str:
        if self.ok:
            line = f"ok    {self.name}"
            if self.conclusion:
                line += f" : {self.conclusion}"
            if self.detail:
                line += f"\n      {self.detail}"
            return line
        where = []
        if self.path:
            where.append(f"at {self.path}")
        if self.span:
            where.append(f"line {self.span[0]}, column {self.span[1]}")
        location = f" ({'; '.join(where)})" if where else ""
        code = self.error_code or self.status.value
        line = f"FAIL  {self.name}: {code}{location}"
        if self.conclusion:
            line += f"\n      {self.conclusion}"
        if self.detail:
            line += f"\n      {self.detail}"
        return line


@dataclass
class Report:
    command: str
    items: list[ReportItem] = field(default_factory=list)
    footer: list[str] = field(default_factory=list)

    def add(self, item: ReportItem) -> ReportItem:
        self.items.append(item)
        return item

    @property
    def status(self) -> Status:
        present = {item.status for item in self.items}
        for status in SEVERITY:
            if status in present:
                return status
        return Status.OK

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    @property
    def failures(self) -> list[ReportItem]:
        return [item for item in self.items if not item.ok]

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "status": self.status.value,
            "exit_code": self.exit_code,
            "items": [item.to_dict() for item in self.items],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [item.to_text() for item in self.items]
        lines.extend(self.footer)
        lines.append(f"status: {self.status.value} (exit {self.exit_code})")
        return "\n".join(lines)

    def render(self, form: str = "text") -> str:
        return self.to_json() if form == "json" else self.to_text()
