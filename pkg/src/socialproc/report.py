"""Validation reports: violations are data, not exceptions.

Validators accept arbitrary candidate structures and return a report
listing every broken invariant. A report with no error-severity entries
means the candidate is acceptable; ``info`` entries are advisory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

ERROR = "error"
INFO = "info"


@dataclass(frozen=True)
class Violation:
    rule: str
    element: str
    message: str
    severity: str = ERROR

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "element": self.element,
            "message": self.message,
            "severity": self.severity,
        }


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @classmethod
    def build(cls, violations: list[Violation]) -> "ValidationReport":
        """Deterministic report: sorted by rule, then element, then message."""
        return cls(sorted(violations, key=lambda v: (v.rule, v.element, v.message)))

    @property
    def ok(self) -> bool:
        return not any(v.severity == ERROR for v in self.violations)

    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == ERROR]

    def rules(self) -> list[str]:
        return [v.rule for v in self.violations]

    def merged(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport.build(self.violations + other.violations)

    def to_dict(self) -> dict:
        return {"violations": [v.to_dict() for v in self.violations]}

    @classmethod
    def from_dict(cls, doc: dict) -> "ValidationReport":
        return cls.build(
            [
                Violation(
                    rule=v["rule"],
                    element=v["element"],
                    message=v["message"],
                    severity=v.get("severity", ERROR),
                )
                for v in doc.get("violations", [])
            ]
        )
