"""Pass/fail/refusal reports with concrete witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
REFUSAL = "refusal"


@dataclass
class Report:
    """Outcome of a verification or certification run.

    Every fail entry carries a concrete witness (a word, cylinder, or point
    pair rendered as text); the report is a value, never an exception.
    """

    status: str = PASS
    entries: list[tuple[str, str]] = field(default_factory=list)
    timing: float = 0.0

    def fail(self, check: str, witness: str) -> None:
        self.status = FAIL
        self.entries.append((check, witness))

    def refuse(self, check: str, witness: str) -> None:
        self.status = REFUSAL
        self.entries.append((check, witness))

    def note(self, check: str, detail: str) -> None:
        self.entries.append((check, detail))

    @property
    def ok(self) -> bool:
        return self.status == PASS

    def to_json(self) -> dict:
        return {
            "kind": "report",
            "status": self.status,
            "entries": [{"check": c, "witness": w} for c, w in self.entries],
            "timing": self.timing,
        }
