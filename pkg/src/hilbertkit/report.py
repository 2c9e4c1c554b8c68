from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Check:
    passed: bool
    value: float
    limit: float


@dataclass
class CheckReport:
    """Named pass/fail checks, each with the measured value and its limit."""

    checks: dict[str, Check] = field(default_factory=dict)

    def add(self, name: str, value: float, limit: float, passed: bool | None = None) -> None:
        if passed is None:
            passed = value <= limit
        self.checks[name] = Check(bool(passed), float(value), float(limit))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> list[str]:
        return [name for name, c in self.checks.items() if not c.passed]

    def __getitem__(self, name: str) -> Check:
        return self.checks[name]

    def to_dict(self) -> dict:
        return {name: {"passed": c.passed, "value": c.value, "limit": c.limit}
                for name, c in self.checks.items()}
