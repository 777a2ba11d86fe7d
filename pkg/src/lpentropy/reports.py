"""Small pass/fail report structure shared by the validation operations."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ConditionCheck:
    """One named numerical check with the value it observed."""

    name: str
    passed: bool
    observed: float
    requirement: str


@dataclass(frozen=True)
class ConditionReport:
    """Collection of checks run against one subject (a kernel, a density, ...)."""

    subject: str
    checks: tuple[ConditionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> ConditionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(f"no check named {name!r} in report for {self.subject}")

    def summary_lines(self) -> list[str]:
        lines = [f"{self.subject}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            lines.append(
                f"  [{status}] {c.name}: observed={c.observed:.10g} ({c.requirement})"
            )
        return lines
