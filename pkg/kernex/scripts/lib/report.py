# -*- coding: utf-8 -*-
"""
Check results and run reports

A report passes when every check has |delta| <= tolerance. The JSON form is
written with sorted keys and without timing, so equal runs give equal files.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Union

__all__ = ("CheckResult", "Report")

logger = logging.getLogger(__file__)


def _plain(value: Any) -> Any:
    """JSON representation of check values"""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (int, float, str)):
        return value
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    return str(value)


@dataclass(frozen=True)
class CheckResult:
    name: str
    expected: Any
    computed: Any
    delta: float
    tolerance: float
    passed: bool

    @classmethod
    def of(cls, name: str, expected, computed, tolerance: float) -> "CheckResult":
        """numeric comparison, |expected - computed| <= tolerance"""
        delta = abs(complex(expected) - complex(computed))
        return cls(name, expected, computed, delta, tolerance, bool(delta <= tolerance))

    @classmethod
    def exact(cls, name: str, expected, computed, equal: bool | None = None) -> "CheckResult":
        """
        Exact comparison with zero tolerance. `equal` overrides == for values
        compared elsewhere (CycloSums, booleans from a predicate).
        """
        equal = (expected == computed) if equal is None else bool(equal)
        if equal:
            delta = 0.0
        else:
            try:
                delta = abs(complex(expected) - complex(computed)) or math.inf
            except (TypeError, ValueError):
                delta = math.inf
        return cls(name, expected, computed, delta, 0.0, equal)

    @classmethod
    def bound(cls, name: str, bound: float, computed: float) -> "CheckResult":
        """one-sided check computed <= bound; delta is the overshoot"""
        delta = max(0.0, float(computed) - float(bound))
        return cls(name, bound, computed, delta, 0.0, delta == 0.0)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "expected": _plain(self.expected),
            "computed": _plain(self.computed),
            "delta": self.delta,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class Report:
    command: str
    config: Dict[str, Any]
    checks: List[CheckResult] = field(default_factory=list)
    term_counts: Dict[str, int] = field(default_factory=dict)
    elapsed: float = 0.0

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        logger.debug(
            f"{check.name}: {'ok' if check.passed else 'FAILED'} "
            f"(delta {check.delta:.3g}, tolerance {check.tolerance:.3g})"
        )
        return check

    def count(self, key: str, value: int):
        self.term_counts[key] = self.term_counts.get(key, 0) + int(value)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def as_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "config": _plain(self.config),
            "checks": [c.as_dict() for c in self.checks],
            "term_counts": dict(self.term_counts),
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json(), encoding="utf-8")
        logger.debug(f"report written to {path}")
        return path

    def summarize(self):
        for check in self.failures:
            logger.warning(
                f"{self.command}: {check.name} failed: expected {check.expected}, "
                f"computed {check.computed}, delta {check.delta:.3g} > {check.tolerance:.3g}"
            )
        status = "PASS" if self.passed else "FAIL"
        logger.info(
            f"{self.command}: {len(self.checks) - len(self.failures)}/{len(self.checks)} "
            f"checks passed in {self.elapsed:.2f}s [{status}]"
        )
