from dataclasses import dataclass, field
from typing import Any, Dict, List


@dataclass
class Certificate:
    """Outcome of a verification pipeline: named checks plus the witnesses they ran on"""

    kind: str
    checks: Dict[str, bool] = field(default_factory=dict)
    witnesses: Dict[str, Any] = field(default_factory=dict)
    transcript: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return bool(self.checks) and all(self.checks.values())

    def check(self, name: str, passed: bool) -> bool:
        self.checks[name] = bool(passed)
        return bool(passed)

    def failed_checks(self) -> List[str]:
        return [name for name, passed in self.checks.items() if not passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "valid": self.valid,
            "checks": dict(self.checks),
            "witnesses": self.witnesses,
            "transcript": self.transcript,
        }
