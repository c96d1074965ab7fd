"""Deterministic run reports.

JSON is the machine contract: keys appear in the fixed order of :data:`KEYS`,
fields that were not produced are omitted (never ``null``), and the only
run-dependent field, ``elapsed_ms``, is emitted only on request.  A report
passes when it carries no witnesses.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import Any

KEYS = ("command", "params", "regime", "residuals", "families", "dimensions", "witnesses", "shift_x", "elapsed_ms")


@dataclass
class Report:
    command: str
    params: dict[str, Any]
    regime: str | None = None
    residuals: dict[str, str] | None = None
    families: list[dict[str, Any]] | None = None
    dimensions: dict[str, Any] | None = None
    witnesses: list[dict[str, Any]] | None = None
    shift_x: int | None = None
    elapsed_ms: int | None = None

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def add_witness(self, **entry: Any) -> None:
        if self.witnesses is None:
            self.witnesses = []
        self.witnesses.append(entry)

    def to_dict(self) -> dict[str, Any]:
        return {k: getattr(self, k) for k in KEYS if getattr(self, k) is not None}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Report":
        data = json.loads(text)
        unknown = set(data) - set(KEYS)
        if unknown:
            raise ValueError(f"unknown report keys {sorted(unknown)}")
        return cls(**data)

    def to_text(self) -> str:
        lines = [f"{self.command}: {'PASS' if self.passed else 'FINDINGS'}"]
        for f in fields(self):
            if f.name == "command":
                continue
            v = getattr(self, f.name)
            if v is None:
                continue
            lines.extend(_render(f.name, v, 0))
        return "\n".join(lines) + "\n"


def _render(key: str, value: Any, depth: int) -> list[str]:
    pad = "  " * depth
    if isinstance(value, dict):
        out = [f"{pad}{key}:"]
        for k, v in value.items():
            out.extend(_render(str(k), v, depth + 1))
        return out
    if isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value):
        out = [f"{pad}{key}:"]
        for n, v in enumerate(value):
            out.extend(_render(f"[{n}]", v, depth + 1))
        return out
    if isinstance(value, list):
        return [f"{pad}{key}: " + (", ".join(str(v) for v in value) if value else "[]")]
    return [f"{pad}{key}: {value}"]
