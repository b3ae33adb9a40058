"""Explanation rendering: condition -> short tag + tooltip.

The catalog is data driven (a JSON list of per-variant templates) with the
defaults shipped as package data. Variants missing from the catalog fall back
to a generated tag so rendering is total no matter what the engine produces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .conditions import FailureCondition

TAG_MAX_LEN = 40


@dataclass(frozen=True)
class Explanation:
    tag: str
    tooltip: str
    condition: FailureCondition

    def to_dict(self) -> dict:
        return {"tag": self.tag, "tooltip": self.tooltip,
                "condition": self.condition.to_dict()}


def _format_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.2f}".rstrip("0").rstrip(".")
    if isinstance(value, (list, tuple)):
        if not value:
            return "nothing"
        return ", ".join(_format_value(v) for v in value)
    if hasattr(value, "to_dict"):
        d = value.to_dict()
        if {"x", "y", "z"} <= set(d):
            return f"({d['x']:.2f}, {d['y']:.2f}, {d['z']:.2f})"
        return str(d)
    if value is None:
        return "unknown"
    return str(value)


class ExplanationCatalog:
    """Loads templates once and renders explanations for any condition."""

    def __init__(self, records: list[dict] | None = None):
        if records is None:
            records = self._default_records()
        self._templates: dict[str, tuple[str, str]] = {}
        for rec in records:
            variant = rec["condition_variant"]
            tag = rec["tag"][:TAG_MAX_LEN]
            self._templates[variant] = (tag, rec.get("tooltip_template", ""))

    @staticmethod
    def _default_records() -> list[dict]:
        text = resources.files("affordkit.data").joinpath(
            "explanations.json").read_text(encoding="utf-8")
        return json.loads(text)

    @classmethod
    def from_file(cls, path: str) -> "ExplanationCatalog":
        with open(path, "r", encoding="utf-8") as fh:
            records = json.load(fh)
        merged = {r["condition_variant"]: r for r in cls._default_records()}
        for r in records:
            merged[r["condition_variant"]] = r
        return cls(list(merged.values()))

    def explain(self, condition: FailureCondition) -> Explanation:
        """Total: every variant renders, catalogued or not."""
        entry = self._templates.get(condition.variant)
        values = {k: _format_value(v) for k, v in condition.data.items()}
        # derived convenience placeholders
        if "cells" in condition.data:
            values["cell_count"] = str(len(condition.data["cells"]))
        if entry is None:
            tag = f"Cannot: {condition.variant}"[:TAG_MAX_LEN]
            tooltip = f"The action failed with condition {condition.variant}."
            return Explanation(tag=tag, tooltip=tooltip, condition=condition)
        tag, template = entry
        try:
            tooltip = template.format_map(_Defaulting(values))
        except Exception:
            tooltip = template
        return Explanation(tag=tag[:TAG_MAX_LEN], tooltip=tooltip,
                           condition=condition)


class _Defaulting(dict):
    def __missing__(self, key: str) -> str:
        return f"<{key}>"


_default_catalog: ExplanationCatalog | None = None


def default_catalog() -> ExplanationCatalog:
    global _default_catalog
    if _default_catalog is None:
        _default_catalog = ExplanationCatalog()
    return _default_catalog


def explain(condition: FailureCondition,
            catalog: ExplanationCatalog | None = None) -> Explanation:
    return (catalog or default_catalog()).explain(condition)
