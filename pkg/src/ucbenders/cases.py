"""Access to the case files shipped with the package."""

from __future__ import annotations

from importlib import resources

from .system import SystemCase, case_from_dict
import json

DESK_CASES = ("desk1", "desk2", "desk3", "desk4", "desk5")


def builtin_case_names():
    root = resources.files(__package__) / "cases"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def builtin_case(name) -> SystemCase:
    path = resources.files(__package__) / "cases" / f"{name}.json"
    if not path.is_file():
        raise FileNotFoundError(
            f"no builtin case '{name}'; available: {builtin_case_names()}"
        )
    return case_from_dict(json.loads(path.read_text()), name=name)
