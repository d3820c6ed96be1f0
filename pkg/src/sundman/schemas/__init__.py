"""JSON schemas of the command-line reports."""

import json
from importlib import resources

COMMANDS = ("check", "linearize", "verify", "demo", "field")


def load(command: str) -> dict:
    """Schema of the JSON report printed by ``command``."""
    if command not in COMMANDS:
        raise KeyError(f"no schema for {command!r}")
    name = "check" if command == "linearize" else command
    text = resources.files(__package__).joinpath(f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)
