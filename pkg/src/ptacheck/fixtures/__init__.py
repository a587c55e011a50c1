"""Bundled example models: the wireless fire alarm network, the Minsky
gadget goldens, and the instantiated gadget trace scripts."""

from __future__ import annotations

import json
from importlib import resources


def read_text(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text()


def path(name: str):
    """A filesystem path to a bundled fixture (context-free for installed
    packages laid out on disk, which is how this project ships)."""
    return resources.files(__package__).joinpath(name)


def load_trace(name: str) -> dict:
    return json.loads(read_text(f"traces/{name}"))
