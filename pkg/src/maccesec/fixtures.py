"""Access to the data files shipped inside the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def data_path(name: str) -> Path:
    """Filesystem path of a shipped data file (source-tree install layout)."""
    path = resources.files("maccesec").joinpath("data").joinpath(name)
    return Path(str(path))
