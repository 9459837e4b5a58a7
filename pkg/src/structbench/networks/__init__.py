"""Example SCMs shipped with the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

BUNDLED = ("clinic.bif", "housing.json", "screening.json")


def network_path(name: str) -> Path:
    """Filesystem path of a bundled SCM, e.g. ``network_path("clinic.bif")``."""
    if name not in BUNDLED:
        raise KeyError(f"no bundled network {name!r}; choose from {BUNDLED}")
    return Path(str(resources.files(__name__).joinpath(name)))
