"""Bundled example models (FPM files under ``bkmonitor/models``)."""

from __future__ import annotations

from importlib import resources

from .core import FactoredProcess
from .fpm import parse_model


def names() -> list[str]:
    files = resources.files("bkmonitor").joinpath("models")
    return sorted(f.name[:-4] for f in files.iterdir() if f.name.endswith(".fpm"))


def path(name: str):
    return resources.files("bkmonitor").joinpath("models", f"{name}.fpm")


def load(name: str) -> FactoredProcess:
    return parse_model(path(name).read_text(encoding="utf-8"))
