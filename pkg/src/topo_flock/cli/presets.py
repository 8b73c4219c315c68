from __future__ import annotations

import unicodedata
from collections.abc import Iterable
from functools import lru_cache
from pathlib import Path

from topo_flock.cli.experiment import ExperimentConfig, parse_config
from topo_flock.config import PRESETS_DIR
from topo_flock.errors import ConfigInvalid


@lru_cache(maxsize=None)
def get_preset_path(name: str, *, search_dirs: Iterable[Path] | None = None) -> Path | None:
    """Return the TOML file of a named preset if it exists."""
    candidate_dirs = [Path(p) for p in (search_dirs or (PRESETS_DIR,))]

    slugs = _slug_candidates(name)

    for directory in candidate_dirs:
        for slug in slugs:
            candidate = directory / f"{slug}.toml"
            if candidate.exists():
                return candidate

    return None


def _slug_candidates(name: str) -> list[str]:
    base = name.strip().lower().replace(" ", "-")
    candidates = [base]

    normalized = unicodedata.normalize("NFD", base)
    ascii_slug = "".join(ch for ch in normalized if unicodedata.category(ch) != "Mn")
    if ascii_slug not in candidates:
        candidates.append(ascii_slug)

    hyphenated = ascii_slug.replace("_", "-")
    if hyphenated not in candidates:
        candidates.append(hyphenated)

    return candidates


def list_presets(search_dirs: Iterable[Path] | None = None) -> list[str]:
    directories = [Path(p) for p in (search_dirs or (PRESETS_DIR,))]
    return sorted({path.stem for directory in directories for path in directory.glob("*.toml")})


def load_preset(name: str) -> ExperimentConfig:
    path = get_preset_path(name)
    if path is None:
        raise ConfigInvalid([f"unknown preset {name!r}; available: {', '.join(list_presets())}"])
    return parse_config(path)
