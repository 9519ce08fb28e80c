"""Runtime settings read from the environment (and an optional .env file)."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

from fukayagen.errors import InvalidInputError

REPO_ROOT = Path(__file__).resolve().parents[2]
FIELD_NAMES = ("q", "f2", "f3", "f5")


@dataclass(frozen=True)
class Settings:
    field: str = "q"
    seed: int = 0
    max_disk_corners: int = 12
    log_level: str = "WARNING"
    fixtures_dir: Path = REPO_ROOT / "fixtures"


def load_settings(env_file: str | os.PathLike | None = None) -> Settings:
    """Snapshot of the FUKAYAGEN_* variables, after loading .env if present."""
    load_dotenv(env_file or REPO_ROOT / ".env")
    field = os.getenv("FUKAYAGEN_FIELD", "q").lower()
    if field not in FIELD_NAMES:
        raise InvalidInputError(f"FUKAYAGEN_FIELD must be one of {FIELD_NAMES}, got {field!r}")
    return Settings(
        field=field,
        seed=int(os.getenv("FUKAYAGEN_SEED", "0")),
        max_disk_corners=int(os.getenv("FUKAYAGEN_MAX_DISK_CORNERS", "12")),
        log_level=os.getenv("FUKAYAGEN_LOG_LEVEL", "WARNING").upper(),
        fixtures_dir=Path(os.getenv("FUKAYAGEN_FIXTURES", str(REPO_ROOT / "fixtures"))),
    )
