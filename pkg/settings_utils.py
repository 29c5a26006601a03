import json
import logging
from pathlib import Path
from typing import Optional

import app_config

logger = logging.getLogger(__name__)

FORMATS = ("json", "text")


class RunSettings:
    """Default search parameters for CLI runs; flags override them."""

    def __init__(
        self,
        height: int = 3,
        depth: int = 2,
        n: int = 2,
        budget: int = 10,
        format: str = "json",
        workers: int = 1,
        seed: Optional[int] = None,
    ):
        self.height = height
        self.depth = depth
        self.n = n
        self.budget = budget
        self.format = format
        self.workers = workers
        self.seed = seed

    def validate(self):
        """Validate the settings to ensure all fields are set correctly."""
        for key in ("height", "n", "budget", "workers"):
            value = getattr(self, key)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValueError(f"{key} must be a positive integer, got {value!r}")
        if not isinstance(self.depth, int) or self.depth < 0:
            raise ValueError(f"depth must be a nonnegative integer, got {self.depth!r}")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {', '.join(FORMATS)}")
        if self.seed is not None and not isinstance(self.seed, int):
            raise ValueError("seed must be an integer")

    @classmethod
    def from_dict(cls, data: dict):
        """Create a RunSettings object from a dictionary; unknown keys are ignored."""
        defaults = cls()
        seed = data.get("seed", defaults.seed)
        return cls(
            height=int(data.get("height", defaults.height)),
            depth=int(data.get("depth", defaults.depth)),
            n=int(data.get("n", defaults.n)),
            budget=int(data.get("budget", defaults.budget)),
            format=data.get("format", defaults.format),
            workers=int(data.get("workers", app_config.HK_WORKERS)),
            seed=int(seed) if seed is not None else None,
        )

    def to_dict(self):
        return {
            "height": self.height,
            "depth": self.depth,
            "n": self.n,
            "budget": self.budget,
            "format": self.format,
            "workers": self.workers,
            "seed": self.seed,
        }

    def merged(self, overrides: dict) -> "RunSettings":
        """Copy with every non-None override applied."""
        data = self.to_dict()
        data.update({k: v for k, v in overrides.items() if v is not None and k in data})
        merged = RunSettings.from_dict(data)
        merged.validate()
        return merged


def load_config(settings_file: Optional[str] = None) -> dict:
    """Load saved settings from file"""
    settings_path = Path(settings_file or app_config.HK_SETTINGS_FILE)
    if not settings_path.exists():
        return {}
    try:
        with open(settings_path, "r") as f:
            settings = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        logger.warning(f"Error loading settings from {settings_path}: {str(e)}")
        return {}
    if not isinstance(settings, dict):
        logger.warning(f"Ignoring settings file {settings_path}: not a JSON object")
        return {}
    return settings


def save_config(settings: dict, settings_file: Optional[str] = None) -> None:
    """Save settings to file"""
    settings_path = Path(settings_file or app_config.HK_SETTINGS_FILE)
    RunSettings.from_dict(settings).validate()
    try:
        with open(settings_path, "w") as f:
            json.dump(settings, f, indent=4)
    except OSError as e:
        logger.error(f"Error saving settings: {str(e)}")
        raise
