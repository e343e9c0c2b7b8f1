"""
Configuration file for the p-proximal contraction certifier
"""

import os
from pathlib import Path
from typing import Any, Dict

from dotenv import load_dotenv

# Load environment variables from .env file in the same directory as this file
env_path = Path(__file__).parent / '.env'
load_dotenv(dotenv_path=env_path)


class Config:
    """Application configuration"""

    # Tolerances
    EPS_METRIC: float = float(os.getenv("PROXCERT_EPS_METRIC", "1e-9"))
    EPS_PROX: float = float(os.getenv("PROXCERT_EPS_PROX", "1e-9"))
    BOUND_SLACK: float = float(os.getenv("PROXCERT_BOUND_SLACK", "1e-9"))

    # Hunt mode
    HUNT_SCALE: float = float(os.getenv("PROXCERT_HUNT_SCALE", "10.0"))
    HUNT_LEVELS: int = int(os.getenv("PROXCERT_HUNT_LEVELS", "4"))  # 0 = continuous draws
    HUNT_WORKERS: int = int(os.getenv("PROXCERT_HUNT_WORKERS", "1"))
    HUNT_FAMILY: str = os.getenv("PROXCERT_HUNT_FAMILY", "metric")  # metric | strip

    # Logging
    LOG_LEVEL: str = os.getenv("PROXCERT_LOG_LEVEL", "INFO")

    @classmethod
    def hunt_levels(cls) -> int | None:
        """Lattice size for hunt draws, None for continuous distances"""
        return cls.HUNT_LEVELS if cls.HUNT_LEVELS > 0 else None

    @classmethod
    def describe(cls) -> Dict[str, Any]:
        """Effective settings, for debug logging"""
        return {
            "eps_metric": cls.EPS_METRIC,
            "eps_prox": cls.EPS_PROX,
            "bound_slack": cls.BOUND_SLACK,
            "hunt_scale": cls.HUNT_SCALE,
            "hunt_levels": cls.HUNT_LEVELS,
            "hunt_workers": cls.HUNT_WORKERS,
            "hunt_family": cls.HUNT_FAMILY,
            "log_level": cls.LOG_LEVEL,
        }
