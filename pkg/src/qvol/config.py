"""Configuration settings for qvol runs."""
import logging
import math
import os
import re
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
import yaml
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .exceptions import DomainError

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Numerical and runtime settings, read from ``QVOL_*`` environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="QVOL_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Runtime
    LOG_LEVEL: str = "INFO"
    THREADS: int = min(8, os.cpu_count() or 1)
    PRECISION_BITS: int = 53

    # Quantum dilogarithm quadrature
    QUAD_ORDER: int = 32
    QUAD_PANEL_WIDTH: float = 1.0
    QUAD_SEMICIRCLE_RADIUS: float = 0.5
    QUAD_TOL: float = 1e-16
    QUAD_MAX_TAIL: float = 20000.0
    POLE_GUARD: float = 10.0 * math.sqrt(float(np.finfo(float).eps))

    # Critical point solver
    NEWTON_TOL: float = 1e-13
    NEWTON_MAX_ITER: int = 50
    CONTINUATION_START: float = 1e-3
    CONTINUATION_STEPS: int = 48
    CONTINUATION_MIN_STEP: float = 1e-8

    # Fourier coefficients
    DELTA: float = 0.15
    FOURIER_ORDER: int = 16
    FOURIER_MAX_PANELS: int = 2**22
    FOURIER_PHASE_TOL: float = math.pi / 2
    TRUNCATION_L: float = 2.0

    @field_validator("THREADS")
    @classmethod
    def check_threads(cls, v: int) -> int:
        """Worker count must be positive."""
        if v < 1:
            raise ValueError("THREADS must be at least 1")
        return v

    @field_validator("PRECISION_BITS")
    @classmethod
    def check_bits(cls, v: int) -> int:
        if v < 53:
            raise ValueError("PRECISION_BITS must be at least 53")
        return v

    @field_validator("DELTA")
    @classmethod
    def check_delta(cls, v: float) -> float:
        if not 0.0 < v < math.pi / 8:
            raise ValueError("DELTA must lie in (0, pi/8)")
        return v


# Global settings instance
settings = Settings()


_PI_MULTIPLE = re.compile(
    r"^\s*(?P<num>[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)?\s*\*?\s*(?:pi|π)"
    r"(?:\s*/\s*(?P<den>[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?))?\s*$",
    re.IGNORECASE,
)


def parse_theta(text: Union[str, float, int]) -> float:
    """Parse a cone angle given as radians or as a multiple of pi.

    Accepted forms are ``"pi"``, ``"pi/2"``, ``"3pi/4"``, ``"3*pi/4"``, ``"2pi"``
    and plain decimals such as ``"1.5"`` or ``"1e-3"``.

    Args:
        text: The angle to parse

    Returns:
        The angle in radians

    Raises:
        DomainError: If the text is not a recognised angle
    """
    if isinstance(text, (int, float)):
        value = float(text)
    else:
        match = _PI_MULTIPLE.match(text)
        if match:
            num = float(match.group("num")) if match.group("num") else 1.0
            den = float(match.group("den")) if match.group("den") else 1.0
            if den == 0.0:
                raise DomainError(f"Invalid angle '{text}': zero denominator")
            value = num * math.pi / den
        else:
            try:
                value = float(text)
            except ValueError:
                raise DomainError(f"Invalid angle '{text}'") from None
    if not math.isfinite(value):
        raise DomainError(f"Invalid angle '{text}': not finite")
    return value


class RunConfig(BaseModel):
    """Parameters of one volume conjecture run."""

    model_config = ConfigDict(extra="forbid")

    p: int = 5
    q: int = 1
    a0: int = 0
    theta: float = math.pi
    r_min: int = 51
    r_max: int = 351
    r_step: int = 50
    branch: Literal["minus", "plus"] = "minus"
    mode: Literal["raw", "symmetrized"] = "symmetrized"
    precision_bits: int = 53
    delta: float = Field(default_factory=lambda: settings.DELTA)
    output_path: Optional[str] = None
    format: Literal["csv", "json"] = "csv"

    @field_validator("theta", mode="before")
    @classmethod
    def parse_angle(cls, v: Any) -> float:
        value = parse_theta(v)
        if not 0.0 < value < 2 * math.pi:
            raise ValueError(f"theta must lie in (0, 2pi), got {value}")
        return value

    @field_validator("r_min", "r_max")
    @classmethod
    def check_odd(cls, v: int) -> int:
        if v < 3 or v % 2 == 0:
            raise ValueError(f"r must be an odd integer >= 3, got {v}")
        return v

    @field_validator("r_step")
    @classmethod
    def check_step(cls, v: int) -> int:
        if v <= 0 or v % 2:
            raise ValueError(f"r_step must be a positive even integer, got {v}")
        return v

    @field_validator("precision_bits")
    @classmethod
    def check_precision(cls, v: int) -> int:
        if v < 53:
            raise ValueError("precision_bits must be at least 53")
        return v

    @field_validator("delta")
    @classmethod
    def check_delta(cls, v: float) -> float:
        if not 0.0 < v < math.pi / 8:
            raise ValueError("delta must lie in (0, pi/8)")
        return v

    @model_validator(mode="after")
    def check_range(self) -> "RunConfig":
        if self.r_min > self.r_max:
            raise ValueError(f"r_min ({self.r_min}) exceeds r_max ({self.r_max})")
        return self

    @property
    def r_list(self) -> List[int]:
        """Odd levels from r_min to r_max in steps of r_step."""
        return list(range(self.r_min, self.r_max + 1, self.r_step))

    @property
    def precision(self):
        """The precision mode requested by ``precision_bits``."""
        from .specfun import PrecisionMode

        return PrecisionMode.from_bits(self.precision_bits)


def _read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise DomainError(f"Config file not found: {path}")
    if path.suffix.lower() in (".yaml", ".yml"):
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            raise DomainError(f"Config file {path} must hold a mapping")
    else:
        data = dotenv_values(path)
    return {str(k).strip().lower(): v for k, v in data.items() if v is not None}


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """Build a RunConfig from a config file and command-line overrides.

    Args:
        path: Optional key=value (or YAML) config file
        overrides: Values that take precedence over the file; ``None`` entries are ignored

    Returns:
        The validated run configuration

    Raises:
        DomainError: If the file is missing or a value fails validation
    """
    values: Dict[str, Any] = {}
    if path is not None:
        values.update(_read_config_file(path))
        logger.debug(f"Loaded {len(values)} keys from {path}")
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig(**values)
    except ValidationError as e:
        raise DomainError(f"Invalid run configuration: {e}") from e
