"""
Engine configuration.

Values are resolved in this order: explicit overrides (CLI flags), the
``FLAG_DT_TOLERANCE`` environment variable, the NOMAD entry-point
configuration (passed in by the NOMAD modules), and the defaults below.
"""

from __future__ import annotations

import os
from functools import lru_cache

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from nomad_flag_dt_plugin.errors import InvalidParamsError

TOLERANCE_ENV = 'FLAG_DT_TOLERANCE'


class EngineSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    tolerance: float = Field(
        1e-10,
        gt=0,
        description='Absolute tolerance for floating point zero tests.',
    )
    wall_tolerance: float = Field(
        1e-8,
        gt=0,
        description='Bisection width when locating slope sign changes on a path.',
    )
    scan_float_format: str = Field(
        '.12g',
        description='Format spec used for floats in scan CSV output.',
    )

    def override(self, **changes: object) -> EngineSettings:
        """Return a copy with the non-``None`` entries of ``changes`` applied."""
        changes = {k: v for k, v in changes.items() if v is not None}
        if not changes:
            return self
        try:
            return EngineSettings.model_validate(self.model_dump() | changes)
        except ValidationError as e:
            raise InvalidParamsError(str(e)) from e


def _from_environment() -> EngineSettings:
    raw = os.environ.get(TOLERANCE_ENV)
    if raw is None or not raw.strip():
        return EngineSettings()
    try:
        return EngineSettings(tolerance=float(raw))
    except (ValueError, ValidationError) as e:
        raise InvalidParamsError(
            f'{TOLERANCE_ENV} must be a positive float, got {raw!r}'
        ) from e


@lru_cache(maxsize=1)
def get_settings() -> EngineSettings:
    return _from_environment()


def resolve_tolerance(tolerance: float | None = None) -> float:
    if tolerance is not None:
        return tolerance
    return get_settings().tolerance


def settings_override(**changes: object) -> EngineSettings:
    """The cached settings with the non-``None`` entries of ``changes`` applied."""
    return get_settings().override(**changes)


def entry_point_tolerance(configured: float | None = None) -> float:
    """
    Tolerance for the NOMAD modules: the environment variable wins over the
    value configured on the plugin entry point.
    """
    if os.environ.get(TOLERANCE_ENV, '').strip():
        return get_settings().tolerance
    if configured is None:
        return EngineSettings().tolerance
    return configured
