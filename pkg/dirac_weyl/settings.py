"""
Typed view of the numerical configuration.

The confuse config is validated through templates (like the player monitors'
CONFIG_TEMPLATE) and then frozen into a pydantic model, so that worker threads
can share one instance without locking.
"""

from functools import lru_cache
from typing import Literal, Optional

import confuse
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class SignatureSettings(_Section):
    tol: float = Field(1e-12, gt=0)


class PotentialSettings(_Section):
    hermitian_tol: float = Field(1e-14, gt=0)
    sample_points: int = Field(401, ge=5)
    interpolation_order: Literal[1, 3] = 3


class IntegratorSettings(_Section):
    method: Literal["RK45", "DOP853"] = "RK45"
    rtol: float = Field(1e-10, gt=0)
    atol: float = Field(1e-12, gt=0)
    condition_warning: float = Field(1e12, gt=1)
    residual_tol: float = Field(1e-6, gt=0)
    reorth_interval: float = Field(1.0, gt=0)


class QuadratureSettings(_Section):
    points_per_unit: int = Field(200, ge=4)
    min_points: int = Field(401, ge=5)


class RankSettings(_Section):
    kappa_threshold: float = Field(1e-10, gt=0)
    admissible_threshold: float = Field(1e-10, gt=0)
    finite_interval_threshold: float = Field(1e-8, gt=0)
    ambiguity_band: float = Field(10.0, ge=1)


class BoundarySettings(_Section):
    completion_tol: float = Field(1e-10, gt=0)
    unitary_tol: float = Field(1e-12, gt=0)
    subspace_angle_tol: float = Field(1e-8, gt=0)
    symplectic_condition_limit: float = Field(1e8, gt=1)


class WeylSettings(_Section):
    L0: float = Field(5.0, gt=0)
    growth: float = Field(2.0, gt=1)
    L_max: float = Field(40.0, gt=0)
    tol: float = Field(1e-9, gt=0)
    tail_ratio_max: float = Field(0.9, gt=0, le=1)
    singular_condition: float = Field(1e12, gt=1)
    normalization_tol: float = Field(1e-8, gt=0)
    limit_tol: float = Field(1e-6, gt=0)
    l2_safety: float = Field(1e-3, gt=0, lt=1)
    l2_subwindows: int = Field(8, ge=3)
    indeterminate_low: float = Field(0.95, gt=0)
    indeterminate_high: float = Field(1.05, gt=0)
    probe_epsilon: float = Field(1e-3, gt=0)
    cr_step: float = Field(1e-4, gt=0)

    @model_validator(mode="after")
    def check_ranges(self):
        if self.L_max < self.L0:
            raise ValueError(f"L_max={self.L_max} is smaller than L0={self.L0}")
        if not self.indeterminate_low < 1 < self.indeterminate_high:
            raise ValueError("indeterminate band must contain 1")
        return self


class DefectSettings(_Section):
    margin_fraction: float = Field(0.1, gt=0, lt=1)
    regression_fraction: float = Field(0.4, gt=0, le=1)
    reorth_interval: float = Field(0.5, gt=0)
    L: float = Field(30.0, gt=0)


class OutputSettings(_Section):
    float_format: str = "%.17g"
    threads: int = Field(1, ge=1)


class Settings(_Section):
    signature: SignatureSettings = SignatureSettings()
    potential: PotentialSettings = PotentialSettings()
    integrator: IntegratorSettings = IntegratorSettings()
    quadrature: QuadratureSettings = QuadratureSettings()
    rank: RankSettings = RankSettings()
    boundary: BoundarySettings = BoundarySettings()
    weyl: WeylSettings = WeylSettings()
    defect: DefectSettings = DefectSettings()
    output: OutputSettings = OutputSettings()

    def with_overrides(
        self,
        rtol: Optional[float] = None,
        atol: Optional[float] = None,
        rank_threshold: Optional[float] = None,
        **weyl_updates,
    ) -> "Settings":
        """New settings with scenario-level overrides applied.

        `weyl_updates` are truncation schedule fields (L0, growth, L_max, tol).
        Values are re-validated, so a bad scenario cannot sneak in a negative tolerance.
        """
        data = self.model_dump()
        if rtol is not None:
            data["integrator"]["rtol"] = rtol
        if atol is not None:
            data["integrator"]["atol"] = atol
        if rank_threshold is not None:
            data["rank"]["finite_interval_threshold"] = rank_threshold
        data["weyl"].update({k: v for k, v in weyl_updates.items() if v is not None})
        return Settings.model_validate(data)


CONFIG_TEMPLATE = {
    "signature": {"tol": confuse.Number()},
    "potential": {
        "hermitian_tol": confuse.Number(),
        "sample_points": confuse.Integer(),
        "interpolation_order": confuse.Choice([1, 3]),
    },
    "integrator": {
        "method": confuse.Choice(["RK45", "DOP853"]),
        "rtol": confuse.Number(),
        "atol": confuse.Number(),
        "condition_warning": confuse.Number(),
        "residual_tol": confuse.Number(),
        "reorth_interval": confuse.Number(),
    },
    "quadrature": {
        "points_per_unit": confuse.Integer(),
        "min_points": confuse.Integer(),
    },
    "rank": {
        "kappa_threshold": confuse.Number(),
        "admissible_threshold": confuse.Number(),
        "finite_interval_threshold": confuse.Number(),
        "ambiguity_band": confuse.Number(),
    },
    "boundary": {
        "completion_tol": confuse.Number(),
        "unitary_tol": confuse.Number(),
        "subspace_angle_tol": confuse.Number(),
        "symplectic_condition_limit": confuse.Number(),
    },
    "weyl": {
        key: confuse.Integer() if key == "l2_subwindows" else confuse.Number()
        for key in WeylSettings.model_fields
    },
    "defect": {
        "margin_fraction": confuse.Number(),
        "regression_fraction": confuse.Number(),
        "reorth_interval": confuse.Number(),
        "L": confuse.Number(),
    },
    "output": {
        "float_format": confuse.String(),
        "threads": confuse.Integer(),
    },
}


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


def load_settings(view: Optional[confuse.ConfigView] = None) -> Settings:
    """Read and validate the numerical sections of `view` (the app config by default)."""
    from dirac_weyl.utils import ScenarioError

    if view is None:
        from dirac_weyl import config as view
    try:
        values = view.get(CONFIG_TEMPLATE)
    except confuse.ConfigError as e:
        raise ScenarioError("config", str(e)) from e
    try:
        return Settings.model_validate(_plain(values))
    except ValidationError as e:
        raise ScenarioError("config", str(e)) from e


@lru_cache()
def get_settings() -> Settings:
    return load_settings()


def resolve(settings: Optional[Settings] = None) -> Settings:
    return settings if settings is not None else get_settings()
