from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.units import parse_power

SPEED_OF_LIGHT = 299_792_458.0

# brute-force orientation grid points per angular dimension
MIN_GRID_RESOLUTION = 64


class PlacementKind(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    HYBRID = "hybrid"


class RegionKind(str, Enum):
    CONE = "cone"
    SPHERE_SURFACE = "sphere_surface"


class RegionAssignment(str, Enum):
    UNIFORM_RANDOM = "uniform_random"
    BALANCED = "balanced"


class RegionPreset(str, Enum):
    """Named user/eavesdropper region sets that replace the scenario regions"""

    THREE_CONES = "three_cones"
    DOWNWARD_10 = "downward_10"
    LEFTWARD_20 = "leftward_20"


class Scheme(str, Enum):
    TOMA_OPT = "toma_opt"
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    HYBRID = "hybrid"
    FPA_DENSE = "fpa_dense"
    FPA_SPARSE = "fpa_sparse"
    UPPER_BOUND = "upper_bound"


class ExperimentKind(str, Enum):
    CONVERGENCE = "convergence"
    SWEEP_N = "sweep_n"
    SWEEP_EVES = "sweep_eves"
    SWEEP_M_FIXED_BUDGET = "sweep_m_fixed_budget"
    SWEEP_CABLE_LENGTH = "sweep_cable_length"
    SWEEP_SPHERE_RADIUS = "sweep_sphere_radius"
    SWEEP_RICIAN = "sweep_rician"
    ANALYZE_THEOREMS = "analyze_theorems"


SCHEME_ORDER: List[Scheme] = list(Scheme)

SWEEP_PARAMETERS: Dict[ExperimentKind, str] = {
    ExperimentKind.CONVERGENCE: "iteration",
    ExperimentKind.SWEEP_N: "N",
    ExperimentKind.SWEEP_EVES: "I",
    ExperimentKind.SWEEP_M_FIXED_BUDGET: "M",
    ExperimentKind.SWEEP_CABLE_LENGTH: "L",
    ExperimentKind.SWEEP_SPHERE_RADIUS: "radius",
    ExperimentKind.SWEEP_RICIAN: "rician_factor",
    ExperimentKind.ANALYZE_THEOREMS: "",
}

DEFAULT_SWEEP_VALUES: Dict[ExperimentKind, List[float]] = {
    ExperimentKind.SWEEP_N: [4, 8, 12, 16],
    ExperimentKind.SWEEP_EVES: [2, 4, 6, 8, 10],
    ExperimentKind.SWEEP_M_FIXED_BUDGET: [1, 2, 4, 8, 16],
    ExperimentKind.SWEEP_CABLE_LENGTH: [1, 2, 4, 8],
    ExperimentKind.SWEEP_SPHERE_RADIUS: [100, 200, 500, 1000],
    ExperimentKind.SWEEP_RICIAN: [0.1, 1, 10, 100, float("inf")],
}

DEFAULT_SCHEMES: Dict[ExperimentKind, List[Scheme]] = {
    ExperimentKind.CONVERGENCE: [Scheme.TOMA_OPT, Scheme.UPPER_BOUND],
    ExperimentKind.SWEEP_RICIAN: [Scheme.TOMA_OPT, Scheme.FPA_DENSE],
    ExperimentKind.ANALYZE_THEOREMS: [],
}

_FROZEN = ConfigDict(frozen=True, extra="forbid")


class RadioParams(BaseModel):
    """Carrier and power settings; powers are stored in watts"""

    model_config = _FROZEN

    carrier_freq: float = 10e9
    tx_power: float = 100.0
    noise_power: float = 1e-12

    @field_validator("tx_power", "noise_power", mode="before")
    @classmethod
    def _parse_power(cls, value: Union[str, float, int]) -> float:
        return parse_power(value)

    @field_validator("carrier_freq", "tx_power", "noise_power")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0 or value == float("inf"):
            raise ValueError("must be positive and finite")
        return value

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq


class RegionSpec(BaseModel):
    """Where users or eavesdroppers are drawn from: a cone around an axis, or a sphere surface"""

    model_config = _FROZEN

    kind: RegionKind = RegionKind.CONE
    axis: Tuple[float, float, float] = (1.0, 0.0, 0.0)
    vertex_angle: float = 10.0
    r_min: float = 100.0
    r_max: float = 1000.0
    radius: float = 500.0

    @model_validator(mode="after")
    def _check_region(self) -> "RegionSpec":
        if self.kind == RegionKind.CONE:
            if sum(c * c for c in self.axis) == 0.0:
                raise ValueError("cone axis must be non-zero")
            if not 0.0 < self.vertex_angle < 180.0:
                raise ValueError("vertex_angle must lie in (0, 180) degrees")
            if not 0.0 < self.r_min <= self.r_max < float("inf"):
                raise ValueError("cone distances must satisfy 0 < r_min <= r_max")
        elif not 0.0 < self.radius < float("inf"):
            raise ValueError("sphere radius must be positive")
        return self


def default_cone_regions() -> List[RegionSpec]:
    return [
        RegionSpec(axis=(1.0, 0.0, 0.0)),
        RegionSpec(axis=(0.0, 1.0, 0.0)),
        RegionSpec(axis=(0.0, 0.0, -1.0)),
    ]


class Scenario(BaseModel):
    """Physical and statistical setup of one simulation"""

    model_config = _FROZEN

    num_cables: int = 8
    elements_per_cable: int = 8
    cable_length: float = 4.0
    min_separation: float = 0.5
    num_users: int = 10
    num_eves: int = 10
    radio: RadioParams = Field(default_factory=RadioParams)
    user_regions: List[RegionSpec] = Field(default_factory=default_cone_regions)
    eve_regions: List[RegionSpec] = Field(default_factory=default_cone_regions)
    region_assignment: RegionAssignment = RegionAssignment.UNIFORM_RANDOM
    rician_factor: float = float("inf")
    seed: int = 2024

    @model_validator(mode="after")
    def _check_scenario(self) -> "Scenario":
        if self.num_cables < 1 or self.elements_per_cable < 1:
            raise ValueError("num_cables and elements_per_cable must be at least 1")
        if not 0.0 < self.cable_length < float("inf"):
            raise ValueError("cable_length must be positive")
        if self.min_separation < 0.0:
            raise ValueError("min_separation must be non-negative")
        if self.num_users < 0 or self.num_eves < 0:
            raise ValueError("num_users and num_eves must be non-negative")
        if self.num_users + self.num_eves > self.num_elements:
            raise ValueError(
                f"num_users + num_eves = {self.num_users + self.num_eves} exceeds the {self.num_elements} elements"
            )
        if self.num_users > 0 and not self.user_regions:
            raise ValueError("user_regions must be non-empty when num_users > 0")
        if self.num_eves > 0 and not self.eve_regions:
            raise ValueError("eve_regions must be non-empty when num_eves > 0")
        if not self.rician_factor >= 0.0:
            raise ValueError("rician_factor must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return self

    @property
    def num_elements(self) -> int:
        return self.num_cables * self.elements_per_cable

    @property
    def wavelength(self) -> float:
        return self.radio.wavelength


class OptimizerParams(BaseModel):
    """Alternating Riemannian optimizer settings"""

    model_config = _FROZEN

    outer_iters: int = 20
    inner_iters: int = 100
    tau_max: float = 1e-2
    tau_min: float = 1e-10
    shrink: float = 0.5
    armijo: float = 1e-4
    outer_tol: float = 1e-3
    mc_samples: int = 100
    fd_step: float = 1e-5

    @model_validator(mode="after")
    def _check_params(self) -> "OptimizerParams":
        if self.outer_iters < 1 or self.inner_iters < 1:
            raise ValueError("outer_iters and inner_iters must be at least 1")
        if not 0.0 < self.tau_min < self.tau_max:
            raise ValueError("step bounds must satisfy 0 < tau_min < tau_max")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0.0 < self.armijo < 1.0:
            raise ValueError("armijo must lie in (0, 1)")
        if self.outer_tol < 0.0:
            raise ValueError("outer_tol must be non-negative")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be at least 1")
        if not self.fd_step > 0.0:
            raise ValueError("fd_step must be positive")
        return self


class TheoremAnalysis(BaseModel):
    """Settings for the closed-form versus brute-force correlation tables"""

    model_config = _FROZEN

    trials: int = 20
    resolution: int = 100
    pair_resolution: int = 64
    curve_points: int = 181

    @model_validator(mode="after")
    def _check_analysis(self) -> "TheoremAnalysis":
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.resolution < MIN_GRID_RESOLUTION or self.pair_resolution < MIN_GRID_RESOLUTION:
            raise ValueError(f"resolution and pair_resolution must be >= {MIN_GRID_RESOLUTION}")
        if self.curve_points < 2:
            raise ValueError("curve_points must be at least 2")
        return self


class ExperimentSpec(BaseModel):
    """A complete experiment: scenario, optimizer settings, sweep and schemes"""

    model_config = _FROZEN

    kind: ExperimentKind = ExperimentKind.CONVERGENCE
    scenario: Scenario = Field(default_factory=Scenario)
    optimizer: OptimizerParams = Field(default_factory=OptimizerParams)
    sweep_values: List[float] = Field(default_factory=list)
    schemes: Optional[List[Scheme]] = None
    total_antennas: int = 64
    total_cable_length: float = 32.0
    budget_m_values: List[int] = Field(default_factory=list)
    region_preset: Optional[RegionPreset] = None
    analysis: TheoremAnalysis = Field(default_factory=TheoremAnalysis)

    @model_validator(mode="before")
    @classmethod
    def _fill_defaults(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        kind = ExperimentKind(data.get("kind", ExperimentKind.CONVERGENCE))
        if not data.get("sweep_values") and kind in DEFAULT_SWEEP_VALUES:
            data["sweep_values"] = list(DEFAULT_SWEEP_VALUES[kind])
        if data.get("schemes") is None:
            data["schemes"] = list(DEFAULT_SCHEMES.get(kind, SCHEME_ORDER))
        return data

    @model_validator(mode="after")
    def _check_spec(self) -> "ExperimentSpec":
        values = self.sweep_values
        if self.kind in DEFAULT_SWEEP_VALUES and not values:
            raise ValueError("sweep_values must be non-empty")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("sweep_values must be sorted in increasing order")
        if len(set(self.schemes or [])) != len(self.schemes or []):
            raise ValueError("schemes must not repeat")

        sc = self.scenario
        if self.kind in (ExperimentKind.SWEEP_N, ExperimentKind.SWEEP_EVES, ExperimentKind.SWEEP_M_FIXED_BUDGET):
            if any(v != int(v) or v < 1 for v in values if self.kind != ExperimentKind.SWEEP_EVES):
                raise ValueError("sweep values must be positive integers")
        if self.kind == ExperimentKind.SWEEP_EVES and any(v != int(v) or v < 0 for v in values):
            raise ValueError("eavesdropper counts must be non-negative integers")
        if self.kind == ExperimentKind.SWEEP_N:
            for n in values:
                if sc.num_users + sc.num_eves > sc.num_cables * int(n):
                    raise ValueError(f"N = {int(n)} leaves fewer elements than users plus eavesdroppers")
        if self.kind == ExperimentKind.SWEEP_EVES:
            for i in values:
                if sc.num_users + int(i) > sc.num_elements:
                    raise ValueError(f"I = {int(i)} leaves fewer elements than users plus eavesdroppers")
        budget_ms = list(self.budget_m_values)
        if self.kind in (ExperimentKind.SWEEP_M_FIXED_BUDGET, ExperimentKind.CONVERGENCE):
            budget_ms += [int(v) for v in values]
        for m in budget_ms:
            if m < 1 or self.total_antennas % m != 0:
                raise ValueError(f"M = {m} must divide total_antennas = {self.total_antennas}")
        if budget_ms and sc.num_users + sc.num_eves > self.total_antennas:
            raise ValueError("total_antennas is smaller than users plus eavesdroppers")
        if self.kind == ExperimentKind.SWEEP_CABLE_LENGTH and any(v <= 0 for v in values):
            raise ValueError("cable lengths must be positive")
        if self.kind == ExperimentKind.SWEEP_SPHERE_RADIUS and any(v <= 0 for v in values):
            raise ValueError("sphere radii must be positive")
        if self.kind == ExperimentKind.SWEEP_SPHERE_RADIUS and self.region_preset is not None:
            raise ValueError("region_preset does not apply to the sphere-radius sweep")
        if self.kind == ExperimentKind.SWEEP_RICIAN and any(v < 0 for v in values):
            raise ValueError("Rician factors must be non-negative")
        if not 0.0 < self.total_cable_length < float("inf"):
            raise ValueError("total_cable_length must be positive")
        return self

    @property
    def sweep_param(self) -> str:
        return SWEEP_PARAMETERS[self.kind]


class ResultRow(BaseModel):
    experiment: str
    scheme: str
    sweep_param: str
    sweep_value: float
    rate_bps_hz: float = Field(ge=0.0)
    seed: int
    runtime_s: float = 0.0
    trace_ref: str = ""
    errors: str = ""
