"""
Scenarios
Random user and eavesdropper placement in conical regions or on spheres, and Monte Carlo realizations

Randomness comes from numpy's PCG64 generator. Every stream is derived from the scenario seed through
a SeedSequence spawn key, so results do not depend on execution order or thread count.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.core.models import (
    PlacementKind,
    RegionAssignment,
    RegionKind,
    RegionPreset,
    RegionSpec,
    Scenario,
    default_cone_regions,
)
from src.physics.beamforming import ChannelSet
from src.physics.channel import complex_gaussian, los_channels, rician_mix
from src.physics.geometry import ArrayGeometry, placement, unit

logger = logging.getLogger(__name__)


def experiment_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent PCG64 stream for (seed, keys)"""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys)))


def orthonormal_basis(axis: np.ndarray) -> np.ndarray:
    """Rows u, v, a with a = axis/‖axis‖ and u, v spanning its orthogonal plane"""
    a = unit(axis)
    helper = np.eye(3)[int(np.argmin(np.abs(a)))]
    u = unit(helper - (helper @ a) * a)
    v = np.cross(a, u)
    return np.vstack([u, v, a])


# ============= REGIONS =============


def default_three_cones() -> List[RegionSpec]:
    """Forward (+x), leftward (+y) and downward (−z) cones, 10° vertex angle, 100 m to 1000 m"""
    return default_cone_regions()


def downward_cone() -> RegionSpec:
    return RegionSpec(kind=RegionKind.CONE, axis=(0.0, 0.0, -1.0), vertex_angle=10.0, r_min=100.0, r_max=1000.0)


def leftward_cone() -> RegionSpec:
    return RegionSpec(kind=RegionKind.CONE, axis=(0.0, 1.0, 0.0), vertex_angle=20.0, r_min=100.0, r_max=1000.0)


def sphere_region(radius: float) -> RegionSpec:
    return RegionSpec(kind=RegionKind.SPHERE_SURFACE, radius=radius)


def sample_cones(region: RegionSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """Area-uniform directions over the cone's spherical cap, distances uniform in [r_min, r_max]"""
    if region.kind != RegionKind.CONE:
        raise ValueError("sample_cones needs a cone region")
    half = np.deg2rad(region.vertex_angle / 2.0)
    cos_t = rng.uniform(np.cos(half), 1.0, size)
    phi = rng.uniform(0.0, 2.0 * np.pi, size)
    dist = rng.uniform(region.r_min, region.r_max, size)
    sin_t = np.sqrt(np.clip(1.0 - cos_t**2, 0.0, None))
    local = np.column_stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t])
    directions = local @ orthonormal_basis(np.asarray(region.axis))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return directions * dist[:, None]


def sample_cone(region: RegionSpec, rng: np.random.Generator) -> np.ndarray:
    return sample_cones(region, rng, 1)[0]


def sample_sphere_surfaces(radius: float, rng: np.random.Generator, size: int) -> np.ndarray:
    if not radius > 0:
        raise ValueError("sphere radius must be positive")
    v = rng.standard_normal((size, 3))
    return radius * v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_sphere_surface(radius: float, rng: np.random.Generator) -> np.ndarray:
    return sample_sphere_surfaces(radius, rng, 1)[0]


def sample_region(region: RegionSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    if region.kind == RegionKind.CONE:
        return sample_cones(region, rng, size)
    return sample_sphere_surfaces(region.radius, rng, size)


def preset_regions(preset: RegionPreset) -> List[RegionSpec]:
    """Users and eavesdroppers share the preset's regions"""
    if preset == RegionPreset.DOWNWARD_10:
        return [downward_cone()]
    if preset == RegionPreset.LEFTWARD_20:
        return [leftward_cone()]
    return default_three_cones()


def apply_region_preset(sc: Scenario, preset: Optional[RegionPreset]) -> Scenario:
    if preset is None:
        return sc
    regions = preset_regions(preset)
    return sc.model_copy(update={"user_regions": regions, "eve_regions": list(regions)})


def assign_regions(
    count: int, num_regions: int, rng: np.random.Generator, mode: RegionAssignment = RegionAssignment.UNIFORM_RANDOM
) -> np.ndarray:
    """Region index per entity: independent uniform choice, or an even split with a random remainder"""
    if count == 0:
        return np.zeros(0, dtype=int)
    if mode == RegionAssignment.UNIFORM_RANDOM:
        return rng.integers(0, num_regions, count)
    base, remainder = divmod(count, num_regions)
    labels = np.repeat(np.arange(num_regions), base)
    extra = rng.choice(num_regions, remainder, replace=False)
    return rng.permutation(np.concatenate([labels, extra]).astype(int))


def _sample_entities(
    regions: Sequence[RegionSpec], count: int, rng: np.random.Generator, mode: RegionAssignment
) -> np.ndarray:
    positions = np.zeros((count, 3))
    labels = assign_regions(count, len(regions), rng, mode)
    for index, region in enumerate(regions):
        mask = labels == index
        if np.any(mask):
            positions[mask] = sample_region(region, rng, int(mask.sum()))
    return positions


# ============= REALIZATIONS =============


@dataclass(frozen=True, eq=False)
class Realization:
    """
    One draw of user and eavesdropper positions.

    The standardized NLoS draws are attached to element indices, so evaluating the channels for a
    moved array keeps the same random numbers (common random numbers across the optimization).
    `channels` holds the channels at the geometry used when the realization was generated.
    """

    user_positions: np.ndarray
    eve_positions: np.ndarray
    wavelength: float
    rician_factor: float = float("inf")
    nlos: Optional[np.ndarray] = None
    channels: Optional[ChannelSet] = None

    @property
    def num_users(self) -> int:
        return self.user_positions.shape[0]

    @property
    def num_eves(self) -> int:
        return self.eve_positions.shape[0]

    @property
    def positions(self) -> np.ndarray:
        return np.vstack([self.user_positions, self.eve_positions])

    def channel_matrix(self, elements: np.ndarray) -> np.ndarray:
        """[H, G] for the given element positions, shape (MN, K+I)"""
        los = los_channels(elements, self.positions, self.wavelength)
        if self.nlos is None or np.isinf(self.rician_factor):
            return los
        return rician_mix(los, self.nlos, self.rician_factor)

    def channel_set(self, elements: np.ndarray) -> ChannelSet:
        A = self.channel_matrix(elements)
        return ChannelSet(A[:, : self.num_users], A[:, self.num_users :])


def initial_geometry(sc: Scenario) -> ArrayGeometry:
    """Hybrid placement, or horizontal when M is odd"""
    kind = PlacementKind.HYBRID if sc.num_cables % 2 == 0 else PlacementKind.HORIZONTAL
    return placement(kind, sc.num_cables, sc.elements_per_cable, sc.cable_length, sc.min_separation)


def generate_realizations(
    sc: Scenario,
    Q: int,
    rng: np.random.Generator,
    geometry: Optional[ArrayGeometry] = None,
    with_channels: bool = True,
) -> List[Realization]:
    """
    Q independent position draws with channels evaluated at geometry (default: the initial placement).
    with_channels=False skips the channels; the random draws are the same either way.
    """
    if Q <= 0:
        return []
    elements = (geometry or initial_geometry(sc)).elements() if with_channels else None
    realizations: List[Realization] = []
    for _ in range(Q):
        users = _sample_entities(sc.user_regions, sc.num_users, rng, sc.region_assignment)
        eves = _sample_entities(sc.eve_regions, sc.num_eves, rng, sc.region_assignment)
        nlos = None
        if not np.isinf(sc.rician_factor):
            nlos = complex_gaussian(rng, (sc.num_elements, sc.num_users + sc.num_eves))
        draft = Realization(users, eves, sc.wavelength, sc.rician_factor, nlos)
        if elements is None:
            realizations.append(draft)
            continue
        realizations.append(
            Realization(users, eves, sc.wavelength, sc.rician_factor, nlos, draft.channel_set(elements))
        )
    logger.debug(f"Generated {Q} realizations with K={sc.num_users}, I={sc.num_eves}")
    return realizations
