"""
Array Geometry
Cable-tip parameterization of the towed array, feasibility checks and benchmark placements
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from src.core.errors import DegeneratePositionError, InfeasibleGeometryError
from src.core.models import PlacementKind

logger = logging.getLogger(__name__)

# |‖t_m‖ − L| must stay below this fraction of L
LENGTH_RTOL = 1e-9
# pairwise tip distances may undershoot D by this much (meters)
COLLISION_ATOL = 1e-9


def vec3(x: float, y: float, z: float) -> np.ndarray:
    return np.array([x, y, z], dtype=float)


def unit(v: np.ndarray) -> np.ndarray:
    """Normalize v; a zero or non-finite vector has no direction."""
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0 or not np.isfinite(norm):
        raise DegeneratePositionError(f"cannot normalize vector {v.tolist()}")
    return v / norm


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """M cable tips on the radius-L sphere, N elements evenly spaced along each cable"""

    apv: np.ndarray
    n_per_cable: int
    cable_len: float
    min_sep: float

    def __post_init__(self):
        apv = np.array(self.apv, dtype=float).reshape(-1, 3)
        if apv.shape[0] < 1:
            raise ValueError("an array geometry needs at least one cable")
        if self.n_per_cable < 1:
            raise ValueError("each cable needs at least one element")
        if not np.all(np.isfinite(apv)):
            raise ValueError("cable tips must be finite")
        apv.setflags(write=False)
        object.__setattr__(self, "apv", apv)

    @property
    def num_cables(self) -> int:
        return self.apv.shape[0]

    @property
    def num_elements(self) -> int:
        return self.num_cables * self.n_per_cable

    def elements(self) -> np.ndarray:
        return element_positions(self)

    def with_tip(self, m: int, tip: np.ndarray) -> "ArrayGeometry":
        apv = self.apv.copy()
        apv[m] = tip
        return ArrayGeometry(apv, self.n_per_cable, self.cable_len, self.min_sep)


@dataclass(frozen=True, eq=False)
class FixedGeometry:
    """Explicit element positions for fixed-position arrays"""

    elements_xyz: np.ndarray
    name: str = ""

    def __post_init__(self):
        elements = np.array(self.elements_xyz, dtype=float).reshape(-1, 3)
        elements.setflags(write=False)
        object.__setattr__(self, "elements_xyz", elements)

    @property
    def num_elements(self) -> int:
        return self.elements_xyz.shape[0]

    def elements(self) -> np.ndarray:
        return self.elements_xyz


@dataclass(frozen=True)
class ConstraintViolation:
    kind: str
    cables: Tuple[int, ...]
    value: float
    limit: float

    def __str__(self) -> str:
        if self.kind == "cable_length":
            return f"cable {self.cables[0]} tip norm {self.value:.6g} m differs from L = {self.limit:.6g} m"
        if self.kind == "collision":
            return f"cables {self.cables} tips {self.value:.6g} m apart, minimum {self.limit:.6g} m"
        return f"{self.kind}: {self.value} (limit {self.limit})"


def element_positions(geom: ArrayGeometry) -> np.ndarray:
    """All MN element positions t_{m,n} = (n/N) t_m, m-major with n = 1..N; row (m, N) is t_m itself."""
    scale = np.arange(1, geom.n_per_cable + 1, dtype=float) / geom.n_per_cable
    return (geom.apv[:, None, :] * scale[None, :, None]).reshape(-1, 3)


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.linalg.norm(diff, axis=-1)


def validate(geom: ArrayGeometry) -> List[ConstraintViolation]:
    """Feasibility report; empty when both the cable-length and separation constraints hold."""
    violations: List[ConstraintViolation] = []
    norms = np.linalg.norm(geom.apv, axis=1)
    for m, norm in enumerate(norms):
        if abs(norm - geom.cable_len) >= LENGTH_RTOL * geom.cable_len:
            violations.append(ConstraintViolation("cable_length", (m,), float(norm), geom.cable_len))

    distances = pairwise_distances(geom.apv)
    rows, cols = np.triu_indices(geom.num_cables, k=1)
    for i, j in zip(rows, cols):
        if distances[i, j] < geom.min_sep - COLLISION_ATOL:
            violations.append(ConstraintViolation("collision", (int(i), int(j)), float(distances[i, j]), geom.min_sep))
    return violations


def validate_fixed(geom: FixedGeometry, expected_count: int) -> List[ConstraintViolation]:
    violations: List[ConstraintViolation] = []
    if geom.num_elements != expected_count:
        violations.append(ConstraintViolation("element_count", (), float(geom.num_elements), float(expected_count)))
    if not np.all(np.isfinite(geom.elements_xyz)):
        violations.append(ConstraintViolation("non_finite", (), float("nan"), 0.0))
    return violations


def _ring(num: int, offset: float, plane: str, radius: float) -> np.ndarray:
    angles = offset + 2.0 * np.pi * np.arange(num) / num
    tips = np.zeros((num, 3))
    tips[:, 0] = radius * np.cos(angles)
    if plane == "xy":
        tips[:, 1] = radius * np.sin(angles)
    else:
        tips[:, 2] = radius * np.sin(angles)
    return tips


def placement(kind: PlacementKind, M: int, N: int, L: float, D: float) -> ArrayGeometry:
    """
    Benchmark placements with equal angles between adjacent cables; the first cable points along +x.

    Hybrid splits the cables evenly between the x-O-y and x-O-z planes and rotates the x-O-z ring by
    half of its angular step (45 degrees for M = 8). A single hybrid cable points along +x.
    """
    kind = PlacementKind(kind)
    if M < 1:
        raise ValueError("placement needs at least one cable")
    if kind == PlacementKind.HORIZONTAL:
        apv = _ring(M, 0.0, "xy", L)
    elif kind == PlacementKind.VERTICAL:
        apv = _ring(M, 0.0, "xz", L)
    elif M == 1:
        apv = _ring(1, 0.0, "xy", L)
    else:
        if M % 2:
            raise ValueError(f"hybrid placement needs an even number of cables, got M = {M}")
        half = M // 2
        apv = np.vstack([_ring(half, 0.0, "xy", L), _ring(half, np.pi / half, "xz", L)])

    geom = ArrayGeometry(apv, N, L, D)
    collisions = [v for v in validate(geom) if v.kind == "collision"]
    if collisions:
        raise InfeasibleGeometryError(
            f"{kind.value} placement with M = {M}, L = {L} violates the separation D = {D}", collisions
        )
    return geom


def upa_positions(rows: int, cols: int, spacing: float) -> FixedGeometry:
    """rows x cols grid in the y-O-z plane centered at the origin (boresight +x), row-major."""
    if rows < 1 or cols < 1:
        raise ValueError("a UPA needs at least one row and one column")
    if not spacing > 0:
        raise ValueError("UPA spacing must be positive")
    z = (np.arange(rows) - (rows - 1) / 2.0) * spacing
    y = (np.arange(cols) - (cols - 1) / 2.0) * spacing
    zz, yy = np.meshgrid(z, y, indexing="ij")
    elements = np.column_stack([np.zeros(rows * cols), yy.ravel(), zz.ravel()])
    return FixedGeometry(elements, name=f"upa_{rows}x{cols}")


def fixed_budget_dims(total_antennas: int, total_cable_length: float, M: int) -> Tuple[int, float]:
    """Per-cable (N, L) for M cables sharing a fixed antenna count and total cable length."""
    if M < 1 or total_antennas % M:
        raise ValueError(f"M = {M} does not divide {total_antennas} antennas")
    return total_antennas // M, total_cable_length / M
