"""
Array Response Correlation
Exact, far-field and same-direction correlations between user and eavesdropper array responses,
closed-form minima for one and two cables, and a brute-force orientation search used to check them
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np

from src.core.errors import DomainError
from src.core.models import MIN_GRID_RESOLUTION
from src.physics.geometry import unit

logger = logging.getLogger(__name__)

# |sin(πx/(Nλ))| below this switches the Dirichlet ratio to the direct phasor sum
DIRICHLET_SINGULAR_ATOL = 1e-8

# tips of shape (B, M, 3) -> correlations of shape (B,)
CorrelationFn = Callable[[np.ndarray], np.ndarray]


class CorrelationRegime(str, Enum):
    SELF = "self"
    ZERO = "zero"
    CLOSED_FORM = "closed_form"
    APERTURE_SCAN = "aperture_scan"


@dataclass(frozen=True)
class MinimumCorrelation:
    """
    Minimum correlation and where it is attained.

    tip_projection is the inner product between the first cable tip and the reference direction at a
    minimizer (Δ̂ = (r̂_u − r̂_e)/δ for the far-field results, r̂ for the same-direction result); the sign
    is free. None means every orientation attains the value.

    scan_value and scan_projection hold the minimum over tilted tips when it differs from the
    orthogonal-tip value (same-direction result outside its regime).
    """

    value: float
    regime: CorrelationRegime
    tip_projection: Optional[float]
    rule: str
    scan_value: Optional[float] = None
    scan_projection: Optional[float] = None

    @property
    def best(self) -> float:
        return self.value if self.scan_value is None else min(self.value, self.scan_value)


@dataclass(frozen=True, eq=False)
class PairGeometry:
    dir_u: np.ndarray
    dir_e: np.ndarray
    dist_u: float
    dist_e: float

    def __post_init__(self):
        for name in ("dir_u", "dir_e"):
            value = np.asarray(getattr(self, name), dtype=float)
            if abs(np.linalg.norm(value) - 1.0) >= 1e-12:
                raise ValueError(f"{name} must be a unit vector")
            object.__setattr__(self, name, value)
        if not (self.dist_u > 0 and self.dist_e > 0):
            raise ValueError("distances must be positive")

    @classmethod
    def from_positions(cls, r_u: np.ndarray, r_e: np.ndarray) -> "PairGeometry":
        r_u = np.asarray(r_u, dtype=float)
        r_e = np.asarray(r_e, dtype=float)
        return cls(unit(r_u), unit(r_e), float(np.linalg.norm(r_u)), float(np.linalg.norm(r_e)))

    @property
    def user_position(self) -> np.ndarray:
        return self.dist_u * self.dir_u

    @property
    def eve_position(self) -> np.ndarray:
        return self.dist_e * self.dir_e

    @property
    def delta_vector(self) -> np.ndarray:
        return self.dir_u - self.dir_e

    @property
    def delta(self) -> float:
        return float(np.linalg.norm(self.delta_vector))


def _complex_sum(cycles: np.ndarray, axis: int = -1) -> np.ndarray:
    frac = cycles - np.floor(cycles)
    return np.sum(np.exp(2j * np.pi * frac), axis=axis)


def _phasor_sum(cycles: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.abs(_complex_sum(cycles, axis=axis))


def _separable(correlation: CorrelationFn, cable_sum: Callable[[np.ndarray], np.ndarray], N: int) -> CorrelationFn:
    """
    Attach the per-cable complex sum: tips (B, 3) -> (B,). The correlation of several cables is then
    |Σ_m cable_sum(t_m)|, which lets the brute-force oracle search two-cable grids without re-summing.
    """
    correlation.cable_sum = cable_sum
    correlation.elements_per_cable = N
    return correlation


def _elements(apv: np.ndarray, N: int) -> np.ndarray:
    """Element positions for tips of shape (..., M, 3) -> (..., MN, 3)"""
    apv = np.asarray(apv, dtype=float)
    scale = np.arange(1, N + 1, dtype=float) / N
    elements = apv[..., :, None, :] * scale[:, None]
    return elements.reshape(*apv.shape[:-2], -1, 3)


def corr_exact(elements: np.ndarray, r_u: np.ndarray, r_e: np.ndarray, lam: float) -> float:
    """|a(r_u)ᴴ a(r_e)| under the exact spherical-wave model"""
    elements = np.asarray(elements, dtype=float).reshape(-1, 3)
    d_u = np.linalg.norm(elements - np.asarray(r_u, dtype=float), axis=1)
    d_e = np.linalg.norm(elements - np.asarray(r_e, dtype=float), axis=1)
    return float(min(_phasor_sum((d_e - d_u) / lam), elements.shape[0]))


def corr_far_field(apv: np.ndarray, N: int, lam: float, dir_u: np.ndarray, dir_e: np.ndarray) -> float:
    """|Σ_m Σ_n exp(j 2π/λ (r̂_u − r̂_e)ᵀ t_{m,n})|"""
    elements = _elements(np.asarray(apv, dtype=float).reshape(-1, 3), N)
    x = elements @ (np.asarray(dir_u, dtype=float) - np.asarray(dir_e, dtype=float))
    return float(min(_phasor_sum(x / lam), elements.shape[0]))


def far_field_correlation_fn(N: int, lam: float, dir_u: np.ndarray, dir_e: np.ndarray) -> CorrelationFn:
    """Batched corr_far_field over candidate tip sets, for brute_force_min_corr."""
    delta = np.asarray(dir_u, dtype=float) - np.asarray(dir_e, dtype=float)

    def correlation(tips: np.ndarray) -> np.ndarray:
        elements = _elements(tips, N)
        bound = elements.shape[-2]
        return np.minimum(_phasor_sum((elements @ delta) / lam), bound)

    def cable_sum(tips: np.ndarray) -> np.ndarray:
        return _complex_sum((_elements(tips[:, None, :], N) @ delta) / lam)

    return _separable(correlation, cable_sum, N)


def same_direction_correlation_fn(
    N: int, lam: float, direction: np.ndarray, dist_u: float, dist_e: float
) -> CorrelationFn:
    d = unit(direction)
    coeff = 0.5 * (1.0 / dist_e - 1.0 / dist_u) / lam

    def aperture(elements: np.ndarray) -> np.ndarray:
        proj = elements @ d
        return np.sum(elements**2, axis=-1) - proj**2

    def correlation(tips: np.ndarray) -> np.ndarray:
        elements = _elements(tips, N)
        return np.minimum(_phasor_sum(coeff * aperture(elements)), elements.shape[-2])

    def cable_sum(tips: np.ndarray) -> np.ndarray:
        return _complex_sum(coeff * aperture(_elements(tips[:, None, :], N)))

    return _separable(correlation, cable_sum, N)


def dirichlet_single(x, N: int, lam: float):
    """|sin(πx/λ) / sin(πx/(Nλ))|, the single-cable far-field correlation; scalar or array x"""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    num = np.sin(np.pi * x_arr / lam)
    den = np.sin(np.pi * x_arr / (N * lam))
    singular = np.abs(den) < DIRICHLET_SINGULAR_ATOL
    out = np.empty_like(x_arr)
    regular = ~singular
    out[regular] = np.abs(num[regular] / den[regular])
    if np.any(singular):
        n = np.arange(1, N + 1, dtype=float)
        out[singular] = _phasor_sum(x_arr[singular, None] * n[None, :] / (N * lam))
    out = np.minimum(out, float(N))
    return float(out[0]) if np.ndim(x) == 0 else out


def _check_far_field_args(L: float, delta: float):
    if not L > 0:
        raise DomainError("cable length must be positive")
    if not -1e-12 <= delta <= 2.0 + 1e-12:
        raise DomainError(f"direction difference norm {delta} outside [0, 2]")


def theorem1_min(N: int, L: float, delta: float, lam: float) -> MinimumCorrelation:
    """Minimum far-field correlation over one cable's tip orientation"""
    _check_far_field_args(L, delta)
    if delta <= 0.0:
        return MinimumCorrelation(float(N), CorrelationRegime.SELF, None, "identical directions, any tip")
    if N == 1:
        return MinimumCorrelation(1.0, CorrelationRegime.SELF, None, "single element, any tip")
    x = delta * L
    if x >= lam:
        return MinimumCorrelation(0.0, CorrelationRegime.ZERO, lam / delta, "Δ̂ᵀt_1 = λ/δ")
    return MinimumCorrelation(dirichlet_single(x, N, lam), CorrelationRegime.CLOSED_FORM, L, "t_1 = ±LΔ̂")


def theorem2_minimizer(N: int, L: float, delta: float, lam: float) -> MinimumCorrelation:
    """Minimum far-field correlation over two cables; minimizers have t_2 = −t_1"""
    _check_far_field_args(L, delta)
    if delta <= 0.0:
        return MinimumCorrelation(2.0 * N, CorrelationRegime.SELF, None, "identical directions, any tips")
    c = (N + 1.0) / N
    x = delta * L
    if 2.0 * c * x >= lam:
        return MinimumCorrelation(
            0.0, CorrelationRegime.ZERO, lam / (2.0 * c * delta), "t_2 = −t_1, Δ̂ᵀt_1 = λN/(2(N+1)δ)"
        )
    value = 2.0 * abs(np.cos(np.pi * c * x / lam)) * dirichlet_single(x, N, lam)
    return MinimumCorrelation(float(value), CorrelationRegime.CLOSED_FORM, L, "t_2 = −t_1 = ±LΔ̂")


def theorem2_min(N: int, L: float, delta: float, lam: float) -> float:
    return theorem2_minimizer(N, L, delta, lam).value


def corr_same_direction(
    apv: np.ndarray, N: int, lam: float, direction: np.ndarray, dist_u: float, dist_e: float
) -> float:
    """Correlation when user and eavesdropper share a direction and differ in distance"""
    fn = same_direction_correlation_fn(N, lam, direction, dist_u, dist_e)
    return float(fn(np.asarray(apv, dtype=float).reshape(1, -1, 3))[0])


def same_direction_kernel(N: int, aperture_len, dist_u: float, dist_e: float, lam: float):
    """|Σ_n exp(j π/λ (1/d_e − 1/d_u) (n/N)² ℓ²)| for an effective aperture length ℓ (scalar or array)"""
    ell = np.atleast_1d(np.asarray(aperture_len, dtype=float))
    n = np.arange(1, N + 1, dtype=float)
    coeff = 0.5 * (1.0 / dist_e - 1.0 / dist_u) / lam
    cycles = coeff * (n[None, :] / N) ** 2 * ell[:, None] ** 2
    out = np.minimum(_phasor_sum(cycles), float(N))
    return float(out[0]) if np.ndim(aperture_len) == 0 else out


def theorem3_min(
    N: int, L: float, dist_u: float, dist_e: float, lam: float, scan_points: int = 4097
) -> MinimumCorrelation:
    """
    Same-direction correlation F_sd(L) at the orthogonal tip r̂ᵀt_1 = 0.

    With |1/d_e − 1/d_u| L² < λ the kernel decreases in the aperture and F_sd(L) is the minimum over
    all orientations. Beyond that regime a tilted tip with effective aperture ℓ ∈ [0, L] can do better;
    the scan over ℓ is reported in scan_value and scan_projection while value stays F_sd(L).
    """
    if not L > 0 or not (dist_u > 0 and dist_e > 0):
        raise DomainError("cable length and distances must be positive")
    if dist_u == dist_e:
        return MinimumCorrelation(float(N), CorrelationRegime.SELF, None, "equal distances, any tip")
    value = same_direction_kernel(N, L, dist_u, dist_e, lam)
    if abs(1.0 / dist_e - 1.0 / dist_u) * L**2 < lam:
        return MinimumCorrelation(value, CorrelationRegime.CLOSED_FORM, 0.0, "r̂ᵀt_1 = 0", value, 0.0)
    ell = np.linspace(0.0, L, scan_points)
    values = same_direction_kernel(N, ell, dist_u, dist_e, lam)
    best = int(np.argmin(values))
    projection = float(np.sqrt(max(L**2 - ell[best] ** 2, 0.0)))
    return MinimumCorrelation(
        value, CorrelationRegime.APERTURE_SCAN, 0.0, "r̂ᵀt_1 = 0", float(values[best]), projection
    )


def argmin_tips(result: MinimumCorrelation, reference: np.ndarray, L: float, num_cables: int = 1) -> np.ndarray:
    """Concrete tips realizing a theorem's argmin rule; the second cable, if any, mirrors the first."""
    d = unit(reference)
    helper = np.eye(3)[int(np.argmin(np.abs(d)))]
    perp = unit(helper - (helper @ d) * d)
    p = 0.0 if result.tip_projection is None else min(abs(result.tip_projection), L)
    t1 = p * d + np.sqrt(max(L**2 - p**2, 0.0)) * perp
    if num_cables == 1:
        return t1[None, :]
    return np.vstack([t1, -t1])


# ============= BRUTE FORCE ORACLE =============


@dataclass(frozen=True, eq=False)
class BruteForceResult:
    value: float
    tips: np.ndarray
    evaluations: int


def _orientations(theta: np.ndarray, phi: np.ndarray, L: float) -> np.ndarray:
    return L * np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)


def _grid(resolution: int) -> Tuple[np.ndarray, np.ndarray]:
    theta = np.pi * (np.arange(resolution) + 0.5) / resolution
    phi = 2.0 * np.pi * np.arange(resolution) / resolution
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    return tt.ravel(), pp.ravel()


def brute_force_min_corr(
    correlation_fn: CorrelationFn,
    L: float,
    num_cables: int = 1,
    resolution: int = 100,
    refine_rounds: int = 8,
    workers: int = 1,
    chunk_pairs: int = 65536,
) -> BruteForceResult:
    """
    Grid minimum of a correlation over tip orientations on the radius-L sphere.

    Each cable's orientation runs over a resolution x resolution (polar, azimuth) grid; two cables use
    the product grid, searched through the per-cable sums when the correlation is separable. The best
    grid point is then refined by a shrinking local grid. Chunks are reduced in index order so the result
    does not depend on the worker count.
    """
    if resolution < MIN_GRID_RESOLUTION:
        raise ValueError(f"grid resolution must be at least {MIN_GRID_RESOLUTION} per angular dimension")
    if num_cables not in (1, 2):
        raise ValueError("brute force supports one or two cables")

    theta, phi = _grid(resolution)
    orient = _orientations(theta, phi, L)
    count = orient.shape[0]

    if num_cables == 1:
        chunks: List[Tuple[int, int]] = [(s, min(s + chunk_pairs, count)) for s in range(0, count, chunk_pairs)]

        def evaluate(bounds: Tuple[int, int]) -> Tuple[float, int]:
            values = correlation_fn(orient[bounds[0] : bounds[1], None, :])
            idx = int(np.argmin(values))
            return float(values[idx]), bounds[0] + idx

    elif hasattr(correlation_fn, "cable_sum"):
        rows = max(1, chunk_pairs // count)
        chunks = [(s, min(s + rows, count)) for s in range(0, count, rows)]
        sums = correlation_fn.cable_sum(orient)
        bound = 2.0 * correlation_fn.elements_per_cable

        def evaluate(bounds: Tuple[int, int]) -> Tuple[float, int]:
            values = np.minimum(np.abs(sums[bounds[0] : bounds[1], None] + sums[None, :]), bound).ravel()
            idx = int(np.argmin(values))
            return float(values[idx]), bounds[0] * count + idx

    else:
        rows = max(1, chunk_pairs // count)
        chunks = [(s, min(s + rows, count)) for s in range(0, count, rows)]

        def evaluate(bounds: Tuple[int, int]) -> Tuple[float, int]:
            first = orient[bounds[0] : bounds[1]]
            tips = np.empty((first.shape[0], count, 2, 3))
            tips[:, :, 0, :] = first[:, None, :]
            tips[:, :, 1, :] = orient[None, :, :]
            values = correlation_fn(tips.reshape(-1, 2, 3))
            idx = int(np.argmin(values))
            return float(values[idx]), bounds[0] * count + idx

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, chunks))
    else:
        results = [evaluate(c) for c in chunks]

    best_value, best_index = min(results, key=lambda item: item[0])
    if num_cables == 1:
        angles = np.array([[theta[best_index], phi[best_index]]])
    else:
        i, j = divmod(best_index, count)
        angles = np.array([[theta[i], phi[i]], [theta[j], phi[j]]])
    evaluations = count**num_cables

    # local refinement around the best grid point
    step = np.array([np.pi / resolution, 2.0 * np.pi / resolution])
    offsets = np.linspace(-2.0, 2.0, 5)
    for _ in range(refine_rounds):
        axes = [offsets * step[k % 2] for k in range(2 * num_cables)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, num_cables, 2)
        candidates = angles[None, :, :] + mesh
        tips = _orientations(candidates[..., 0], candidates[..., 1], L)
        values = correlation_fn(tips)
        idx = int(np.argmin(values))
        evaluations += len(values)
        if values[idx] < best_value:
            best_value = float(values[idx])
            angles = candidates[idx]
        step = step / 4.0

    tips = _orientations(angles[:, 0], angles[:, 1], L)
    logger.debug(f"Brute-force correlation minimum {best_value:.6g} after {evaluations} evaluations")
    return BruteForceResult(value=best_value, tips=tips, evaluations=evaluations)
