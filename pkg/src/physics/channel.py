"""
Channel Model
Spherical-wave array responses, free-space LoS channels, Rician fading and the far-field distance expansion
"""

import numpy as np

from src.core.errors import DegeneratePositionError
from src.core.models import SPEED_OF_LIGHT

# distances below this (meters) count as coincident positions
COINCIDENCE_ATOL = 1e-12


def wavelength(carrier_freq: float) -> float:
    return SPEED_OF_LIGHT / carrier_freq


def phasors(distances: np.ndarray, lam: float) -> np.ndarray:
    # reduce to the fractional cycle before scaling by 2π to keep phases accurate at km ranges
    cycles = distances / lam
    return np.exp(2j * np.pi * (cycles - np.floor(cycles)))


def array_response(elements: np.ndarray, r: np.ndarray, lam: float) -> np.ndarray:
    """a(r) with entries exp(j 2π ‖t_{m,n} − r‖ / λ)"""
    return array_responses(elements, np.asarray(r, dtype=float).reshape(1, 3), lam)[:, 0]


def array_responses(elements: np.ndarray, points: np.ndarray, lam: float) -> np.ndarray:
    """Array responses for several positions at once, shape (MN, P)."""
    elements = np.asarray(elements, dtype=float).reshape(-1, 3)
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    distances = np.linalg.norm(elements[:, None, :] - points[None, :, :], axis=-1)
    if distances.size and distances.min() < COINCIDENCE_ATOL:
        raise DegeneratePositionError("position coincides with an antenna element")
    return phasors(distances, lam)


def path_gain(r: np.ndarray, lam: float) -> float:
    """Free-space amplitude gain λ / (4π‖r‖)"""
    return float(path_gains(np.asarray(r, dtype=float).reshape(1, 3), lam)[0])


def path_gains(points: np.ndarray, lam: float) -> np.ndarray:
    dist = np.linalg.norm(np.asarray(points, dtype=float).reshape(-1, 3), axis=1)
    if dist.size and dist.min() <= 0.0:
        raise DegeneratePositionError("path gain undefined at zero distance")
    return lam / (4.0 * np.pi * dist)


def los_channel(elements: np.ndarray, r: np.ndarray, lam: float) -> np.ndarray:
    return path_gain(r, lam) * array_response(elements, r, lam)


def los_channels(elements: np.ndarray, points: np.ndarray, lam: float) -> np.ndarray:
    """LoS channel vectors as columns, shape (MN, P)."""
    return array_responses(elements, points, lam) * path_gains(points, lam)[None, :]


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric CN(0, 1) draws."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def rician_mix(los: np.ndarray, nlos_std: np.ndarray, rician_factor: float) -> np.ndarray:
    """
    Combine LoS channels with standardized NLoS draws.

    Works on a single vector or on columns; the NLoS part of each column is scaled by that column's
    path gain |α| = ‖los‖/√MN so the average power stays |α|²MN for every κ.
    """
    if np.isinf(rician_factor):
        return los.copy()
    alpha = np.linalg.norm(los, axis=0) / np.sqrt(los.shape[0])
    los_weight = np.sqrt(rician_factor / (1.0 + rician_factor))
    nlos_weight = np.sqrt(1.0 / (1.0 + rician_factor))
    return los_weight * los + nlos_weight * alpha * nlos_std


def rician_channel(los: np.ndarray, rician_factor: float, rng: np.random.Generator) -> np.ndarray:
    if rician_factor < 0:
        raise ValueError("Rician factor must be non-negative")
    if np.isinf(rician_factor):
        return los.copy()
    return rician_mix(los, complex_gaussian(rng, los.shape), rician_factor)


def approx_distance(t: np.ndarray, r: np.ndarray) -> float:
    """Second-order expansion ‖r‖ − r̂ᵀt + (‖t‖² − (r̂ᵀt)²) / (2‖r‖) of ‖t − r‖"""
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    dist = float(np.linalg.norm(r))
    if dist == 0.0:
        raise DegeneratePositionError("expansion undefined at the array center")
    proj = float(r @ t) / dist
    return dist - proj + (float(t @ t) - proj**2) / (2.0 * dist)
