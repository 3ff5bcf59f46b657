"""
Sphere Manifold
Tangent projection, vector transport, retraction and the conjugate search direction on the radius-L sphere
"""

import numpy as np

from src.core.errors import DegeneratePositionError

# below this gradient norm a cable counts as stationary
GRADIENT_FLOOR = 1e-15


def tangent_project(v: np.ndarray, t: np.ndarray, L: float) -> np.ndarray:
    """v − (t tᵀ / L²) v"""
    v = np.asarray(v, dtype=float)
    t = np.asarray(t, dtype=float)
    return v - t * (t @ v) / L**2


def riem_grad(euclid_g: np.ndarray, t: np.ndarray, L: float) -> np.ndarray:
    return tangent_project(euclid_g, t, L)


def transport(v: np.ndarray, t_new: np.ndarray, L: float) -> np.ndarray:
    return tangent_project(v, t_new, L)


def retract(t: np.ndarray, step: np.ndarray, L: float) -> np.ndarray:
    """L (t + step) / ‖t + step‖"""
    moved = np.asarray(t, dtype=float) + np.asarray(step, dtype=float)
    norm = float(np.linalg.norm(moved))
    if norm == 0.0:
        raise DegeneratePositionError("retraction of the zero vector")
    return L * moved / norm


def search_direction(riem_g: np.ndarray, prev_dir: np.ndarray, t_new: np.ndarray, L: float) -> np.ndarray:
    """μ = grad + κ · transport(prev_dir) with κ = 0.5/‖grad‖ (κ = 0 once the gradient vanishes)"""
    riem_g = np.asarray(riem_g, dtype=float)
    g_norm = float(np.linalg.norm(riem_g))
    if g_norm < GRADIENT_FLOOR:
        return riem_g.copy()
    kappa = 0.5 / g_norm
    return riem_g + kappa * transport(prev_dir, t_new, L)
