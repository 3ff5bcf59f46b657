"""
Ergodic Rate Objective
Monte Carlo average of the ZF user rate over fixed realizations, evaluated cable by cable
"""

import time
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from src.core.cache import CacheKey, InMemoryCache
from src.core.errors import DegeneratePositionError, PerformanceMonitor
from src.physics.beamforming import user_rate, zf_power
from src.physics.channel import COINCIDENCE_ATOL, phasors
from src.physics.geometry import ArrayGeometry, FixedGeometry
from src.simulation.scenarios import Realization


class ErgodicRateEvaluator:
    """
    Sample-average ZF rate for a fixed list of realizations.

    The Gram matrix [H,G]ᴴ[H,G] is the sum of per-cable contributions. A cable subproblem keeps the
    other cables' contributions and recomputes only its own; both paths add the contributions in cable
    order, so a cable objective and the full objective agree bit for bit.
    """

    def __init__(
        self,
        realizations: Sequence[Realization],
        P: float,
        noise_power: float,
        cache_size: int = 4096,
        monitor: Optional[PerformanceMonitor] = None,
    ):
        if not realizations:
            raise ValueError("the objective needs at least one realization")
        first = realizations[0]
        if any(r.num_users != first.num_users or r.num_eves != first.num_eves for r in realizations):
            raise ValueError("all realizations must have the same numbers of users and eavesdroppers")
        self.num_users = first.num_users
        self.wavelength = first.wavelength
        self.rician_factor = first.rician_factor
        self.P = P
        self.noise_power = noise_power
        self.positions = np.stack([r.positions for r in realizations])
        self.gains = self.wavelength / (4.0 * np.pi * np.linalg.norm(self.positions, axis=-1))
        self.nlos = None
        if not np.isinf(self.rician_factor) and first.nlos is not None:
            self.nlos = np.stack([r.nlos for r in realizations])
        self.cache = InMemoryCache(cache_size)
        self.monitor = monitor
        self.evaluations = 0
        self.last_deficient = 0
        self.max_condition = 0.0

    @property
    def num_realizations(self) -> int:
        return self.positions.shape[0]

    # ----- channels -----

    def _mix(self, los: np.ndarray, rows: slice) -> np.ndarray:
        if self.nlos is None:
            return los
        kappa = self.rician_factor
        nlos = self.nlos[:, rows, :]
        return np.sqrt(kappa / (1.0 + kappa)) * los + np.sqrt(1.0 / (1.0 + kappa)) * self.gains[:, None, :] * nlos

    def _channels(self, elements: np.ndarray, rows: slice) -> np.ndarray:
        """Channel rows for the given elements, shape (Q, len(elements), K+I)"""
        diff = elements[None, :, None, :] - self.positions[:, None, :, :]
        distances = np.linalg.norm(diff, axis=-1)
        if distances.min() < COINCIDENCE_ATOL:
            raise DegeneratePositionError("a user or eavesdropper coincides with an antenna element")
        los = phasors(distances, self.wavelength) * self.gains[:, None, :]
        return self._mix(los, rows)

    def cable_gram(self, m: int, tip: np.ndarray, n_per_cable: int) -> np.ndarray:
        scale = np.arange(1, n_per_cable + 1, dtype=float) / n_per_cable
        elements = scale[:, None] * np.asarray(tip, dtype=float)[None, :]
        A = self._channels(elements, slice(m * n_per_cable, (m + 1) * n_per_cable))
        return np.matmul(A.conj().transpose(0, 2, 1), A)

    def _geometry_grams(self, geom: ArrayGeometry) -> List[np.ndarray]:
        return [self.cable_gram(m, geom.apv[m], geom.n_per_cable) for m in range(geom.num_cables)]

    @staticmethod
    def _sum_grams(grams: Sequence[np.ndarray]) -> np.ndarray:
        total = grams[0].copy()
        for gram in grams[1:]:
            total += gram
        return total

    # ----- rates -----

    def rates_from_gram(self, gram: np.ndarray) -> np.ndarray:
        """Per-realization ZF rates; rank-deficient samples contribute 0"""
        if self.num_users == 0:
            return np.zeros(gram.shape[0])
        wbar, deficient, cond = zf_power(gram, self.num_users)
        self.evaluations += 1
        self.last_deficient = int(deficient.sum())
        finite = cond[np.isfinite(cond)]
        if finite.size:
            self.max_condition = max(self.max_condition, float(finite.max()))
        rates = np.where(deficient, 0.0, user_rate(np.where(deficient, 1.0, wbar), self.P, self.noise_power))
        return np.asarray(rates, dtype=float)

    def _mean_rate(self, key: str, grams: Sequence[np.ndarray]) -> float:
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        value = float(np.mean(self.rates_from_gram(self._sum_grams(grams))))
        self.cache.set(key, value)
        return value

    def evaluate(self, geom: ArrayGeometry) -> float:
        start = time.perf_counter()
        key = CacheKey.generate("objective", geom.apv, geom.n_per_cable)
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        value = self._mean_rate(key, self._geometry_grams(geom))
        if self.monitor is not None:
            self.monitor.check_objective_performance(self.num_realizations, (time.perf_counter() - start) * 1000.0)
        return value

    __call__ = evaluate

    def rate_samples(self, geom: ArrayGeometry) -> np.ndarray:
        return self.rates_from_gram(self._sum_grams(self._geometry_grams(geom)))

    def element_gram(self, elements: np.ndarray) -> np.ndarray:
        elements = np.asarray(elements, dtype=float).reshape(-1, 3)
        A = self._channels(elements, slice(0, elements.shape[0]))
        return np.matmul(A.conj().transpose(0, 2, 1), A)

    def evaluate_elements(self, elements: np.ndarray) -> float:
        """Objective for explicit element positions (fixed-position arrays)"""
        return float(np.mean(self.rates_from_gram(self.element_gram(elements))))

    def evaluate_fixed(self, geom: FixedGeometry) -> float:
        return self.evaluate_elements(geom.elements())

    def upper_bound_from_gram(self, gram: np.ndarray) -> float:
        """Mean MRT max-min rate; user channel norms are the leading diagonal of the Gram matrix"""
        if self.num_users == 0:
            return 0.0
        norms_sq = np.real(np.diagonal(gram, axis1=1, axis2=2))[:, : self.num_users]
        snr = (self.P / self.noise_power) / np.sum(1.0 / norms_sq, axis=1)
        return float(np.mean(np.log2(1.0 + snr)))

    def upper_bound(self, geom: ArrayGeometry) -> float:
        return self.upper_bound_from_gram(self._sum_grams(self._geometry_grams(geom)))

    def cable_objective(self, geom: ArrayGeometry, m: int) -> "CableObjective":
        return CableObjective(self, geom, m)

    def diagnostics(self) -> Dict:
        return {
            "evaluations": self.evaluations,
            "last_rank_deficient": self.last_deficient,
            "max_condition": self.max_condition,
            "cache": self.cache.get_stats(),
        }


class CableObjective:
    """The objective as a function of one cable tip, the other cables fixed"""

    def __init__(self, evaluator: ErgodicRateEvaluator, geom: ArrayGeometry, m: int):
        self.evaluator = evaluator
        self.geom = geom
        self.m = m
        self.grams = evaluator._geometry_grams(geom)

    def __call__(self, tip: np.ndarray) -> float:
        apv = self.geom.apv.copy()
        apv[self.m] = tip
        key = CacheKey.generate("objective", apv, self.geom.n_per_cable)
        cached = self.evaluator.cache.get(key)
        if cached is not None:
            return cached
        grams = list(self.grams)
        grams[self.m] = self.evaluator.cable_gram(self.m, tip, self.geom.n_per_cable)
        return self.evaluator._mean_rate(key, grams)


def ergodic_objective(geom: ArrayGeometry, realizations: Sequence[Realization], P: float, noise_power: float) -> float:
    return ErgodicRateEvaluator(realizations, P, noise_power).evaluate(geom)


def central_difference(f: Callable[[np.ndarray], float], t: np.ndarray, h: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    grad = np.zeros(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        grad[i] = (f(t + e) - f(t - e)) / (2.0 * h)
    return grad


def euclid_grad(
    objective: Callable[[ArrayGeometry], float], geom: ArrayGeometry, m: int, h: float = 1e-5
) -> np.ndarray:
    """Central finite differences of objective in the coordinates of t_m"""
    return central_difference(lambda tip: objective(geom.with_tip(m, tip)), geom.apv[m], h)
