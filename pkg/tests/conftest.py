"""
Shared fixtures for the simulator test suite
"""

import numpy as np
import pytest

from src.core.models import OptimizerParams, PlacementKind, RadioParams, Scenario
from src.physics.geometry import placement
from src.simulation.scenarios import experiment_rng, generate_realizations

LAMBDA = 0.03


@pytest.fixture
def rng():
    """Fixed-seed PCG64 generator"""
    return np.random.default_rng(12345)


@pytest.fixture
def small_scenario():
    """Four cables of four elements serving two users against two eavesdroppers"""
    return Scenario(
        num_cables=4,
        elements_per_cable=4,
        cable_length=2.0,
        min_separation=0.5,
        num_users=2,
        num_eves=2,
        radio=RadioParams(tx_power="50 dBm", noise_power="-90 dBm"),
        seed=7,
    )


@pytest.fixture
def small_realizations(small_scenario):
    return generate_realizations(small_scenario, 5, experiment_rng(small_scenario.seed, 0))


@pytest.fixture
def small_geometry(small_scenario):
    sc = small_scenario
    return placement(PlacementKind.HYBRID, sc.num_cables, sc.elements_per_cable, sc.cable_length, sc.min_separation)


@pytest.fixture
def quick_params():
    """Optimizer settings small enough for unit tests"""
    return OptimizerParams(outer_iters=3, inner_iters=5, mc_samples=5)


class ConstantEvaluator:
    """Objective stub that is flat everywhere"""

    def __init__(self, value: float = 1.0):
        self.value = value
        self.evaluations = 0
        self.last_deficient = 0

    def evaluate(self, geom):
        self.evaluations += 1
        return self.value

    def cable_objective(self, geom, m):
        return lambda tip: self.value


@pytest.fixture
def constant_evaluator():
    return ConstantEvaluator()
