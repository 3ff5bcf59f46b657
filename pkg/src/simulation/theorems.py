"""
Correlation Analysis
Closed-form minimum correlations checked against brute-force orientation search, plus correlation curves
"""

from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

from src.core.errors import log_info
from src.core.models import ExperimentKind, ExperimentSpec
from src.physics.correlation import (
    CorrelationRegime,
    brute_force_min_corr,
    corr_exact,
    corr_far_field,
    far_field_correlation_fn,
    same_direction_correlation_fn,
    theorem1_min,
    theorem2_minimizer,
    theorem3_min,
)
from src.simulation.scenarios import experiment_rng

THEOREM_STREAM = list(ExperimentKind).index(ExperimentKind.ANALYZE_THEOREMS)

SAME_DIRECTION_LENGTHS = (1.0, 2.0, 4.0, 8.0)
SAME_DIRECTION_USER_DIST = 200.0
SAME_DIRECTION_EVE_DIST = 100.0
CURVE_LENGTHS = (1.0, 2.0, 4.0)
CURVE_USER_ANGLE_DEG = 89.8
CURVE_DISTANCE = 1e4


def direction_pair(delta: float, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Random unit directions with ‖r̂_u − r̂_e‖ = delta"""
    a = rng.standard_normal(3)
    a /= np.linalg.norm(a)
    b = rng.standard_normal(3)
    b -= (b @ a) * a
    b /= np.linalg.norm(b)
    half = np.arcsin(min(delta / 2.0, 1.0))
    return np.cos(half) * a + np.sin(half) * b, np.cos(half) * a - np.sin(half) * b


def _random_tuple(rng: np.random.Generator, in_regime: bool, scale: float = 1.0) -> Dict:
    N = int(rng.integers(2, 17))
    lam = float(rng.uniform(0.01, 0.1))
    L = float(rng.uniform(0.1, 4.0))
    threshold = lam / (L * scale)
    if in_regime or threshold >= 2.0:
        delta = float(rng.uniform(0.05, 0.95)) * min(threshold, 2.0)
    else:
        delta = float(rng.uniform(threshold, 2.0))
    return {"N": N, "L": L, "delta": delta, "wavelength": lam}


def _relative(closed: float, brute: float, N: float) -> float:
    return abs(brute - closed) / max(abs(closed), 1e-3 * N)


def theorem1_table(spec: ExperimentSpec, rng: np.random.Generator, workers: int = 1) -> pd.DataFrame:
    """One cable: closed-form minimum versus grid search, half the tuples in each regime"""
    records: List[Dict] = []
    for trial in range(spec.analysis.trials):
        params = _random_tuple(rng, in_regime=trial % 2 == 0)
        dir_u, dir_e = direction_pair(params["delta"], rng)
        closed = theorem1_min(params["N"], params["L"], params["delta"], params["wavelength"])
        fn = far_field_correlation_fn(params["N"], params["wavelength"], dir_u, dir_e)
        brute = brute_force_min_corr(fn, params["L"], 1, spec.analysis.resolution, workers=workers)
        delta_hat = (dir_u - dir_e) / params["delta"]
        records.append(
            {
                **params,
                "regime": closed.regime.value,
                "closed_form": closed.value,
                "brute_force": brute.value,
                "abs_error": abs(brute.value - closed.value),
                "rel_error": _relative(closed.value, brute.value, params["N"]),
                "argmin_projection": float(abs(brute.tips[0] @ delta_hat)),
                "rule": closed.rule,
                "evaluations": brute.evaluations,
            }
        )
    return pd.DataFrame.from_records(records)


def theorem2_table(spec: ExperimentSpec, rng: np.random.Generator, workers: int = 1) -> pd.DataFrame:
    """
    Two cables on the product orientation grid.

    antipodal_error is ‖t_1 + t_2‖/L at the grid minimizer; the last row checks identical directions,
    where every orientation pair gives 2N.
    """
    trials = max(1, spec.analysis.trials // 4)
    records: List[Dict] = []
    for trial in range(trials + 1):
        if trial < trials:
            params = _random_tuple(rng, in_regime=trial % 2 == 0, scale=2.0)
            dir_u, dir_e = direction_pair(params["delta"], rng)
        else:
            params = {"N": 8, "L": 4.0, "delta": 0.0, "wavelength": 0.03}
            dir_u = dir_e = np.array([0.0, 0.0, 1.0])
        closed = theorem2_minimizer(params["N"], params["L"], params["delta"], params["wavelength"])
        fn = far_field_correlation_fn(params["N"], params["wavelength"], dir_u, dir_e)
        brute = brute_force_min_corr(fn, params["L"], 2, spec.analysis.pair_resolution, workers=workers)
        records.append(
            {
                **params,
                "regime": closed.regime.value,
                "closed_form": closed.value,
                "brute_force": brute.value,
                "abs_error": abs(brute.value - closed.value),
                "rel_error": _relative(closed.value, brute.value, 2 * params["N"]),
                "antipodal_error": float(np.linalg.norm(brute.tips[0] + brute.tips[1]) / params["L"]),
                "rule": closed.rule,
                "evaluations": brute.evaluations,
            }
        )
    return pd.DataFrame.from_records(records)


def theorem3_table(spec: ExperimentSpec, N: int = 8, lam: float = 0.03, workers: int = 1) -> pd.DataFrame:
    """
    Same-direction pair at 200 m and 100 m over growing cable length.

    closed_form is F_sd(L) at the orthogonal tip; scan_min also covers tilted tips and is the value the
    grid search is checked against.
    """
    direction = np.array([1.0, 0.0, 0.0])
    records: List[Dict] = []
    for L in SAME_DIRECTION_LENGTHS:
        closed = theorem3_min(N, L, SAME_DIRECTION_USER_DIST, SAME_DIRECTION_EVE_DIST, lam)
        fn = same_direction_correlation_fn(N, lam, direction, SAME_DIRECTION_USER_DIST, SAME_DIRECTION_EVE_DIST)
        brute = brute_force_min_corr(fn, L, 1, spec.analysis.resolution, workers=workers)
        records.append(
            {
                "N": N,
                "L": L,
                "dist_u": SAME_DIRECTION_USER_DIST,
                "dist_e": SAME_DIRECTION_EVE_DIST,
                "wavelength": lam,
                "regime": closed.regime.value,
                "closed_form": closed.value,
                "scan_min": closed.best,
                "brute_force": brute.value,
                "abs_error": abs(brute.value - closed.best),
                "closed_projection": closed.tip_projection,
                "scan_projection": closed.scan_projection,
                "argmin_projection": float(abs(brute.tips[0] @ direction)),
                "rule": closed.rule,
            }
        )
    return pd.DataFrame.from_records(records)


def angle_curve_table(spec: ExperimentSpec, N: int = 8, lam: float = 0.03) -> pd.DataFrame:
    """
    Normalized correlation versus eavesdropper angle in the x-O-z plane, tip along +x.
    The user sits at 89.8°; the exact column uses both entities at 10⁴ m.
    """
    angles = np.linspace(0.0, 180.0, spec.analysis.curve_points)
    u = np.radians(CURVE_USER_ANGLE_DEG)
    dir_u = np.array([np.cos(u), 0.0, np.sin(u)])
    records: List[Dict] = []
    for L in CURVE_LENGTHS:
        apv = np.array([[L, 0.0, 0.0]])
        elements = apv * (np.arange(1, N + 1, dtype=float) / N)[:, None]
        for angle in angles:
            e = np.radians(angle)
            dir_e = np.array([np.cos(e), 0.0, np.sin(e)])
            records.append(
                {
                    "L": L,
                    "eve_angle_deg": float(angle),
                    "far_field": corr_far_field(apv, N, lam, dir_u, dir_e) / N,
                    "exact": corr_exact(elements, CURVE_DISTANCE * dir_u, CURVE_DISTANCE * dir_e, lam) / N,
                }
            )
    return pd.DataFrame.from_records(records)


def distance_curve_table(spec: ExperimentSpec, N: int = 8, lam: float = 0.03) -> pd.DataFrame:
    """Minimum same-direction correlation versus eavesdropper distance, user fixed at 200 m"""
    distances = np.linspace(20.0, 1000.0, spec.analysis.curve_points)
    records: List[Dict] = []
    for L in SAME_DIRECTION_LENGTHS:
        for dist_e in distances:
            result = theorem3_min(N, L, SAME_DIRECTION_USER_DIST, float(dist_e), lam)
            records.append(
                {
                    "L": L,
                    "dist_e": float(dist_e),
                    "orthogonal_tip": result.value / N,
                    "min_correlation": result.best / N,
                    "regime": result.regime.value,
                }
            )
    return pd.DataFrame.from_records(records)


def analyze_theorems(spec: ExperimentSpec, workers: int = 1) -> Dict[str, pd.DataFrame]:
    """All closed-form versus brute-force tables and the correlation curves, keyed by output name"""
    rng = experiment_rng(spec.scenario.seed, THEOREM_STREAM, 0)
    lam = spec.scenario.wavelength
    N = spec.scenario.elements_per_cable
    tables = {
        "theorem1": theorem1_table(spec, rng, workers),
        "theorem2": theorem2_table(spec, rng, workers),
        "theorem3": theorem3_table(spec, N, lam, workers),
        "correlation_vs_angle": angle_curve_table(spec, N, lam),
        "correlation_vs_distance": distance_curve_table(spec, N, lam),
    }
    t1 = tables["theorem1"]
    closed = t1[t1["regime"] == CorrelationRegime.CLOSED_FORM.value]
    log_info(
        "Correlation analysis finished",
        single_cable_tuples=len(t1),
        max_closed_form_rel_error=float(closed["rel_error"].max()) if len(closed) else 0.0,
        cable_pairs=len(tables["theorem2"]),
    )
    return tables
