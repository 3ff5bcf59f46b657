"""
Experiments
Sweep orchestration: per-cell realizations, scheme evaluation and result rows
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.core.config import Settings
from src.core.errors import (
    ErrorCategory,
    ToMAError,
    error_handler,
    get_logger,
    performance_monitor,
)
from src.core.models import (
    SCHEME_ORDER,
    ExperimentKind,
    ExperimentSpec,
    PlacementKind,
    ResultRow,
    Scenario,
    Scheme,
)
from src.optimization.objective import ErgodicRateEvaluator
from src.optimization.riemannian import OptimizerTrace, optimize
from src.physics.geometry import (
    ArrayGeometry,
    FixedGeometry,
    fixed_budget_dims,
    placement,
    upa_positions,
    validate,
    validate_fixed,
)
from src.simulation.scenarios import (
    apply_region_preset,
    experiment_rng,
    generate_realizations,
    initial_geometry,
    sphere_region,
)

logger = get_logger(__name__)
settings = Settings()

KIND_STREAMS = {kind: index for index, kind in enumerate(ExperimentKind)}

PLACEMENT_SCHEMES = {
    Scheme.HORIZONTAL: PlacementKind.HORIZONTAL,
    Scheme.VERTICAL: PlacementKind.VERTICAL,
    Scheme.HYBRID: PlacementKind.HYBRID,
}


@dataclass
class CellResult:
    label: str
    scheme: Scheme
    sweep_index: int
    sweep_value: float
    rate: float
    runtime_s: float
    errors: str = ""
    trace: Optional[OptimizerTrace] = None
    upper_bounds: List[float] = field(default_factory=list)


@dataclass
class ExperimentOutcome:
    spec: ExperimentSpec
    rows: List[ResultRow] = field(default_factory=list)
    traces: Dict[str, List[float]] = field(default_factory=dict)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    timings: List[Dict] = field(default_factory=list)


def _update(sc: Scenario, **changes) -> Scenario:
    return Scenario.model_validate({**sc.model_dump(), **changes})


def base_scenario(spec: ExperimentSpec) -> Scenario:
    """The configured scenario with the region preset, if any, applied"""
    return apply_region_preset(spec.scenario, spec.region_preset)


def cell_scenario(spec: ExperimentSpec, value: float) -> Scenario:
    """Scenario for one sweep value"""
    sc = base_scenario(spec)
    if spec.kind == ExperimentKind.SWEEP_N:
        return _update(sc, elements_per_cable=int(value))
    if spec.kind == ExperimentKind.SWEEP_EVES:
        return _update(sc, num_eves=int(value))
    if spec.kind in (ExperimentKind.SWEEP_M_FIXED_BUDGET, ExperimentKind.CONVERGENCE):
        return budget_scenario(spec, sc, int(value))
    if spec.kind == ExperimentKind.SWEEP_CABLE_LENGTH:
        return _update(sc, cable_length=float(value))
    if spec.kind == ExperimentKind.SWEEP_SPHERE_RADIUS:
        region = sphere_region(float(value)).model_dump()
        return _update(sc, user_regions=[region], eve_regions=[region])
    if spec.kind == ExperimentKind.SWEEP_RICIAN:
        return _update(sc, rician_factor=float(value))
    return sc


def budget_scenario(spec: ExperimentSpec, sc: Scenario, M: int) -> Scenario:
    """M cables sharing total_antennas elements and total_cable_length meters of cable"""
    N, L = fixed_budget_dims(spec.total_antennas, spec.total_cable_length, M)
    return _update(sc, num_cables=M, elements_per_cable=N, cable_length=L)


def scheme_geometry(scheme: Scheme, sc: Scenario) -> Union[ArrayGeometry, FixedGeometry]:
    """Benchmark geometry; toma_opt starts from the initial placement"""
    if scheme in PLACEMENT_SCHEMES:
        return placement(
            PLACEMENT_SCHEMES[scheme], sc.num_cables, sc.elements_per_cable, sc.cable_length, sc.min_separation
        )
    if scheme == Scheme.FPA_DENSE:
        return upa_positions(sc.num_cables, sc.elements_per_cable, sc.wavelength / 2.0)
    if scheme == Scheme.FPA_SPARSE:
        return upa_positions(sc.num_cables, sc.elements_per_cable, 2.0 * sc.wavelength)
    if scheme == Scheme.TOMA_OPT:
        return initial_geometry(sc)
    raise ValueError(f"{scheme.value} has no array geometry")


def _check_geometry(geom: Union[ArrayGeometry, FixedGeometry], sc: Scenario):
    if isinstance(geom, FixedGeometry):
        violations = validate_fixed(geom, sc.num_elements)
    else:
        violations = validate(geom)
    if violations:
        raise ToMAError("; ".join(str(v) for v in violations))


def _evaluator(realizations, sc: Scenario) -> ErgodicRateEvaluator:
    return ErgodicRateEvaluator(
        realizations, sc.radio.tx_power, sc.radio.noise_power, settings.cache_size, performance_monitor
    )


def _record_failure(error: Exception, spec: ExperimentSpec, label: str, value: float) -> str:
    error_handler.handle_error(
        error, ErrorCategory.EXPERIMENT_ERROR, experiment=spec.kind.value, scheme=label, sweep_value=value
    )
    return f"{type(error).__name__}: {error}"


def _optimize_variant(
    spec: ExperimentSpec, sc: Scenario, stream: Tuple[int, ...], label: str, sweep_index: int, value: float
) -> CellResult:
    """Realizations for sc, then alternating optimization from the initial placement"""
    start = time.perf_counter()
    radio = sc.radio
    try:
        rng = experiment_rng(sc.seed, *stream)
        realizations = generate_realizations(sc, spec.optimizer.mc_samples, rng, with_channels=False)
        evaluator = _evaluator(realizations, sc)
        geom0 = initial_geometry(sc)
        _check_geometry(geom0, sc)
        geom, trace = optimize(geom0, realizations, spec.optimizer, radio.tx_power, radio.noise_power, evaluator)
        _check_geometry(geom, sc)
        bounds = [
            evaluator.upper_bound(ArrayGeometry(apv, geom.n_per_cable, geom.cable_len, geom.min_sep))
            for apv in trace.apvs
        ]
        error_handler.record("numerical_error:rank_deficient", evaluator.last_deficient)
        runtime = time.perf_counter() - start
        return CellResult(label, Scheme.TOMA_OPT, sweep_index, value, trace.objective[-1], runtime, "", trace, bounds)
    except (ToMAError, ValueError, np.linalg.LinAlgError) as e:
        errors = _record_failure(e, spec, label, value)
        return CellResult(label, Scheme.TOMA_OPT, sweep_index, value, 0.0, time.perf_counter() - start, errors)


def run_cell(spec: ExperimentSpec, sweep_index: int, value: float) -> List[CellResult]:
    """Evaluate every requested scheme at one sweep value on a shared realization set"""
    results: List[CellResult] = []
    schemes = list(spec.schemes or [])
    stream = (KIND_STREAMS[spec.kind], sweep_index)
    try:
        sc = cell_scenario(spec, value)
    except (ToMAError, ValueError) as e:
        errors = _record_failure(e, spec, "scenario", value)
        return [CellResult(s.value, s, sweep_index, value, 0.0, 0.0, errors) for s in schemes]

    optimized: Optional[ArrayGeometry] = None
    if Scheme.TOMA_OPT in schemes:
        cell = _optimize_variant(spec, sc, stream, Scheme.TOMA_OPT.value, sweep_index, value)
        results.append(cell)
        if cell.trace is not None:
            optimized = ArrayGeometry(cell.trace.apvs[-1], sc.elements_per_cable, sc.cable_length, sc.min_separation)

    if spec.kind == ExperimentKind.SWEEP_SPHERE_RADIUS:
        for m in spec.budget_m_values:
            label = f"{Scheme.TOMA_OPT.value}[M={m}]"
            try:
                variant = budget_scenario(spec, sc, m)
            except (ToMAError, ValueError) as e:
                errors = _record_failure(e, spec, label, value)
                results.append(CellResult(label, Scheme.TOMA_OPT, sweep_index, value, 0.0, 0.0, errors))
                continue
            results.append(_optimize_variant(spec, variant, stream + (m,), label, sweep_index, value))

    remaining = [s for s in schemes if s != Scheme.TOMA_OPT]
    if not remaining:
        return results

    try:
        rng = experiment_rng(sc.seed, *stream)
        realizations = generate_realizations(sc, spec.optimizer.mc_samples, rng, with_channels=False)
        evaluator = _evaluator(realizations, sc)
    except (ToMAError, ValueError) as e:
        errors = _record_failure(e, spec, "realizations", value)
        return results + [CellResult(s.value, s, sweep_index, value, 0.0, 0.0, errors) for s in remaining]

    for scheme in remaining:
        start = time.perf_counter()
        try:
            if scheme == Scheme.UPPER_BOUND:
                reference = optimized if optimized is not None else scheme_geometry(Scheme.TOMA_OPT, sc)
                _check_geometry(reference, sc)
                rate = evaluator.upper_bound(reference)
            else:
                geom = scheme_geometry(scheme, sc)
                _check_geometry(geom, sc)
                if isinstance(geom, FixedGeometry):
                    rate = evaluator.evaluate_fixed(geom)
                else:
                    rate = evaluator.evaluate(geom)
                error_handler.record("numerical_error:rank_deficient", evaluator.last_deficient)
            results.append(CellResult(scheme.value, scheme, sweep_index, value, rate, time.perf_counter() - start))
        except (ToMAError, ValueError, np.linalg.LinAlgError) as e:
            errors = _record_failure(e, spec, scheme.value, value)
            runtime = time.perf_counter() - start
            results.append(CellResult(scheme.value, scheme, sweep_index, value, 0.0, runtime, errors))
    return results


def _convergence_cells(spec: ExperimentSpec) -> List[CellResult]:
    """One optimization per M (fixed budget) or a single run at the configured scenario"""
    stream = KIND_STREAMS[spec.kind]
    if not spec.sweep_values:
        sc = base_scenario(spec)
        return [_optimize_variant(spec, sc, (stream, 0), Scheme.TOMA_OPT.value, 0, float(sc.num_cables))]
    cells = []
    for index, m in enumerate(spec.sweep_values):
        label = f"{Scheme.TOMA_OPT.value}[M={int(m)}]"
        try:
            sc = budget_scenario(spec, base_scenario(spec), int(m))
        except (ToMAError, ValueError) as e:
            errors = _record_failure(e, spec, label, m)
            cells.append(CellResult(label, Scheme.TOMA_OPT, index, float(m), 0.0, 0.0, errors))
            continue
        cells.append(_optimize_variant(spec, sc, (stream, index), label, index, float(m)))
    return cells


def _sort_key(cell: CellResult) -> Tuple[int, str, float]:
    return SCHEME_ORDER.index(cell.scheme), cell.label, cell.sweep_value


def _rows(spec: ExperimentSpec, cells: List[CellResult], deterministic: bool) -> List[ResultRow]:
    rows: List[ResultRow] = []
    seed = spec.scenario.seed
    if spec.kind == ExperimentKind.CONVERGENCE:
        for cell in sorted(cells, key=_sort_key):
            trace_ref = f"traces/{cell.label}.csv"
            objective = cell.trace.objective if cell.trace is not None else [0.0]
            for iteration, value in enumerate(objective):
                rows.append(
                    ResultRow(
                        experiment=spec.kind.value,
                        scheme=cell.label,
                        sweep_param="iteration",
                        sweep_value=float(iteration),
                        rate_bps_hz=max(value, 0.0),
                        seed=seed,
                        runtime_s=0.0 if deterministic else cell.runtime_s,
                        trace_ref=trace_ref,
                        errors=cell.errors,
                    )
                )
            if Scheme.UPPER_BOUND in (spec.schemes or []):
                bound_label = cell.label.replace(Scheme.TOMA_OPT.value, Scheme.UPPER_BOUND.value)
                for iteration, bound in enumerate(cell.upper_bounds):
                    rows.append(
                        ResultRow(
                            experiment=spec.kind.value,
                            scheme=bound_label,
                            sweep_param="iteration",
                            sweep_value=float(iteration),
                            rate_bps_hz=bound,
                            seed=seed,
                            trace_ref=trace_ref,
                        )
                    )
        return rows

    for cell in sorted(cells, key=_sort_key):
        trace_ref = f"traces/{cell.label}_{cell.sweep_index}.csv" if cell.trace is not None else ""
        rows.append(
            ResultRow(
                experiment=spec.kind.value,
                scheme=cell.label,
                sweep_param=spec.sweep_param,
                sweep_value=cell.sweep_value,
                rate_bps_hz=max(cell.rate, 0.0),
                seed=seed,
                runtime_s=0.0 if deterministic else cell.runtime_s,
                trace_ref=trace_ref,
                errors=cell.errors,
            )
        )
    return rows


def run_experiment(
    spec: ExperimentSpec,
    threads: int = 1,
    deterministic: bool = False,
    progress: bool = False,
) -> ExperimentOutcome:
    """Run every (scheme, sweep value) cell; per-cell failures land in the errors column"""
    outcome = ExperimentOutcome(spec=spec)
    if spec.kind == ExperimentKind.ANALYZE_THEOREMS:
        from src.simulation.theorems import analyze_theorems

        outcome.tables = analyze_theorems(spec, workers=1 if deterministic else threads)
        return outcome

    workers = 1 if deterministic else max(1, threads)
    if spec.kind == ExperimentKind.CONVERGENCE:
        cells = _convergence_cells(spec)
    else:
        jobs = list(enumerate(spec.sweep_values))
        cells = []
        with tqdm(total=len(jobs), desc=spec.kind.value, disable=not progress) as bar:
            if workers == 1:
                for index, value in jobs:
                    cells.extend(run_cell(spec, index, value))
                    bar.update(1)
            else:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    futures = [pool.submit(run_cell, spec, index, value) for index, value in jobs]
                    for future in futures:
                        cells.extend(future.result())
                        bar.update(1)

    for cell in cells:
        logger.log_experiment_cell(spec.kind.value, cell.label, cell.sweep_value, cell.rate, cell.runtime_s)
        performance_monitor.check_cell_performance(spec.kind.value, cell.label, cell.runtime_s)
        outcome.timings.append(
            {"scheme": cell.label, "sweep_value": cell.sweep_value, "runtime_s": cell.runtime_s, "errors": cell.errors}
        )
        if cell.trace is not None:
            key = cell.label if spec.kind == ExperimentKind.CONVERGENCE else f"{cell.label}_{cell.sweep_index}"
            outcome.traces[key] = list(cell.trace.objective)

    outcome.rows = _rows(spec, cells, deterministic)
    return outcome
