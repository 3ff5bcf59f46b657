"""
Riemannian Alternating Optimizer
Cable-by-cable conjugate-gradient ascent on the radius-L sphere with Armijo backtracking
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import InfeasibleGeometryError, get_logger
from src.core.models import OptimizerParams
from src.optimization.manifold import GRADIENT_FLOOR, retract, riem_grad, search_direction
from src.optimization.objective import ErgodicRateEvaluator, central_difference
from src.physics.geometry import COLLISION_ATOL, ArrayGeometry, validate
from src.simulation.scenarios import Realization

logger = get_logger(__name__)

# directions closer than this cosine to orthogonal with the gradient restart from the gradient
RESTART_COSINE = 0.1


class TerminationReason(str, Enum):
    CONVERGED = "converged"
    MAX_OUTER = "max-outer"
    STEP_FLOOR = "step-floor"


@dataclass(frozen=True, eq=False)
class LineSearchResult:
    accepted: bool
    step: float
    point: Optional[np.ndarray]
    value: float
    backtracks: int


@dataclass(frozen=True, eq=False)
class InnerStep:
    outer: int
    cable: int
    inner: int
    step: float
    value: float
    point: np.ndarray


@dataclass(eq=False)
class OptimizerTrace:
    """objective[0] is the initial value, objective[i] the value after outer iteration i"""

    objective: List[float] = field(default_factory=list)
    apvs: List[np.ndarray] = field(default_factory=list)
    steps: List[InnerStep] = field(default_factory=list)
    termination: Optional[TerminationReason] = None
    evaluations: int = 0

    @property
    def outer_iterations(self) -> int:
        return len(self.objective) - 1


def line_search(
    objective: Callable[[np.ndarray], float],
    geom: ArrayGeometry,
    m: int,
    direction: np.ndarray,
    params: OptimizerParams,
    grad_norm: Optional[float] = None,
    current_value: Optional[float] = None,
) -> LineSearchResult:
    """
    Largest τ = τ_max ζ^b whose retracted point keeps every other tip at least D away and satisfies
    f(R(τμ)) ≥ f(t_m) + ξ τ ‖grad‖. objective takes the candidate tip of cable m.
    """
    t = geom.apv[m]
    L = geom.cable_len
    direction = np.asarray(direction, dtype=float)
    if grad_norm is None:
        grad_norm = float(np.linalg.norm(direction))
    f0 = objective(t) if current_value is None else current_value
    if np.linalg.norm(direction) < GRADIENT_FLOOR or grad_norm < GRADIENT_FLOOR:
        return LineSearchResult(False, 0.0, None, f0, 0)

    others = np.delete(geom.apv, m, axis=0)
    tau = params.tau_max
    backtracks = 0
    while tau >= params.tau_min:
        candidate = retract(t, tau * direction, L)
        clear = others.size == 0 or np.min(np.linalg.norm(others - candidate, axis=1)) >= geom.min_sep - COLLISION_ATOL
        if clear:
            value = objective(candidate)
            if value >= f0 + params.armijo * tau * grad_norm:
                return LineSearchResult(True, tau, candidate, value, backtracks)
        tau *= params.shrink
        backtracks += 1
    return LineSearchResult(False, tau, None, f0, backtracks)


def optimize(
    geom0: ArrayGeometry,
    realizations: Sequence[Realization],
    params: OptimizerParams,
    P: float,
    noise_power: float,
    evaluator: Optional[ErgodicRateEvaluator] = None,
) -> Tuple[ArrayGeometry, OptimizerTrace]:
    """Alternating optimization over cables; each cable runs up to J conjugate-gradient steps"""
    violations = validate(geom0)
    if violations:
        raise InfeasibleGeometryError(
            "initial geometry is infeasible: " + "; ".join(str(v) for v in violations), violations
        )
    if evaluator is None:
        evaluator = ErgodicRateEvaluator(realizations, P, noise_power)

    geom = geom0
    L = geom.cable_len
    value = evaluator.evaluate(geom)
    trace = OptimizerTrace(objective=[value], apvs=[geom.apv.copy()])

    for outer in range(1, params.outer_iters + 1):
        accepted = 0
        stationary = 0
        for m in range(geom.num_cables):
            sub = evaluator.cable_objective(geom, m)
            tip = geom.apv[m]
            current = value
            prev_dir = np.zeros(3)
            for inner in range(params.inner_iters):
                grad = riem_grad(central_difference(sub, tip, params.fd_step), tip, L)
                grad_norm = float(np.linalg.norm(grad))
                if grad_norm < GRADIENT_FLOOR:
                    if inner == 0:
                        stationary += 1
                    break
                direction = search_direction(grad, prev_dir, tip, L)
                cosine = float(direction @ grad) / (np.linalg.norm(direction) * grad_norm)
                if cosine <= RESTART_COSINE:
                    direction = grad
                result = line_search(sub, geom.with_tip(m, tip), m, direction, params, grad_norm, current)
                if not result.accepted:
                    break
                tip = result.point
                current = result.value
                prev_dir = direction
                accepted += 1
                trace.steps.append(InnerStep(outer, m, inner, result.step, current, tip.copy()))
            geom = geom.with_tip(m, tip)
            value = current

        new_value = evaluator.evaluate(geom)
        increment = new_value - trace.objective[-1]
        trace.objective.append(new_value)
        trace.apvs.append(geom.apv.copy())
        value = new_value
        logger.log_optimizer_iteration(
            outer, new_value, accepted, increment=increment, rank_deficient=evaluator.last_deficient
        )

        if accepted == 0:
            stalled_all = stationary == geom.num_cables
            trace.termination = TerminationReason.CONVERGED if stalled_all else TerminationReason.STEP_FLOOR
            break
        if increment < params.outer_tol:
            trace.termination = TerminationReason.CONVERGED
            break
    else:
        trace.termination = TerminationReason.MAX_OUTER

    trace.evaluations = evaluator.evaluations
    return geom, trace
