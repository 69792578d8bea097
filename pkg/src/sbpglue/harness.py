"""
Time integration, the standing-wave exact solution, error and rate measurement, energy traces
and the eigenvalue analysis of the fully coupled operator.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from pydantic import BaseModel

from sbpglue.coupled_system import CoupledSystem, SystemState
from sbpglue.fd_solver import BlockState, Material
from sbpglue.sbpglue_config import RunConfig
from sbpglue.sbpglue_exceptions import ConfigParse, NonFiniteState, SystemTooLarge
from sbpglue.sbpglue_logger import SbpGlueLogger
from sbpglue.sbpglue_types import EnergySample, ErrorRow

MAX_GLOBAL_UNKNOWNS = 40000
LINEARITY_TOLERANCE = 1e-12
FIELDS = ("v1", "v2", "p")

Rhs = Callable[[float, np.ndarray], np.ndarray]

_LOGGER = SbpGlueLogger()


@dataclass(frozen=True)
class ExactSolution:
    """
    Superposition of two standing modes satisfying the free surface condition on
    [-1, 1]^2, with k1 = pi/2, k2 = pi and omega_j = sqrt(2) k_j c.
    """

    material: Material = Material()
    k1: float = math.pi / 2
    k2: float = math.pi

    @property
    def omega1(self) -> float:
        return self.k1 * math.sqrt(2.0) * self.material.c

    @property
    def omega2(self) -> float:
        return self.k2 * math.sqrt(2.0) * self.material.c

    def __call__(self, x1, x2, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(v1, v2, p) at the points (x1, x2) and time t."""
        k1, k2, w1, w2 = self.k1, self.k2, self.omega1, self.omega2
        a1 = k1 / (self.material.rho * w1) * math.sin(w1 * t)
        a2 = k2 / (self.material.rho * w2) * math.sin(w2 * t)
        p = math.cos(w1 * t) * np.cos(k1 * x1) * np.cos(k1 * x2) + math.cos(w2 * t) * np.sin(k2 * x1) * np.sin(k2 * x2)
        v1 = a1 * np.sin(k1 * x1) * np.cos(k1 * x2) - a2 * np.cos(k2 * x1) * np.sin(k2 * x2)
        v2 = a1 * np.cos(k1 * x1) * np.sin(k1 * x2) - a2 * np.sin(k2 * x1) * np.cos(k2 * x2)
        return v1, v2, p


class RunResult(BaseModel):
    """
    Outcome of a single simulation.
    """

    scenario: str
    q: int
    N: int
    alpha: float
    epsilon: float
    contributions: Dict[str, float]
    steps: int
    dt: float
    unknowns: int
    wall_time: float
    energy: List[Dict[str, float]]
    config: Dict[str, object]


def rk4_advance(
    rhs: Rhs,
    u: np.ndarray,
    dt: float,
    t_final: float,
    t0: float = 0.0,
    callback: Optional[Callable[[int, float, np.ndarray], None]] = None,
) -> Tuple[np.ndarray, int]:
    """
    Classical four-stage Runge-Kutta from t0 to t_final. The step is shrunk to
    (t_final - t0) / ceil((t_final - t0) / dt) so the final time is hit exactly.
    Returns the final state and the number of steps; ``callback(step, t, u)`` runs after
    every step and once for the initial state.
    """
    if dt <= 0:
        _LOGGER.log(f"Time step {dt} requested", logging.ERROR)
        raise ConfigParse(f"dt must be positive, got {dt}")
    span = t_final - t0
    steps = max(0, math.ceil(span / dt - 1e-12))
    u = np.array(u, dtype=float, copy=True)
    if callback is not None:
        callback(0, t0, u)
    if steps == 0:
        return u, 0
    h = span / steps
    t = t0
    for step in range(1, steps + 1):
        k1 = rhs(t, u)
        k2 = rhs(t + h / 2, u + h / 2 * k1)
        k3 = rhs(t + h / 2, u + h / 2 * k2)
        k4 = rhs(t + h, u + h * k3)
        u = u + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + step * h
        if not np.all(np.isfinite(u)):
            _LOGGER.log(f"Non-finite state at step {step} (t = {t:.6g})", logging.ERROR)
            raise NonFiniteState(f"state became non-finite at step {step} (t = {t:.6g})")
        if callback is not None:
            callback(step, t, u)
    return u, steps


def stable_time_step(system: CoupledSystem, cfl: float) -> float:
    """min(cfl h_min / c) over the blocks and cfl h_tri / (c q^2) over the DG elements."""
    c = system.material.c
    dt = cfl * system.min_spacing() / c if system.blocks else np.inf
    if system.mesh is not None:
        dt = min(dt, cfl * system.mesh.h_min / (c * system.mesh.q ** 2))
    return float(dt)


def _only_field(state: SystemState, field: str) -> SystemState:
    def keep(values: BlockState) -> BlockState:
        return BlockState(*(getattr(values, name) if name == field else np.zeros_like(values.p) for name in FIELDS))

    return SystemState(
        {name: keep(values) for name, values in state.blocks.items()},
        None if state.dg is None else keep(state.dg),
    )


def compute_error(
    system: CoupledSystem, u: np.ndarray, t: float, exact: Optional[ExactSolution] = None
) -> Tuple[float, Dict[str, float]]:
    """
    The energy-norm error: epsilon^2 is the energy of u - u_exact, J H weighted on blocks
    and M_J weighted on DG elements. Also returns each field's share of epsilon^2.
    """
    exact = exact or ExactSolution(system.material)
    difference = system.unpack(u - system.sample(exact, t))
    contributions = {field: system.energy(system.pack(_only_field(difference, field))) for field in FIELDS}
    epsilon = math.sqrt(max(0.0, sum(contributions.values())))
    return epsilon, contributions


def convergence_rates(Ns: Sequence[int], errors: Sequence[float]) -> List[Optional[float]]:
    """log(e_coarse / e_fine) / log(N_fine / N_coarse); None for the coarsest level."""
    rates: List[Optional[float]] = [None]
    for (n_c, e_c), (n_f, e_f) in zip(zip(Ns, errors), zip(Ns[1:], errors[1:])):
        rates.append(math.log(e_c / e_f) / math.log(n_f / n_c) if e_c > 0 and e_f > 0 else None)
    return rates


def quadratic_form_rate(system: CoupledSystem, u: np.ndarray) -> float:
    """u^T W A u with W the energy weights; dE/dt of the semi-discretization at u."""
    return system.energy_inner(u, system.rhs(0.0, u))


def linearity_residual(system: CoupledSystem, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(system.n_unknowns)
    w = rng.standard_normal(system.n_unknowns)
    residual = system.rhs(0.0, u + w) - system.rhs(0.0, u) - system.rhs(0.0, w)
    scale = max(1.0, float(np.max(np.abs(system.rhs(0.0, u)))))
    return float(np.max(np.abs(residual)) / scale)


def assemble_global_operator(system: CoupledSystem, logger: SbpGlueLogger, seed: int = 0) -> np.ndarray:
    """
    Dense A with du/dt = A u, one column per unit vector. Raises SystemTooLarge above
    MAX_GLOBAL_UNKNOWNS unknowns.
    """
    n = system.n_unknowns
    if n > MAX_GLOBAL_UNKNOWNS:
        logger.log(f"Global operator with {n} unknowns requested", logging.ERROR)
        raise SystemTooLarge(f"{n} unknowns exceed the limit of {MAX_GLOBAL_UNKNOWNS} for a dense operator")
    A = np.zeros((n, n))
    unit = np.zeros(n)
    with logger.timed(f"Assembling the global operator with {n} unknowns"):
        for j in range(n):
            unit[j] = 1.0
            A[:, j] = system.rhs(0.0, unit)
            unit[j] = 0.0
    residual = linearity_residual(system, seed)
    if residual > LINEARITY_TOLERANCE:
        logger.log(f"Right-hand side deviates from linearity by {residual:.3e}", logging.WARNING)
    return A


def spectrum(A: np.ndarray) -> np.ndarray:
    """Eigenvalues of A sorted by decreasing real part."""
    eigenvalues = scipy.linalg.eigvals(A)
    return eigenvalues[np.argsort(-eigenvalues.real)]


def energy_trace(
    system: CoupledSystem, u0: np.ndarray, dt: float, t_final: float, samples: int
) -> Tuple[List[EnergySample], np.ndarray, int]:
    """
    Integrates from u0 and records the total energy about ``samples`` times, always
    including the initial and final time. Returns the samples, the final state and the
    step count.
    """
    if samples < 1:
        _LOGGER.log(f"Energy trace with {samples} samples requested", logging.ERROR)
        raise ConfigParse(f"samples must be >= 1, got {samples}")
    steps = max(0, math.ceil(t_final / dt - 1e-12))
    stride = max(1, steps // samples)
    trace: List[EnergySample] = []

    def record(step: int, t: float, u: np.ndarray) -> None:
        if step % stride == 0 or step == steps:
            trace.append(EnergySample(t=t, energy=system.energy(u)))

    u, taken = rk4_advance(system.rhs, u0, dt, t_final, callback=record)
    return trace, u, taken


def run_simulation(config: RunConfig, logger: SbpGlueLogger) -> RunResult:
    """Runs one scenario from the exact initial condition to t_final and measures the error."""
    start = time.perf_counter()
    system = CoupledSystem.create(config, logger)
    exact = ExactSolution(system.material)
    dt = config.dt or stable_time_step(system, config.cfl)
    logger = system.logger
    logger.log(f"Running {config.scenario} q={config.q} N={config.N} to t={config.t_final} with dt={dt:.3e}", logging.INFO)
    u0 = system.sample(exact, 0.0)
    trace, u, steps = energy_trace(system, u0, dt, config.t_final, config.samples)
    epsilon, contributions = compute_error(system, u, config.t_final, exact)
    wall_time = time.perf_counter() - start
    logger.log(f"{config.scenario} q={config.q} N={config.N}: epsilon = {epsilon:.6e} after {steps} steps", logging.INFO)
    return RunResult(
        scenario=str(config.scenario),
        q=config.q,
        N=config.N,
        alpha=config.alpha,
        epsilon=epsilon,
        contributions=contributions,
        steps=steps,
        dt=config.t_final / steps if steps else dt,
        unknowns=system.n_unknowns,
        wall_time=wall_time,
        energy=[dict(sample) for sample in trace],
        config=config.to_dict(),
    )


def run_convergence(config: RunConfig, logger: SbpGlueLogger) -> List[ErrorRow]:
    """Runs ``config.levels`` resolutions N, 2N, 4N, ... and reports errors and rates."""
    Ns = [config.N * 2 ** level for level in range(config.levels)]
    errors = [run_simulation(config.with_resolution(N), logger).epsilon for N in Ns]
    rates = convergence_rates(Ns, errors)
    return [
        ErrorRow(q=config.q, N=N, scenario=str(config.scenario), epsilon=epsilon, rate=rate)
        for N, epsilon, rate in zip(Ns, errors, rates)
    ]


def compute_spectrum(config: RunConfig, logger: SbpGlueLogger) -> np.ndarray:
    """Eigenvalues of the coupled operator of ``config``."""
    system = CoupledSystem.create(config, logger)
    A = assemble_global_operator(system, system.logger, config.seed)
    with system.logger.timed(f"Eigenvalues of a {A.shape[0]} x {A.shape[0]} operator"):
        eigenvalues = spectrum(A)
    system.logger.log(f"max Re(lambda) = {eigenvalues[0].real:.3e} over {eigenvalues.size} eigenvalues", logging.INFO)
    return eigenvalues
