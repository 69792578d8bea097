"""
Glue spaces and H-compatible projections between SBP grids and glue spaces.

A glue space is a piecewise Legendre polynomial space on an interface parameter range.
A projection pair (P_f2g, P_g2f) between a grid with norm H and a glue space with mass
matrix M is H-compatible when Delta * P_g2f^T H = M P_f2g, where Delta is the interval
fraction by which the reference face of the grid is scaled onto the glue.

The SBP-compatible pairs are N-independent coefficient sets: a symmetric interior
stencil mapping the 2l glue intervals around a grid point to that point, and boundary
coefficients mapping the first r intervals to the first s+1 points. They are the
solution of a linear constraint system built in index coordinates (grid points at the
integers, glue interval j = [j, j+1]).
"""

import functools
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.sparse as sp
from numpy.polynomial import legendre

from sbpglue.sbp_operators import SbpOperator1D, build_sbp, sbp_family
from sbpglue.sbpglue_exceptions import (
    CoefficientFormat,
    GlueOrderTooLow,
    GridTooSmall,
    IncompatibleProjection,
    InconsistentConstraints,
    NotNested,
    PartitionMismatch,
    QuadratureTooCoarse,
    UnsupportedOrder,
)
from sbpglue.sbpglue_logger import SbpGlueLogger
from sbpglue.sbpglue_settings import SbpGlueSettings
from sbpglue.sbpglue_types import CertificateRow
from sbpglue.sbpglue_utils import CoefficientFile

# (l, s+1, r) per boundary order q
PROJECTION_PARAMETERS: Dict[int, Tuple[int, int, int]] = {
    1: (1, 1, 1),
    2: (2, 4, 5),
    3: (3, 6, 8),
    4: (4, 9, 12),
    5: (5, 12, 16),
}
# (constraints, unknowns) per boundary order q
PROJECTION_COUNTS: Dict[int, Tuple[int, int]] = {
    1: (11, 6),
    2: (76, 96),
    3: (222, 324),
    4: (524, 928),
    5: (1020, 2020),
}

RANK_TOLERANCE = 1e-13
CONSISTENCY_TOLERANCE = 1e-10
INCONSISTENCY_LIMIT = 1e-8
COMPATIBILITY_TOLERANCE = 1e-12
ACCURACY_TOLERANCE = 1e-10
BREAKPOINT_TOLERANCE = 1e-12
REFINE_GRID = 64

_LOGGER = SbpGlueLogger()


def _legendre_modes(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, order: int, points: int) -> np.ndarray:
    """Legendre coefficients 0..order of f on [lo, hi] by Gauss-Legendre quadrature."""
    t, w = legendre.leggauss(points)
    values = f(lo + (t + 1.0) * (hi - lo) / 2.0)
    vander = legendre.legvander(t, order)
    return (2 * np.arange(order + 1) + 1) / 2.0 * (vander.T @ (w * values))


@dataclass(frozen=True)
class GlueSpace:
    """
    Piecewise Legendre polynomials of a uniform order on the intervals between breakpoints.
    Coefficients are stored interval-major: entry k*(order+1) + i is mode i of interval k.
    """

    breakpoints: np.ndarray
    order: int

    def __post_init__(self) -> None:
        breakpoints = np.asarray(self.breakpoints, dtype=float)
        if breakpoints.ndim != 1 or breakpoints.size < 2 or np.any(np.diff(breakpoints) <= 0):
            _LOGGER.log(f"Invalid glue breakpoints {breakpoints}", logging.ERROR)
            raise PartitionMismatch("glue breakpoints must be a strictly increasing sequence of at least two values")
        object.__setattr__(self, "breakpoints", breakpoints)

    @property
    def n_intervals(self) -> int:
        return self.breakpoints.size - 1

    @property
    def dim(self) -> int:
        return self.n_intervals * (self.order + 1)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def lo(self) -> float:
        return float(self.breakpoints[0])

    @property
    def hi(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def mass(self) -> np.ndarray:
        """Diagonal of M: width/2 * 2/(2i+1) for mode i."""
        modes = 1.0 / (2 * np.arange(self.order + 1) + 1)
        return np.outer(self.widths, modes).ravel()

    @property
    def M(self) -> sp.csr_matrix:
        return sp.diags(self.mass).tocsr()

    def mapped(self, lo: float, hi: float) -> "GlueSpace":
        """Affine image of this space on [lo, hi]."""
        scale = (hi - lo) / (self.hi - self.lo)
        return GlueSpace(lo + (self.breakpoints - self.lo) * scale, self.order)

    def interval_range(self, lo: float, hi: float) -> Tuple[int, int]:
        tolerance = BREAKPOINT_TOLERANCE * max(1.0, self.hi - self.lo)
        start = np.flatnonzero(np.abs(self.breakpoints - lo) <= tolerance)
        stop = np.flatnonzero(np.abs(self.breakpoints - hi) <= tolerance)
        if start.size == 0 or stop.size == 0 or stop[0] <= start[0]:
            _LOGGER.log(f"[{lo}, {hi}] is not a union of glue intervals", logging.ERROR)
            raise PartitionMismatch(f"[{lo}, {hi}] is not a union of glue intervals")
        return int(start[0]), int(stop[0])

    def restrict(self, lo: float, hi: float) -> "GlueSpace":
        """Sub-space made of the intervals inside [lo, hi]."""
        start, stop = self.interval_range(lo, hi)
        return GlueSpace(self.breakpoints[start:stop + 1], self.order)

    def coefficient_slice(self, lo: float, hi: float) -> slice:
        start, stop = self.interval_range(lo, hi)
        return slice(start * (self.order + 1), stop * (self.order + 1))

    def modal_coefficients(self, f: Callable[[np.ndarray], np.ndarray], points: Optional[int] = None) -> np.ndarray:
        """Coefficients of the L2 projection of f; exact for polynomials of degree <= order."""
        points = points or self.order + 2
        return np.concatenate([
            _legendre_modes(f, a, b, self.order, points)
            for a, b in zip(self.breakpoints[:-1], self.breakpoints[1:])
        ])

    def evaluate(self, coefficients: np.ndarray, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        interval = np.clip(np.searchsorted(self.breakpoints, points, side="right") - 1, 0, self.n_intervals - 1)
        a, b = self.breakpoints[interval], self.breakpoints[interval + 1]
        local = (2 * points - a - b) / (b - a)
        blocks = np.asarray(coefficients).reshape(self.n_intervals, self.order + 1)[interval]
        return np.sum(legendre.legvander(local, self.order) * blocks, axis=1)


def build_glue_for_grid(N: int, interior_order: int) -> GlueSpace:
    """Glue space whose N intervals end at the grid points of [-1, 1], of order p_i - 1."""
    if N < 1 or interior_order < 1:
        _LOGGER.log(f"Cannot build a glue for N={N}, interior order {interior_order}", logging.ERROR)
        raise GridTooSmall(f"build_glue_for_grid needs N >= 1 and interior_order >= 1, got {N}, {interior_order}")
    return GlueSpace(np.linspace(-1.0, 1.0, N + 1), interior_order - 1)


@dataclass(frozen=True)
class ProjectionPair:
    """
    A grid-to-glue and glue-to-grid pair. ``mass`` is the diagonal of the glue mass matrix
    (in interface coordinates); ``source_norm`` the diagonal of the grid norm (in the
    face's reference coordinate).
    """

    f2g: sp.csr_matrix
    g2f: sp.csr_matrix
    source_norm: np.ndarray
    mass: np.ndarray
    delta: float = 1.0
    space: Optional[GlueSpace] = None

    @classmethod
    def identity(cls, norm: np.ndarray, delta: float = 1.0) -> "ProjectionPair":
        """The conforming pair: both maps are the identity and M = Delta * H."""
        n = np.asarray(norm).size
        eye = sp.identity(n, format="csr")
        return cls(eye, eye, np.asarray(norm, dtype=float), delta * np.asarray(norm, dtype=float), delta)

    def compatibility_residual(self) -> float:
        """max |Delta P_g2f^T H - M P_f2g| relative to max |M| * max(1, max |P_f2g|)."""
        lhs = self.delta * (self.g2f.T @ sp.diags(self.source_norm))
        rhs = sp.diags(self.mass) @ self.f2g
        difference = abs(sp.csr_matrix(lhs - rhs)).max()
        scale = np.max(self.mass) * max(1.0, abs(self.f2g).max())
        return float(difference / scale)

    def placed(self, lo: float, hi: float) -> "ProjectionPair":
        """The same pair with its glue space mapped onto [lo, hi] of the interface."""
        if self.space is None:
            _LOGGER.log("Placing an identity pair on a glue range", logging.ERROR)
            raise PartitionMismatch("an identity pair cannot be placed on a glue range")
        ratio = (hi - lo) / (self.space.hi - self.space.lo)
        return replace(self, space=self.space.mapped(lo, hi), mass=self.mass * ratio, delta=self.delta * ratio)


@dataclass(frozen=True)
class ConstraintSystem:
    """
    Linear constraints on the interior coefficients c[i, j] (mode i of the j-th of the
    2l intervals around a grid point) and the boundary coefficients a[k, j, i] (mode i of
    interval j to boundary point k). Unknowns are ordered c first (i-major), then a.
    """

    q: int
    l: int
    s: int
    r: int
    n: int
    matrix: np.ndarray
    rhs: np.ndarray
    closure_norm: np.ndarray

    @property
    def m(self) -> int:
        return 2 * self.l

    @property
    def interior_order(self) -> int:
        return 2 * self.q

    @property
    def boundary_order(self) -> int:
        return self.q

    @property
    def unknown_count(self) -> int:
        return self.matrix.shape[1]

    @property
    def constraint_count(self) -> int:
        return self.matrix.shape[0]

    def interior_index(self, i: int, j: int) -> int:
        return i * self.m + j

    def boundary_index(self, k: int, j: int, i: int) -> int:
        return self.m * (self.n + 1) + (k * self.r + j) * (self.n + 1) + i

    def norm_weight(self, k: int) -> float:
        return float(self.closure_norm[k]) if k < self.closure_norm.size else 1.0


def assemble_projection_constraints(q: int) -> ConstraintSystem:
    """
    Builds the constraints: interior symmetry, exactness of P_g2f and of the induced
    P_f2g = M^-1 P_g2f^T H for polynomials of degree < 2q in the interior and < q at the
    boundary. Test polynomials are Legendre polynomials scaled to the stencil width.
    """
    if q not in PROJECTION_PARAMETERS:
        _LOGGER.log(f"Unsupported projection order q={q}", logging.ERROR)
        raise UnsupportedOrder(f"projection boundary order q must be one of {tuple(PROJECTION_PARAMETERS)}, got {q}")
    l, s_plus_1, r = PROJECTION_PARAMETERS[q]
    s, n = s_plus_1 - 1, 2 * q - 1
    p_i, p_b = 2 * q, q
    scale = float(r + l)
    closure_norm = sbp_family(q).closure_norm
    system = ConstraintSystem(q, l, s, r, n, np.zeros((0, 0)), np.zeros(0), closure_norm)
    n_unknowns = system.m * (n + 1) + r * (s + 1) * (n + 1)

    tests = [legendre.Legendre.basis(d) for d in range(p_i)]

    def xi(d: int, x):
        return tests[d](np.asarray(x, dtype=float) / scale)

    def modes(d: int, a: float) -> np.ndarray:
        return _legendre_modes(lambda x: xi(d, x), a, a + 1.0, n, n + 2)

    rows: List[np.ndarray] = []
    rhs: List[float] = []

    def new_row() -> np.ndarray:
        return np.zeros(n_unknowns)

    for i in range(n + 1):
        for j in range(l):
            row = new_row()
            row[system.interior_index(i, j)] += 1.0
            row[system.interior_index(i, system.m - 1 - j)] -= (-1.0) ** i
            rows.append(row)
            rhs.append(0.0)

    for d in range(p_i):
        row = new_row()
        for j in range(system.m):
            omega = modes(d, -l + j)
            for i in range(n + 1):
                row[system.interior_index(i, j)] = omega[i]
        rows.append(row)
        rhs.append(float(xi(d, 0.0)))

    for d in range(p_i):
        omega = modes(d, 0.0)
        for i in range(n + 1):
            row = new_row()
            for j in range(system.m):
                row[system.interior_index(i, j)] = (2 * i + 1) * xi(d, l - j)
            rows.append(row)
            rhs.append(omega[i])

    for k in range(s + 1):
        for d in range(p_b):
            row = new_row()
            for j in range(r):
                omega = modes(d, j)
                for i in range(n + 1):
                    row[system.boundary_index(k, j, i)] = omega[i]
            rows.append(row)
            rhs.append(float(xi(d, k)))

    for j in range(r):
        for d in range(p_b):
            omega = modes(d, j)
            for i in range(n + 1):
                row = new_row()
                for k in range(s + 1):
                    row[system.boundary_index(k, j, i)] += (2 * i + 1) * system.norm_weight(k) * xi(d, k)
                for k in range(max(s + 1, j - l + 1), j + l + 1):
                    row[system.interior_index(i, j - k + l)] += (2 * i + 1) * system.norm_weight(k) * xi(d, k)
                rows.append(row)
                rhs.append(omega[i])

    return replace(system, matrix=np.array(rows), rhs=np.array(rhs))


@dataclass(frozen=True)
class ProjectionCoefficients:
    """
    Solved, N-independent projection coefficients of boundary order q.
    """

    system: ConstraintSystem
    values: np.ndarray
    refined: bool = False

    @property
    def q(self) -> int:
        return self.system.q

    @property
    def interior(self) -> np.ndarray:
        """c[i, j], shape (n+1, 2l)."""
        sys_ = self.system
        return self.values[:sys_.m * (sys_.n + 1)].reshape(sys_.n + 1, sys_.m)

    @property
    def boundary(self) -> np.ndarray:
        """a[k, j, i], shape (s+1, r, n+1)."""
        sys_ = self.system
        return self.values[sys_.m * (sys_.n + 1):].reshape(sys_.s + 1, sys_.r, sys_.n + 1)

    def constraint_residual(self) -> float:
        return float(np.max(np.abs(self.system.matrix @ self.values - self.system.rhs)))

    def pattern(self, N: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """
        Sparsity pattern of P_g2f on an N-cell grid: (row, column, unknown, sign) arrays.
        Right boundary rows mirror the left ones with the mode parity sign.
        """
        sys_ = self.system
        l, s, r, n = sys_.l, sys_.s, sys_.r, sys_.n
        if N < 2 * r:
            _LOGGER.log(f"Projection q={sys_.q} needs N >= {2 * r}, got {N}", logging.ERROR)
            raise GridTooSmall(f"projection of order q={sys_.q} needs N >= {2 * r}, got {N}")
        rows, cols, unknowns, signs = [], [], [], []
        for k in range(s + 1):
            for j in range(r):
                for i in range(n + 1):
                    idx = sys_.boundary_index(k, j, i)
                    rows += [k, N - k]
                    cols += [j * (n + 1) + i, (N - 1 - j) * (n + 1) + i]
                    unknowns += [idx, idx]
                    signs += [1.0, (-1.0) ** i]
        for k in range(s + 1, N - s):
            for j in range(sys_.m):
                for i in range(n + 1):
                    rows.append(k)
                    cols.append((k - l + j) * (n + 1) + i)
                    unknowns.append(sys_.interior_index(i, j))
                    signs.append(1.0)
        return np.array(rows), np.array(cols), np.array(unknowns), np.array(signs)

    def template(self, N: int) -> sp.csr_matrix:
        """Linear map from the unknowns to P_g2f flattened row-major."""
        rows, cols, unknowns, signs = self.pattern(N)
        n_cols = N * (self.system.n + 1)
        return sp.coo_matrix(
            (signs, (rows * n_cols + cols, unknowns)), shape=((N + 1) * n_cols, self.system.unknown_count)
        ).tocsr()

    def assemble(self, N: int, op: Optional[SbpOperator1D] = None) -> ProjectionPair:
        """The pair on an N-cell SBP grid of [-1, 1]; f2g = M^-1 g2f^T H."""
        op = op or build_sbp(self.q, N)
        rows, cols, unknowns, signs = self.pattern(N)
        space = build_glue_for_grid(N, self.system.interior_order)
        g2f = sp.coo_matrix((signs * self.values[unknowns], (rows, cols)), shape=(N + 1, space.dim)).tocsr()
        f2g = (sp.diags(1.0 / space.mass) @ g2f.T @ op.H).tocsr()
        return ProjectionPair(f2g, g2f, op.weights.copy(), space.mass, 1.0, space)

    def to_sections(self) -> Dict[str, Dict[str, object]]:
        sys_ = self.system
        return {
            f"projection q={sys_.q}": {
                "l": sys_.l,
                "s": sys_.s,
                "r": sys_.r,
                "n": sys_.n,
                "refined": int(self.refined),
                "interior": self.interior,
                "boundary": self.boundary,
            }
        }

    @classmethod
    def from_sections(cls, sections: Dict[str, Dict[str, List[str]]], q: int) -> "ProjectionCoefficients":
        section = sections.get(f"projection q={q}")
        if section is None:
            _LOGGER.log(f"missing section [projection q={q}]", logging.ERROR)
            raise CoefficientFormat(f"missing section [projection q={q}]")
        system = assemble_projection_constraints(q)
        found = tuple(CoefficientFile.integer(section, key) for key in ("l", "s", "r", "n"))
        if found != (system.l, system.s, system.r, system.n):
            _LOGGER.log(f"projection q={q} parameters {found} do not match the construction", logging.ERROR)
            raise CoefficientFormat(f"projection q={q} parameters {found} do not match the construction")
        interior = CoefficientFile.numbers(section, "interior")
        boundary = CoefficientFile.numbers(section, "boundary")
        if interior.shape != (system.n + 1, system.m) or boundary.shape != (system.s + 1, system.r, system.n + 1):
            _LOGGER.log(f"projection q={q} coefficient arrays have the wrong shape", logging.ERROR)
            raise CoefficientFormat(f"projection q={q} coefficient arrays have the wrong shape")
        values = np.concatenate([interior.ravel(), boundary.ravel()])
        return cls(system, values, bool(CoefficientFile.integer(section, "refined")))


def _refine(coefficients: ProjectionCoefficients, logger: SbpGlueLogger) -> ProjectionCoefficients:
    """
    Moves the coefficients within the null space of the constraints so that the
    eigenvalues of B = P_g2f P_f2g on a 64-cell grid cluster toward one. B is similar to
    S = H^1/2 P_g2f M^-1 P_g2f^T H^1/2, and the objective is ||S - I||_F^2.
    """
    system = coefficients.system
    basis = scipy.linalg.null_space(system.matrix, rcond=RANK_TOLERANCE)
    if basis.shape[1] == 0:
        return replace(coefficients, refined=True)
    template = coefficients.template(REFINE_GRID)
    op = build_sbp(system.q, REFINE_GRID)
    root_norm = np.sqrt(op.weights)
    inverse_mass = 1.0 / build_glue_for_grid(REFINE_GRID, system.interior_order).mass
    shape = (REFINE_GRID + 1, REFINE_GRID * (system.n + 1))
    eye = np.eye(shape[0])
    start = coefficients.values

    def objective(y: np.ndarray):
        g2f = (template @ (start + basis @ y)).reshape(shape)
        weighted = root_norm[:, None] * (g2f * inverse_mass[None, :])
        deviation = weighted @ (root_norm[:, None] * g2f).T - eye
        gradient = 4.0 * root_norm[:, None] * (deviation @ weighted)
        return float(np.sum(deviation ** 2)), basis.T @ (template.T @ gradient.ravel())

    initial, _ = objective(np.zeros(basis.shape[1]))
    result = scipy.optimize.minimize(
        objective, np.zeros(basis.shape[1]), jac=True, method="L-BFGS-B", options={"maxiter": 500}
    )
    logger.log(
        f"Refined projection q={system.q} over {basis.shape[1]} free directions: "
        f"objective {initial:.6e} -> {result.fun:.6e}",
        logging.INFO,
    )
    return ProjectionCoefficients(system, start + basis @ result.x, True)


def solve_constraints(system: ConstraintSystem, refine: bool = False, logger: Optional[SbpGlueLogger] = None) -> ProjectionCoefficients:
    """Minimum-norm solution of the constraint system, optionally refined."""
    logger = logger or _LOGGER
    logger.log(
        f"Solving projection constraints q={system.q}: {system.constraint_count} constraints, {system.unknown_count} unknowns",
        logging.INFO,
    )
    values, _, rank, _ = scipy.linalg.lstsq(system.matrix, system.rhs, cond=RANK_TOLERANCE)
    coefficients = ProjectionCoefficients(system, values)
    residual = coefficients.constraint_residual()
    if residual > INCONSISTENCY_LIMIT:
        logger.log(f"Projection constraints q={system.q} inconsistent: residual {residual:.3e}", logging.ERROR)
        raise InconsistentConstraints(f"projection constraints for q={system.q} have residual {residual:.3e}")
    if residual > CONSISTENCY_TOLERANCE:
        logger.log(f"Projection constraints q={system.q}: residual {residual:.3e} fails the certificate", logging.WARNING)
    logger.log(f"Projection constraints q={system.q}: rank {rank}, residual {residual:.3e}", logging.INFO)
    if refine:
        coefficients = _refine(coefficients, logger)
    return coefficients


def solve_projection(system: ConstraintSystem, op: SbpOperator1D, refine: bool = False, logger: Optional[SbpGlueLogger] = None) -> ProjectionPair:
    """Solves the constraints and assembles the pair on the grid of op."""
    return solve_constraints(system, refine, logger).assemble(op.n_cells, op)


def projection_cache_path(q: int, refine: bool) -> str:
    name = f"projection_q{q}{'_refined' if refine else ''}.txt"
    return os.path.join(SbpGlueSettings.get_global_cache_directory(), name)


@functools.lru_cache(maxsize=None)
def _cached_coefficients(q: int, refine: bool) -> ProjectionCoefficients:
    path = projection_cache_path(q, refine)
    if os.path.exists(path):
        try:
            coefficients = ProjectionCoefficients.from_sections(CoefficientFile.read(_LOGGER, path), q)
            if coefficients.constraint_residual() <= CONSISTENCY_TOLERANCE and coefficients.refined == refine:
                _LOGGER.log(f"Loaded projection coefficients q={q} from {path}", logging.INFO)
                return coefficients
            _LOGGER.log(f"Cached projection coefficients at {path} fail certification, solving again", logging.WARNING)
        except CoefficientFormat as exc:
            _LOGGER.log(f"Ignoring malformed cache file {path}: {exc.message}", logging.WARNING)
    coefficients = solve_constraints(assemble_projection_constraints(q), refine)
    write_projection_coefficients(_LOGGER, path, coefficients)
    return coefficients


def load_projection_coefficients(q: int, logger: Optional[SbpGlueLogger] = None, refine: bool = False) -> ProjectionCoefficients:
    """
    Returns the coefficients of order q from the in-process memo, the on-disk cache, or a
    fresh solve (which is then cached).
    """
    if logger is not None:
        logger.log(f"Requesting projection coefficients q={q} (refine={refine})", logging.DEBUG)
    return _cached_coefficients(q, refine)


def write_projection_coefficients(logger: SbpGlueLogger, path: str, coefficients: ProjectionCoefficients) -> None:
    sys_ = coefficients.system
    comment = (
        f"SBP-compatible glue projection coefficients, boundary order q={sys_.q}\n"
        f"interior[i, j]: mode i of interval k-l+j to grid point k\n"
        f"boundary[k, j, i]: mode i of interval j to boundary point k"
    )
    CoefficientFile.write(logger, path, coefficients.to_sections(), comment)


@functools.lru_cache(maxsize=None)
def projection_pair(q: int, N: int, refine: bool = False) -> ProjectionPair:
    """The face pair of an N-cell SBP grid of order q on the reference range [-1, 1]."""
    return load_projection_coefficients(q, refine=refine).assemble(N)


def certify_projection(coefficients: ProjectionCoefficients, N: int) -> List[CertificateRow]:
    """
    Certificate rows for an assembled pair: constraint counts against the parameter
    table, constraint residual, compatibility, and polynomial exactness of both
    directions split between interior and boundary rows/intervals.
    """
    sys_ = coefficients.system
    pair = coefficients.assemble(N)
    space = pair.space
    x = np.linspace(-1.0, 1.0, N + 1)
    p_i, p_b = sys_.interior_order, sys_.boundary_order

    interior_points = np.zeros(N + 1, dtype=bool)
    interior_points[sys_.s + 1:N - sys_.s] = True
    interior_intervals = np.zeros(N, dtype=bool)
    interior_intervals[sys_.r:N - sys_.r] = True
    interior_modes = np.repeat(interior_intervals, sys_.n + 1)

    errors = {"g2f_interior": 0.0, "g2f_boundary": 0.0, "f2g_interior": 0.0, "f2g_boundary": 0.0}
    for degree in range(p_i):
        exact_modes = space.modal_coefficients(lambda t: t ** degree)
        g2f_error = np.abs(pair.g2f @ exact_modes - x ** degree)
        f2g_error = np.abs(pair.f2g @ x ** degree - exact_modes)
        errors["g2f_interior"] = max(errors["g2f_interior"], float(g2f_error[interior_points].max(initial=0.0)))
        errors["f2g_interior"] = max(errors["f2g_interior"], float(f2g_error[interior_modes].max(initial=0.0)))
        if degree < p_b:
            errors["g2f_boundary"] = max(errors["g2f_boundary"], float(g2f_error[~interior_points].max(initial=0.0)))
            errors["f2g_boundary"] = max(errors["f2g_boundary"], float(f2g_error[~interior_modes].max(initial=0.0)))

    expected_constraints, expected_unknowns = PROJECTION_COUNTS[sys_.q]

    def row(check: str, residual: float, tolerance: float) -> CertificateRow:
        return CertificateRow(check=check, residual=residual, status="pass" if residual <= tolerance else "fail")

    certificate = [
        row("constraint_count", float(abs(sys_.constraint_count - expected_constraints)), 0.0),
        row("unknown_count", float(abs(sys_.unknown_count - expected_unknowns)), 0.0),
        row("constraint_residual", coefficients.constraint_residual(), CONSISTENCY_TOLERANCE),
        row("compatibility", pair.compatibility_residual(), COMPATIBILITY_TOLERANCE),
    ]
    certificate += [row(f"{name}_accuracy", value, ACCURACY_TOLERANCE) for name, value in errors.items()]
    return certificate


def glue_to_glue(coarse: GlueSpace, fine: GlueSpace) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
    """
    P_a2b embeds the coarse space into the fine one exactly; P_b2a = M_a^-1 P_a2b^T M_b is
    the L2-orthogonal projection back.
    """
    tolerance = BREAKPOINT_TOLERANCE * max(1.0, coarse.hi - coarse.lo)
    if fine.order < coarse.order or abs(fine.lo - coarse.lo) > tolerance or abs(fine.hi - coarse.hi) > tolerance:
        _LOGGER.log(f"Glue of order {fine.order} cannot hold order {coarse.order}", logging.ERROR)
        raise NotNested(
            f"glue space of order {fine.order} on [{fine.lo}, {fine.hi}] does not contain "
            f"order {coarse.order} on [{coarse.lo}, {coarse.hi}]"
        )
    for point in coarse.breakpoints:
        if np.min(np.abs(fine.breakpoints - point)) > tolerance:
            _LOGGER.log(f"Breakpoint {point} missing from the finer glue", logging.ERROR)
            raise NotNested(f"coarse breakpoint {point} is not a fine breakpoint")

    owner = np.searchsorted(coarse.breakpoints, (fine.breakpoints[:-1] + fine.breakpoints[1:]) / 2.0) - 1
    t, w = legendre.leggauss(fine.order + 2)
    fine_vander = legendre.legvander(t, fine.order)
    fine_scale = (2 * np.arange(fine.order + 1) + 1) / 2.0
    nc, nf = coarse.order + 1, fine.order + 1
    rows, cols, vals = [], [], []
    for interval, parent in enumerate(owner):
        a, b = fine.breakpoints[interval], fine.breakpoints[interval + 1]
        A, B = coarse.breakpoints[parent], coarse.breakpoints[parent + 1]
        eta = a + (t + 1.0) * (b - a) / 2.0
        coarse_vander = legendre.legvander((2 * eta - A - B) / (B - A), coarse.order)
        block = fine_scale[:, None] * (fine_vander.T @ (w[:, None] * coarse_vander))
        jj, ii = np.meshgrid(np.arange(nf), np.arange(nc), indexing="ij")
        rows.append((interval * nf + jj).ravel())
        cols.append((parent * nc + ii).ravel())
        vals.append(block.ravel())
    a2b = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(fine.dim, coarse.dim)
    ).tocsr()
    a2b.eliminate_zeros()
    b2a = (sp.diags(1.0 / coarse.mass) @ a2b.T @ sp.diags(fine.mass)).tocsr()
    return a2b, b2a


@dataclass(frozen=True)
class GluePiece:
    """A participant's pair composed onto the common glue, and its coefficient slice there."""

    pair: ProjectionPair
    glue_slice: slice


@dataclass(frozen=True)
class CommonGlue:
    """
    The glue space shared by both sides of an interface. ``space`` is None for a conforming
    interface, where the glue is the face grid itself and the mass is its norm.
    """

    space: Optional[GlueSpace]
    minus: List[GluePiece] = field(default_factory=list)
    plus: List[GluePiece] = field(default_factory=list)
    identity_mass: Optional[np.ndarray] = None

    @property
    def mass(self) -> np.ndarray:
        return self.space.mass if self.space is not None else self.identity_mass

    @property
    def dim(self) -> int:
        return self.mass.size

    @classmethod
    def identity(cls, norm_minus: np.ndarray, norm_plus: np.ndarray) -> "CommonGlue":
        """Conforming glue between two faces carrying the same norm."""
        norm_minus = np.asarray(norm_minus, dtype=float)
        norm_plus = np.asarray(norm_plus, dtype=float)
        if norm_minus.shape != norm_plus.shape or np.max(np.abs(norm_minus - norm_plus)) > 1e-12:
            _LOGGER.log("Conforming faces with different grids or norms", logging.ERROR)
            raise PartitionMismatch("conforming faces must share their grid and norm")
        whole = slice(0, norm_minus.size)
        return cls(
            None,
            [GluePiece(ProjectionPair.identity(norm_minus), whole)],
            [GluePiece(ProjectionPair.identity(norm_plus), whole)],
            norm_minus,
        )


def _check_partition(pairs: Sequence[ProjectionPair], lo: float, hi: float, side: str) -> None:
    spans = sorted((p.space.lo, p.space.hi) for p in pairs)
    tolerance = BREAKPOINT_TOLERANCE * max(1.0, hi - lo)
    cursor = lo
    for a, b in spans:
        if abs(a - cursor) > tolerance:
            _LOGGER.log(f"{side} side pieces leave a gap or overlap at {cursor}", logging.ERROR)
            raise PartitionMismatch(f"{side} side pieces leave a gap or overlap at {cursor} (next piece starts at {a})")
        cursor = b
    if abs(cursor - hi) > tolerance:
        _LOGGER.log(f"{side} side pieces end at {cursor}, expected {hi}", logging.ERROR)
        raise PartitionMismatch(f"{side} side pieces end at {cursor}, expected {hi}")


def compose_to_common_glue(
    side_minus: Sequence[ProjectionPair],
    side_plus: Sequence[ProjectionPair],
    logger: Optional[SbpGlueLogger] = None,
    min_order: int = 0,
) -> CommonGlue:
    """
    Composes every participant's native pair (already placed on its interface range) onto
    the finest common glue: the union of all breakpoints at the highest participant order,
    raised to ``min_order`` if that is higher. Each composed pair is checked for
    compatibility.
    """
    logger = logger or _LOGGER
    pieces = list(side_minus) + list(side_plus)
    if not side_minus or not side_plus or any(p.space is None for p in pieces):
        logger.log("Interface sides without glue spaces cannot be composed", logging.ERROR)
        raise PartitionMismatch("both sides need at least one participant with a glue space")
    lo = min(p.space.lo for p in side_minus)
    hi = max(p.space.hi for p in side_minus)
    _check_partition(side_minus, lo, hi, "minus")
    _check_partition(side_plus, lo, hi, "plus")

    tolerance = BREAKPOINT_TOLERANCE * max(1.0, hi - lo)
    merged: List[float] = []
    for point in np.sort(np.concatenate([p.space.breakpoints for p in pieces])):
        if not merged or point - merged[-1] > tolerance:
            merged.append(float(point))
    merged[0], merged[-1] = lo, hi
    common = GlueSpace(np.array(merged), max(min_order, max(p.space.order for p in pieces)))

    def compose(pair: ProjectionPair) -> GluePiece:
        target = common.restrict(pair.space.lo, pair.space.hi)
        a2b, b2a = glue_to_glue(pair.space, target)
        composed = ProjectionPair(
            f2g=(a2b @ pair.f2g).tocsr(),
            g2f=(pair.g2f @ b2a).tocsr(),
            source_norm=pair.source_norm,
            mass=target.mass,
            delta=pair.delta,
            space=target,
        )
        residual = composed.compatibility_residual()
        if residual > COMPATIBILITY_TOLERANCE:
            logger.log(f"Composed projection fails compatibility: {residual:.3e}", logging.ERROR)
            raise IncompatibleProjection(f"composed projection has compatibility residual {residual:.3e}")
        return GluePiece(composed, common.coefficient_slice(pair.space.lo, pair.space.hi))

    result = CommonGlue(common, [compose(p) for p in side_minus], [compose(p) for p in side_plus])
    logger.log(
        f"Composed {len(pieces)} participants onto a common glue with {common.n_intervals} intervals of order {common.order}",
        logging.DEBUG,
    )
    return result


def dg_edge_projection(
    points: np.ndarray,
    weights: np.ndarray,
    lo: float,
    hi: float,
    order: int,
    trace_degree: int,
) -> ProjectionPair:
    """
    Native pair of one DG edge spanning [lo, hi] of the interface. Traces live at the edge
    quadrature points whose glue-local coordinates are ``points`` (in [-1, 1], increasing
    with the interface parameter) and weights ``weights``; the glue
    is a single interval of Legendre order ``order``. P_g2f evaluates, P_f2g is the
    quadrature L2 projection, and the pair is compatible with Delta = (hi - lo)/2.
    """
    if order < trace_degree:
        _LOGGER.log(f"DG edge glue order {order} is below the trace degree {trace_degree}", logging.ERROR)
        raise GlueOrderTooLow(f"glue order {order} is below the DG trace degree {trace_degree}")
    vander = legendre.legvander(np.asarray(points, dtype=float), order)
    reference_mass = 2.0 / (2 * np.arange(order + 1) + 1)
    gram = vander.T @ (np.asarray(weights)[:, None] * vander)
    error = np.max(np.abs(gram - np.diag(reference_mass)))
    if error > 1e-10:
        _LOGGER.log(f"DG edge quadrature misses the glue mass matrix by {error:.3e}", logging.ERROR)
        raise QuadratureTooCoarse(f"edge quadrature misses the glue mass matrix by {error:.3e}")
    delta = (hi - lo) / 2.0
    space = GlueSpace(np.array([lo, hi]), order)
    f2g = sp.csr_matrix((vander * np.asarray(weights)[:, None]).T / reference_mass[:, None])
    return ProjectionPair(f2g, sp.csr_matrix(vander), np.asarray(weights, dtype=float), space.mass, delta, space)
