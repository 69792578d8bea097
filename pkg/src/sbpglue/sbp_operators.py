"""
Diagonal-norm summation-by-parts (SBP) first derivative operators on [-1, 1].

An operator D = H^-1 Q approximates d/dx with H diagonal and positive and
Q + Q^T = B = diag(-1, 0, ..., 0, 1). Interior rows use the central stencil of order
2q; the first and last ``closure_width`` rows form the boundary closure of order q.

The interior stencils and published boundary norms are read from
``data/sbp_coefficients.txt``. The closure block of Q is derived once per family from
the accuracy conditions, which are linear in the norm weights and in the skew entries
of Q. Remaining free parameters are fixed as the minimum-norm deviation from the
interior operator.
"""

import functools
import logging
import pathlib
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.sparse as sp

from sbpglue.sbpglue_exceptions import CoefficientFormat, GridTooSmall, InconsistentConstraints, UnsupportedOrder
from sbpglue.sbpglue_logger import SbpGlueLogger
from sbpglue.sbpglue_types import AccuracyRow, Region
from sbpglue.sbpglue_utils import CoefficientFile

SUPPORTED_ORDERS = (1, 2, 3, 4, 5)
COEFFICIENT_FILE = pathlib.Path(__file__).parent / "data" / "sbp_coefficients.txt"

# accuracy system residual accepted when deriving a closure
CLOSURE_TOLERANCE = 1e-10
# smallest closure norm weight accepted from a free-norm solve
MIN_NORM_WEIGHT = 0.05

_LOGGER = SbpGlueLogger()


@dataclass(frozen=True)
class SbpFamily:
    """
    N-independent description of one SBP family in index coordinates (unit spacing).

    closure_block holds rows 0..b-1 and columns 0..b+q-1 of Q, including the -1/2 of B/2.
    """

    q: int
    closure_width: int
    interior_stencil: np.ndarray
    closure_norm: np.ndarray
    closure_block: np.ndarray

    @property
    def interior_order(self) -> int:
        return 2 * self.q

    @property
    def boundary_order(self) -> int:
        return self.q


@dataclass(frozen=True)
class SbpOperator1D:
    """
    An assembled operator on N+1 equispaced points of [-1, 1].
    H, Q, D and B are sparse; ``weights`` is the diagonal of H.
    """

    q: int
    n_cells: int
    spacing: float
    closure_width: int
    weights: np.ndarray
    H: sp.csr_matrix
    Q: sp.csr_matrix
    D: sp.csr_matrix
    B: sp.csr_matrix

    @property
    def n_points(self) -> int:
        return self.n_cells + 1

    @property
    def interior_order(self) -> int:
        return 2 * self.q

    @property
    def boundary_order(self) -> int:
        return self.q

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.n_cells + 1)


def _check_order(q: int) -> None:
    if q not in SUPPORTED_ORDERS:
        _LOGGER.log(f"Unsupported SBP boundary order q={q}", logging.ERROR)
        raise UnsupportedOrder(f"SBP boundary order q must be one of {SUPPORTED_ORDERS}, got {q}")


@functools.lru_cache(maxsize=None)
def _coefficient_sections() -> Dict[str, Dict[str, List[str]]]:
    return CoefficientFile.read(_LOGGER, str(COEFFICIENT_FILE))


def _family_data(q: int) -> Tuple[int, np.ndarray, Optional[np.ndarray]]:
    section = _coefficient_sections().get(f"family q={q}")
    if section is None:
        _LOGGER.log(f"{COEFFICIENT_FILE}: missing section [family q={q}]", logging.ERROR)
        raise CoefficientFormat(f"{COEFFICIENT_FILE}: missing section [family q={q}]")
    width = CoefficientFile.integer(section, "closure_width")
    stencil = CoefficientFile.numbers(section, "interior_stencil")
    if stencil.shape != (q,):
        _LOGGER.log(f"[family q={q}]: interior_stencil needs {q} entries, got {stencil.size}", logging.ERROR)
        raise CoefficientFormat(f"[family q={q}]: interior_stencil needs {q} entries, got {stencil.size}")
    norm = CoefficientFile.numbers(section, "norm") if "norm" in section else None
    if norm is not None and norm.shape != (width,):
        _LOGGER.log(f"[family q={q}]: norm needs {width} entries, got {norm.size}", logging.ERROR)
        raise CoefficientFormat(f"[family q={q}]: norm needs {width} entries, got {norm.size}")
    return width, stencil, norm


def _closure_system(q: int, width: int, stencil: np.ndarray, norm: Optional[np.ndarray]):
    """
    Accuracy conditions sum_j Q_ij x_j^m = h_i m x_i^(m-1) for the closure rows i < b and
    m = 0..q, with x_j = j/s for conditioning. Unknowns are the norm weights (when norm is
    None) followed by the skew entries S_ij, i < j < b. Returns (A, rhs, reference, pairs)
    where reference is the interior operator written in the same unknowns.
    """
    scale = width + q
    pairs = [(i, j) for i in range(width) for j in range(i + 1, width)]
    slot = {pair: k for k, pair in enumerate(pairs)}
    n_norm = 0 if norm is not None else width
    x = np.arange(width + q, dtype=float) / scale

    rows, rhs = [], []
    for i in range(width):
        for m in range(q + 1):
            xm = x ** m
            row = np.zeros(n_norm + len(pairs))
            known = -0.5 * xm[0] if i == 0 else 0.0
            for j in range(width):
                if j > i:
                    row[n_norm + slot[(i, j)]] += xm[j]
                elif j < i:
                    row[n_norm + slot[(j, i)]] -= xm[j]
            for j in range(width, i + q + 1):
                known += stencil[j - i - 1] * xm[j]
            derivative = m * x[i] ** (m - 1) / scale if m > 0 else 0.0
            if norm is None:
                row[i] -= derivative
                rhs.append(-known)
            else:
                rhs.append(norm[i] * derivative - known)
            rows.append(row)

    reference = np.zeros(n_norm + len(pairs))
    reference[:n_norm] = 1.0
    for (i, j), k in slot.items():
        if j - i <= q:
            reference[n_norm + k] = stencil[j - i - 1]
    return np.array(rows), np.array(rhs), reference, pairs


def _solve_closure(q: int, width: int, stencil: np.ndarray, norm: Optional[np.ndarray]):
    A, rhs, reference, pairs = _closure_system(q, width, stencil, norm)
    if A.shape[1] == 0:
        solution = reference
    else:
        deviation = scipy.linalg.lstsq(A, rhs - A @ reference)[0]
        solution = reference + deviation
    residual = float(np.max(np.abs(A @ solution - rhs))) if A.size else float(np.max(np.abs(rhs)))

    if norm is None and residual <= CLOSURE_TOLERANCE and solution[:width].min() < MIN_NORM_WEIGHT:
        solution = _positive_norm_solution(A, rhs, reference, width, solution)
        residual = float(np.max(np.abs(A @ solution - rhs)))
    return solution, residual, pairs


def _positive_norm_solution(A, rhs, reference, width, start):
    """Closest solution to the interior operator whose norm weights stay above MIN_NORM_WEIGHT."""
    particular = start
    basis = scipy.linalg.null_space(A)
    _LOGGER.log(f"Minimum-norm closure has non-positive weights, searching {basis.shape[1]} free directions", logging.INFO)

    def objective(y):
        d = particular + basis @ y - reference
        return float(d @ d), 2.0 * basis.T @ d

    constraints = {
        "type": "ineq",
        "fun": lambda y: (particular + basis @ y)[:width] - 2 * MIN_NORM_WEIGHT,
        "jac": lambda y: basis[:width, :],
    }
    result = scipy.optimize.minimize(
        objective, np.zeros(basis.shape[1]), jac=True, constraints=[constraints], method="SLSQP",
        options={"maxiter": 500, "ftol": 1e-14},
    )
    return particular + basis @ result.x


def _derive_family(q: int) -> SbpFamily:
    width, stencil, norm = _family_data(q)
    _LOGGER.log(f"Deriving SBP closure q={q} (closure width {width}, imposed norm: {norm is not None})", logging.INFO)

    solution, residual, pairs = _solve_closure(q, width, stencil, norm)
    if residual > CLOSURE_TOLERANCE and norm is not None:
        _LOGGER.log(f"Closure q={q} inconsistent with the listed norm (residual {residual:.3e}), solving for the norm", logging.WARNING)
        norm = None
        solution, residual, pairs = _solve_closure(q, width, stencil, norm)
    if residual > CLOSURE_TOLERANCE:
        _LOGGER.log(f"Closure q={q} accuracy system residual {residual:.3e}", logging.ERROR)
        raise InconsistentConstraints(f"SBP closure for q={q} has accuracy residual {residual:.3e}")

    n_norm = 0 if norm is not None else width
    closure_norm = np.array(norm if norm is not None else solution[:width], dtype=float)
    if np.any(closure_norm <= 0):
        _LOGGER.log(f"Closure q={q} norm is not positive: {closure_norm}", logging.ERROR)
        raise InconsistentConstraints(f"SBP closure for q={q} has a non-positive norm weight")

    block = np.zeros((width, width + q))
    for k, (i, j) in enumerate(pairs):
        block[i, j] = solution[n_norm + k]
        block[j, i] = -solution[n_norm + k]
    block[0, 0] = -0.5
    for i in range(width):
        for j in range(width, i + q + 1):
            block[i, j] = stencil[j - i - 1]

    family = SbpFamily(q, width, stencil, closure_norm, block)
    _LOGGER.log(f"Derived SBP closure q={q}, residual {residual:.3e}", logging.INFO)
    return family


@functools.lru_cache(maxsize=None)
def sbp_family(q: int) -> SbpFamily:
    """
    Returns the (memoized) family for boundary order q, certified on a reference grid.
    """
    _check_order(q)
    family = _derive_family(q)
    reference = _assemble(family, max(64, 4 * family.closure_width))
    flagged = [row for row in verify_sbp_accuracy(reference) if row["flagged"]]
    if flagged:
        _LOGGER.log(f"SBP family q={q} fails its accuracy contract: {flagged}", logging.ERROR)
        raise InconsistentConstraints(f"SBP family q={q} fails its accuracy contract at degrees {[r['degree'] for r in flagged]}")
    return family


def _assemble(family: SbpFamily, N: int) -> SbpOperator1D:
    q, width = family.q, family.closure_width
    n = N + 1
    rows: List[int] = []
    cols: List[int] = []
    vals: List[float] = []

    for i, j in zip(*np.nonzero(family.closure_block)):
        value = family.closure_block[i, j]
        rows += [i, N - i]
        cols += [j, N - j]
        vals += [value, -value]

    interior = np.arange(width, N - width + 1)
    for m, a in enumerate(family.interior_stencil, start=1):
        rows += list(interior) * 2
        cols += list(interior + m) + list(interior - m)
        vals += [a] * len(interior) + [-a] * len(interior)

    Q = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    index_weights = np.ones(n)
    index_weights[:width] = family.closure_norm
    index_weights[n - width:] = family.closure_norm[::-1]

    spacing = 2.0 / N
    weights = spacing * index_weights
    boundary = np.zeros(n)
    boundary[0], boundary[-1] = -1.0, 1.0
    return SbpOperator1D(
        q=q,
        n_cells=N,
        spacing=spacing,
        closure_width=width,
        weights=weights,
        H=sp.diags(weights).tocsr(),
        Q=Q,
        D=(sp.diags(1.0 / weights) @ Q).tocsr(),
        B=sp.diags(boundary).tocsr(),
    )


@functools.lru_cache(maxsize=None)
def build_sbp(q: int, N: int) -> SbpOperator1D:
    """
    Builds the operator of boundary order q (interior order 2q) on N+1 points of [-1, 1].

    Raises UnsupportedOrder for q outside 1..5 and GridTooSmall when the two boundary
    closures would overlap (N+1 < 2 * closure width).
    """
    _check_order(q)
    family = sbp_family(q)
    if N + 1 < 2 * family.closure_width:
        _LOGGER.log(f"Grid with N={N} too small for q={q}", logging.ERROR)
        raise GridTooSmall(
            f"q={q} needs at least {2 * family.closure_width} grid points, got N+1={N + 1}"
        )
    return _assemble(family, N)


def closure_rows(op: SbpOperator1D) -> int:
    """Number of boundary closure rows on each side of the operator."""
    return op.closure_width


def verify_sbp_accuracy(op: SbpOperator1D) -> List[AccuracyRow]:
    """
    Reports the max pointwise error of D applied to x^m, for m = 0..2q, separately over
    the interior rows and the boundary closure rows. A row is flagged when the error
    exceeds 1e-10*N for a degree the region is required to differentiate exactly.
    """
    x = op.grid
    tolerance = 1e-10 * op.n_cells
    width = op.closure_width
    boundary_mask = np.zeros(op.n_points, dtype=bool)
    boundary_mask[:width] = True
    boundary_mask[op.n_points - width:] = True

    report: List[AccuracyRow] = []
    for degree in range(op.interior_order + 1):
        exact = degree * x ** (degree - 1) if degree > 0 else np.zeros_like(x)
        error = np.abs(op.D @ x ** degree - exact)
        for region, mask, contract in (
            (Region.INTERIOR, ~boundary_mask, op.interior_order),
            (Region.BOUNDARY, boundary_mask, op.boundary_order),
        ):
            max_error = float(error[mask].max()) if mask.any() else 0.0
            report.append(
                AccuracyRow(
                    q=op.q,
                    N=op.n_cells,
                    degree=degree,
                    region=str(region),
                    max_error=max_error,
                    flagged=bool(degree <= contract and max_error > tolerance),
                )
            )
    return report
