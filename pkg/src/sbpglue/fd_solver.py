"""
Curvilinear SBP-SAT semi-discretization of the acoustic wave equation on structured blocks.

Each block carries v1, v2 and p on an (N1+1) x (N2+1) grid with axis 0 along xi1. The
volume terms use the split metric form, and every face receives a penalty expressed as the
pair (p* - p, v* - v) of starred-state differences along the face. The energy
rate of a block is the sum of its face dissipations, so any penalty that makes each face
dissipative keeps the block stable.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Tuple

import numpy as np

from sbpglue.geometry import MetricData, Transform, face_values, metrics_for_block
from sbpglue.sbp_operators import SbpOperator1D, build_sbp
from sbpglue.sbpglue_exceptions import InvalidMaterial, NegativeAlpha, ShapeMismatch, UnresolvedFace
from sbpglue.sbpglue_logger import SbpGlueLogger
from sbpglue.sbpglue_types import Face

_LOGGER = SbpGlueLogger()


@dataclass(frozen=True)
class Material:
    """
    Constant density and bulk modulus. ``Z`` is the scaling used by the dissipative penalty
    terms, taken as sqrt(rho/lam).
    """

    rho: float = 1.0
    lam: float = 1.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.rho) and np.isfinite(self.lam)) or self.rho <= 0 or self.lam <= 0:
            _LOGGER.log(f"rho and lam must be positive and finite, got rho={self.rho}, lam={self.lam}", logging.ERROR)
            raise InvalidMaterial(f"rho and lam must be positive and finite, got rho={self.rho}, lam={self.lam}")

    @property
    def c(self) -> float:
        return float(np.sqrt(self.lam / self.rho))

    @property
    def Z(self) -> float:
        return float(np.sqrt(self.rho / self.lam))


@dataclass
class BlockState:
    v1: np.ndarray
    v2: np.ndarray
    p: np.ndarray

    @classmethod
    def zeros(cls, shape: Tuple[int, int]) -> "BlockState":
        return cls(np.zeros(shape), np.zeros(shape), np.zeros(shape))

    @classmethod
    def from_vector(cls, vector: np.ndarray, shape: Tuple[int, int]) -> "BlockState":
        """Inverse of ``as_vector``: v1, v2 then p, each in row-major (xi1, xi2) order."""
        size = shape[0] * shape[1]
        if vector.size != 3 * size:
            _LOGGER.log(f"state vector of length {vector.size} does not fit 3 x {shape}", logging.ERROR)
            raise ShapeMismatch(f"state vector of length {vector.size} does not fit 3 x {shape}")
        v1, v2, p = (vector[k * size:(k + 1) * size].reshape(shape) for k in range(3))
        return cls(v1, v2, p)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.v1.ravel(), self.v2.ravel(), self.p.ravel()])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.p.shape


@dataclass(frozen=True)
class FaceTrace:
    """Pressure, outward normal velocity and surface Jacobian along a face or edge."""

    p: np.ndarray
    v: np.ndarray
    S_J: np.ndarray


@dataclass(frozen=True)
class FacePenalty:
    """Starred-state differences dp = p* - p and dv = v* - v along a face."""

    dp: np.ndarray
    dv: np.ndarray


@dataclass(frozen=True)
class Block:
    name: str
    transform: Transform
    op1: SbpOperator1D
    op2: SbpOperator1D
    metrics: MetricData
    norm: np.ndarray = field(repr=False)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.metrics.shape

    @property
    def n_unknowns(self) -> int:
        return 3 * self.shape[0] * self.shape[1]

    def face_norm(self, face: Face) -> np.ndarray:
        """Diagonal of the tangential norm along ``face``: H2 for west/east, H1 for south/north."""
        return np.asarray(self.op2.H.diagonal() if face.axis == 0 else self.op1.H.diagonal())

    def face_cells(self, face: Face) -> int:
        return self.op2.n_cells if face.axis == 0 else self.op1.n_cells

    def trace(self, state: BlockState, face: Face) -> FaceTrace:
        metric = self.metrics.faces[face]
        v = metric.n1 * face_values(state.v1, face) + metric.n2 * face_values(state.v2, face)
        return FaceTrace(p=face_values(state.p, face).copy(), v=v, S_J=metric.S_J)


def build_block(name: str, transform: Transform, q: int, N1: int, N2: int) -> Block:
    """Creates a block with order-q operators on an (N1+1) x (N2+1) grid mapped by ``transform``."""
    op1 = build_sbp(q, N1)
    op2 = build_sbp(q, N2)
    metrics = metrics_for_block(transform, N1, N2)
    norm = np.outer(op1.H.diagonal(), op2.H.diagonal())
    _LOGGER.log(f"Block {name}: {N1 + 1} x {N2 + 1} points, q = {q}, {transform!r}", logging.DEBUG)
    return Block(name, transform, op1, op2, metrics, norm)


def _check_state(block: Block, state: BlockState) -> None:
    for name in ("v1", "v2", "p"):
        if getattr(state, name).shape != block.shape:
            _LOGGER.log(f"{block.name}: {name} has shape {getattr(state, name).shape}, expected {block.shape}", logging.ERROR)
            raise ShapeMismatch(f"{block.name}: {name} has shape {getattr(state, name).shape}, expected {block.shape}")


def _d1(op: SbpOperator1D, array: np.ndarray) -> np.ndarray:
    return op.D @ array


def _d2(op: SbpOperator1D, array: np.ndarray) -> np.ndarray:
    return (op.D @ array.T).T


def rhs_volume(block: Block, state: BlockState, material: Material) -> BlockState:
    """Time derivative of the block state without face penalties."""
    _check_state(block, state)
    m = block.metrics
    dv = []
    for Jxi1, Jxi2 in ((m.Jxi1_x1, m.Jxi2_x1), (m.Jxi1_x2, m.Jxi2_x2)):
        flux = _d1(block.op1, Jxi1 * state.p) + _d2(block.op2, Jxi2 * state.p)
        dv.append(-flux / (material.rho * m.J))
    divergence = (
        m.Jxi1_x1 * _d1(block.op1, state.v1)
        + m.Jxi2_x1 * _d2(block.op2, state.v1)
        + m.Jxi1_x2 * _d1(block.op1, state.v2)
        + m.Jxi2_x2 * _d2(block.op2, state.v2)
    )
    dp = -material.lam * divergence / m.J
    return BlockState(dv[0], dv[1], dp)


def boundary_penalty(trace: FaceTrace, alpha: float, material: Material) -> FacePenalty:
    """Free surface p = 0: p* = 0 and v* = v + alpha p / Z."""
    if alpha < 0:
        _LOGGER.log(f"penalty parameter alpha must be non-negative, got {alpha}", logging.ERROR)
        raise NegativeAlpha(f"penalty parameter alpha must be non-negative, got {alpha}")
    return FacePenalty(dp=-trace.p, dv=alpha * trace.p / material.Z)


def conforming_penalty(minus: FaceTrace, plus: FaceTrace, alpha: float, material: Material) -> FacePenalty:
    """
    Penalty on the ``minus`` side of a conforming face pair; call with the sides swapped for
    the plus side. Normal velocities are outward for their own side.
    """
    if alpha < 0:
        _LOGGER.log(f"penalty parameter alpha must be non-negative, got {alpha}", logging.ERROR)
        raise NegativeAlpha(f"penalty parameter alpha must be non-negative, got {alpha}")
    if minus.p.shape != plus.p.shape:
        _LOGGER.log(f"conforming faces have {minus.p.size} and {plus.p.size} points", logging.ERROR)
        raise ShapeMismatch(f"conforming faces have {minus.p.size} and {plus.p.size} points")
    Z = material.Z
    dp = 0.5 * (plus.p - minus.p) + alpha * Z / 2.0 * (plus.v + minus.v)
    dv = -0.5 * (plus.v + minus.v) - alpha / (2.0 * Z) * (plus.p - minus.p)
    return FacePenalty(dp, dv)


def _scatter(target: np.ndarray, face: Face, values: np.ndarray) -> None:
    if face == Face.WEST:
        target[0, :] += values
    elif face == Face.EAST:
        target[-1, :] += values
    elif face == Face.SOUTH:
        target[:, 0] += values
    else:
        target[:, -1] += values


def assemble_penalties(
    block: Block, penalties: Mapping[Face, FacePenalty]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Volume arrays (F_v1, F_v2, F_p) collecting H_face S_J n_i (p* - p) and
    H_face S_J (v* - v) from all four faces. Every face must have a penalty.
    """
    missing = [str(face) for face in Face if face not in penalties]
    if missing:
        _LOGGER.log(f"{block.name}: no penalty for face(s) {', '.join(missing)}", logging.ERROR)
        raise UnresolvedFace(f"{block.name}: no penalty for face(s) {', '.join(missing)}")
    F_v1, F_v2, F_p = (np.zeros(block.shape) for _ in range(3))
    for face, penalty in penalties.items():
        metric = block.metrics.faces[face]
        weight = block.face_norm(face) * metric.S_J
        if penalty.dp.shape != weight.shape or penalty.dv.shape != weight.shape:
            _LOGGER.log(f"{block.name}.{face}: penalty has {penalty.dp.size} entries, face has {weight.size}", logging.ERROR)
            raise ShapeMismatch(f"{block.name}.{face}: penalty has {penalty.dp.size} entries, face has {weight.size}")
        _scatter(F_v1, face, weight * metric.n1 * penalty.dp)
        _scatter(F_v2, face, weight * metric.n2 * penalty.dp)
        _scatter(F_p, face, weight * penalty.dv)
    return F_v1, F_v2, F_p


def block_rhs(block: Block, state: BlockState, penalties: Mapping[Face, FacePenalty], material: Material) -> BlockState:
    """Full time derivative of a block: volume terms plus face penalties."""
    rate = rhs_volume(block, state, material)
    F_v1, F_v2, F_p = assemble_penalties(block, penalties)
    scale = block.norm * block.metrics.J
    rate.v1 -= F_v1 / (material.rho * scale)
    rate.v2 -= F_v2 / (material.rho * scale)
    rate.p -= material.lam * F_p / scale
    return rate


def block_energy(block: Block, state: BlockState, material: Material) -> float:
    """rho/2 (v1^T JH v1 + v2^T JH v2) + 1/(2 lam) p^T JH p"""
    _check_state(block, state)
    weight = block.norm * block.metrics.J
    kinetic = material.rho / 2.0 * np.sum(weight * (state.v1 ** 2 + state.v2 ** 2))
    potential = np.sum(weight * state.p ** 2) / (2.0 * material.lam)
    return float(kinetic + potential)


def face_dissipation(norm: np.ndarray, trace: FaceTrace, penalty: FacePenalty) -> float:
    """
    -v^T H S p* + v^T H S p - v*^T H S p for a face with norm diagonal ``norm``.
    """
    weight = norm * trace.S_J
    p_star = trace.p + penalty.dp
    v_star = trace.v + penalty.dv
    return float(-np.sum(weight * trace.v * p_star) + np.sum(weight * trace.v * trace.p) - np.sum(weight * v_star * trace.p))


def edge_dissipation(block: Block, state: BlockState, face: Face, penalty: FacePenalty) -> float:
    """Contribution of one face of ``block`` to the block's energy rate."""
    return face_dissipation(block.face_norm(face), block.trace(state, face), penalty)


def block_dissipation(
    block: Block, state: BlockState, penalties: Mapping[Face, FacePenalty]
) -> Dict[Face, float]:
    return {face: edge_dissipation(block, state, face, penalty) for face, penalty in penalties.items()}
