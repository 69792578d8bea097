"""
Penalties for interfaces whose sides are coupled through a glue space.

Each side of an interface is a list of participants (a block face or a DG edge) that
partition the interface range. Participants are composed onto one common glue, the
starred states are formed there and every participant receives its penalty through its
own glue-to-face projection. The glue quantities are scaled by sqrt(S_J / Delta) so that
the H-compatibility of the projections carries the face energy onto the glue.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from sbpglue.dg import DgMesh, dg_edge_dissipation
from sbpglue.fd_solver import FacePenalty, FaceTrace, Material, face_dissipation
from sbpglue.glue import (
    CommonGlue,
    GluePiece,
    ProjectionPair,
    compose_to_common_glue,
    dg_edge_projection,
    projection_pair,
)
from sbpglue.sbpglue_exceptions import (
    GlueOrderTooLow,
    NegativeAlpha,
    NonPositiveSurfaceJacobian,
    PartitionMismatch,
    ShapeMismatch,
)
from sbpglue.sbpglue_logger import SbpGlueLogger
from sbpglue.sbpglue_types import ParticipantKind

_LOGGER = SbpGlueLogger()


@dataclass(frozen=True)
class InterfaceParticipant:
    """
    One side piece of an interface. ``key`` identifies the owner: (block name, face) for
    finite difference faces, (element, local edge) for DG edges. ``native`` is the
    participant's own projection pair placed on [lo, hi] of the interface.
    """

    kind: ParticipantKind
    key: Hashable
    native: ProjectionPair

    @property
    def lo(self) -> float:
        return self.native.space.lo if self.native.space is not None else -1.0

    @property
    def hi(self) -> float:
        return self.native.space.hi if self.native.space is not None else 1.0


@dataclass(frozen=True)
class InterfaceSpec:
    name: str
    minus: List[InterfaceParticipant]
    plus: List[InterfaceParticipant]
    glue: CommonGlue
    alpha: float

    @property
    def participants(self) -> List[Tuple[InterfaceParticipant, GluePiece]]:
        return list(zip(self.minus, self.glue.minus)) + list(zip(self.plus, self.glue.plus))


@dataclass(frozen=True)
class GlueValues:
    """Scaled pressure and normal velocity of both sides, projected onto the common glue."""

    p_minus: np.ndarray
    v_minus: np.ndarray
    p_plus: np.ndarray
    v_plus: np.ndarray


def fd_participant(block: str, face, q: int, n_cells: int, lo: float, hi: float, refine: bool = False) -> InterfaceParticipant:
    """A block face of ``n_cells`` cells with order-q operators, spanning [lo, hi] of the interface."""
    return InterfaceParticipant(ParticipantKind.FD, (block, face), projection_pair(q, n_cells, refine).placed(lo, hi))


def dg_participant(mesh: DgMesh, element: int, edge: int) -> InterfaceParticipant:
    """
    An interface edge of a DG mesh with its native single-interval glue of order q. The
    glue-local coordinate of the edge quadrature points follows the edge orientation.
    """
    lo, hi, orientation = mesh.interface_range(element, edge)
    pair = dg_edge_projection(
        orientation * mesh.ref.edge_t, mesh.ref.edge_weights, lo, hi, order=mesh.q, trace_degree=mesh.q
    )
    return InterfaceParticipant(ParticipantKind.DG, (element, edge), pair)


def build_interface(
    name: str,
    minus: Sequence[InterfaceParticipant],
    plus: Sequence[InterfaceParticipant],
    alpha: float,
    glue_order: Optional[int] = None,
    logger: Optional[SbpGlueLogger] = None,
) -> InterfaceSpec:
    """
    Composes the participants of both sides onto their common glue. ``glue_order`` raises
    the order of the common glue; it may not drop below any participant's native order.
    """
    logger = logger or _LOGGER
    if alpha < 0:
        logger.log(f"Interface {name}: negative alpha {alpha}", logging.ERROR)
        raise NegativeAlpha(f"penalty parameter alpha must be non-negative, got {alpha}")
    natives = [participant.native for participant in list(minus) + list(plus)]
    needed = max((pair.space.order for pair in natives if pair.space is not None), default=0)
    if glue_order is not None and glue_order < needed:
        logger.log(f"Interface {name}: glue order {glue_order} is below the native order {needed}", logging.ERROR)
        raise GlueOrderTooLow(f"interface {name}: glue order {glue_order} is below the native order {needed}")
    glue = compose_to_common_glue(
        [m.native for m in minus], [p.native for p in plus], logger, min_order=glue_order or 0
    )
    logger.log(
        f"Interface {name}: {len(minus)} minus and {len(plus)} plus participants, glue dimension {glue.dim}",
        logging.INFO,
    )
    return InterfaceSpec(name, list(minus), list(plus), glue, alpha)


def _scaling(trace: FaceTrace, pair: ProjectionPair, label: Hashable) -> np.ndarray:
    if np.any(trace.S_J <= 0):
        _LOGGER.log(f"Participant {label} has a non-positive surface Jacobian", logging.ERROR)
        raise NonPositiveSurfaceJacobian(f"participant {label} has a non-positive surface Jacobian")
    if trace.p.shape != pair.source_norm.shape or trace.v.shape != pair.source_norm.shape:
        _LOGGER.log(f"Participant {label}: {trace.p.size} trace points for {pair.source_norm.size} grid points", logging.ERROR)
        raise ShapeMismatch(
            f"participant {label}: trace has {trace.p.size} points, its projection expects {pair.source_norm.size}"
        )
    return np.sqrt(trace.S_J / pair.delta)


def project_to_glue(interface: InterfaceSpec, minus: Sequence[FaceTrace], plus: Sequence[FaceTrace]) -> GlueValues:
    """Assembles w p and w v of every participant onto the common glue, w = sqrt(S_J / Delta)."""
    if len(minus) != len(interface.minus) or len(plus) != len(interface.plus):
        _LOGGER.log(f"Interface {interface.name}: trace counts do not match the participants", logging.ERROR)
        raise ShapeMismatch(
            f"interface {interface.name}: got {len(minus)}/{len(plus)} traces for "
            f"{len(interface.minus)}/{len(interface.plus)} participants"
        )

    def side(participants, pieces, traces):
        p_bar = np.zeros(interface.glue.dim)
        v_bar = np.zeros(interface.glue.dim)
        for participant, piece, trace in zip(participants, pieces, traces):
            w = _scaling(trace, piece.pair, participant.key)
            p_bar[piece.glue_slice] += piece.pair.f2g @ (w * trace.p)
            v_bar[piece.glue_slice] += piece.pair.f2g @ (w * trace.v)
        return p_bar, v_bar

    p_minus, v_minus = side(interface.minus, interface.glue.minus, minus)
    p_plus, v_plus = side(interface.plus, interface.glue.plus, plus)
    return GlueValues(p_minus, v_minus, p_plus, v_plus)


def _glue_differences(p_own, v_own, p_other, v_other, alpha: float, Z: float) -> Tuple[np.ndarray, np.ndarray]:
    dp = 0.5 * (p_other - p_own) + alpha * Z / 2.0 * (v_other + v_own)
    dv = -0.5 * (v_other + v_own) - alpha / (2.0 * Z) * (p_other - p_own)
    return dp, dv


def nonconforming_penalty(
    interface: InterfaceSpec,
    minus: Sequence[FaceTrace],
    plus: Sequence[FaceTrace],
    material: Material,
) -> Tuple[List[FacePenalty], List[FacePenalty]]:
    """
    Penalties for every participant of the interface, minus side first.

    Finite difference participants get p* - p = w^-1 P_g2f dp_bar + (w^-1 P_g2f p_bar - p)/2
    (and likewise for v), which removes the projection error from the energy rate. DG
    participants take p* = w^-1 P_g2f p_bar* and v* - v = w^-1 P_g2f dv_bar directly.
    """
    values = project_to_glue(interface, minus, plus)
    dp_minus, dv_minus = _glue_differences(
        values.p_minus, values.v_minus, values.p_plus, values.v_plus, interface.alpha, material.Z
    )
    dp_plus, dv_plus = _glue_differences(
        values.p_plus, values.v_plus, values.p_minus, values.v_minus, interface.alpha, material.Z
    )

    def side(participants, pieces, traces, p_bar, v_bar, dp_bar, dv_bar):
        penalties = []
        for participant, piece, trace in zip(participants, pieces, traces):
            w = _scaling(trace, piece.pair, participant.key)
            g2f = piece.pair.g2f
            s = piece.glue_slice
            back_dp = g2f @ dp_bar[s] / w
            back_dv = g2f @ dv_bar[s] / w
            if participant.kind == ParticipantKind.FD:
                dp = back_dp + 0.5 * (g2f @ p_bar[s] / w - trace.p)
                dv = back_dv + 0.5 * (g2f @ v_bar[s] / w - trace.v)
            else:
                dp = g2f @ (p_bar[s] + dp_bar[s]) / w - trace.p
                dv = back_dv
            penalties.append(FacePenalty(dp, dv))
        return penalties

    return (
        side(interface.minus, interface.glue.minus, minus, values.p_minus, values.v_minus, dp_minus, dv_minus),
        side(interface.plus, interface.glue.plus, plus, values.p_plus, values.v_plus, dp_plus, dv_plus),
    )


def glue_dissipation(interface: InterfaceSpec, values: GlueValues, material: Material) -> float:
    """
    Energy rate of the interface evaluated on the glue:
    -alpha Z/2 |v_bar- + v_bar+|_M^2 - alpha/(2Z) |p_bar- - p_bar+|_M^2.
    """
    mass = interface.glue.mass
    v_sum = values.v_minus + values.v_plus
    p_jump = values.p_minus - values.p_plus
    Z = material.Z
    return float(-interface.alpha * Z / 2.0 * np.sum(mass * v_sum ** 2) - interface.alpha / (2.0 * Z) * np.sum(mass * p_jump ** 2))


def participant_dissipation(kind: ParticipantKind, norm: np.ndarray, trace: FaceTrace, penalty: FacePenalty) -> float:
    """Energy rate contributed by one participant's penalty, in its own norm."""
    if kind == ParticipantKind.FD:
        return face_dissipation(norm, trace, penalty)
    return dg_edge_dissipation(norm, trace, penalty)


def interface_dissipation(
    interface: InterfaceSpec,
    minus: Sequence[FaceTrace],
    plus: Sequence[FaceTrace],
    material: Material,
) -> float:
    """Sum of the participant dissipations produced by ``nonconforming_penalty``."""
    penalties_minus, penalties_plus = nonconforming_penalty(interface, minus, plus, material)
    total = 0.0
    for participants, traces, penalties in (
        (interface.minus, minus, penalties_minus),
        (interface.plus, plus, penalties_plus),
    ):
        for participant, trace, penalty in zip(participants, traces, penalties):
            total += participant_dissipation(participant.kind, participant.native.source_norm, trace, penalty)
    return total


def build_sbp_dg_interface(
    block: str,
    face,
    q: int,
    n_cells: int,
    mesh: DgMesh,
    alpha: float,
    refine: bool = False,
    logger: Optional[SbpGlueLogger] = None,
) -> InterfaceSpec:
    """
    Glues a whole block face (minus side) to the interface edges of a DG mesh (plus side).
    The common glue has order max(2q - 1, q_DG) so that the DG traces pass through it
    without projection error.
    """
    minus = [fd_participant(block, face, q, n_cells, -1.0, 1.0, refine)]
    plus = [dg_participant(mesh, k, e) for k, e in mesh.interface_edges]
    return build_interface(
        f"{block}.{face}|dg", minus, plus, alpha, glue_order=max(2 * q - 1, mesh.q), logger=logger
    )


def sbp_dg_coupling(
    interface: InterfaceSpec,
    fd_traces: Sequence[FaceTrace],
    dg_traces: Sequence[FaceTrace],
    material: Material,
) -> Tuple[Dict[Hashable, FacePenalty], Dict[Hashable, FacePenalty]]:
    """
    Penalties of the finite difference faces keyed by (block, face) and fluxes (p* - p,
    v* - v) of the DG edges keyed by (element, edge) for an interface with block faces on
    its minus side and DG edges on its plus side.
    """
    if any(p.kind != ParticipantKind.FD for p in interface.minus) or any(
        p.kind != ParticipantKind.DG for p in interface.plus
    ):
        _LOGGER.log(f"Interface {interface.name} is not a block-to-DG interface", logging.ERROR)
        raise PartitionMismatch(f"interface {interface.name} needs block faces on the minus side and DG edges on the plus side")
    penalties_fd, fluxes_dg = nonconforming_penalty(interface, fd_traces, dg_traces, material)
    return (
        {participant.key: penalty for participant, penalty in zip(interface.minus, penalties_fd)},
        {participant.key: flux for participant, flux in zip(interface.plus, fluxes_dg)},
    )
