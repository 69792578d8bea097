"""
This file contains the main interface for assembling a coupled discretization.
The abstract class CoupledSystem provides a factory method, create, that returns
the scenario-specific system for a run configuration. A system owns the finite
difference blocks, the optional DG mesh and the interfaces between them, and exposes
the semi-discrete right-hand side du/dt = F(u) on one flat state vector.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from sbpglue.dg import DgMesh, DgState, dg_dissipation, dg_edge_penalties, dg_energy, dg_rhs, dg_traces
from sbpglue.fd_solver import (
    Block,
    BlockState,
    FacePenalty,
    FaceTrace,
    Material,
    block_dissipation,
    block_energy,
    block_rhs,
    boundary_penalty,
    conforming_penalty,
)
from sbpglue.interfaces import InterfaceSpec, nonconforming_penalty, sbp_dg_coupling
from sbpglue.sbpglue_config import RunConfig, Scenario
from sbpglue.sbpglue_exceptions import PartitionMismatch, SbpGlueException, ShapeMismatch
from sbpglue.sbpglue_logger import SbpGlueLogger
from sbpglue.sbpglue_types import Face, ParticipantKind

FieldFunction = Callable[[np.ndarray, np.ndarray, float], Tuple[np.ndarray, np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class ConformingPair:
    """Two block faces sharing the same grid; ``minus`` and ``plus`` are (block, face)."""

    minus: Tuple[str, Face]
    plus: Tuple[str, Face]


@dataclass
class SystemState:
    blocks: Dict[str, BlockState]
    dg: Optional[DgState] = None


class CoupledSystem:
    """
    The CoupledSystem class assembles blocks, DG elements and interfaces of one scenario into
    a single linear semi-discretization. Subclasses populate ``blocks``, ``mesh``,
    ``conforming`` and ``interfaces`` in the scenario hooks; every block face that no
    interface claims is a free surface.
    """

    __scenario_hooks__ = ("build_blocks", "build_interfaces")

    @classmethod
    def create(cls, config: RunConfig, logger: SbpGlueLogger) -> "CoupledSystem":
        """
        Creates the scenario specific CoupledSystem for the given configuration.

        :param config: The run configuration.
        :param logger: The logger to use.

        :return CoupledSystem: A scenario specific CoupledSystem instance.
        """
        if config.scenario == Scenario.SBP_DG:
            from sbpglue.scenarios.sbp_dg.sbp_dg import SbpDgSystem

            return SbpDgSystem(config, logger)
        elif config.scenario in (
            Scenario.TWO_BLOCK_CONFORMING,
            Scenario.TWO_BLOCK_NESTED,
            Scenario.TWO_BLOCK_UNNESTED,
            Scenario.THREE_BLOCK_NESTED,
            Scenario.THREE_BLOCK_UNNESTED,
        ):
            from sbpglue.scenarios.multiblock.multiblock import MultiblockSystem

            return MultiblockSystem(config, logger)
        else:
            logger.log(f"Scenario {config.scenario} is not supported", logging.ERROR)
            raise SbpGlueException(f"Scenario {config.scenario} is not supported")

    @classmethod
    def defaults(cls, scenario: Scenario, logger: SbpGlueLogger) -> Dict[str, object]:
        """
        Run defaults shipped with the package that implements ``scenario``.
        """
        if Scenario(scenario) == Scenario.SBP_DG:
            from sbpglue.scenarios.sbp_dg.sbp_dg import load_defaults
        else:
            from sbpglue.scenarios.multiblock.multiblock import load_defaults
        return load_defaults(Scenario(scenario), logger)

    def __init__(self, config: RunConfig, logger: SbpGlueLogger) -> None:
        """
        Initializes a CoupledSystem instance.

        Do not instantiate this class directly. Use `CoupledSystem.create` method instead.
        """
        if type(self) == CoupledSystem:
            raise SbpGlueException(
                "CoupledSystem is an abstract class and cannot be instantiated directly. Use CoupledSystem.create method instead."
            )
        self.config = config
        self.logger = logger.bind(scenario=str(config.scenario), q=config.q, N=config.N, alpha=config.alpha)
        self.material = Material(config.rho, config.lam)
        self.alpha = config.alpha
        self.blocks: Dict[str, Block] = {}
        self.mesh: Optional[DgMesh] = None
        self.conforming: List[ConformingPair] = []
        self.interfaces: List[InterfaceSpec] = []

        self.logger.log(f"Building {config.scenario} system with q={config.q}, N={config.N}", logging.INFO)
        self.build_blocks()
        self.build_interfaces()
        self._layout()
        self.logger.log(
            f"{config.scenario}: {len(self.blocks)} block(s), "
            f"{0 if self.mesh is None else self.mesh.K} DG element(s), {self.n_unknowns} unknowns",
            logging.INFO,
        )

    def build_blocks(self) -> None:
        """Populates ``blocks`` (and ``mesh`` for scenarios with DG elements)."""
        raise NotImplementedError()

    def build_interfaces(self) -> None:
        """Populates ``conforming`` and ``interfaces``."""
        raise NotImplementedError()

    def _layout(self) -> None:
        claimed: Dict[Tuple[str, Face], str] = {}

        def claim(key, owner: str) -> None:
            if key in claimed:
                self.logger.log(f"Face {key} claimed by {claimed[key]} and {owner}", logging.ERROR)
                raise PartitionMismatch(f"face {key[0]}.{key[1]} is claimed by both {claimed[key]} and {owner}")
            claimed[key] = owner

        for pair in self.conforming:
            claim(pair.minus, "a conforming pair")
            claim(pair.plus, "a conforming pair")
        for interface in self.interfaces:
            for participant in interface.minus + interface.plus:
                if participant.kind == ParticipantKind.FD:
                    claim(participant.key, interface.name)
        self.boundary_faces = [(name, face) for name in self.blocks for face in Face if (name, face) not in claimed]

        self.offsets: Dict[str, Tuple[int, int]] = {}
        offset = 0
        for name, block in self.blocks.items():
            self.offsets[name] = (offset, offset + block.n_unknowns)
            offset += block.n_unknowns
        self.dg_offset = offset
        if self.mesh is not None:
            offset += self.mesh.n_unknowns
        self.n_unknowns = offset

    def unpack(self, u: np.ndarray) -> SystemState:
        if u.shape != (self.n_unknowns,):
            self.logger.log(f"state vector has shape {u.shape}, expected ({self.n_unknowns},)", logging.ERROR)
            raise ShapeMismatch(f"state vector has shape {u.shape}, expected ({self.n_unknowns},)")
        blocks = {name: BlockState.from_vector(u[lo:hi], self.blocks[name].shape) for name, (lo, hi) in self.offsets.items()}
        dg = None if self.mesh is None else DgState.from_vector(u[self.dg_offset:], self.mesh.shape)
        return SystemState(blocks, dg)

    def pack(self, state: SystemState) -> np.ndarray:
        parts = [state.blocks[name].as_vector() for name in self.blocks]
        if self.mesh is not None:
            parts.append(state.dg.as_vector())
        return np.concatenate(parts)

    def penalties(self, state: SystemState) -> Tuple[Dict[str, Dict[Face, FacePenalty]], Optional[Tuple[np.ndarray, np.ndarray]]]:
        """Penalties on every block face and (p* - p, v* - v) on every DG edge."""
        fd: Dict[str, Dict[Face, FacePenalty]] = {name: {} for name in self.blocks}
        dg_interface: Dict[Tuple[int, int], FacePenalty] = {}
        p_edge = v_edge = None
        if self.mesh is not None:
            p_edge, v_edge = dg_traces(self.mesh, state.dg)

        for name, face in self.boundary_faces:
            trace = self.blocks[name].trace(state.blocks[name], face)
            fd[name][face] = boundary_penalty(trace, self.alpha, self.material)

        for pair in self.conforming:
            (a, fa), (b, fb) = pair.minus, pair.plus
            trace_a = self.blocks[a].trace(state.blocks[a], fa)
            trace_b = self.blocks[b].trace(state.blocks[b], fb)
            fd[a][fa] = conforming_penalty(trace_a, trace_b, self.alpha, self.material)
            fd[b][fb] = conforming_penalty(trace_b, trace_a, self.alpha, self.material)

        for interface in self.interfaces:
            minus = [self._trace(p, state, p_edge, v_edge) for p in interface.minus]
            plus = [self._trace(p, state, p_edge, v_edge) for p in interface.plus]
            if any(p.kind == ParticipantKind.DG for p in interface.plus):
                fd_penalties, dg_fluxes = sbp_dg_coupling(interface, minus, plus, self.material)
                dg_interface.update(dg_fluxes)
            else:
                penalties_minus, penalties_plus = nonconforming_penalty(interface, minus, plus, self.material)
                fd_penalties = {
                    participant.key: penalty
                    for participant, penalty in zip(interface.minus + interface.plus, penalties_minus + penalties_plus)
                }
            for (name, face), penalty in fd_penalties.items():
                fd[name][face] = penalty

        dg = None
        if self.mesh is not None:
            dg = dg_edge_penalties(self.mesh, state.dg, self.alpha, self.material, dg_interface)
        return fd, dg

    def _trace(self, participant, state: SystemState, p_edge, v_edge) -> FaceTrace:
        if participant.kind == ParticipantKind.FD:
            name, face = participant.key
            return self.blocks[name].trace(state.blocks[name], face)
        return self.mesh.edge_trace(p_edge, v_edge, *participant.key)

    def rhs(self, t: float, u: np.ndarray) -> np.ndarray:
        """du/dt of the full coupled system; the system is autonomous so ``t`` is unused."""
        state = self.unpack(u)
        fd, dg = self.penalties(state)
        rates = SystemState(
            {name: block_rhs(block, state.blocks[name], fd[name], self.material) for name, block in self.blocks.items()}
        )
        if self.mesh is not None:
            rates.dg = dg_rhs(self.mesh, state.dg, dg[0], dg[1], self.material)
        return self.pack(rates)

    def energy(self, u: np.ndarray) -> float:
        state = self.unpack(u)
        total = sum(block_energy(block, state.blocks[name], self.material) for name, block in self.blocks.items())
        if self.mesh is not None:
            total += dg_energy(self.mesh, state.dg, self.material)
        return float(total)

    def energy_inner(self, u: np.ndarray, w: np.ndarray) -> float:
        """The bilinear form of ``energy``: energy(u) = energy_inner(u, u) / 2."""
        a, b = self.unpack(u), self.unpack(w)
        rho, lam = self.material.rho, self.material.lam
        total = 0.0
        for name, block in self.blocks.items():
            weight = block.norm * block.metrics.J
            x, y = a.blocks[name], b.blocks[name]
            total += rho * np.sum(weight * (x.v1 * y.v1 + x.v2 * y.v2)) + np.sum(weight * x.p * y.p) / lam
        if self.mesh is not None:
            mass = self.mesh.mass

            def inner(f, g):
                return float(np.einsum("kn,knm,km->", f, mass, g))

            total += rho * (inner(a.dg.v1, b.dg.v1) + inner(a.dg.v2, b.dg.v2)) + inner(a.dg.p, b.dg.p) / lam
        return float(total)

    def dissipation(self, u: np.ndarray) -> float:
        """Sum of the face and edge dissipations; equals dE/dt of the semi-discretization."""
        state = self.unpack(u)
        fd, dg = self.penalties(state)
        total = sum(
            sum(block_dissipation(block, state.blocks[name], fd[name]).values()) for name, block in self.blocks.items()
        )
        if self.mesh is not None:
            total += dg_dissipation(self.mesh, state.dg, dg[0], dg[1])
        return float(total)

    def sample(self, fields: FieldFunction, t: float) -> np.ndarray:
        """State vector of (v1, v2, p) = fields(x1, x2, t) sampled at all grid and DG nodes."""
        blocks = {}
        for name, block in self.blocks.items():
            v1, v2, p = fields(block.metrics.x1, block.metrics.x2, t)
            blocks[name] = BlockState(v1, v2, p)
        dg = None
        if self.mesh is not None:
            dg = DgState(*fields(self.mesh.x1, self.mesh.x2, t))
        return self.pack(SystemState(blocks, dg))

    def min_spacing(self) -> float:
        """Smallest physical distance between neighboring grid points of any block."""
        spacing = np.inf
        for block in self.blocks.values():
            x1, x2 = block.metrics.x1, block.metrics.x2
            spacing = min(spacing, np.hypot(np.diff(x1, axis=0), np.diff(x2, axis=0)).min())
            spacing = min(spacing, np.hypot(np.diff(x1, axis=1), np.diff(x2, axis=1)).min())
        return float(spacing)
