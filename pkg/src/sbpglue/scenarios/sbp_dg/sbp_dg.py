"""
Provides the SBP-DG instantiation of the CoupledSystem class: a curvilinear SBP block left of
the curved interface and a curved nodal DG triangle mesh right of it.
"""

import os
from typing import Any, Dict

from sbpglue.coupled_system import CoupledSystem
from sbpglue.dg import build_dg_mesh, dg_mesh_resolution
from sbpglue.fd_solver import build_block
from sbpglue.geometry import LeftTransform, RightTransform
from sbpglue.interfaces import build_sbp_dg_interface
from sbpglue.sbpglue_config import RunConfig, Scenario, parse_config_text
from sbpglue.sbpglue_logger import SbpGlueLogger
from sbpglue.sbpglue_types import Face
from sbpglue.sbpglue_utils import FileUtils
from sbpglue.type_helpers import ensure_all_methods_implemented


def load_defaults(scenario: Scenario, logger: SbpGlueLogger) -> Dict[str, Any]:
    """Run defaults shipped with the SBP-DG scenario."""
    path = os.path.join(os.path.dirname(__file__), "sbp_dg_defaults.json")
    return parse_config_text(FileUtils.read_file(logger, path), str(scenario))


@ensure_all_methods_implemented(CoupledSystem)
class SbpDgSystem(CoupledSystem):
    """
    The SBP block has an (N/2+1) x (N+1) grid. The DG mesh uses elements of order q and
    is refined hierarchically so that its interface edge count tracks N.
    """

    def __init__(self, config: RunConfig, logger: SbpGlueLogger) -> None:
        """
        Creates an SbpDgSystem instance. This class is not meant to be instantiated directly. Use CoupledSystem.create() instead.
        """
        super().__init__(config, logger)

    def build_blocks(self) -> None:
        q, N = self.config.q, self.config.N
        self.blocks["left"] = build_block("left", LeftTransform(), q, N // 2, N)
        base, levels = dg_mesh_resolution(q, N)
        self.mesh = build_dg_mesh(q, base, levels, RightTransform(), self.logger)

    def build_interfaces(self) -> None:
        self.interfaces.append(
            build_sbp_dg_interface(
                "left", Face.EAST, self.config.q, self.config.N, self.mesh, self.alpha, self.config.refine, self.logger
            )
        )
