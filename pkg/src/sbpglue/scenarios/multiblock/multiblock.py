"""
Provides the finite difference multiblock instantiations of the CoupledSystem class: a left
block coupled across the curved interface to one right block (conforming, nested or
unnested) or to two stacked right blocks.
"""

import os
from typing import Any, Dict

from sbpglue.coupled_system import ConformingPair, CoupledSystem
from sbpglue.fd_solver import build_block
from sbpglue.geometry import LeftTransform, RightBottomTransform, RightTopTransform, RightTransform
from sbpglue.interfaces import build_interface, fd_participant
from sbpglue.sbpglue_config import RunConfig, Scenario, parse_config_text
from sbpglue.sbpglue_logger import SbpGlueLogger
from sbpglue.sbpglue_types import Face
from sbpglue.sbpglue_utils import FileUtils
from sbpglue.type_helpers import ensure_all_methods_implemented

THREE_BLOCK = (Scenario.THREE_BLOCK_NESTED, Scenario.THREE_BLOCK_UNNESTED)


def load_defaults(scenario: Scenario, logger: SbpGlueLogger) -> Dict[str, Any]:
    """Run defaults shipped with the multiblock scenarios."""
    path = os.path.join(os.path.dirname(__file__), "multiblock_defaults.json")
    return parse_config_text(FileUtils.read_file(logger, path), str(scenario))


@ensure_all_methods_implemented(CoupledSystem)
class MultiblockSystem(CoupledSystem):
    """
    The left block has an (N/2+1) x (N+1) grid. A single right block has an
    (M/2+1) x (M+1) grid; two right blocks split the right half at x2 = 0 and have
    (N+1) x (M+1) grids each, joined by a conforming interface.
    """

    def __init__(self, config: RunConfig, logger: SbpGlueLogger) -> None:
        """
        Creates a MultiblockSystem instance. This class is not meant to be instantiated directly. Use CoupledSystem.create() instead.
        """
        super().__init__(config, logger)

    def build_blocks(self) -> None:
        q, N, M = self.config.q, self.config.N, self.config.M
        self.blocks["left"] = build_block("left", LeftTransform(), q, N // 2, N)
        if self.config.scenario in THREE_BLOCK:
            self.blocks["right-bottom"] = build_block("right-bottom", RightBottomTransform(), q, N, M)
            self.blocks["right-top"] = build_block("right-top", RightTopTransform(), q, N, M)
        else:
            self.blocks["right"] = build_block("right", RightTransform(), q, M // 2, M)

    def build_interfaces(self) -> None:
        q, N, M = self.config.q, self.config.N, self.config.M
        refine = self.config.refine
        left = fd_participant("left", Face.EAST, q, N, -1.0, 1.0, refine)

        if self.config.scenario == Scenario.TWO_BLOCK_CONFORMING:
            self.conforming.append(ConformingPair(("left", Face.EAST), ("right", Face.WEST)))
        elif self.config.scenario in THREE_BLOCK:
            self.conforming.append(ConformingPair(("right-bottom", Face.NORTH), ("right-top", Face.SOUTH)))
            right = [
                fd_participant("right-bottom", Face.WEST, q, M, -1.0, 0.0, refine),
                fd_participant("right-top", Face.WEST, q, M, 0.0, 1.0, refine),
            ]
            self.interfaces.append(build_interface("left|right", [left], right, self.alpha, logger=self.logger))
        else:
            right = [fd_participant("right", Face.WEST, q, M, -1.0, 1.0, refine)]
            self.interfaces.append(build_interface("left|right", [left], right, self.alpha, logger=self.logger))
