"""
This file contains tests for assembling the coupled scenarios into one semi-discretization
"""

import numpy as np
import pytest

from sbpglue import CoupledSystem
from sbpglue.harness import quadratic_form_rate
from sbpglue.sbpglue_config import RunConfig, Scenario
from sbpglue.sbpglue_exceptions import SbpGlueException
from sbpglue.sbpglue_logger import SbpGlueLogger
from sbpglue.sbpglue_types import Face
from sbpglue.type_helpers import ensure_all_methods_implemented
from tests.test_utils import create_test_context

UNKNOWNS = {
    Scenario.TWO_BLOCK_CONFORMING: 3 * (9 * 17 + 9 * 17),
    Scenario.TWO_BLOCK_NESTED: 3 * (9 * 17 + 17 * 33),
    Scenario.TWO_BLOCK_UNNESTED: 3 * (9 * 17 + 17 * 34),
    Scenario.THREE_BLOCK_NESTED: 3 * (9 * 17 + 2 * 17 * 17),
    Scenario.THREE_BLOCK_UNNESTED: 3 * (9 * 17 + 2 * 17 * 18),
}


@pytest.mark.parametrize("scenario", list(UNKNOWNS))
def test_multiblock_layout(scenario: Scenario) -> None:
    with create_test_context({"scenario": scenario, "q": 2, "N": 16}) as context:
        system = CoupledSystem.create(context.config, context.logger)
        assert system.n_unknowns == UNKNOWNS[scenario]
        assert ("left", Face.EAST) not in system.boundary_faces
        assert ("left", Face.WEST) in system.boundary_faces
        if scenario in (Scenario.THREE_BLOCK_NESTED, Scenario.THREE_BLOCK_UNNESTED):
            assert len(system.blocks) == 3
            assert ("right-bottom", Face.NORTH) not in system.boundary_faces
            assert len(system.interfaces[0].plus) == 2
        u = np.arange(system.n_unknowns, dtype=float)
        assert np.array_equal(system.pack(system.unpack(u)), u)


def test_sbp_dg_layout() -> None:
    with create_test_context({"scenario": "sbp-dg", "q": 2, "N": 16}) as context:
        system = CoupledSystem.create(context.config, context.logger)
        assert system.mesh is not None
        assert len(system.mesh.interface_edges) == 6
        assert system.n_unknowns == 3 * 9 * 17 + system.mesh.n_unknowns
        assert len(system.interfaces) == 1 and not system.conforming


@pytest.mark.parametrize("scenario", [str(s) for s in Scenario])
@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_energy_rate_identity(scenario: str, alpha: float) -> None:
    """
    u^T W A u equals the summed face and edge dissipations; it vanishes for alpha = 0
    """
    with create_test_context({"scenario": scenario, "q": 2, "N": 16, "alpha": alpha, "rho": 1.2, "lam": 0.8}) as context:
        system = CoupledSystem.create(context.config, context.logger)
        u = np.random.default_rng(7).standard_normal(system.n_unknowns)
        rate = quadratic_form_rate(system, u)
        dissipation = system.dissipation(u)
        scale = max(1.0, system.energy(u))
        assert abs(rate - dissipation) <= 1e-9 * scale
        if alpha == 0.0:
            assert abs(rate) <= 1e-9 * scale
        else:
            assert rate < 0.0


def test_energy_is_half_the_inner_product() -> None:
    with create_test_context({"scenario": "two-block-nested", "q": 1, "N": 8}) as context:
        system = CoupledSystem.create(context.config, context.logger)
        u = np.random.default_rng(1).standard_normal(system.n_unknowns)
        assert np.isclose(system.energy(u), system.energy_inner(u, u) / 2.0)
        assert system.energy(u) > 0.0


def test_sample_matches_field_function() -> None:
    with create_test_context({"scenario": "two-block-conforming", "q": 2, "N": 16}) as context:
        system = CoupledSystem.create(context.config, context.logger)
        u = system.sample(lambda x1, x2, t: (x1 + t, x2, x1 * x2), 0.5)
        state = system.unpack(u)
        left = system.blocks["left"].metrics
        assert np.allclose(state.blocks["left"].v1, left.x1 + 0.5)
        assert np.allclose(state.blocks["left"].p, left.x1 * left.x2)


def test_abstract_system_and_defaults() -> None:
    logger = SbpGlueLogger()
    with pytest.raises(SbpGlueException):
        CoupledSystem(RunConfig(), logger)
    defaults = CoupledSystem.defaults(Scenario.SBP_DG, logger)
    assert defaults["scenario"] == "sbp-dg"
    assert defaults["q"] == 2 and defaults["cfl"] == 0.25
    assert CoupledSystem.defaults(Scenario.THREE_BLOCK_NESTED, logger)["scenario"] == "three-block-nested"


def test_scenario_hooks_are_enforced() -> None:
    with pytest.raises(NotImplementedError):

        @ensure_all_methods_implemented(CoupledSystem)
        class MissingInterfaces(CoupledSystem):
            def build_blocks(self) -> None:
                pass

    with pytest.raises(TypeError):

        @ensure_all_methods_implemented(CoupledSystem)
        class WrongSignature(CoupledSystem):
            def build_blocks(self, level: int) -> None:
                pass

            def build_interfaces(self) -> None:
                pass

    with pytest.raises(TypeError):
        ensure_all_methods_implemented(CoupledSystem)(RunConfig)


def test_system_logger_is_bound_to_the_run() -> None:
    with create_test_context({"scenario": "two-block-nested", "q": 1, "N": 8}) as context:
        system = CoupledSystem.create(context.config, context.logger)
        assert system.logger.context == {"scenario": "two-block-nested", "q": 1, "N": 8, "alpha": 1.0}
