"""
This file contains tests for the curvilinear finite difference block solver
"""

import json
import logging

import numpy as np
import pytest

from sbpglue.fd_solver import (
    BlockState,
    FaceTrace,
    Material,
    block_dissipation,
    block_energy,
    block_rhs,
    boundary_penalty,
    build_block,
    conforming_penalty,
    rhs_volume,
)
from sbpglue.geometry import AffineTransform, LeftTransform, RightTransform
from sbpglue.sbpglue_exceptions import InvalidMaterial, NegativeAlpha, ShapeMismatch, UnresolvedFace
from sbpglue.sbpglue_types import Face


def _random_state(shape, seed: int = 0) -> BlockState:
    rng = np.random.default_rng(seed)
    return BlockState(*(rng.standard_normal(shape) for _ in range(3)))


def _energy_rate(block, state: BlockState, rate: BlockState, material: Material) -> float:
    weight = block.norm * block.metrics.J
    return float(
        material.rho * np.sum(weight * (state.v1 * rate.v1 + state.v2 * rate.v2))
        + np.sum(weight * state.p * rate.p) / material.lam
    )


def test_material() -> None:
    material = Material(rho=4.0, lam=1.0)
    assert material.c == 0.5
    assert material.Z == 2.0
    with pytest.raises(InvalidMaterial) as info:
        Material(rho=0.0)
    assert info.value.exit_code == 27


def test_state_vector_layout() -> None:
    state = _random_state((3, 5))
    vector = state.as_vector()
    assert vector.size == 45
    restored = BlockState.from_vector(vector, (3, 5))
    assert np.array_equal(restored.p, state.p)
    with pytest.raises(ShapeMismatch):
        BlockState.from_vector(vector[:-1], (3, 5))


def test_linear_pressure_gradient() -> None:
    """
    p = x1 on an affine block drives dv1 = -1/rho and leaves v2 at rest
    """
    material = Material(rho=2.0, lam=3.0)
    block = build_block("affine", AffineTransform(scale=(0.5, 1.0), shift=(0.5, 0.0)), 2, 16, 16)
    state = BlockState.zeros(block.shape)
    state.p = block.metrics.x1.copy()
    rate = rhs_volume(block, state, material)
    assert np.allclose(rate.v1, -0.5, atol=1e-12)
    assert np.allclose(rate.v2, 0.0, atol=1e-12)
    assert np.allclose(rate.p, 0.0, atol=1e-12)


@pytest.mark.parametrize("q", [1, 2, 3])
@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_block_energy_rate_equals_face_dissipation(q: int, alpha: float) -> None:
    """
    With free surface penalties on all faces the semi-discrete energy rate is the sum of
    the face dissipations, which vanishes for alpha = 0 and is negative otherwise
    """
    material = Material(rho=1.5, lam=0.75)
    block = build_block("left", LeftTransform(), q, 16, 24)
    state = _random_state(block.shape, seed=q)
    penalties = {face: boundary_penalty(block.trace(state, face), alpha, material) for face in Face}
    rate = block_rhs(block, state, penalties, material)
    dissipation = block_dissipation(block, state, penalties)
    total = sum(dissipation.values())
    assert abs(_energy_rate(block, state, rate, material) - total) <= 1e-10 * max(1.0, block_energy(block, state, material))
    if alpha == 0.0:
        assert abs(total) <= 1e-12
    else:
        assert all(value <= 0.0 for value in dissipation.values())
        assert total < 0.0


def test_conforming_pair_is_conservative() -> None:
    """
    Two blocks joined through conforming penalties with alpha = 0 conserve energy
    """
    material = Material()
    left = build_block("left", LeftTransform(), 2, 8, 16)
    right = build_block("right", RightTransform(), 2, 8, 16)
    states = {"left": _random_state(left.shape, 1), "right": _random_state(right.shape, 2)}
    blocks = {"left": left, "right": right}
    minus = left.trace(states["left"], Face.EAST)
    plus = right.trace(states["right"], Face.WEST)
    penalties = {name: {} for name in blocks}
    for name, block in blocks.items():
        for face in Face:
            penalties[name][face] = boundary_penalty(block.trace(states[name], face), 0.0, material)
    penalties["left"][Face.EAST] = conforming_penalty(minus, plus, 0.0, material)
    penalties["right"][Face.WEST] = conforming_penalty(plus, minus, 0.0, material)
    total = sum(
        _energy_rate(block, states[name], block_rhs(block, states[name], penalties[name], material), material)
        for name, block in blocks.items()
    )
    assert abs(total) <= 1e-10


def test_conforming_penalty_vanishes_for_continuous_traces() -> None:
    material = Material()
    p = np.linspace(0.0, 1.0, 5)
    v = np.cos(p)
    S_J = np.ones(5)
    penalty = conforming_penalty(FaceTrace(p, v, S_J), FaceTrace(p, -v, S_J), 2.0, material)
    assert np.allclose(penalty.dp, 0.0) and np.allclose(penalty.dv, 0.0)
    with pytest.raises(ShapeMismatch):
        conforming_penalty(FaceTrace(p, v, S_J), FaceTrace(p[:4], v[:4], S_J[:4]), 1.0, material)


def test_penalty_errors() -> None:
    material = Material()
    block = build_block("left", LeftTransform(), 2, 8, 16)
    state = BlockState.zeros(block.shape)
    with pytest.raises(NegativeAlpha):
        boundary_penalty(block.trace(state, Face.WEST), -1.0, material)
    penalties = {face: boundary_penalty(block.trace(state, face), 1.0, material) for face in (Face.WEST, Face.EAST)}
    with pytest.raises(UnresolvedFace) as info:
        block_rhs(block, state, penalties, material)
    assert info.value.exit_code == 19


def test_penalty_errors_are_logged(caplog) -> None:
    caplog.set_level(logging.ERROR, logger="sbpglue")
    block = build_block("left", LeftTransform(), 2, 8, 16)
    trace = block.trace(BlockState.zeros(block.shape), Face.WEST)
    with pytest.raises(NegativeAlpha):
        conforming_penalty(trace, trace, -0.5, Material())
    line = json.loads(caplog.records[-1].getMessage())
    assert line["level"] == "ERROR" and line["caller_name"] == "conforming_penalty"
    assert "non-negative" in line["message"]
