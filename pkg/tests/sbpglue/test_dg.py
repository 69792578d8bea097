"""
This file contains tests for the nodal DG discretization on curved triangles
"""

import logging

import numpy as np
import pytest

from sbpglue.dg import (
    DgState,
    build_dg_mesh,
    build_ref_triangle,
    dg_boundary_flux,
    dg_dg_flux,
    dg_dissipation,
    dg_edge_penalties,
    dg_energy,
    dg_mesh_resolution,
    dg_rhs,
    dg_traces,
    interface_edge_count,
    warp_blend_nodes,
)
from sbpglue.fd_solver import FaceTrace, Material
from sbpglue.sbpglue_exceptions import GridTooSmall, NegativeAlpha, UnresolvedFace, UnsupportedOrder


def _random_state(mesh, seed: int = 0) -> DgState:
    rng = np.random.default_rng(seed)
    return DgState(*(rng.standard_normal(mesh.shape) for _ in range(3)))


def _free_surface_interface(mesh, state, alpha, material):
    p_edge, v_edge = dg_traces(mesh, state)
    return {ke: dg_boundary_flux(mesh.edge_trace(p_edge, v_edge, *ke), alpha, material) for ke in mesh.interface_edges}


def _energy_rate(mesh, state, rate, material) -> float:
    def inner(f, g):
        return float(np.einsum("kn,knm,km->", f, mesh.mass, g))

    return material.rho * (inner(state.v1, rate.v1) + inner(state.v2, rate.v2)) + inner(state.p, rate.p) / material.lam


@pytest.mark.parametrize("q", [1, 2, 3, 4, 5])
def test_reference_triangle(q: int) -> None:
    """
    Node count, cubature weight sum and exact mass matrix of the orthonormal basis
    """
    ref = build_ref_triangle(q)
    assert ref.Np == (q + 1) * (q + 2) // 2
    assert np.isclose(ref.cubature_weights.sum(), 2.0)
    cubature_mass = ref.Pc.T @ (ref.cubature_weights[:, None] * ref.Pc)
    exact_mass = np.linalg.inv(ref.V @ ref.V.T)
    assert np.max(np.abs(cubature_mass - exact_mass)) <= 1e-11 * np.max(np.abs(exact_mass))


def test_reference_derivatives_are_exact() -> None:
    ref = build_ref_triangle(3)
    f = ref.r ** 2 * ref.s - ref.s ** 3
    assert np.allclose(ref.Dr @ f, 2 * ref.r * ref.s, atol=1e-11)
    assert np.allclose(ref.Ds @ f, ref.r ** 2 - 3 * ref.s ** 2, atol=1e-11)


def test_warp_blend_nodes_on_the_boundary() -> None:
    r, s = warp_blend_nodes(4)
    assert r.size == 15
    assert np.sum(np.isclose(s, -1.0)) == 5
    assert np.sum(np.isclose(r, -1.0)) == 5
    assert np.sum(np.isclose(r + s, 0.0)) == 5
    with pytest.raises(UnsupportedOrder):
        build_ref_triangle(6)


def test_mesh_resolution() -> None:
    assert dg_mesh_resolution(2, 64) == (22, 0)
    assert dg_mesh_resolution(2, 128) == (22, 1)
    assert dg_mesh_resolution(3, 256) == (16, 2)
    assert dg_mesh_resolution(2, 48) == (16, 0)
    assert interface_edge_count(2, 128) == 44


def test_mesh_counts_and_refinement() -> None:
    mesh = build_dg_mesh(2, 4)
    assert mesh.K == 16
    assert len(mesh.interface_edges) == 4
    assert len(mesh.boundary_edges) == 8
    refined = build_dg_mesh(2, 4, levels=1)
    assert refined.K == 64
    assert len(refined.interface_edges) == 8
    assert len(refined.boundary_edges) == 16
    ranges = [refined.interface_range(*ke) for ke in refined.interface_edges]
    assert np.isclose(ranges[0][0], -1.0) and np.isclose(ranges[-1][1], 1.0)
    assert all(np.isclose(a[1], b[0]) for a, b in zip(ranges, ranges[1:]))


def test_mesh_area_and_curved_interface() -> None:
    mesh = build_dg_mesh(2, 8)
    area = float(np.sum(mesh.J * mesh.ref.cubature_weights))
    assert abs(area - 2.0) <= 1e-3
    assert mesh.curved.sum() == 8
    assert np.all(mesh.J > 0)


def test_linear_pressure_gradient() -> None:
    """
    p = x1 with p* = p on every edge drives dv1 = -1/rho exactly, curved elements included
    """
    material = Material(rho=2.0)
    mesh = build_dg_mesh(2, 4)
    state = DgState(np.zeros(mesh.shape), np.zeros(mesh.shape), mesh.x1.copy())
    zeros = np.zeros(mesh.edge_S.shape)
    rate = dg_rhs(mesh, state, zeros, zeros, material)
    assert np.allclose(rate.v1, -0.5, atol=1e-10)
    assert np.allclose(rate.v2, 0.0, atol=1e-10)
    assert np.allclose(rate.p, 0.0, atol=1e-10)


@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_energy_rate_equals_edge_dissipation(alpha: float) -> None:
    material = Material(rho=1.3, lam=0.7)
    mesh = build_dg_mesh(3, 4)
    state = _random_state(mesh, seed=3)
    dp, dv = dg_edge_penalties(mesh, state, alpha, material, _free_surface_interface(mesh, state, alpha, material))
    rate = dg_rhs(mesh, state, dp, dv, material)
    dissipation = dg_dissipation(mesh, state, dp, dv)
    scale = max(1.0, dg_energy(mesh, state, material))
    assert abs(_energy_rate(mesh, state, rate, material) - dissipation) <= 1e-10 * scale
    if alpha == 0.0:
        assert abs(dissipation) <= 1e-10 * scale
    else:
        assert dissipation < 0.0


def test_dg_flux() -> None:
    material = Material()
    S = np.ones(3)
    minus = FaceTrace(np.array([1.0, 2.0, 3.0]), np.array([0.5, 0.0, -0.5]), S)
    plus = FaceTrace(np.array([1.0, 2.0, 3.0]), np.array([-0.5, 0.0, 0.5]), S)
    flux = dg_dg_flux(minus, plus, 1.0, material)
    assert np.allclose(flux.dp, 0.0) and np.allclose(flux.dv, 0.0)
    with pytest.raises(NegativeAlpha):
        dg_dg_flux(minus, plus, -0.1, material)


def test_missing_interface_penalty() -> None:
    mesh = build_dg_mesh(1, 2)
    state = _random_state(mesh)
    with pytest.raises(UnresolvedFace):
        dg_edge_penalties(mesh, state, 1.0, Material(), {})


def test_mesh_needs_base_edges(caplog) -> None:
    caplog.set_level(logging.ERROR, logger="sbpglue")
    with pytest.raises(GridTooSmall) as info:
        build_dg_mesh(2, 0)
    assert info.value.exit_code == 11
    assert any("base edge" in record.getMessage() for record in caplog.records)
