"""
This file contains tests for glue spaces, the SBP-compatible projections and their composition
"""

import json
import logging

import numpy as np
import pytest

from sbpglue.glue import (
    CONSISTENCY_TOLERANCE,
    PROJECTION_COUNTS,
    CommonGlue,
    GlueSpace,
    ProjectionCoefficients,
    ProjectionPair,
    assemble_projection_constraints,
    build_glue_for_grid,
    certify_projection,
    compose_to_common_glue,
    dg_edge_projection,
    glue_to_glue,
    load_projection_coefficients,
    projection_pair,
    solve_constraints,
    write_projection_coefficients,
)
from sbpglue.sbpglue_exceptions import (
    GlueOrderTooLow,
    GridTooSmall,
    NotNested,
    PartitionMismatch,
    QuadratureTooCoarse,
    UnsupportedOrder,
)
from sbpglue.sbpglue_utils import CoefficientFile
from tests.test_utils import create_test_context


def test_glue_space_mass_and_modes() -> None:
    space = GlueSpace(np.array([-1.0, 0.0, 0.5, 1.0]), 2)
    assert space.dim == 9
    assert np.isclose(space.mass.sum(), 2.0 * (1 + 1 / 3 + 1 / 5))
    coefficients = space.modal_coefficients(lambda t: 3 * t ** 2 - t)
    points = np.linspace(-1.0, 1.0, 11)
    assert np.allclose(space.evaluate(coefficients, points), 3 * points ** 2 - points, atol=1e-13)


def test_glue_space_mapped_and_restricted() -> None:
    space = build_glue_for_grid(8, 4)
    assert space.order == 3 and space.n_intervals == 8
    mapped = space.mapped(0.0, 1.0)
    assert np.isclose(mapped.mass.sum(), space.mass.sum() / 2)
    restricted = space.restrict(-0.5, 0.5)
    assert restricted.n_intervals == 4
    with pytest.raises(PartitionMismatch):
        space.restrict(-0.3, 0.5)


@pytest.mark.parametrize("q", [1, 2, 3, 4, 5])
def test_projection_constraint_counts(q: int) -> None:
    system = assemble_projection_constraints(q)
    assert (system.constraint_count, system.unknown_count) == PROJECTION_COUNTS[q]


def test_projection_unsupported_order() -> None:
    with pytest.raises(UnsupportedOrder):
        assemble_projection_constraints(7)


@pytest.mark.parametrize("q", [1, 2, 3, 4, 5])
def test_projection_certificate(q: int) -> None:
    """
    Every certificate check passes: counts, constraint residual, compatibility and accuracy
    """
    coefficients = load_projection_coefficients(q)
    certificate = certify_projection(coefficients, 64)
    assert [row["status"] for row in certificate] == ["pass"] * len(certificate)


@pytest.mark.parametrize("q", [4, 5])
def test_high_order_constraints_solve_to_round_off(q: int) -> None:
    """
    The rank cut must keep every independent constraint; a loose cut drops one at q=5
    and leaves a residual near 1e-9
    """
    coefficients = solve_constraints(assemble_projection_constraints(q))
    assert coefficients.constraint_residual() <= CONSISTENCY_TOLERANCE


def test_glue_space_rejects_bad_breakpoints() -> None:
    with pytest.raises(PartitionMismatch) as info:
        GlueSpace(np.array([0.0, 0.5, 0.25]), 1)
    assert info.value.exit_code == 14
    with pytest.raises(PartitionMismatch):
        GlueSpace(np.array([0.0]), 1)


def test_glue_for_grid_needs_cells() -> None:
    with pytest.raises(GridTooSmall) as info:
        build_glue_for_grid(0, 2)
    assert info.value.exit_code == 11


def test_identity_pair_cannot_be_placed(caplog) -> None:
    caplog.set_level(logging.ERROR, logger="sbpglue")
    pair = ProjectionPair.identity(np.ones(5))
    with pytest.raises(PartitionMismatch):
        pair.placed(0.0, 0.5)
    line = json.loads(caplog.records[-1].getMessage())
    assert line["level"] == "ERROR" and line["caller_name"] == "placed"


def test_projection_compatibility_and_accuracy_q2() -> None:
    pair = projection_pair(2, 32)
    assert pair.compatibility_residual() <= 1e-12
    x = np.linspace(-1.0, 1.0, 33)
    for degree in range(2):
        modes = pair.space.modal_coefficients(lambda t: t ** degree)
        assert np.max(np.abs(pair.g2f @ modes - x ** degree)) <= 1e-10
        assert np.max(np.abs(pair.f2g @ x ** degree - modes)) <= 1e-10


def test_projection_grid_too_small() -> None:
    with pytest.raises(GridTooSmall):
        load_projection_coefficients(3).assemble(8)


def test_projection_coefficient_file() -> None:
    """
    Written coefficients read back into the same pair
    """
    with create_test_context({}) as context:
        coefficients = load_projection_coefficients(2)
        path = f"{context.output_directory}/projection_q2.txt"
        write_projection_coefficients(context.logger, path, coefficients)
        restored = ProjectionCoefficients.from_sections(CoefficientFile.read(context.logger, path), 2)
        assert np.max(np.abs(restored.values - coefficients.values)) <= 1e-15 * np.max(np.abs(coefficients.values))


def test_glue_to_glue_nested() -> None:
    coarse = build_glue_for_grid(4, 4)
    fine = build_glue_for_grid(8, 4)
    a2b, b2a = glue_to_glue(coarse, fine)
    modes = coarse.modal_coefficients(lambda t: np.sin(t))
    points = np.linspace(-1.0, 1.0, 17)
    assert np.allclose(fine.evaluate(a2b @ modes, points), coarse.evaluate(modes, points), atol=1e-13)
    assert np.allclose(b2a @ (a2b @ modes), modes, atol=1e-13)


def test_glue_to_glue_not_nested() -> None:
    with pytest.raises(NotNested):
        glue_to_glue(build_glue_for_grid(3, 2), build_glue_for_grid(4, 2))


def test_compose_nested_and_unnested() -> None:
    """
    Composing an N-cell face with a 2N- or (2N+1)-cell face keeps every piece compatible
    """
    left = projection_pair(2, 16)
    for M in (32, 33):
        glue = compose_to_common_glue([left], [projection_pair(2, M)])
        for piece in glue.minus + glue.plus:
            assert piece.pair.compatibility_residual() <= 1e-12
            assert piece.pair.mass.size == glue.dim
    nested = compose_to_common_glue([left], [projection_pair(2, 32)])
    assert nested.space.n_intervals == 32


def test_compose_many_to_one() -> None:
    left = projection_pair(2, 16)
    bottom = projection_pair(2, 17).placed(-1.0, 0.0)
    top = projection_pair(2, 17).placed(0.0, 1.0)
    glue = compose_to_common_glue([left], [bottom, top])
    assert glue.plus[0].glue_slice.stop == glue.plus[1].glue_slice.start
    assert glue.plus[1].glue_slice.stop == glue.dim
    assert np.isclose(bottom.delta, 0.5)
    with pytest.raises(PartitionMismatch):
        compose_to_common_glue([left], [bottom])


def test_common_glue_identity() -> None:
    norm = projection_pair(2, 16).source_norm
    glue = CommonGlue.identity(norm, norm)
    assert glue.dim == 17 and glue.space is None
    with pytest.raises(PartitionMismatch):
        CommonGlue.identity(norm, norm[:-1])


def test_dg_edge_projection() -> None:
    t, w = np.polynomial.legendre.leggauss(5)
    pair = dg_edge_projection(t, w, 0.25, 0.5, order=3, trace_degree=3)
    assert np.isclose(pair.delta, 0.125)
    assert pair.compatibility_residual() <= 1e-12
    values = t ** 3 - t
    assert np.allclose(pair.g2f @ (pair.f2g @ values), values, atol=1e-13)
    with pytest.raises(GlueOrderTooLow):
        dg_edge_projection(t, w, 0.25, 0.5, order=2, trace_degree=3)
    coarse_t, coarse_w = np.polynomial.legendre.leggauss(2)
    with pytest.raises(QuadratureTooCoarse):
        dg_edge_projection(coarse_t, coarse_w, 0.25, 0.5, order=3, trace_degree=3)


def test_dg_edge_projection_logs_before_raising(caplog) -> None:
    caplog.set_level(logging.ERROR, logger="sbpglue")
    t, w = np.polynomial.legendre.leggauss(3)
    with pytest.raises(GlueOrderTooLow):
        dg_edge_projection(t, w, -1.0, 1.0, order=1, trace_degree=2)
    line = json.loads(caplog.records[-1].getMessage())
    assert line["level"] == "ERROR"
    assert line["caller_name"] == "dg_edge_projection"
    assert "trace degree 2" in line["message"]
