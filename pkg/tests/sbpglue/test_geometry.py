"""
This file contains tests for the block transforms and their metric terms
"""

import numpy as np
import pytest

from sbpglue.geometry import (
    AffineTransform,
    LeftTransform,
    RightBottomTransform,
    RightTopTransform,
    RightTransform,
    Transform,
    TransformCatalog,
    face_values,
    interface_curve,
    metric_identity_residual,
    metrics_for_block,
)
from sbpglue.sbpglue_exceptions import ConfigParse, NonPositiveJacobian
from sbpglue.sbpglue_types import Face


def test_catalog_names() -> None:
    assert TransformCatalog.names() == ["affine", "identity", "left", "right", "right-bottom", "right-top"]
    affine = TransformCatalog.create("affine", scale=(0.5, 2.0), shift=(1.0, 0.0))
    assert isinstance(affine, AffineTransform)
    with pytest.raises(ConfigParse) as info:
        TransformCatalog.create("spiral")
    assert info.value.exit_code == 2


@pytest.mark.parametrize("transform", [LeftTransform(), RightTransform(), RightTopTransform(), RightBottomTransform()])
def test_metric_identities(transform: Transform) -> None:
    metrics = metrics_for_block(transform, 8, 16)
    assert np.all(metrics.J > 0)
    assert metric_identity_residual(transform, metrics) <= 1e-13


def test_left_and_right_share_the_interface() -> None:
    """
    The left east face and the right west face lie on the same curve with opposite normals
    """
    left = metrics_for_block(LeftTransform(), 8, 16)
    right = metrics_for_block(RightTransform(), 8, 16)
    x2 = face_values(left.x2, Face.EAST)
    assert np.allclose(face_values(left.x1, Face.EAST), interface_curve(x2), atol=1e-15)
    assert np.allclose(face_values(right.x1, Face.WEST), face_values(left.x1, Face.EAST), atol=1e-15)
    east, west = left.faces[Face.EAST], right.faces[Face.WEST]
    assert np.allclose(east.n1, -west.n1) and np.allclose(east.n2, -west.n2)
    assert np.allclose(np.hypot(east.n1, east.n2), 1.0)


def test_outer_normals_of_the_left_block() -> None:
    metrics = metrics_for_block(LeftTransform(), 4, 8)
    west = metrics.faces[Face.WEST]
    south = metrics.faces[Face.SOUTH]
    assert np.allclose(west.n1, -1.0) and np.allclose(west.n2, 0.0)
    assert np.allclose(south.n2, -1.0)
    assert np.allclose(face_values(metrics.x1, Face.WEST), -1.0)


def test_right_halves_split_in_xi2() -> None:
    bottom = metrics_for_block(RightBottomTransform(), 8, 8)
    top = metrics_for_block(RightTopTransform(), 8, 8)
    assert np.allclose(face_values(bottom.x2, Face.NORTH), 0.0)
    assert np.allclose(face_values(top.x2, Face.SOUTH), 0.0)
    assert np.allclose(face_values(bottom.x1, Face.NORTH), face_values(top.x1, Face.SOUTH))
    assert np.allclose(face_values(top.x2, Face.WEST), np.linspace(0.0, 1.0, 9))


def test_non_positive_jacobian() -> None:
    with pytest.raises(NonPositiveJacobian) as info:
        metrics_for_block(AffineTransform(scale=(-1.0, 1.0)), 4, 4)
    assert info.value.exit_code == 15
