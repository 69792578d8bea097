"""
Curvilinear block transforms and their metric terms.

A transform maps the reference square [-1, 1]^2 with coordinates (xi1, xi2) to the
physical plane. Metrics are evaluated analytically from the transform partials through

    J dxi1/dx1 =  dx2/dxi2,   J dxi1/dx2 = -dx1/dxi2,
    J dxi2/dx1 = -dx2/dxi1,   J dxi2/dx2 =  dx1/dxi1.

On the face xi_i = +-1 the surface Jacobian is S_J = |J grad xi_i| and the outward unit
normal is n_j = +-(J dxi_i/dx_j) / S_J.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np

from sbpglue.sbpglue_exceptions import ConfigParse, NonPositiveJacobian
from sbpglue.sbpglue_logger import SbpGlueLogger
from sbpglue.sbpglue_types import Face

_LOGGER = SbpGlueLogger()

Partials = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def interface_curve(x2):
    """x1 position of the curved interface shared by the left and right halves of the domain."""
    return np.sin(np.pi * (np.asarray(x2) + 1.0)) / 5.0


def interface_curve_slope(x2):
    return np.pi * np.cos(np.pi * (np.asarray(x2) + 1.0)) / 5.0


class Transform:
    """
    A closed-form map (xi1, xi2) -> (x1, x2) with analytic partials.
    Subclasses implement ``map`` and ``partials`` on broadcastable arrays.
    """

    name = "transform"

    def map(self, xi1, xi2) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError()

    def partials(self, xi1, xi2) -> Partials:
        """(dx1/dxi1, dx1/dxi2, dx2/dxi1, dx2/dxi2)"""
        raise NotImplementedError()

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"


class TransformCatalog:
    """
    Registry of transforms keyed by the names used in run configurations.
    """

    _factories: Dict[str, Callable[..., Transform]] = {}

    @classmethod
    def register(cls, name: str):
        def decorator(factory):
            cls._factories[name] = factory
            factory.name = name
            return factory
        return decorator

    @classmethod
    def create(cls, name: str, **kwargs) -> Transform:
        if name not in cls._factories:
            _LOGGER.log(f"Unknown transform '{name}'", logging.ERROR)
            raise ConfigParse(f"Unknown transform '{name}'; known: {', '.join(sorted(cls._factories))}")
        return cls._factories[name](**kwargs)

    @classmethod
    def names(cls):
        return sorted(cls._factories)


@TransformCatalog.register("affine")
class AffineTransform(Transform):
    """x_i = scale_i xi_i + shift_i"""

    def __init__(self, scale=(1.0, 1.0), shift=(0.0, 0.0)) -> None:
        self.scale = np.broadcast_to(np.asarray(scale, dtype=float), (2,)).copy()
        self.shift = np.broadcast_to(np.asarray(shift, dtype=float), (2,)).copy()

    def map(self, xi1, xi2):
        return self.scale[0] * np.asarray(xi1) + self.shift[0], self.scale[1] * np.asarray(xi2) + self.shift[1]

    def partials(self, xi1, xi2):
        shape = np.broadcast(np.asarray(xi1), np.asarray(xi2)).shape
        zero = np.zeros(shape)
        return zero + self.scale[0], zero, zero, zero + self.scale[1]


@TransformCatalog.register("identity")
class IdentityTransform(AffineTransform):
    def __init__(self) -> None:
        super().__init__()


@TransformCatalog.register("left")
class LeftTransform(Transform):
    """Left half of [-1, 1]^2, east face on the curved interface."""

    def map(self, xi1, xi2):
        xi1, xi2 = np.broadcast_arrays(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))
        return (1 + xi1) / 2 * interface_curve(xi2) - (1 - xi1) / 2, xi2.copy()

    def partials(self, xi1, xi2):
        xi1, xi2 = np.broadcast_arrays(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))
        return (
            interface_curve(xi2) / 2 + 0.5,
            (1 + xi1) / 2 * interface_curve_slope(xi2),
            np.zeros_like(xi1),
            np.ones_like(xi1),
        )


@TransformCatalog.register("right")
class RightTransform(Transform):
    """Right half of [-1, 1]^2, west face on the curved interface."""

    def map(self, xi1, xi2):
        xi1, xi2 = np.broadcast_arrays(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))
        return (1 - xi1) / 2 * interface_curve(xi2) + (1 + xi1) / 2, xi2.copy()

    def partials(self, xi1, xi2):
        xi1, xi2 = np.broadcast_arrays(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))
        return (
            0.5 - interface_curve(xi2) / 2,
            (1 - xi1) / 2 * interface_curve_slope(xi2),
            np.zeros_like(xi1),
            np.ones_like(xi1),
        )


class _RightHalf(Transform):
    """The right transform restricted to xi2 in [offset - 1/2, offset + 1/2] of its range."""

    offset = 0.0

    def __init__(self) -> None:
        self.right = RightTransform()

    def map(self, xi1, xi2):
        return self.right.map(xi1, (np.asarray(xi2, dtype=float) + 1.0) / 2.0 + self.offset - 0.5)

    def partials(self, xi1, xi2):
        d11, d12, d21, d22 = self.right.partials(xi1, (np.asarray(xi2, dtype=float) + 1.0) / 2.0 + self.offset - 0.5)
        return d11, d12 / 2.0, d21, d22 / 2.0


@TransformCatalog.register("right-top")
class RightTopTransform(_RightHalf):
    offset = 0.5


@TransformCatalog.register("right-bottom")
class RightBottomTransform(_RightHalf):
    offset = -0.5


@dataclass(frozen=True)
class FaceMetric:
    """Surface Jacobian and outward unit normal along a face, ordered by increasing tangential xi."""

    S_J: np.ndarray
    n1: np.ndarray
    n2: np.ndarray


@dataclass(frozen=True)
class MetricData:
    """
    Metric terms on an (N1+1) x (N2+1) grid, axis 0 along xi1 and axis 1 along xi2.
    """

    x1: np.ndarray
    x2: np.ndarray
    J: np.ndarray
    Jxi1_x1: np.ndarray
    Jxi1_x2: np.ndarray
    Jxi2_x1: np.ndarray
    Jxi2_x2: np.ndarray
    faces: Dict[Face, FaceMetric]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.J.shape


def face_values(array: np.ndarray, face: Face) -> np.ndarray:
    """Values of a grid array along a face."""
    return {
        Face.WEST: lambda: array[0, :],
        Face.EAST: lambda: array[-1, :],
        Face.SOUTH: lambda: array[:, 0],
        Face.NORTH: lambda: array[:, -1],
    }[face]()


def metrics_for_block(transform: Transform, N1: int, N2: int) -> MetricData:
    """
    Evaluates the metric terms of ``transform`` on the (N1+1) x (N2+1) reference grid.
    Raises NonPositiveJacobian at the first grid point with J <= 0.
    """
    xi1, xi2 = np.meshgrid(np.linspace(-1.0, 1.0, N1 + 1), np.linspace(-1.0, 1.0, N2 + 1), indexing="ij")
    x1, x2 = transform.map(xi1, xi2)
    d11, d12, d21, d22 = transform.partials(xi1, xi2)
    J = d11 * d22 - d12 * d21
    if np.any(J <= 0):
        i, j = np.unravel_index(np.argmin(J), J.shape)
        _LOGGER.log(f"{transform!r}: J = {J[i, j]:.3e} at xi = ({xi1[i, j]}, {xi2[i, j]})", logging.ERROR)
        raise NonPositiveJacobian(
            f"{transform!r} has non-positive Jacobian {J[i, j]:.3e} at xi = ({xi1[i, j]:.6g}, {xi2[i, j]:.6g})"
        )

    Jxi = {(0, 0): d22, (0, 1): -d12, (1, 0): -d21, (1, 1): d11}
    faces = {}
    for face in Face:
        g1 = face_values(Jxi[(face.axis, 0)], face)
        g2 = face_values(Jxi[(face.axis, 1)], face)
        S_J = np.hypot(g1, g2)
        faces[face] = FaceMetric(S_J=S_J, n1=face.sign * g1 / S_J, n2=face.sign * g2 / S_J)

    return MetricData(
        x1=np.asarray(x1, dtype=float),
        x2=np.asarray(x2, dtype=float),
        J=J,
        Jxi1_x1=Jxi[(0, 0)],
        Jxi1_x2=Jxi[(0, 1)],
        Jxi2_x1=Jxi[(1, 0)],
        Jxi2_x2=Jxi[(1, 1)],
        faces=faces,
    )


def metric_identity_residual(transform: Transform, metrics: MetricData) -> float:
    """
    max | (J grad xi) (dx/dxi) - J I | over the grid of ``metrics``; zero when the metric
    relations hold.
    """
    N1, N2 = metrics.shape[0] - 1, metrics.shape[1] - 1
    xi1, xi2 = np.meshgrid(np.linspace(-1.0, 1.0, N1 + 1), np.linspace(-1.0, 1.0, N2 + 1), indexing="ij")
    d11, d12, d21, d22 = transform.partials(xi1, xi2)
    J = metrics.J
    products = (
        metrics.Jxi1_x1 * d11 + metrics.Jxi1_x2 * d21 - J,
        metrics.Jxi1_x1 * d12 + metrics.Jxi1_x2 * d22,
        metrics.Jxi2_x1 * d11 + metrics.Jxi2_x2 * d21,
        metrics.Jxi2_x1 * d12 + metrics.Jxi2_x2 * d22 - J,
    )
    return float(max(np.max(np.abs(p)) for p in products))
