"""
Defines the enums shared across modules and the row types of the CSV and JSON outputs.
"""

from __future__ import annotations

from enum import Enum, IntEnum
from typing import Optional, TypedDict


class Face(str, Enum):
    """Faces of a structured block. WEST/EAST are xi1 = -1/+1, SOUTH/NORTH are xi2 = -1/+1."""

    WEST = "west"
    EAST = "east"
    SOUTH = "south"
    NORTH = "north"

    def __str__(self) -> str:
        return self.value

    @property
    def axis(self) -> int:
        """Reference direction normal to the face (0 for xi1, 1 for xi2)."""
        return 0 if self in (Face.WEST, Face.EAST) else 1

    @property
    def sign(self) -> int:
        """Sign of the outward reference normal."""
        return -1 if self in (Face.WEST, Face.SOUTH) else 1


class ParticipantKind(str, Enum):
    """Discretization owning one side piece of a glued interface."""

    FD = "fd"
    DG = "dg"

    def __str__(self) -> str:
        return self.value


class Region(str, Enum):
    """Row region of a one-dimensional operator."""

    INTERIOR = "interior"
    BOUNDARY = "boundary"

    def __str__(self) -> str:
        return self.value


class DgEdge(IntEnum):
    """Local edges of the reference triangle, counter-clockwise from (-1,-1)."""

    BOTTOM = 0
    HYPOTENUSE = 1
    LEFT = 2


class AccuracyRow(TypedDict):
    """One row of sbp_accuracy.csv"""

    q: int
    N: int
    degree: int
    region: str
    max_error: float
    flagged: bool


class CertificateRow(TypedDict):
    """One row of a projection certificate"""

    check: str
    residual: float
    status: str


class ErrorRow(TypedDict):
    """One row of errors.csv; rate is None on the coarsest level"""

    q: int
    N: int
    scenario: str
    epsilon: float
    rate: Optional[float]


class EnergySample(TypedDict):
    """One row of energy.csv"""

    t: float
    energy: float
