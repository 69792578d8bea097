"""
This file contains tests for the diagonal-norm SBP first derivative operators
"""

import numpy as np
import pytest

from sbpglue.sbp_operators import build_sbp, closure_rows, sbp_family, verify_sbp_accuracy
from sbpglue.sbpglue_exceptions import GridTooSmall, UnsupportedOrder


@pytest.mark.parametrize("N", [16, 32, 64])
@pytest.mark.parametrize("q", [1, 2, 3, 4, 5])
def test_sbp_property(q: int, N: int) -> None:
    """
    Q + Q^T = B and H is positive for every family
    """
    if N + 1 < 2 * sbp_family(q).closure_width:
        pytest.skip(f"the q={q} closures need more than {N} cells")
    op = build_sbp(q, N)
    residual = (op.Q + op.Q.T - op.B).toarray()
    assert np.max(np.abs(residual)) <= 1e-14
    assert np.all(op.weights > 0)
    assert np.isclose(op.weights.sum(), 2.0, atol=1e-12)


@pytest.mark.parametrize("q", [1, 2, 3, 4, 5])
def test_sbp_accuracy_contract(q: int) -> None:
    """
    D differentiates x^m exactly up to degree 2q in the interior and q at the boundary
    """
    op = build_sbp(q, 64)
    report = verify_sbp_accuracy(op)
    assert not [row for row in report if row["flagged"]]
    x = op.grid
    for m in range(q + 1):
        assert np.max(np.abs(op.D @ x ** m - m * x ** max(m - 1, 0) * (m > 0))) <= 1e-10 * 64


def test_sbp_q2_on_16_cells() -> None:
    op = build_sbp(2, 16)
    assert op.n_points == 17
    assert closure_rows(op) == 4
    assert np.max(np.abs(op.D @ op.grid ** 2 - 2 * op.grid)) <= 1e-12
    assert np.allclose(op.D @ np.ones(17), 0.0, atol=1e-13)


def test_sbp_closure_widths() -> None:
    assert [sbp_family(q).closure_width for q in (1, 2, 3, 4, 5)] == [1, 4, 6, 8, 12]


def test_sbp_errors() -> None:
    with pytest.raises(UnsupportedOrder) as info:
        build_sbp(6, 64)
    assert info.value.exit_code == 10
    with pytest.raises(GridTooSmall):
        build_sbp(5, 16)


def test_sbp_accuracy_report_regions() -> None:
    report = verify_sbp_accuracy(build_sbp(3, 32))
    assert {row["region"] for row in report} == {"interior", "boundary"}
    assert max(row["degree"] for row in report) == 6
    assert all(row["q"] == 3 and row["N"] == 32 for row in report)
