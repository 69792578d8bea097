"""
This file contains tests for the structured sbpglue logger
"""

import json
import logging

import pytest

from sbpglue.sbpglue_config import Scenario
from sbpglue.sbpglue_exceptions import SystemTooLarge
from sbpglue.sbpglue_logger import SbpGlueLogger


def test_log_line_carries_caller_and_context(caplog) -> None:
    caplog.set_level(logging.INFO, logger="sbpglue")
    logger = SbpGlueLogger().bind(scenario=Scenario.SBP_DG, q=3)
    logger.bind(N=64).log("assembled\nblock", logging.INFO)

    line = json.loads(caplog.records[-1].getMessage())
    assert line["message"] == "assembled block"
    assert line["level"] == "INFO"
    assert line["caller_name"] == "test_log_line_carries_caller_and_context"
    assert line["caller_file"] == "test_sbpglue_logger.py"
    assert line["context"] == {"scenario": "sbp-dg", "q": 3, "N": 64}
    assert "elapsed" not in line
    assert logger.context == {"scenario": "sbp-dg", "q": 3}


def test_timed_reports_elapsed(caplog) -> None:
    caplog.set_level(logging.INFO, logger="sbpglue")
    logger = SbpGlueLogger()
    with logger.timed("eigenvalues"):
        sum(range(1000))

    line = json.loads(caplog.records[-1].getMessage())
    assert line["message"] == "eigenvalues done"
    assert line["elapsed"] >= 0.0
    assert line["caller_name"] == "test_timed_reports_elapsed"


def test_disabled_levels_are_skipped(caplog) -> None:
    caplog.set_level(logging.WARNING, logger="sbpglue")
    SbpGlueLogger(logging.WARNING).log("quiet", logging.DEBUG)
    assert not [record for record in caplog.records if "quiet" in record.getMessage()]


def test_timed_reports_failures(caplog) -> None:
    caplog.set_level(logging.INFO, logger="sbpglue")
    logger = SbpGlueLogger().bind(q=5)
    with pytest.raises(SystemTooLarge):
        with logger.timed("global operator"):
            raise SystemTooLarge("too many unknowns")

    line = json.loads(caplog.records[-1].getMessage())
    assert line["level"] == "ERROR"
    assert line["message"] == "global operator failed: too many unknowns"
    assert line["elapsed"] >= 0.0
    assert line["context"] == {"q": 5}
    assert line["caller_name"] == "test_timed_reports_failures"
