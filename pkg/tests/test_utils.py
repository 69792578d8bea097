import os
import pathlib
import contextlib
import shutil

from sbpglue.sbpglue_config import RunConfig
from sbpglue.sbpglue_logger import SbpGlueLogger
from tests.sbpglue.sbpglue_context import SbpGlueContext
from typing import Iterator
from uuid import uuid4

@contextlib.contextmanager
def create_test_context(params: dict) -> Iterator[SbpGlueContext]:
    """
    Creates a test context for the given run parameters, with a fresh output directory.
    """
    config = RunConfig.from_dict(params)
    logger = SbpGlueLogger()

    output_directory = str(pathlib.Path(os.path.expanduser("~"), ".sbpglue", "test_output", uuid4().hex))
    try:
        os.makedirs(output_directory, exist_ok=False)
        yield SbpGlueContext(config, logger, output_directory)
    finally:
        if os.path.exists(output_directory):
            shutil.rmtree(output_directory)
