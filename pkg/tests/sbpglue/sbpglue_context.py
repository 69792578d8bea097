"""
Provides the SbpGlueContext class, which stores the context for an sbpglue test.
"""

import dataclasses
from sbpglue.sbpglue_config import RunConfig
from sbpglue.sbpglue_logger import SbpGlueLogger

@dataclasses.dataclass
class SbpGlueContext:
    """
    Stores the context for an sbpglue test.
    """
    config: RunConfig
    logger: SbpGlueLogger
    output_directory: str
