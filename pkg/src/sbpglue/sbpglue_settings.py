"""
Defines the settings for sbpglue.
"""

import os
import pathlib

OUTPUT_DIR_ENV = "SBPGLUE_OUTPUT_DIR"
HOME_ENV = "SBPGLUE_HOME"

class SbpGlueSettings:
    """
    Provides the various settings for sbpglue.
    """
    @staticmethod
    def get_home_directory() -> str:
        """Returns the sbpglue home directory, ~/.sbpglue unless SBPGLUE_HOME is set"""
        home = os.environ.get(HOME_ENV)
        if not home:
            home = str(pathlib.PurePath(pathlib.Path.home(), ".sbpglue"))
        os.makedirs(home, exist_ok=True)
        return home

    @staticmethod
    def get_global_cache_directory() -> str:
        """Returns the cache directory for solved projection coefficients"""
        global_cache_dir = os.path.join(SbpGlueSettings.get_home_directory(), "global_cache")
        os.makedirs(global_cache_dir, exist_ok=True)
        return global_cache_dir

    @staticmethod
    def get_output_directory(configured: str = None) -> str:
        """
        Returns the directory that CSV and JSON outputs are written to.

        A configured value (--output or output_directory) wins over SBPGLUE_OUTPUT_DIR, which
        wins over ./sbpglue_output.
        """
        output_dir = configured or os.environ.get(OUTPUT_DIR_ENV) or os.path.join(os.getcwd(), "sbpglue_output")
        os.makedirs(output_dir, exist_ok=True)
        return output_dir
