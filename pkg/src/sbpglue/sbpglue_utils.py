"""
This file contains I/O utilities: file reading and writing, number formatting, CSV output
and the coefficient file format.

Coefficient file format
-----------------------
Coefficient files are plain UTF-8 text. Lines starting with ``#`` are comments and blank
lines are ignored. A line ``[name]`` opens a section; inside a section every line has the
form ``key = value value ...``. Values are whitespace separated and are either decimal
numbers (written with 17 significant digits) or exact rationals ``p/q``. Array valued keys
are stored flattened in row-major order next to a ``<key>_shape`` entry. Example::

    # interior stencil of the fourth order family
    [family q=2]
    closure_width = 4
    interior_stencil = 2/3 -1/12
"""

import logging
import os
from datetime import datetime
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence

import numpy as np

from sbpglue.sbpglue_exceptions import CoefficientFormat, SbpGlueException
from sbpglue.sbpglue_logger import SbpGlueLogger


class FileUtils:
    """
    Utility functions for file operations.
    """

    @staticmethod
    def read_file(logger: SbpGlueLogger, file_path: str) -> str:
        """
        Reads the file at the given path and returns the contents as a string.
        """
        encodings = ["utf-8-sig", "utf-16"]
        try:
            for encoding in encodings:
                try:
                    with open(file_path, "r", encoding=encoding) as inp_file:
                        return inp_file.read()
                except UnicodeError:
                    continue
        except Exception as exc:
            logger.log(f"File read '{file_path}' failed: {exc}", logging.ERROR)
            raise SbpGlueException(f"File read '{file_path}' failed.") from None
        logger.log(f"File read '{file_path}' failed: Unsupported encoding.", logging.ERROR)
        raise SbpGlueException(f"File read '{file_path}' failed: Unsupported encoding.") from None

    @staticmethod
    def write_file(logger: SbpGlueLogger, file_path: str, contents: str) -> None:
        """
        Writes contents to the given path, creating parent directories as needed.
        """
        try:
            parent = os.path.dirname(file_path)
            if parent:
                os.makedirs(parent, exist_ok=True)
            with open(file_path, "w", encoding="utf-8", newline="\n") as out_file:
                out_file.write(contents)
        except OSError as exc:
            logger.log(f"File write '{file_path}' failed: {exc}", logging.ERROR)
            raise SbpGlueException(f"File write '{file_path}' failed.") from None


class NumberFormat:
    """
    Formatting of floats for every text output of the package.
    """

    SIGNIFICANT_DIGITS = 17

    @staticmethod
    def format(value) -> str:
        if isinstance(value, (bool, np.bool_)):
            return "true" if value else "false"
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if value is None:
            return ""
        if isinstance(value, (float, np.floating)):
            return format(float(value), f".{NumberFormat.SIGNIFICANT_DIGITS}g")
        return str(value)

    @staticmethod
    def parse(token: str) -> float:
        """Parses a decimal or an exact rational p/q."""
        try:
            return float(Fraction(token))
        except (ValueError, ZeroDivisionError):
            raise CoefficientFormat(f"Cannot parse number '{token}'") from None


class CsvUtils:
    """
    CSV output with a timestamp comment line followed by a header and rows.
    """

    @staticmethod
    def render(header: Sequence[str], rows: Iterable[Mapping]) -> str:
        """Renders the header and rows (without the timestamp line)."""
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(NumberFormat.format(row[column]) for column in header))
        return "\n".join(lines) + "\n"

    @staticmethod
    def write_csv(logger: SbpGlueLogger, file_path: str, header: Sequence[str], rows: Iterable[Mapping]) -> str:
        """
        Writes a CSV file and returns its body (everything after the timestamp line).
        """
        body = CsvUtils.render(header, rows)
        stamp = f"# generated {datetime.now().isoformat(timespec='seconds')}\n"
        FileUtils.write_file(logger, file_path, stamp + body)
        logger.log(f"Wrote {file_path}", logging.INFO)
        return body

    @staticmethod
    def read_csv(logger: SbpGlueLogger, file_path: str) -> List[Dict[str, str]]:
        """Reads a CSV written by write_csv into a list of string-valued dicts."""
        lines = [line for line in FileUtils.read_file(logger, file_path).splitlines() if line and not line.startswith("#")]
        header = lines[0].split(",")
        return [dict(zip(header, line.split(","))) for line in lines[1:]]


class CoefficientFile:
    """
    Reader and writer for the coefficient file format described in the module docstring.
    """

    @staticmethod
    def parse(text: str, source: str = "<string>") -> Dict[str, Dict[str, List[str]]]:
        sections: Dict[str, Dict[str, List[str]]] = {}
        current = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip()
                if current in sections:
                    raise CoefficientFormat(f"{source}:{lineno}: duplicate section [{current}]")
                sections[current] = {}
                continue
            if current is None or "=" not in line:
                raise CoefficientFormat(f"{source}:{lineno}: expected 'key = values' inside a section")
            key, _, values = line.partition("=")
            sections[current][key.strip()] = values.split()
        return sections

    @staticmethod
    def read(logger: SbpGlueLogger, file_path: str) -> Dict[str, Dict[str, List[str]]]:
        return CoefficientFile.parse(FileUtils.read_file(logger, file_path), source=file_path)

    @staticmethod
    def numbers(section: Mapping[str, List[str]], key: str) -> np.ndarray:
        """Returns a numeric entry, reshaped when a matching <key>_shape entry exists."""
        if key not in section:
            raise CoefficientFormat(f"Missing key '{key}'")
        values = np.array([NumberFormat.parse(token) for token in section[key]], dtype=float)
        shape_key = f"{key}_shape"
        if shape_key in section:
            shape = tuple(int(token) for token in section[shape_key])
            if int(np.prod(shape)) != values.size:
                raise CoefficientFormat(f"Entry '{key}' has {values.size} values but shape {shape}")
            values = values.reshape(shape)
        return values

    @staticmethod
    def integer(section: Mapping[str, List[str]], key: str) -> int:
        if key not in section or len(section[key]) != 1:
            raise CoefficientFormat(f"Missing or non-scalar key '{key}'")
        try:
            return int(section[key][0])
        except ValueError:
            raise CoefficientFormat(f"Key '{key}' is not an integer") from None

    @staticmethod
    def render(sections: Mapping[str, Mapping[str, object]], comment: str = "") -> str:
        lines = [f"# {line}" for line in comment.splitlines()]
        for name, entries in sections.items():
            if lines:
                lines.append("")
            lines.append(f"[{name}]")
            for key, value in entries.items():
                array = np.asarray(value)
                if array.ndim > 1:
                    lines.append(f"{key}_shape = " + " ".join(str(n) for n in array.shape))
                tokens = [NumberFormat.format(v) for v in array.ravel().tolist()] if array.ndim else [NumberFormat.format(value)]
                lines.append(f"{key} = " + " ".join(tokens))
        return "\n".join(lines) + "\n"

    @staticmethod
    def write(logger: SbpGlueLogger, file_path: str, sections: Mapping[str, Mapping[str, object]], comment: str = "") -> None:
        FileUtils.write_file(logger, file_path, CoefficientFile.render(sections, comment))
