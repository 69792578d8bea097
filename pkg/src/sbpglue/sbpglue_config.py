"""
Configuration parameters for sbpglue.
"""

import inspect
import json
import math
from enum import Enum
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional

from sbpglue.sbpglue_exceptions import ConfigParse


class Scenario(str, Enum):
    """
    Coupling configurations that can be simulated.
    """

    TWO_BLOCK_CONFORMING = "two-block-conforming"
    TWO_BLOCK_NESTED = "two-block-nested"
    TWO_BLOCK_UNNESTED = "two-block-unnested"
    THREE_BLOCK_NESTED = "three-block-nested"
    THREE_BLOCK_UNNESTED = "three-block-unnested"
    SBP_DG = "sbp-dg"

    def __str__(self) -> str:
        return self.value


@dataclass
class RunConfig:
    """
    Configuration parameters of a run, a convergence study or a spectrum computation
    """

    scenario: Scenario = Scenario.TWO_BLOCK_CONFORMING
    q: int = 2
    N: int = 64
    alpha: float = 1.0
    t_final: float = 1.0
    dt: Optional[float] = None
    cfl: float = 0.25
    levels: int = 3
    rho: float = 1.0
    lam: float = 1.0
    refine: bool = False
    seed: int = 0
    samples: int = 20
    output_directory: Optional[str] = None

    def __post_init__(self) -> None:
        try:
            self.scenario = Scenario(self.scenario)
        except ValueError:
            raise ConfigParse(f"Unknown scenario '{self.scenario}'") from None
        try:
            self.q = int(self.q)
            self.N = int(self.N)
            self.levels = int(self.levels)
            self.seed = int(self.seed)
            self.samples = int(self.samples)
            self.alpha = float(self.alpha)
            self.t_final = float(self.t_final)
            self.cfl = float(self.cfl)
            self.rho = float(self.rho)
            self.lam = float(self.lam)
            self.dt = None if self.dt is None else float(self.dt)
        except (TypeError, ValueError) as exc:
            raise ConfigParse(f"Invalid configuration value: {exc}") from None
        if isinstance(self.refine, str):
            self.refine = self.refine.strip().lower() in ("1", "true", "yes", "on")
        self.refine = bool(self.refine)

        if not 1 <= self.q <= 5:
            raise ConfigParse(f"q must be in 1..5, got {self.q}")
        if self.N < 2 or self.N % 2:
            raise ConfigParse(f"N must be an even integer >= 2, got {self.N}")
        if self.alpha < 0:
            raise ConfigParse(f"alpha must be non-negative, got {self.alpha}")
        if self.t_final < 0 or not math.isfinite(self.t_final):
            raise ConfigParse(f"t_final must be a finite non-negative number, got {self.t_final}")
        if self.dt is not None and self.dt <= 0:
            raise ConfigParse(f"dt must be positive, got {self.dt}")
        if self.cfl <= 0:
            raise ConfigParse(f"cfl must be positive, got {self.cfl}")
        if self.levels < 1:
            raise ConfigParse(f"levels must be >= 1, got {self.levels}")
        if self.samples < 1:
            raise ConfigParse(f"samples must be >= 1, got {self.samples}")
        if self.rho <= 0 or self.lam <= 0:
            raise ConfigParse(f"rho and lam must be positive, got rho={self.rho}, lam={self.lam}")

    @property
    def M(self) -> int:
        """
        Interface resolution of the right-hand blocks: N, 2N, 2N+1 for the two-block
        conforming, nested and unnested cases; N and N+1 for the three-block cases.
        """
        return {
            Scenario.TWO_BLOCK_CONFORMING: self.N,
            Scenario.TWO_BLOCK_NESTED: 2 * self.N,
            Scenario.TWO_BLOCK_UNNESTED: 2 * self.N + 1,
            Scenario.THREE_BLOCK_NESTED: self.N,
            Scenario.THREE_BLOCK_UNNESTED: self.N + 1,
            Scenario.SBP_DG: self.N,
        }[self.scenario]

    def with_resolution(self, N: int) -> "RunConfig":
        values = asdict(self)
        values["N"] = N
        return RunConfig(**values)

    def to_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        values["scenario"] = str(self.scenario)
        return values

    @classmethod
    def from_dict(cls, env: dict):
        """
        Create a RunConfig instance from a dictionary, ignoring unknown keys
        """
        return cls(**{
            k: v for k, v in env.items()
            if k in inspect.signature(cls).parameters
        })

    @classmethod
    def merged(cls, *layers: Optional[Dict[str, Any]]) -> "RunConfig":
        """
        Create a RunConfig from dictionaries applied left to right; None values never override.
        """
        merged: Dict[str, Any] = {}
        for layer in layers:
            for key, value in (layer or {}).items():
                if value is not None:
                    merged[key] = value
        return cls.from_dict(merged)


def parse_config_text(text: str, scenario: Optional[str] = None) -> Dict[str, Any]:
    """
    Parses a JSON config file: a "_description" string, an optional "defaults" section and
    one flat section per scenario name. Returns the flattened values for the given scenario
    (or the scenario named in "defaults").
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"Config file is not valid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise ConfigParse("Config file must contain a JSON object")

    known_sections = {str(s) for s in Scenario} | {"defaults", "_description"}
    unknown = [key for key in document if key not in known_sections]
    if unknown:
        raise ConfigParse(f"Unknown config sections: {', '.join(sorted(unknown))}")

    values: Dict[str, Any] = dict(document.get("defaults", {}))
    chosen = scenario or values.get("scenario")
    if chosen is not None:
        section = document.get(str(chosen), {})
        if not isinstance(section, dict):
            raise ConfigParse(f"Section '{chosen}' must be a JSON object")
        values.update(section)
        values["scenario"] = str(chosen)

    allowed = {f.name for f in fields(RunConfig)}
    bad_keys = [key for key in values if key not in allowed]
    if bad_keys:
        raise ConfigParse(f"Unknown config keys: {', '.join(sorted(bad_keys))}")
    return values
