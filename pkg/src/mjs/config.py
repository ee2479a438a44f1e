"""Run configuration schema (JSON, unknown keys rejected)."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError, field_validator

from .catalog import KINDS, CatalogSpec
from .errors import ConfigError
from .lp import LpParams
from .stability import BasisSpec

SUITES = ("diagnostics", "stability", "lp")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CatalogConfig(_Strict):
    kind: Literal[KINDS]
    params: Dict[str, object] = Field(default_factory=dict)

    def spec(self) -> CatalogSpec:
        return CatalogSpec(self.kind, dict(self.params))


class Tolerances(_Strict):
    eps_imm: PositiveFloat = 1e-12
    eps_comp: PositiveFloat = 1e-8
    eps_A: PositiveFloat = 1e-12
    minimality: PositiveFloat = 1e-6
    identity: PositiveFloat = 1e-8


class StabilityConfig(_Strict):
    degree: int = Field(8, ge=0)
    fourier: Optional[int] = Field(None, ge=0)
    constraint_samples: Optional[int] = Field(None, ge=1)
    n_eig: int = Field(4, ge=1)
    expect: Optional[Literal["stable", "unstable"]] = None

    def basis(self, degree=None) -> BasisSpec:
        return BasisSpec(degree=self.degree if degree is None else int(degree), fourier=self.fourier)


class LpConfig(_Strict):
    p: float = 1.1
    C: PositiveFloat = 3.0
    C1: PositiveFloat = 12.0
    C2: PositiveFloat = 4.0
    variant: Literal["eq7", "eq8"] = "eq7"
    r: float = Field(4.0, gt=2)
    W0: Dict[str, object] = Field(default_factory=lambda: {"vector": [0.0, 0.0, 1.0]})
    rotate_90: bool = False
    perturbation: float = Field(1e-3, ge=0)

    def params(self, eps_A, **override) -> LpParams:
        kw = self.model_dump()
        kw.update(override)
        return LpParams(eps_A=eps_A, **kw)


class OutputConfig(_Strict):
    dir: str = "mjs_out"
    csv: bool = True


class RunConfig(_Strict):
    catalog: CatalogConfig
    grid: Tuple[int, int] = (32, 32)
    n_gamma: int = Field(256, ge=4)
    tolerances: Tolerances = Tolerances()
    suites: List[Literal[SUITES]] = ["diagnostics"]
    assert_minimal: bool = True
    stability: StabilityConfig = StabilityConfig()
    lp: LpConfig = LpConfig()
    output: OutputConfig = OutputConfig()

    @field_validator("grid")
    @classmethod
    def _grid(cls, g):
        if min(g) < 4:
            raise ValueError("grid resolutions must be at least 4")
        return g

    @field_validator("suites")
    @classmethod
    def _order(cls, s):
        return [x for x in SUITES if x in s]


def load_config(path) -> RunConfig:
    """Parse and validate a JSON run configuration; output paths resolve relative to the file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = RunConfig.model_validate(raw)
        cfg.catalog.spec()
        if "lp" in cfg.suites:
            cfg.lp.params(cfg.tolerances.eps_A)
    except (ValidationError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc
    out = Path(cfg.output.dir)
    if not out.is_absolute():
        out = path.parent / out
    return cfg.model_copy(update={"output": cfg.output.model_copy(update={"dir": str(out)})})
