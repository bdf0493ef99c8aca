"""Run configuration: JSON schema, loading with precise error messages, and domain conversion.

Complex numbers are written as ``[re, im]`` (a bare real is accepted on input);
matrices are row-major nested lists of complex numbers.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
import pydantic
from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, field_validator

from .errors import TodaError, ValidationError


def _to_complex(v):
    if isinstance(v, complex):
        return v
    if isinstance(v, bool):
        raise ValueError("expected a number or [re, im]")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(float(v[0]), float(v[1]))
    raise ValueError("expected a number or a two-element [re, im] array")


Complex = Annotated[
    complex,
    pydantic.BeforeValidator(_to_complex),
    PlainSerializer(lambda z: [z.real, z.imag], return_type=list),
]
Matrix = list[list[Complex]]
Interval = tuple[float, float]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SystemConfig(_Strict):
    p: int = Field(ge=2)
    n_star: int = Field(ge=1)


class SolitonDataConfig(_Strict):
    mu: list[Complex]
    nu: list[Complex]
    I: list[int]
    J: list[int]
    K: list[int]
    c_I: list[Matrix]
    d_J: list[Matrix]
    d_K: list[Matrix]


class DressingDataConfig(_Strict):
    mu: list[Complex]
    nu: list[Complex]
    c_init: list[list[Matrix]]
    d_init: list[list[Matrix]]


SOLITON_KINDS = ("soliton_e28", "one_soliton", "multi_soliton")


class VacuumSolution(_Strict):
    kind: Literal["vacuum"]


class DressingSolution(_Strict):
    kind: Literal["dressing"]
    data: DressingDataConfig


class SolitonSolution(_Strict):
    kind: Literal["soliton_e28", "one_soliton", "multi_soliton"]
    data: SolitonDataConfig
    normalize: bool = False


SolutionConfig = Annotated[Union[VacuumSolution, DressingSolution, SolitonSolution],
                           Field(discriminator="kind")]
SOLUTION_TAGS = ("vacuum", "dressing") + SOLITON_KINDS


class GridConfig(_Strict):
    mode: Literal["independent", "euclidean", "lorentzian"] = "independent"
    x_range: Interval = (-1.0, 1.0)
    t_range: Interval = (-1.0, 1.0)
    nx: int = Field(default=5, ge=1)
    nt: int = Field(default=5, ge=1)
    fd_step: float = Field(default=1e-3, gt=0)


class OutputsConfig(_Strict):
    grid_path: Optional[str] = None
    report_path: Optional[str] = None
    format: Literal["csv", "json"] = "csv"


class CampaignConfig(_Strict):
    seed: int = 42
    trials: int = Field(default=20, ge=1)
    n_points: int = Field(default=10, ge=1)
    p: tuple[int, int] = (2, 4)
    n_star: tuple[int, int] = (1, 3)
    r: tuple[int, int] = (1, 3)

    @field_validator("p", "n_star", "r")
    @classmethod
    def _ordered(cls, v, info):
        lo = 2 if info.field_name == "p" else 1
        if v[0] < lo or v[1] < v[0]:
            raise ValueError(f"range must satisfy {lo} <= low <= high")
        return v


CHECK_NAMES = ("residual", "inverse_pair", "dressing_vs_closed_form", "multi_proportional",
               "one_soliton_identity", "residue_relations", "grading", "reality")


class RunConfig(_Strict):
    system: SystemConfig
    solution: SolutionConfig = VacuumSolution(kind="vacuum")
    grid: GridConfig = GridConfig()
    checks: list[Literal[CHECK_NAMES]] = ["residual"]
    outputs: OutputsConfig = OutputsConfig()
    campaign: Optional[CampaignConfig] = None


# --- loading ----------------------------------------------------------------------------------

def _line_of(text: str, loc) -> int | None:
    """Best-effort line number of the JSON key at the end of ``loc``."""
    keys = [k for k in loc if isinstance(k, str)]
    pos = 0
    for k in keys:
        hit = text.find(f'"{k}"', pos)
        if hit < 0:
            break
        pos = hit
    else:
        return text.count("\n", 0, pos) + 1 if keys else None
    return text.count("\n", 0, pos) + 1 if pos else None


def _format_loc(loc) -> str:
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part}]"
        elif part in SOLUTION_TAGS:
            continue
        else:
            out += f".{part}" if out else str(part)
    return out or "<root>"


def parse_config(text: str) -> RunConfig:
    """Parse JSON text; every failure becomes a :class:`ValidationError` naming line and field."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        cfg = RunConfig.model_validate(raw)
    except pydantic.ValidationError as exc:
        msgs = []
        for err in exc.errors():
            field = _format_loc(err["loc"])
            line = _line_of(text, err["loc"])
            where = f"line {line}, " if line else ""
            msgs.append(f"{where}field {field}: {err['msg']}")
        raise ValidationError("invalid config: " + "; ".join(msgs)) from exc
    check_domain(cfg)
    return cfg


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    return parse_config(text)


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.model_dump(mode="json", exclude_none=True), indent=2)


# --- domain conversion ------------------------------------------------------------------------

def _matrices(v, field):
    try:
        return np.array(v, dtype=complex)
    except ValueError as exc:
        raise ValidationError(f"field {field}: ragged matrix data") from exc


def build_objects(cfg: RunConfig):
    """``(system, data, grid_spec)`` for a config; ``data`` is ``None`` for the vacuum."""
    from .dressing import DressingData
    from .harness import GridSpec
    from .model import build_system
    from .solitons import SolitonData

    system = build_system(cfg.system.p, cfg.system.n_star)
    sol = cfg.solution
    data = None
    try:
        if sol.kind == "dressing":
            d = sol.data
            data = DressingData(d.mu, d.nu, _matrices(d.c_init, "solution.data.c_init"),
                                _matrices(d.d_init, "solution.data.d_init"))
            data.check_system(system)
        elif sol.kind in SOLITON_KINDS:
            d = sol.data
            data = SolitonData(system, d.mu, d.nu, d.I, d.J, d.K,
                               _matrices(d.c_I, "solution.data.c_I"),
                               _matrices(d.d_J, "solution.data.d_J"),
                               _matrices(d.d_K, "solution.data.d_K"))
            if sol.kind == "one_soliton" and data.r != 1:
                raise ValidationError(f"one_soliton needs r = 1, got r = {data.r}")
    except TodaError as exc:
        raise ValidationError(f"field solution.data: {exc}") from exc
    try:
        g = cfg.grid
        spec = GridSpec(g.mode, g.x_range, g.t_range, g.nx, g.nt, g.fd_step)
    except ValidationError as exc:
        raise ValidationError(f"field grid: {exc}") from exc
    return system, data, spec


def check_domain(cfg: RunConfig):
    build_objects(cfg)
    kind = cfg.solution.kind
    needs = {
        "dressing_vs_closed_form": SOLITON_KINDS,
        "multi_proportional": SOLITON_KINDS,
        "one_soliton_identity": ("one_soliton",),
        "reality": ("one_soliton",),
        "inverse_pair": ("dressing",) + SOLITON_KINDS,
        "residue_relations": ("dressing",) + SOLITON_KINDS,
        "grading": ("dressing",) + SOLITON_KINDS,
    }
    for i, name in enumerate(cfg.checks):
        if name in needs and kind not in needs[name]:
            raise ValidationError(f"field checks[{i}]: check {name!r} is not available for solution kind {kind!r}")
