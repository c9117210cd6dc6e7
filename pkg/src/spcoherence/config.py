"""Flat ``key = value`` run configuration.

Values are Python literals (numbers, strings, lists); bare words are read as
strings.  ``#`` starts a comment.  A config file must set every key in
``REQUIRED_KEYS``; when no file is given the built-in defaults apply.
"""

from __future__ import annotations

import ast
import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

MODEL_CHOICES = ("semiclassical", "quantum", "both")
ENGINE_CHOICES = ("scalar", "fdtd")
OUTDIR_ENV = "SPCOHERENCE_OUTDIR"


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "reference"
    E_keV: float = 30.0
    Lambda_nm: float = 200.0
    L_um: float = 4.0
    lambda_nm: float = 600.0
    w_beam_um: float = 20.0
    l_c_um: tuple = (0.2, 1.0, 4.0)
    r_um: float = 100.0
    theta_deg: tuple = (60.0, 90.0, 120.0)
    cell_nm: float = 5.0
    courant: float = 0.99
    absorber_cells: int = 16
    steady_periods: int = 20
    model: str = "both"
    engine: str = "scalar"
    seed: int = 0
    outdir: str = "results"

    def validate(self) -> "RunConfig":
        issues = []
        for name in ("E_keV", "Lambda_nm", "L_um", "lambda_nm", "w_beam_um", "r_um", "cell_nm", "courant"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                issues.append(f"{name}: must be a positive number, got {v!r}")
        for name in ("l_c_um", "theta_deg"):
            v = getattr(self, name)
            if not isinstance(v, tuple) or len(v) == 0:
                issues.append(f"{name}: must be a nonempty list, got {v!r}")
            elif not all(isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0 for x in v):
                issues.append(f"{name}: entries must be positive numbers, got {list(v)!r}")
        if isinstance(self.courant, (int, float)) and self.courant > 0.99:
            issues.append(f"courant: must not exceed 0.99, got {self.courant!r}")
        if not isinstance(self.absorber_cells, int) or self.absorber_cells < 8:
            issues.append(f"absorber_cells: must be an integer >= 8, got {self.absorber_cells!r}")
        if not isinstance(self.steady_periods, int) or self.steady_periods < 1:
            issues.append(f"steady_periods: must be a positive integer, got {self.steady_periods!r}")
        if self.model not in MODEL_CHOICES:
            issues.append(f"model: must be one of {MODEL_CHOICES}, got {self.model!r}")
        if self.engine not in ENGINE_CHOICES:
            issues.append(f"engine: must be one of {ENGINE_CHOICES}, got {self.engine!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            issues.append(f"seed: must be an integer, got {self.seed!r}")
        if not isinstance(self.scenario, str) or not self.scenario:
            issues.append("scenario: must be a nonempty string")
        if not isinstance(self.outdir, str) or not self.outdir:
            issues.append("outdir: must be a nonempty string")
        if (isinstance(self.w_beam_um, (int, float)) and isinstance(self.l_c_um, tuple)
                and any(isinstance(x, (int, float)) and x > self.w_beam_um for x in self.l_c_um)):
            issues.append("l_c_um: coherence lengths must not exceed w_beam_um")
        if issues:
            raise ConfigError(issues)
        return self

    def echo_lines(self) -> list[str]:
        """``key = value`` lines that :func:`parse_lines` maps back to this config."""
        return [f"{f.name} = {_format(getattr(self, f.name))}" for f in fields(self)]

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **_coerce(changes))


REQUIRED_KEYS = tuple(f.name for f in fields(RunConfig))
_LIST_KEYS = ("l_c_um", "theta_deg")


def _format(v) -> str:
    if isinstance(v, tuple):
        return "[" + ", ".join(repr(x) for x in v) + "]"
    return repr(v)


def _parse_value(text: str):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _coerce(values: dict) -> dict:
    out = {}
    for k, v in values.items():
        if k in _LIST_KEYS:
            v = tuple(v) if isinstance(v, (list, tuple)) else (v,)
            v = tuple(float(x) if isinstance(x, int) and not isinstance(x, bool) else x for x in v)
        elif k in ("absorber_cells", "steady_periods", "seed"):
            if isinstance(v, float) and v.is_integer():
                v = int(v)
        elif k in ("scenario", "model", "engine", "outdir"):
            v = str(v)
        elif isinstance(v, int) and not isinstance(v, bool):
            v = float(v)
        out[k] = v
    return out


def parse_lines(lines) -> dict:
    """Key/value pairs from config text; raises ConfigError on malformed lines."""
    values, issues = {}, []
    known = set(REQUIRED_KEYS)
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip() if not raw.lstrip().startswith("#") else ""
        if not line:
            continue
        if "=" not in line:
            issues.append(f"line {n}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, text = (s.strip() for s in line.split("=", 1))
        if key not in known:
            issues.append(f"line {n}: unknown key {key!r}")
            continue
        values[key] = _parse_value(text)
    if issues:
        raise ConfigError(issues)
    return _coerce(values)


def load_config(path: str | Path) -> RunConfig:
    """Read a complete config file; every key must be present."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read config file {path}: {exc}"]) from exc
    values = parse_lines(text.splitlines())
    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise ConfigError([f"{k}: missing required key" for k in missing])
    return RunConfig(**values).validate()


def config_from_header(lines) -> RunConfig:
    """Rebuild the config echoed in an output file header (``# key = value`` lines)."""
    body = [ln[1:].strip() for ln in lines if ln.startswith("# ") and "=" in ln]
    values = parse_lines(body)
    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise ConfigError([f"{k}: missing from header" for k in missing])
    return RunConfig(**values)
