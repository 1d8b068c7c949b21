"""Loading datasets and experiment configs from disk."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .core import D_MAX_DEFAULT, D_MAX_HARD, CvLatticeError, Dataset
from .evidence import HypothesisSet
from .lattice import DEFAULT_TOLERANCE
from .models import Hypothesis, hypothesis_from_spec


class ConfigError(CvLatticeError, ValueError):
    """Malformed input file or invalid run setting."""


@dataclass(frozen=True)
class HypothesisSpec:
    hypothesis: Hypothesis
    prior: float | None


@dataclass
class RunConfig:
    data_path: Path
    data_format: str
    hypotheses: list[HypothesisSpec]
    tolerance: float = DEFAULT_TOLERANCE
    d_max: int = D_MAX_DEFAULT
    output: str = "text"
    threads: int = 1
    leave_out: list[int] = field(default_factory=list)
    header: bool = False

    def validate(self, needs_priors: bool = False) -> None:
        if not self.hypotheses:
            raise ConfigError("no hypotheses configured")
        if not (isinstance(self.tolerance, float) and self.tolerance > 0 and math.isfinite(self.tolerance)):
            raise ConfigError(f"tolerance must be a finite number > 0, got {self.tolerance!r}")
        if not 1 <= self.d_max <= D_MAX_HARD:
            raise ConfigError(f"d_max must lie in 1..{D_MAX_HARD}, got {self.d_max}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.data_format not in ("csv", "json"):
            raise ConfigError(f"unknown data format {self.data_format!r}")
        if needs_priors:
            missing = [s.hypothesis.name for s in self.hypotheses if s.prior is None]
            if missing:
                raise ConfigError(f"priors missing for: {', '.join(missing)}")

    def hypothesis_set(self) -> HypothesisSet:
        try:
            return HypothesisSet(
                tuple(s.hypothesis for s in self.hypotheses),
                tuple(s.prior for s in self.hypotheses),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def load_data(self) -> Dataset:
        values = read_values(self.data_path, self.data_format, self.header)
        return Dataset(values, d_max=self.d_max)


def guess_format(path: Path) -> str:
    return "json" if path.suffix.lower() == ".json" else "csv"


def _number(text: str, where: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {text!r} as a number") from None
    if not math.isfinite(x):
        raise ConfigError(f"{where}: value {text!r} is not finite")
    return x


def read_values(path: Path, fmt: str, header: bool = False) -> list[float]:
    """Single-column CSV (optionally with one header line) or a flat JSON array."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read dataset {path}: {exc.strerror}") from None
    if fmt == "json":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
        if not isinstance(raw, list):
            raise ConfigError(f"{path}: expected a flat JSON array of numbers")
        out = []
        for i, v in enumerate(raw):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{path}: element [{i}] is {v!r}, expected a number")
            out.append(_number(str(v), f"{path}: element [{i}]"))
        return out
    out = []
    rows = csv.reader(text.splitlines())
    for lineno, row in enumerate(rows, start=1):
        if header and lineno == 1:
            continue
        cells = [c.strip() for c in row]
        if not cells or cells == [""]:
            continue
        if len(cells) != 1:
            raise ConfigError(f"{path}:{lineno}: expected a single column, got {len(cells)} fields")
        out.append(_number(cells[0], f"{path}:{lineno}"))
    return out


def parse_config(doc: dict, source: str = "<config>") -> tuple[list[HypothesisSpec], float | None, int | None]:
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be an object")
    hyps = doc.get("hypotheses")
    if not isinstance(hyps, list):
        raise ConfigError(f"{source}: 'hypotheses' must be a list")
    specs = []
    for i, entry in enumerate(hyps):
        where = f"{source}: hypotheses[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where}: must be an object")
        kind = entry.get("kind")
        if not isinstance(kind, str):
            raise ConfigError(f"{where}.kind: missing or not a string")
        params = entry.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError(f"{where}.params: must be an object")
        name = entry.get("name", kind)
        try:
            h = hypothesis_from_spec(kind, params, name=str(name))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{where}: {exc}") from None
        prior = entry.get("prior")
        if prior is not None:
            if isinstance(prior, bool) or not isinstance(prior, (int, float)):
                raise ConfigError(f"{where}.prior: expected a number, got {prior!r}")
            prior = float(prior)
        specs.append(HypothesisSpec(h, prior))
    tol = doc.get("tolerance")
    if tol is not None:
        if isinstance(tol, bool) or not isinstance(tol, (int, float)):
            raise ConfigError(f"{source}: tolerance must be a number")
        tol = float(tol)
    d_max = doc.get("d_max")
    if d_max is not None and (isinstance(d_max, bool) or not isinstance(d_max, int)):
        raise ConfigError(f"{source}: d_max must be an integer")
    return specs, tol, d_max


def load_config(path: Path) -> tuple[list[HypothesisSpec], float | None, int | None]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    return parse_config(doc, str(path))
