"""Readers for the decoder CLI's CSV and JSONL output schemas."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

SWEEP_COLUMNS = ("p", "shots", "failures", "p_l", "ci_lo", "ci_hi",
                 "mean_nu", "mean_kappa", "mean_kappa_alpha",
                 "opt_mean_nu", "opt_mean_kappa", "opt_mean_kappa_alpha")

SHOT_FIELDS = ("p", "nu", "kappa", "kappa_alpha",
               "optimal_nu", "optimal_kappa", "optimal_kappa_alpha")


class SchemaError(ValueError):
    """Input file does not carry the expected columns or fields."""


@dataclass
class SweepTable:
    path: str
    config: dict[str, str]
    rows: list[dict[str, float]]

    @property
    def has_lr_band(self) -> bool:
        return all("lr_lo" in r and "lr_hi" in r for r in self.rows)

    def label(self) -> str:
        for key in ("gen", "model"):
            if key in self.config:
                return self.config[key]
        return Path(self.path).stem


def read_sweep_csv(path) -> SweepTable:
    """Parse one sweep CSV: '#' config-echo comments, then the pinned
    column set (optionally extended with the likelihood-ratio band)."""
    config: dict[str, str] = {}
    data_lines: list[str] = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        if raw.startswith("#"):
            body = raw[1:].strip()
            key, sep, value = body.partition("=")
            if sep:
                config[key.strip()] = value.strip()
            continue
        if raw.strip():
            data_lines.append(raw)
    if not data_lines:
        raise SchemaError(f"{path}: no header row")
    reader = csv.DictReader(data_lines)
    missing = set(SWEEP_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise SchemaError(f"{path}: missing columns {sorted(missing)}")
    rows = [{k: float(v) for k, v in row.items()} for row in reader]
    return SweepTable(path=str(path), config=config, rows=rows)


@dataclass
class ShotSample:
    p: float
    nu: int
    kappa: int
    kappa_alpha: float
    optimal_nu: int
    optimal_kappa: int
    optimal_kappa_alpha: float


@dataclass
class ShotStream:
    path: str
    samples: list[ShotSample] = field(default_factory=list)

    def grid(self) -> list[float]:
        return sorted({s.p for s in self.samples})


def read_shot_jsonl(path) -> ShotStream:
    """Parse a per-shot JSONL stream of decode records."""
    stream = ShotStream(path=str(path))
    for line_no, raw in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not raw.strip():
            continue
        row = json.loads(raw)
        missing = set(SHOT_FIELDS) - row.keys()
        if missing:
            raise SchemaError(
                f"{path}:{line_no}: missing fields {sorted(missing)}")
        stream.samples.append(ShotSample(
            p=float(row["p"]), nu=int(row["nu"]), kappa=int(row["kappa"]),
            kappa_alpha=float(row["kappa_alpha"]),
            optimal_nu=int(row["optimal_nu"]),
            optimal_kappa=int(row["optimal_kappa"]),
            optimal_kappa_alpha=float(row["optimal_kappa_alpha"])))
    if not stream.samples:
        raise SchemaError(f"{path}: empty shot stream")
    return stream
