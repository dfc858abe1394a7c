"""Static figures from the decoder CLI's CSV/JSONL outputs."""

from .bethe import bethe_avg_cluster
from .io import (SchemaError, ShotSample, ShotStream, SweepTable,
                 read_shot_jsonl, read_sweep_csv)

__all__ = ["bethe_avg_cluster", "SchemaError", "ShotSample", "ShotStream",
           "SweepTable", "read_shot_jsonl", "read_sweep_csv"]
