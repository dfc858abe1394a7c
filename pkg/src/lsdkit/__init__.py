"""Cluster-based inversion decoding toolkit for quantum LDPC codes."""

from .bp import BpConfig, BpResult, bp_decode
from .codes import (CssCode, bivariate_bicycle, code_capacity_model,
                    hypergraph_product, phenomenological_model,
                    repetition_code, surface_code)
from .experiments import (DecoderSpec, RunReport, ShotRecord,
                          bethe_avg_cluster, build_window_plan,
                          overlapping_window_decode, run_monte_carlo,
                          sample_iid_error)
from .gf2 import (PluFactorization, SparseBinaryMatrix, merge_factorizations,
                  plu_decompose)
from .lsd import (Cluster, ClusterForest, LsdConfig, LsdOutcome,
                  UnsatisfiableSyndromeError, detect_and_merge, grow_cluster,
                  lsd_decode, lsd_decode_detailed, lsd_mu_reprocess)
from .model import (DetectorModel, FaultGraph, Syndrome, error_clusters,
                    fault_graph, load_model, save_model)
from .osd import OsdMethod, osd_decode

__all__ = [
    "BpConfig", "BpResult", "bp_decode",
    "CssCode", "bivariate_bicycle", "code_capacity_model",
    "hypergraph_product", "phenomenological_model", "repetition_code",
    "surface_code",
    "DecoderSpec", "RunReport", "ShotRecord", "bethe_avg_cluster",
    "build_window_plan", "overlapping_window_decode", "run_monte_carlo",
    "sample_iid_error",
    "PluFactorization", "SparseBinaryMatrix", "merge_factorizations",
    "plu_decompose",
    "Cluster", "ClusterForest", "LsdConfig", "LsdOutcome",
    "UnsatisfiableSyndromeError", "detect_and_merge", "grow_cluster",
    "lsd_decode", "lsd_decode_detailed", "lsd_mu_reprocess",
    "DetectorModel", "FaultGraph", "Syndrome", "error_clusters",
    "fault_graph", "load_model", "save_model",
    "OsdMethod", "osd_decode",
]

__version__ = "0.1.0"
