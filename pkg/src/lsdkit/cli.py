"""Batch command-line front end.

Subcommands: ``gen`` (write model fixtures), ``decode`` (stream syndromes to
corrections), ``verify`` (replay corrections against syndromes), ``sweep``
(Monte-Carlo failure-rate grids to CSV), ``stats`` (cluster-statistics runs
to JSONL/CSV).  All outputs are plain text and deterministic given the
seed.  Exit codes: 0 success, 1 usage, 2 decode failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .bp import BpConfig
from .codes import (CssCode, bb_144, bivariate_bicycle, code_capacity_model,
                    hypergraph_product, phenomenological_model,
                    random_regular_ldpc, repetition_code, surface_code)
from .experiments import (DecoderSpec, build_window_plan, direct_task,
                          reprior, run_monte_carlo, windowed_task)
from .gf2 import NotInImageError, SparseBinaryMatrix
from .lsd import LsdConfig, UnsatisfiableSyndromeError, lsd_decode_detailed
from .model import DetectorModel, format_model, load_model
from .osd import OsdMethod

SWEEP_COLUMNS = ("p", "shots", "failures", "p_l", "ci_lo", "ci_hi",
                 "mean_nu", "mean_kappa", "mean_kappa_alpha",
                 "opt_mean_nu", "opt_mean_kappa", "opt_mean_kappa_alpha")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _add_decoder_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--decoder", default="bplsd",
                   choices=("bplsd", "bposd", "lsd", "osd"))
    p.add_argument("--bp-iters", type=int, default=30)
    p.add_argument("--bp-alpha", type=float, default=0.625)
    p.add_argument("--bp-schedule", default="parallel",
                   choices=("parallel", "serial"))
    p.add_argument("--osd-method", default="osd0",
                   choices=("osd0", "osd_e", "osd_cs"))
    p.add_argument("--osd-order", type=int, default=0)
    p.add_argument("--mu", type=int, default=0,
                   help="extra growth steps per cluster after the base decode")
    p.add_argument("--mu-fraction", type=float, default=None,
                   help="growth budget as a fraction of the fault count")
    p.add_argument("--reprocess", default=None, metavar="KIND:ORDER",
                   help="local reprocessing inside clusters, e.g. osd_e:2")
    p.add_argument("--parallel-lsd", action="store_true")


def decoder_from_args(args) -> DecoderSpec:
    reprocess = None
    if args.reprocess:
        kind, _, order = args.reprocess.partition(":")
        reprocess = OsdMethod(kind, int(order) if order else 0)
    return DecoderSpec(
        name=args.decoder,
        bp=BpConfig(max_iterations=args.bp_iters,
                    scaling_factor=args.bp_alpha,
                    schedule=args.bp_schedule),
        lsd=LsdConfig(mu=args.mu, mu_fraction=args.mu_fraction,
                      reprocess=reprocess, parallel=args.parallel_lsd),
        osd=OsdMethod(args.osd_method, args.osd_order))


# ---------------------------------------------------------------------------
# Model sources


def _read_seed_matrix(path: str) -> SparseBinaryMatrix:
    rows = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        bits = line.split() if " " in line else list(line)
        rows.append([int(b) for b in bits])
    if not rows:
        raise ValueError(f"no matrix rows in {path}")
    return SparseBinaryMatrix.from_dense(np.array(rows, dtype=np.uint8))


def build_code(family: str, params: dict) -> CssCode:
    if family == "surface":
        return surface_code(int(params.get("d", 3)))
    if family == "repetition":
        return repetition_code(int(params.get("n", 3)))
    if family == "hgp":
        if "seed_file" in params and params["seed_file"]:
            h1 = _read_seed_matrix(params["seed_file"])
            h2 = (_read_seed_matrix(params["seed_file2"])
                  if params.get("seed_file2") else h1)
        else:
            rows = int(params.get("rows", 15))
            cols = int(params.get("cols", 20))
            h1 = h2 = random_regular_ldpc(rows, cols,
                                          int(params.get("row_weight", 4)),
                                          int(params.get("col_weight", 3)),
                                          int(params.get("graph_seed", 7)))
        return hypergraph_product(h1, h2)
    if family == "bb":
        if params.get("config"):
            cfg = json.loads(Path(params["config"]).read_text())
            return bivariate_bicycle(cfg["l"], cfg["m"],
                                     [tuple(e) for e in cfg["a_exponents"]],
                                     [tuple(e) for e in cfg["b_exponents"]])
        return bb_144()
    raise ValueError(f"unknown code family {family!r}")


def parse_gen_spec(spec: str) -> tuple[str, dict]:
    """Parse 'family:key=value,key=value' generator specs."""
    family, _, rest = spec.partition(":")
    params: dict = {}
    if rest:
        for item in rest.split(","):
            key, _, value = item.partition("=")
            params[key.strip().replace("-", "_")] = value.strip()
    return family, params


def model_from_spec(spec: str, p: float, rounds: int) -> DetectorModel:
    family, params = parse_gen_spec(spec)
    code = build_code(family, params)
    side = params.get("side", "z")
    if rounds > 1:
        return phenomenological_model(code, side, p, rounds)
    return code_capacity_model(code, side, p)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_gen(args) -> int:
    params = {k: getattr(args, k.replace("-", "_"), None)
              for k in ("d", "n", "seed_file", "seed_file2", "rows", "cols",
                        "row_weight", "col_weight", "graph_seed", "config")}
    params = {k: v for k, v in params.items() if v is not None}
    code = build_code(args.family, params)
    if args.rounds > 1:
        model = phenomenological_model(code, args.side, args.p, args.rounds)
    else:
        model = code_capacity_model(code, args.side, args.p)
    text = format_model(model)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
    return 0


def _read_support_lines(path: str) -> list[np.ndarray]:
    out = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        out.append(np.array([int(t) for t in line.split()] if line else [],
                            dtype=np.int64))
    return out


def cmd_decode(args) -> int:
    model = load_model(args.model)
    spec = decoder_from_args(args)
    failed = False
    for support in _read_support_lines(args.syndromes):
        syndrome = np.zeros(model.num_detectors, dtype=np.uint8)
        syndrome[support] = 1
        try:
            from .experiments import decode_one

            outcome = decode_one(model, syndrome, spec)
            print(" ".join(str(int(f)) for f in outcome.support))
        except (UnsatisfiableSyndromeError, NotInImageError):
            print("ERROR unsatisfiable")
            failed = True
    return 2 if failed else 0


def cmd_verify(args) -> int:
    model = load_model(args.model)
    syndromes = _read_support_lines(args.syndromes)
    corrections = _read_support_lines(args.corrections)
    if len(syndromes) != len(corrections):
        sys.stderr.write("error: shot counts differ\n")
        return 2
    bad = 0
    for i, (s, e) in enumerate(zip(syndromes, corrections)):
        expect = np.zeros(model.num_detectors, dtype=np.uint8)
        expect[s] = 1
        if not np.array_equal(model.syndrome_of(e), expect):
            bad += 1
            sys.stderr.write(f"shot {i}: correction does not match syndrome\n")
    print(f"verified {len(syndromes)} shots, {bad} mismatches")
    return 2 if bad else 0


def _parse_grid(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _task_builder(args, spec: DecoderSpec):
    """Returns (task_for_p, cycles, echo) for sweep/stats runs."""
    window = None
    if getattr(args, "window", None):
        w, _, c = args.window.partition(",")
        window = (int(w), int(c))
    rounds = getattr(args, "rounds", 1)
    echo = {"decoder": spec.describe(), "seed": str(args.seed),
            "shots": str(args.shots), "rounds": str(rounds)}
    if window:
        echo["window"] = f"{window[0]},{window[1]}"

    if args.model:
        base = load_model(args.model)
        echo["model"] = str(args.model)
        if window:
            raise ValueError("windowed decoding needs --gen (code structure)")

        def task_for_p(p: float):
            return direct_task(reprior(base, p), spec)

        native = float(np.mean(base.priors))
        return task_for_p, rounds, echo, native

    family, params = parse_gen_spec(args.gen)
    side = params.get("side", "z")
    code = build_code(family, params)
    echo["gen"] = args.gen

    def task_for_p(p: float):
        if window:
            plan = build_window_plan(code, side, p, rounds,
                                     window[0], window[1])
            return windowed_task(plan, spec)
        if rounds > 1:
            return direct_task(phenomenological_model(code, side, p, rounds),
                               spec)
        return direct_task(code_capacity_model(code, side, p), spec)

    return task_for_p, rounds, echo, None


def _write_csv(path, columns, rows, echo: dict) -> None:
    lines = [f"# {k}={v}" for k, v in sorted(echo.items())]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row))
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_sweep(args) -> int:
    spec = decoder_from_args(args)
    task_for_p, cycles, echo, native = _task_builder(args, spec)
    if args.p_grid:
        grid = _parse_grid(args.p_grid)
    elif native is not None:
        grid = [native]
    else:
        raise ValueError("--p-grid is required with --gen")
    echo["p_grid"] = ",".join(repr(p) for p in grid)

    jsonl_stream = open(args.jsonl, "w") if args.jsonl else None
    try:
        reports = run_monte_carlo(task_for_p, grid, args.shots, args.seed,
                                  cycles=cycles, config_echo=echo,
                                  threads=args.threads,
                                  jsonl_stream=jsonl_stream)
    finally:
        if jsonl_stream:
            jsonl_stream.close()

    columns = list(SWEEP_COLUMNS)
    if args.lr_band:
        columns += ["lr_lo", "lr_hi"]
    rows = []
    for rep in reports:
        row = [rep.p, rep.shots, rep.failures, rep.p_l, rep.ci_lo, rep.ci_hi,
               rep.mean_nu, rep.mean_kappa, rep.mean_kappa_alpha,
               rep.opt_mean_nu, rep.opt_mean_kappa, rep.opt_mean_kappa_alpha]
        if args.lr_band:
            row += [rep.lr_lo, rep.lr_hi]
        rows.append(row)
        if rep.decode_errors:
            sys.stderr.write(f"p={rep.p}: {rep.decode_errors} shots failed "
                             "to decode\n")
    _write_csv(args.csv, columns, rows, echo)
    return 0


def cmd_stats(args) -> int:
    spec = decoder_from_args(args)
    if not spec.name.endswith("lsd"):
        raise ValueError("stats runs need an LSD-based decoder")
    task_for_p, cycles, echo, native = _task_builder(args, spec)
    grid = _parse_grid(args.p_grid) if args.p_grid else [native]
    if grid == [None]:
        raise ValueError("--p-grid is required with --gen")

    jsonl_stream = open(args.jsonl, "w") if args.jsonl else None
    try:
        reports = run_monte_carlo(task_for_p, grid, args.shots, args.seed,
                                  cycles=cycles, config_echo=echo,
                                  keep_records=True,
                                  jsonl_stream=jsonl_stream)
    finally:
        if jsonl_stream:
            jsonl_stream.close()

    columns = ["p", "shots"]
    for prefix in ("nu", "kappa", "kappa_alpha",
                   "opt_nu", "opt_kappa", "opt_kappa_alpha"):
        columns += [f"mean_{prefix}", f"q50_{prefix}", f"q90_{prefix}"]
    rows = []
    for rep in reports:
        lsd_recs = [r for r in rep.records if r.nu > 0]
        row: list = [rep.p, rep.shots]
        for getter, pool in (
                (lambda r: r.nu, lsd_recs), (lambda r: r.kappa, lsd_recs),
                (lambda r: r.kappa_alpha, lsd_recs),
                (lambda r: r.optimal_nu, rep.records),
                (lambda r: r.optimal_kappa, rep.records),
                (lambda r: r.optimal_kappa_alpha, rep.records)):
            vals = [getter(r) for r in pool]
            if vals:
                row += [float(np.mean(vals)), float(np.quantile(vals, 0.5)),
                        float(np.quantile(vals, 0.9))]
            else:
                row += [0.0, 0.0, 0.0]
        rows.append(row)
    _write_csv(args.csv, columns, rows, echo)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="lsdkit")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a detector-model fixture")
    g.add_argument("family", choices=("surface", "repetition", "hgp", "bb"))
    g.add_argument("--d", type=int, default=None)
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--seed-file", dest="seed_file", default=None)
    g.add_argument("--seed-file2", dest="seed_file2", default=None)
    g.add_argument("--rows", type=int, default=None)
    g.add_argument("--cols", type=int, default=None)
    g.add_argument("--row-weight", dest="row_weight", type=int, default=None)
    g.add_argument("--col-weight", dest="col_weight", type=int, default=None)
    g.add_argument("--graph-seed", dest="graph_seed", type=int, default=None)
    g.add_argument("--config", default=None, help="bb exponent config (json)")
    g.add_argument("--side", default="z", choices=("x", "z"))
    g.add_argument("--p", type=float, required=True)
    g.add_argument("--rounds", type=int, default=1)
    g.add_argument("-o", "--output", default="-")
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("decode", help="decode syndrome lines to corrections")
    d.add_argument("model")
    d.add_argument("syndromes")
    _add_decoder_flags(d)
    d.set_defaults(func=cmd_decode)

    v = sub.add_parser("verify", help="replay corrections against syndromes")
    v.add_argument("model")
    v.add_argument("syndromes")
    v.add_argument("corrections")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="Monte-Carlo failure-rate sweep to CSV")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", default=None)
    src.add_argument("--gen", default=None,
                     help="generator spec, e.g. surface:d=3,side=z")
    s.add_argument("--p-grid", dest="p_grid", default=None)
    s.add_argument("--shots", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--rounds", type=int, default=1)
    s.add_argument("--window", default=None, metavar="W,C")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--csv", default="-")
    s.add_argument("--jsonl", default=None)
    s.add_argument("--lr-band", dest="lr_band", action="store_true")
    _add_decoder_flags(s)
    s.set_defaults(func=cmd_sweep)

    st = sub.add_parser("stats", help="cluster-statistics run to JSONL/CSV")
    src = st.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", default=None)
    src.add_argument("--gen", default=None)
    st.add_argument("--p-grid", dest="p_grid", default=None)
    st.add_argument("--shots", type=int, required=True)
    st.add_argument("--seed", type=int, required=True)
    st.add_argument("--rounds", type=int, default=1)
    st.add_argument("--window", default=None, metavar="W,C")
    st.add_argument("--csv", default="-")
    st.add_argument("--jsonl", default=None)
    _add_decoder_flags(st)
    st.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except OSError as exc:
        sys.stderr.write(f"io error: {exc}\n")
        return 3
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (UnsatisfiableSyndromeError, NotInImageError) as exc:
        sys.stderr.write(f"decode error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
