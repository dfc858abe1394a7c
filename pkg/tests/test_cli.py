import json
from pathlib import Path

import numpy as np
import pytest

from lsdkit.cli import main
from lsdkit.model import load_model

FIXTURES = Path(__file__).parent / "fixtures"


def run(args, capsys):
    rc = main(args)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


class TestGen:
    def test_surface_gen_round_trips(self, tmp_path, capsys):
        out = tmp_path / "d3.dem"
        rc, _, _ = run(["gen", "surface", "--d", "3", "--side", "z",
                        "--p", "0.1", "-o", str(out)], capsys)
        assert rc == 0
        model = load_model(out)
        assert model.num_faults == 9
        assert model.num_detectors == 4

    def test_hgp_gen_counts(self, tmp_path, capsys):
        seed = tmp_path / "h.txt"
        seed.write_text("1 1 0\n0 1 1\n")
        out = tmp_path / "hgp.dem"
        rc, _, _ = run(["gen", "hgp", "--seed-file", str(seed),
                        "--p", "0.01", "-o", str(out)], capsys)
        assert rc == 0
        model = load_model(out)
        assert model.num_faults == 3 * 3 + 2 * 2

    def test_gen_625_fixture_has_k_25(self, tmp_path, capsys):
        out = tmp_path / "hgp625.dem"
        rc, _, _ = run(["gen", "hgp", "--rows", "15", "--cols", "20",
                        "--graph-seed", "7", "--p", "0.01", "-o", str(out)],
                       capsys)
        assert rc == 0
        model = load_model(out)
        assert model.num_faults == 625
        assert model.num_observables == 25

    def test_invalid_params_exit_one(self, capsys):
        rc, _, err = run(["gen", "surface", "--d", "4", "--p", "0.1"], capsys)
        assert rc == 1
        assert "error" in err

    def test_usage_error_exit_one(self, capsys):
        rc, _, _ = run(["gen", "surface"], capsys)
        assert rc == 1


class TestDecodeVerify:
    def test_repetition_syndrome_decodes_to_middle(self, tmp_path, capsys):
        synd = tmp_path / "s.txt"
        synd.write_text("0 1\n")
        rc, out, _ = run(["decode", str(FIXTURES / "repetition_3_p0.1.dem"),
                          str(synd)], capsys)
        assert rc == 0
        assert out.strip() == "1"

    def test_empty_line_gives_empty_output(self, tmp_path, capsys):
        synd = tmp_path / "s.txt"
        synd.write_text("\n")
        rc, out, _ = run(["decode", str(FIXTURES / "repetition_3_p0.1.dem"),
                          str(synd)], capsys)
        assert rc == 0
        assert out == "\n"

    def test_unsatisfiable_line_and_exit_code(self, tmp_path, capsys):
        model = tmp_path / "m.dem"
        model.write_text("qdem 1 2 1 0\nf 0.1 d 0 1\n")
        synd = tmp_path / "s.txt"
        synd.write_text("0\n")
        rc, out, _ = run(["decode", str(model), str(synd)], capsys)
        assert rc == 2
        assert out.strip() == "ERROR unsatisfiable"

    def test_hundred_shots_replay_through_verifier(self, tmp_path, capsys):
        model_path = FIXTURES / "surface_d3_z_p0.1.dem"
        model = load_model(model_path)
        rng = np.random.default_rng(0)
        lines = []
        for _ in range(100):
            e = np.nonzero(rng.random(9) < 0.15)[0]
            s = model.syndrome_of(e)
            lines.append(" ".join(str(int(d)) for d in np.nonzero(s)[0]))
        synd = tmp_path / "s.txt"
        synd.write_text("\n".join(lines) + "\n")
        rc, out, _ = run(["decode", str(model_path), str(synd)], capsys)
        assert rc == 0
        corr = tmp_path / "c.txt"
        corr.write_text(out)
        rc, out, err = run(["verify", str(model_path), str(synd), str(corr)],
                           capsys)
        assert rc == 0
        assert "0 mismatches" in out

    def test_verify_flags_bad_correction(self, tmp_path, capsys):
        synd = tmp_path / "s.txt"
        synd.write_text("0 1\n")
        corr = tmp_path / "c.txt"
        corr.write_text("0\n")
        rc, _, err = run(["verify", str(FIXTURES / "repetition_3_p0.1.dem"),
                          str(synd), str(corr)], capsys)
        assert rc == 2

    def test_missing_file_exit_three(self, capsys):
        rc, _, err = run(["decode", "/nonexistent/m.dem", "/nonexistent/s"],
                         capsys)
        assert rc == 3


class TestSweep:
    def test_zero_shots_header_only(self, tmp_path, capsys):
        csv = tmp_path / "out.csv"
        rc, _, _ = run(["sweep", "--gen", "surface:d=3", "--p-grid", "0.05",
                        "--shots", "0", "--seed", "1", "--csv", str(csv)],
                       capsys)
        assert rc == 0
        lines = csv.read_text().splitlines()
        data = [l for l in lines if l and not l.startswith("#")]
        assert data[0].startswith("p,shots,failures,p_l,ci_lo,ci_hi,mean_nu")
        assert len(data) == 2  # header plus the zero-shot row
        assert data[1].startswith("0.05,0,0")

    def test_byte_identical_reruns(self, tmp_path, capsys):
        args = ["sweep", "--gen", "surface:d=3,side=z", "--p-grid",
                "0.04,0.08", "--shots", "150", "--seed", "42"]
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert run(args + ["--csv", str(a)], capsys)[0] == 0
        assert run(args + ["--csv", str(b)], capsys)[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_config_echo_comments(self, tmp_path, capsys):
        csv = tmp_path / "out.csv"
        rc, _, _ = run(["sweep", "--gen", "repetition:n=5", "--p-grid", "0.1",
                        "--shots", "20", "--seed", "3", "--csv", str(csv)],
                       capsys)
        assert rc == 0
        text = csv.read_text()
        assert "# decoder=" in text
        assert "# gen=repetition:n=5" in text
        assert "# seed=3" in text

    def test_model_file_source_with_reprior(self, tmp_path, capsys):
        csv = tmp_path / "out.csv"
        rc, _, _ = run(["sweep", "--model",
                        str(FIXTURES / "surface_d3_z_p0.1.dem"),
                        "--p-grid", "0.05", "--shots", "50", "--seed", "4",
                        "--csv", str(csv)], capsys)
        assert rc == 0
        assert "0.05,50" in csv.read_text()

    def test_jsonl_stream(self, tmp_path, capsys):
        csv = tmp_path / "out.csv"
        jsonl = tmp_path / "shots.jsonl"
        rc, _, _ = run(["sweep", "--gen", "surface:d=3", "--p-grid", "0.08",
                        "--shots", "30", "--seed", "5", "--csv", str(csv),
                        "--jsonl", str(jsonl)], capsys)
        assert rc == 0
        rows = [json.loads(l) for l in jsonl.read_text().splitlines()]
        assert len(rows) == 30
        assert all(r["p"] == 0.08 for r in rows)

    def test_windowed_sweep(self, tmp_path, capsys):
        csv = tmp_path / "out.csv"
        rc, _, _ = run(["sweep", "--gen", "repetition:n=5", "--rounds", "6",
                        "--window", "3,1", "--p-grid", "0.03", "--shots",
                        "30", "--seed", "6", "--csv", str(csv)], capsys)
        assert rc == 0
        assert "# window=3,1" in csv.read_text()

    def test_threads_match_single(self, tmp_path, capsys):
        base = ["sweep", "--gen", "surface:d=3", "--p-grid", "0.06",
                "--shots", "60", "--seed", "7"]
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert run(base + ["--csv", str(a)], capsys)[0] == 0
        assert run(base + ["--csv", str(b), "--threads", "2"], capsys)[0] == 0
        assert a.read_text() == b.read_text()

    def test_lr_band_columns(self, tmp_path, capsys):
        csv = tmp_path / "out.csv"
        rc, _, _ = run(["sweep", "--gen", "surface:d=3", "--p-grid", "0.08",
                        "--shots", "40", "--seed", "8", "--csv", str(csv),
                        "--lr-band"], capsys)
        assert rc == 0
        header = [l for l in csv.read_text().splitlines()
                  if not l.startswith("#")][0]
        assert header.endswith("lr_lo,lr_hi")


class TestStats:
    def test_stats_outputs(self, tmp_path, capsys):
        csv = tmp_path / "stats.csv"
        jsonl = tmp_path / "stats.jsonl"
        rc, _, _ = run(["stats", "--gen", "surface:d=3", "--p-grid", "0.1",
                        "--shots", "50", "--seed", "9", "--csv", str(csv),
                        "--jsonl", str(jsonl)], capsys)
        assert rc == 0
        header = [l for l in csv.read_text().splitlines()
                  if not l.startswith("#")][0]
        assert "mean_nu" in header and "q90_opt_kappa_alpha" in header
        rows = [json.loads(l) for l in jsonl.read_text().splitlines()]
        assert len(rows) == 50

    def test_stats_requires_lsd(self, capsys):
        rc, _, err = run(["stats", "--gen", "surface:d=3", "--p-grid", "0.1",
                          "--shots", "10", "--seed", "1", "--decoder", "osd"],
                         capsys)
        assert rc == 1
