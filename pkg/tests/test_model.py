from pathlib import Path

import numpy as np
import pytest

from lsdkit.codes import code_capacity_model, surface_code
from lsdkit.gf2 import SparseBinaryMatrix
from lsdkit.model import (DemParseError, DetectorModel, Syndrome,
                          error_clusters, fault_graph, format_model,
                          load_model, parse_model, save_model)

from .oracles import bfs_components, column_adjacency, random_sparse

FIXTURES = Path(__file__).parent / "fixtures"

MINIMAL = """\
qdem 1 2 3 1
f 0.1 d 0
f 0.2 d 0 1 L 0
f 0.3 d 1
"""


def random_model(rng, rows=8, cols=12, density=0.3):
    dense = random_sparse(rng, rows, cols, density)
    return DetectorModel(h=SparseBinaryMatrix.from_dense(dense),
                         priors=rng.uniform(0.01, 0.3, cols),
                         observables=SparseBinaryMatrix(1, cols, [(0, 0)]))


class TestParsing:
    def test_minimal_file(self):
        m = parse_model(MINIMAL)
        assert (m.num_detectors, m.num_faults, m.num_observables) == (2, 3, 1)
        assert m.h.column(1).tolist() == [0, 1]
        assert m.observables.column(1).tolist() == [0]
        assert m.priors.tolist() == [0.1, 0.2, 0.3]

    def test_comments_and_whitespace(self):
        text = "# header comment\nqdem 1 1 1 0   \n\nf 0.5 d 0  # trailing\n"
        m = parse_model(text)
        assert m.num_faults == 1

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        model = random_model(rng)
        path = tmp_path / "m.dem"
        save_model(model, path)
        again = load_model(path)
        assert again.h == model.h
        assert again.observables == model.observables
        assert np.array_equal(again.priors, model.priors)
        # And the serialized form is a fixed point.
        assert format_model(again) == format_model(model)

    @pytest.mark.parametrize("fixture,side", [
        ("surface_d3_z_p0.1.dem", "z"),
        ("surface_d3_x_p0.1.dem", "x"),
    ])
    def test_shipped_d3_fixture(self, fixture, side):
        m = load_model(FIXTURES / fixture)
        assert m.num_faults == 9
        assert m.num_detectors == 4
        regen = code_capacity_model(surface_code(3), side, 0.1)
        assert m.h == regen.h
        assert m.observables == regen.observables

    @pytest.mark.parametrize("text,line", [
        ("qdem 2 1 1 0\nf 0.5 d 0\n", 1),            # bad version
        ("qdem 1 1 1 0\nf 1.5 d 0\n", 2),            # prior out of range
        ("qdem 1 1 1 0\nf 0.0 d 0\n", 2),            # prior exactly zero
        ("qdem 1 1 1 0\nf 0.5 d 7\n", 2),            # detector out of range
        ("qdem 1 1 1 0\nf 0.5 d 0 L 0\n", 2),        # observable out of range
        ("qdem 1 1 1 0\nx 0.5 d 0\n", 2),            # unknown line kind
        ("f 0.5 d 0\n", 1),                          # missing header
        ("qdem 1 1 2 0\nf 0.5 d 0\n", 2),            # wrong fault count
    ])
    def test_errors_carry_line_numbers(self, text, line):
        with pytest.raises(DemParseError) as err:
            parse_model(text)
        assert err.value.line_no == line


class TestModelInvariants:
    def test_priors_validated(self):
        h = SparseBinaryMatrix.from_dense([[1]])
        obs = SparseBinaryMatrix(1, 1, [(0, 0)])
        with pytest.raises(ValueError):
            DetectorModel(h=h, priors=np.array([1.0]), observables=obs)
        with pytest.raises(ValueError):
            DetectorModel(h=h, priors=np.array([0.1, 0.2]), observables=obs)

    def test_observable_columns_checked(self):
        h = SparseBinaryMatrix.from_dense([[1, 0]])
        with pytest.raises(ValueError):
            DetectorModel(h=h, priors=np.array([0.1, 0.1]),
                          observables=SparseBinaryMatrix(1, 1, [(0, 0)]))

    def test_syndrome_validation(self):
        s = Syndrome.from_bits([0, 3])
        s.validate(4)
        with pytest.raises(ValueError):
            s.validate(3)
        assert s.to_dense(4).tolist() == [1, 0, 0, 1]
        assert Syndrome.from_dense([0, 1, 0]).bits == frozenset({1})


class TestFaultGraph:
    def test_shared_row_means_adjacent(self):
        m = DetectorModel(h=SparseBinaryMatrix.from_dense([[1, 1]]),
                          priors=np.array([0.1, 0.1]),
                          observables=SparseBinaryMatrix(0, 2))
        g = fault_graph(m)
        assert g.neighbors(0) == (1,)
        assert g.neighbors(1) == (0,)

    def test_identity_has_no_edges(self):
        m = DetectorModel(h=SparseBinaryMatrix.from_dense(np.eye(2, dtype=np.uint8)),
                          priors=np.array([0.1, 0.1]),
                          observables=SparseBinaryMatrix(0, 2))
        assert fault_graph(m).max_degree() == 0

    def test_matches_pairwise_intersection_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            model = random_model(rng)
            g = fault_graph(model)
            oracle = column_adjacency(model.h.to_dense())
            for f in range(model.num_faults):
                assert set(g.neighbors(f)) == oracle[f]

    def test_degree_bound_for_regular_matrix(self):
        # Columns of weight c on rows of weight r give degree <= c(r-1).
        from lsdkit.codes import random_regular_ldpc

        h = random_regular_ldpc(15, 20, 4, 3, seed=7)
        m = DetectorModel(h=h, priors=np.full(20, 0.1),
                          observables=SparseBinaryMatrix(0, 20))
        assert fault_graph(m).max_degree() <= 3 * (4 - 1)

    def test_invariant_under_row_permutation(self):
        rng = np.random.default_rng(2)
        model = random_model(rng)
        dense = model.h.to_dense()
        perm = rng.permutation(dense.shape[0])
        permuted = DetectorModel(h=SparseBinaryMatrix.from_dense(dense[perm]),
                                 priors=model.priors,
                                 observables=model.observables)
        assert fault_graph(model).adjacency == fault_graph(permuted).adjacency


class TestErrorClusters:
    def test_empty_error(self):
        rng = np.random.default_rng(3)
        assert error_clusters(random_model(rng), []) == []

    def test_single_fault(self):
        rng = np.random.default_rng(4)
        model = random_model(rng)
        assert error_clusters(model, [5]) == [{5}]

    def test_matches_bfs_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            model = random_model(rng, rows=6, cols=10, density=0.25)
            weight = rng.integers(0, 6)
            err = set(rng.choice(10, size=weight, replace=False).tolist())
            got = error_clusters(model, err)
            adj = column_adjacency(model.h.to_dense())
            expect = bfs_components(adj, err)
            assert sorted(map(sorted, got)) == sorted(map(sorted, expect))

    def test_partition_properties(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            model = random_model(rng)
            err = set(rng.choice(12, size=5, replace=False).tolist())
            comps = error_clusters(model, err)
            union: set[int] = set()
            for comp in comps:
                assert not union & comp
                union |= comp
            assert union == err

    def test_clusters_share_no_detector_rows(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            model = random_model(rng)
            err = set(rng.choice(12, size=5, replace=False).tolist())
            comps = error_clusters(model, err)
            row_sets = []
            for comp in comps:
                rows: set[int] = set()
                for f in comp:
                    rows.update(int(d) for d in model.h.column(f))
                row_sets.append(rows)
            for i in range(len(row_sets)):
                for j in range(i + 1, len(row_sets)):
                    assert not row_sets[i] & row_sets[j]
