import json
import math

import numpy as np
import pytest

from aae import graphmodel
from aae.errors import CapacityError, ParseError, ValidationError
from aae.features import (
    DEFAULT_MAX_LEN,
    PAD_VALUE,
    EvaluationInstance,
    StorageConfig,
    assemble,
    encode_storage,
    extract_dataset_features,
    extract_workload_features,
    instance_from_record,
    instance_to_record,
    read_corpus,
    write_corpus,
)
from aae.graphmodel import GraphStats, WorkloadProfile


def minimal_stats():
    return GraphStats(num_nodes=1, num_edges=0, data_size=64,
                      num_node_types=1, num_edge_types=1,
                      num_property_types=1,
                      property_cardinalities=((0, 1),))


def three_prop_stats():
    return GraphStats(num_nodes=100, num_edges=200, data_size=64 * 300,
                      num_node_types=2, num_edge_types=3,
                      num_property_types=3,
                      property_cardinalities=((0, 10), (1, 20), (2, 5)))


def uniform_workload(stats, freq=None):
    rates = tuple([1 / 19] * 18 + [1 - 18 / 19])
    if freq is None:
        freq = tuple([0.5] * stats.num_property_types)
    return WorkloadProfile(op_rates=rates, property_freq=freq,
                           total_queries=100)


class TestDatasetFeatures:
    def test_ldbc_head(self, ldbc_stats):
        vec = extract_dataset_features(ldbc_stats)
        expected = [
            math.log1p(64 * (184328 + 767894)),
            math.log1p(184328),
            math.log1p(767894),
            8.0, 15.0, 62.0,
        ]
        assert vec[:6] == pytest.approx(expected)

    def test_minimal_graph(self):
        vec = extract_dataset_features(minimal_stats())
        assert vec.tolist() == pytest.approx(
            [math.log1p(64), math.log1p(1), 0.0, 1.0, 1.0, 1.0,
             math.log1p(1)])

    @pytest.mark.parametrize("seed", range(5))
    def test_length(self, seed):
        g = graphmodel.generate_graph_stats("random", seed)
        vec = extract_dataset_features(g)
        assert vec.size == 6 + g.num_property_types


class TestWorkloadFeatures:
    def test_rate_block_sums_to_one(self, small_stats):
        w = graphmodel.generate_workload(
            small_stats, (0.38, 0.15, 0.02, 0.13, 0.32), seed=1)
        vec = extract_workload_features(w)
        assert vec[:19].sum() == pytest.approx(1.0)

    def test_uniform_rates(self):
        stats = three_prop_stats()
        vec = extract_workload_features(uniform_workload(stats))
        assert vec[:18] == pytest.approx(np.full(18, 1 / 19))
        assert vec.size == 19 + 3

    def test_zero_property_freq(self):
        stats = three_prop_stats()
        w = uniform_workload(stats, freq=(0.0, 0.0, 0.0))
        vec = extract_workload_features(w)
        assert vec[19:].tolist() == [0.0, 0.0, 0.0]


class TestEncodeStorage:
    def test_native_no_indexes(self):
        s = StorageConfig(engine="native-graph", index_bits=(0, 0, 0))
        assert encode_storage(s).tolist() == [1, 0, 0, 0, 0]

    def test_columnar_with_index(self):
        s = StorageConfig(engine="columnar", index_bits=(0, 1, 0))
        assert encode_storage(s).tolist() == [0, 1, 0, 1, 0]

    @pytest.mark.parametrize("engine", ["native-graph", "columnar"])
    def test_engine_block_is_one_hot(self, engine):
        s = StorageConfig(engine=engine, index_bits=(1, 1))
        block = encode_storage(s)[:2]
        assert block.sum() == 1.0
        assert set(block.tolist()) <= {0.0, 1.0}

    def test_unknown_engine_rejected(self):
        with pytest.raises(ValidationError):
            StorageConfig(engine="document", index_bits=())


class TestAssemble:
    def test_three_property_layout(self):
        stats = three_prop_stats()
        w = uniform_workload(stats)
        s = StorageConfig(engine="columnar", index_bits=(1, 0, 0))
        inst = assemble(stats, w, s, s, max_len=DEFAULT_MAX_LEN)
        assert inst.unpadded_length() == (6 + 3) + (19 + 3) + (2 + 3) + (2 + 3)
        assert np.all(inst.vector[41:] == PAD_VALUE)
        assert np.all(inst.mask[41:] == 0)
        assert np.all(inst.mask[:41] == 1)

    def test_exact_fit_has_full_mask(self):
        stats = three_prop_stats()
        w = uniform_workload(stats)
        s = StorageConfig(engine="native-graph", index_bits=(0, 0, 0))
        inst = assemble(stats, w, s, s, max_len=41)
        assert inst.mask.sum() == 41

    def test_identity_storage_blocks_match(self):
        stats = three_prop_stats()
        w = uniform_workload(stats)
        s = StorageConfig(engine="columnar", index_bits=(0, 1, 1))
        inst = assemble(stats, w, s, s, max_len=64)
        old_block = inst.vector[31:36]
        new_block = inst.vector[36:41]
        assert old_block.tolist() == new_block.tolist()

    def test_capacity_error_names_required_length(self):
        stats = three_prop_stats()
        w = uniform_workload(stats)
        s = StorageConfig(engine="columnar", index_bits=(0, 0, 0))
        with pytest.raises(CapacityError) as exc:
            assemble(stats, w, s, s, max_len=40)
        assert exc.value.required == 41

    def test_storage_sizing_checked(self):
        stats = three_prop_stats()
        w = uniform_workload(stats)
        s = StorageConfig(engine="columnar", index_bits=(0, 0))
        with pytest.raises(ValidationError):
            assemble(stats, w, s, s)

    def test_mask_zero_iff_pad_sentinel(self):
        rng = np.random.default_rng(0)
        for seed in range(10):
            g = graphmodel.generate_graph_stats("random", seed)
            mix = rng.dirichlet(np.ones(5))
            w = graphmodel.generate_workload(g, mix, seed)
            bits = tuple(int(b) for b in
                         rng.integers(0, 2, g.num_property_types))
            s = StorageConfig(engine="native-graph", index_bits=bits)
            inst = assemble(g, w, s, s)
            pad_positions = inst.mask == 0
            assert np.all(inst.vector[pad_positions] == PAD_VALUE)
            # rates and bits are non-negative, so no real entry collides
            # with the sentinel
            assert np.all(inst.vector[~pad_positions] >= 0)

    def test_distinct_inputs_distinct_vectors(self):
        rng = np.random.default_rng(1)
        seen = set()
        for seed in range(15):
            g = graphmodel.generate_graph_stats("random", seed)
            w = graphmodel.generate_workload(g, rng.dirichlet(np.ones(5)),
                                             seed)
            bits = tuple(int(b) for b in
                         rng.integers(0, 2, g.num_property_types))
            s_old = StorageConfig(engine="native-graph", index_bits=bits)
            s_new = StorageConfig(engine="columnar", index_bits=bits)
            inst = assemble(g, w, s_old, s_new)
            seen.add(inst.vector.tobytes())
        assert len(seen) == 15


class TestCorpusSerialization:
    def make_instance(self):
        stats = three_prop_stats()
        w = uniform_workload(stats)
        s = StorageConfig(engine="columnar", index_bits=(1, 0, 0))
        inst = assemble(stats, w, s, s, max_len=48)
        inst.label = 1
        inst.provenance = {"stats": "t:0", "workload": "w:0",
                           "s_old": s.storage_id(), "s_new": s.storage_id()}
        return inst

    def test_record_roundtrip(self):
        inst = self.make_instance()
        back = instance_from_record(instance_to_record(inst))
        assert back.label == 1
        assert back.mask.tolist() == inst.mask.tolist()
        assert back.provenance == inst.provenance
        assert back.vector == pytest.approx(inst.vector, rel=1e-8)

    def test_corpus_roundtrip(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        inst = self.make_instance()
        write_corpus(path, {"seed": 3}, [inst, inst])
        header, instances = read_corpus(path)
        assert header["seed"] == 3
        assert len(instances) == 2

    def test_bad_header_raises_parse_error(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text("not json\n")
        with pytest.raises(ParseError):
            read_corpus(path)

    def test_bad_record_reports_line(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text(
            json.dumps({"format": "aae-corpus-v1"}) + "\n{broken\n")
        with pytest.raises(ParseError) as exc:
            read_corpus(path)
        assert exc.value.line == 2
