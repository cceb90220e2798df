import json
import struct

import numpy as np
import pytest

from uqeval.decomposition import PredictionTensor, UncertaintyScores, ValidationError
from uqeval.ddu import FeatureMatrix
from uqeval.edl import BetaParams
from uqeval.formats import (
    FormatError,
    KIND_BETA_PARAMS,
    KIND_HET_LOGITS,
    read_uqb1,
    read_uqf1,
    read_uql1,
    read_uqs1,
    write_uqb1,
    write_uqf1,
    write_uql1,
    write_uqs1,
)
from uqeval.hetnn import HetLogits
from uqeval.report import RunConfig, emit_report, stable_json, write_csv
from uqeval.tasks import LabelTensor, TaskResult


class TestUqb1:
    def test_probability_round_trip(self, tmp_path):
        v = np.random.default_rng(70).uniform(size=(3, 5, 2)).astype(np.float32)
        p = tmp_path / "t.uqb1"
        write_uqb1(p, v)
        out = read_uqb1(p)
        assert isinstance(out, PredictionTensor)
        assert np.array_equal(out.values, v.astype(np.float64))

    def test_beta_round_trip(self, tmp_path):
        rng = np.random.default_rng(71)
        v = rng.uniform(0.5, 10, size=(2, 4, 3)).astype(np.float32)
        p = tmp_path / "t.uqb1"
        write_uqb1(p, v, kind=KIND_BETA_PARAMS)
        out = read_uqb1(p)
        assert isinstance(out, BetaParams)
        assert np.array_equal(out.alpha, v[0].astype(np.float64))

    def test_het_round_trip(self, tmp_path):
        rng = np.random.default_rng(72)
        v = np.stack([rng.normal(size=(4, 2)), rng.uniform(0, 2, (4, 2))]).astype(np.float32)
        p = tmp_path / "t.uqb1"
        write_uqb1(p, v, kind=KIND_HET_LOGITS)
        out = read_uqb1(p)
        assert isinstance(out, HetLogits)
        assert np.array_equal(out.sigma, v[1].astype(np.float64))

    def test_bad_magic_offset_zero(self, tmp_path):
        p = tmp_path / "t.uqb1"
        p.write_bytes(b"NOPE" + b"\x00" * 20)
        with pytest.raises(FormatError) as e:
            read_uqb1(p)
        assert e.value.offset == 0

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "t.uqb1"
        write_uqb1(p, np.zeros((1, 2, 2), dtype=np.float32))
        p.write_bytes(p.read_bytes()[:-3])
        with pytest.raises(FormatError, match="truncated"):
            read_uqb1(p)

    def test_out_of_range_probability_offset(self, tmp_path):
        p = tmp_path / "t.uqb1"
        v = np.zeros((1, 1, 3), dtype=np.float32)
        v[0, 0, 2] = 1.5
        write_uqb1(p, v)
        with pytest.raises(FormatError) as e:
            read_uqb1(p)
        assert e.value.offset == 17 + 4 * 2

    def test_nan_rejected(self, tmp_path):
        p = tmp_path / "t.uqb1"
        write_uqb1(p, np.full((1, 1, 1), np.nan, dtype=np.float32))
        with pytest.raises(FormatError, match="non-finite"):
            read_uqb1(p)

    def test_beta_needs_two_planes(self, tmp_path):
        p = tmp_path / "t.uqb1"
        write_uqb1(p, np.ones((3, 1, 1), dtype=np.float32), kind=KIND_BETA_PARAMS)
        with pytest.raises(FormatError, match="M=2"):
            read_uqb1(p)

    def test_unknown_kind_rejected_on_write(self, tmp_path):
        with pytest.raises(ValueError):
            write_uqb1(tmp_path / "t.uqb1", np.zeros((1, 1, 1)), kind=9)

    def test_unknown_kind_byte_rejected_on_read(self, tmp_path):
        p = tmp_path / "t.uqb1"
        data = b"UQB1" + struct.pack("<IIIB", 1, 1, 1, 7) + struct.pack("<f", 0.5)
        p.write_bytes(data)
        with pytest.raises(FormatError, match="unknown payload kind"):
            read_uqb1(p)


class TestUql1:
    def test_round_trip(self, tmp_path):
        labels = LabelTensor(np.random.default_rng(73).integers(-1, 2, (6, 4)))
        p = tmp_path / "t.uql1"
        write_uql1(p, labels)
        assert np.array_equal(read_uql1(p).values, labels.values)

    def test_one_dim_input_gets_column(self, tmp_path):
        p = tmp_path / "t.uql1"
        write_uql1(p, np.array([0, 1, 1], dtype=np.int8))
        assert read_uql1(p).values.shape == (3, 1)

    def test_domain_violation_offset(self, tmp_path):
        p = tmp_path / "t.uql1"
        p.write_bytes(b"UQL1" + struct.pack("<II", 1, 3) + bytes([0, 5, 1]))
        with pytest.raises(FormatError) as e:
            read_uql1(p)
        assert e.value.offset == 12 + 1


class TestUqf1:
    def test_round_trip(self, tmp_path):
        x = np.random.default_rng(74).normal(size=(7, 3)).astype(np.float32)
        p = tmp_path / "t.uqf1"
        write_uqf1(p, x)
        out = read_uqf1(p)
        assert isinstance(out, FeatureMatrix)
        assert np.array_equal(out.values, x.astype(np.float64))

    def test_inf_rejected(self, tmp_path):
        p = tmp_path / "t.uqf1"
        write_uqf1(p, np.array([[np.inf]], dtype=np.float32))
        with pytest.raises(FormatError, match="non-finite"):
            read_uqf1(p)


class TestUqs1:
    def test_per_class_round_trip(self, tmp_path):
        s = UncertaintyScores(np.random.default_rng(75).uniform(size=(5, 3)), "EU")
        p = tmp_path / "t.uqs1"
        write_uqs1(p, s)
        out = read_uqs1(p)
        assert out.kind == "EU" and out.per_class
        assert np.allclose(out.values, s.values, atol=1e-7)

    def test_per_sample_round_trip(self, tmp_path):
        s = UncertaintyScores(np.random.default_rng(76).uniform(size=8), "PU")
        p = tmp_path / "t.uqs1"
        write_uqs1(p, s)
        out = read_uqs1(p)
        assert out.values.shape == (8,) and not out.per_class

    def test_unknown_kind_byte(self, tmp_path):
        p = tmp_path / "t.uqs1"
        p.write_bytes(b"UQS1" + struct.pack("<IIB", 1, 0, 200) + struct.pack("<f", 0.1))
        with pytest.raises(FormatError, match="score-kind"):
            read_uqs1(p)


class TestRunConfig:
    def test_defaults_valid(self):
        cfg = RunConfig()
        assert cfg.tasks == [1, 2, 3, 4, 5, 6]

    def test_from_file(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"aggregation": "max", "calibration_bins": 10}))
        cfg = RunConfig.from_file(p)
        assert cfg.aggregation == "max" and cfg.calibration_bins == 10

    def test_unknown_key_rejected(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"aggregaton": "max"}))
        with pytest.raises(ValidationError, match="unknown config keys"):
            RunConfig.from_file(p)

    def test_bad_values_rejected(self):
        with pytest.raises(ValidationError):
            RunConfig(tasks=[1, 9])
        with pytest.raises(ValidationError):
            RunConfig(aggregation="median")
        with pytest.raises(ValidationError):
            RunConfig(auac_step=0.0)

    def test_output_dir_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("UQEVAL_OUTPUT_DIR", str(tmp_path))
        assert RunConfig().output_dir == str(tmp_path)


class TestReportEmission:
    def sample_inputs(self):
        tasks = {"ens": {1: TaskResult(task=1, metric="auroc", value=1 / 3, score_kind="EU")}}
        return tasks

    def test_byte_deterministic(self, tmp_path):
        tasks = self.sample_inputs()
        p1 = emit_report(tmp_path / "a", task_results=tasks)
        p2 = emit_report(tmp_path / "b", task_results=tasks)
        assert p1.read_bytes() == p2.read_bytes()
        assert (tmp_path / "a" / "task_scores.csv").read_bytes() == \
               (tmp_path / "b" / "task_scores.csv").read_bytes()

    def test_floats_rounded_to_nine_significant_digits(self, tmp_path):
        p = emit_report(tmp_path, task_results=self.sample_inputs())
        doc = json.loads(p.read_text())
        assert doc["tasks"]["ens"]["1"]["value"] == 0.333333333

    def test_empty_sections_schema_valid(self, tmp_path):
        p = emit_report(tmp_path)
        doc = json.loads(p.read_text())
        assert doc["schema_version"] == "1.0"
        assert doc["tasks"] == {} and doc["overview"] == []
        assert (tmp_path / "eu_au_gap.csv").exists()

    def test_nonfinite_serialized_as_null(self):
        text = stable_json({"x": float("nan"), "y": float("inf")})
        doc = json.loads(text)
        assert doc["x"] is None and doc["y"] is None

    def test_csv_none_is_empty_field(self, tmp_path):
        p = tmp_path / "t.csv"
        write_csv(p, ["a", "b"], [(1.0, None)])
        assert p.read_text() == "a,b\n1,\n"
