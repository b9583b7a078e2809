import json
import subprocess
import sys

import numpy as np
import pytest

from seqgp import DataError, SequenceSpace
from seqgp.cli import main, parse_query, parse_training_csv

BASE_CONFIG = {
    "alphabet": "ab",
    "length": 2,
    "kernel": {"family": "geometric", "beta": 0.5},
    "gauge": {"lambda": "inf", "pi": "uniform"},
    "noise_variance": 0.25,
    "transform": {"kind": "gauge-weights"},
    "output": {"covariance": False, "precision": 10},
}


def write_config(tmp_path, overrides=None, name="config.json"):
    cfg = json.loads(json.dumps(BASE_CONFIG))
    for key, value in (overrides or {}).items():
        if value is None:
            cfg.pop(key, None)
        else:
            cfg[key] = value
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def write_train(tmp_path, rows, name="train.csv"):
    path = tmp_path / name
    path.write_text("sequence,value\n" + "".join(f"{s},{v}\n" for s, v in rows))
    return str(path)


def run_cli(*argv):
    proc = subprocess.run([sys.executable, "-m", "seqgp", *argv],
                          capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


class TestParseTrainingCsv:
    def test_two_rows(self, tmp_path):
        sp = SequenceSpace("ab", 2)
        path = write_train(tmp_path, [("aa", 1.0), ("ab", 0.5)])
        data = parse_training_csv(path, sp, 1.0)
        assert data.t == 2
        np.testing.assert_array_equal(data.X, [[0, 0], [0, 1]])
        np.testing.assert_allclose(data.y, [1.0, 0.5])

    def test_unknown_character_names_row(self, tmp_path):
        sp = SequenceSpace("ab", 2)
        path = write_train(tmp_path, [("ac", 1.0)])
        with pytest.raises(DataError, match=r":2:.*'c'"):
            parse_training_csv(path, sp, 1.0)

    def test_empty_section_is_prior_mode(self, tmp_path):
        sp = SequenceSpace("ab", 2)
        path = tmp_path / "empty.csv"
        path.write_text("sequence,value\n")
        assert parse_training_csv(str(path), sp, 1.0).t == 0

    def test_non_finite_rejected(self, tmp_path):
        sp = SequenceSpace("ab", 2)
        path = write_train(tmp_path, [("aa", "nan")])
        with pytest.raises(DataError, match="finite"):
            parse_training_csv(path, sp, 1.0)

    def test_bad_header(self, tmp_path):
        sp = SequenceSpace("ab", 2)
        path = tmp_path / "bad.csv"
        path.write_text("seq,val\naa,1.0\n")
        with pytest.raises(DataError, match="header"):
            parse_training_csv(str(path), sp, 1.0)


class TestParseQuery:
    def test_empty_subsequence(self):
        sp = SequenceSpace("ab", 2)
        keys = parse_query(["-"], "zero-sum", sp)
        assert keys == [sp.parse_subsequence("-")]

    def test_positional_form(self):
        sp = SequenceSpace("abcde", 5)
        keys = parse_query(["2:b;5:e"], "zero-sum", sp)
        assert keys[0].positions == (2, 5)

    def test_canonicalization_and_dedup(self):
        sp = SequenceSpace("abcde", 5)
        keys = parse_query(["5:b;2:e", "2:e;5:b", "-"], "zero-sum", sp)
        assert len(keys) == 2
        assert keys[0].positions == (2, 5)

    def test_malformed_entry(self):
        sp = SequenceSpace("ab", 2)
        with pytest.raises(DataError, match="bad query entry"):
            parse_query(["1-b"], "zero-sum", sp)


class TestCliRuns:
    def test_posterior_empty_training_is_prior(self, tmp_path):
        cfg = write_config(tmp_path)
        data = tmp_path / "empty.csv"
        data.write_text("sequence,value\n")
        code, out, err = run_cli("posterior", "--config", cfg, "--data", str(data),
                                 "--coeffs=-,1:a")
        assert code == 0, err
        lines = [l.split("\t") for l in out.splitlines() if not l.startswith("#")]
        assert lines[0] == ["label", "mean", "sd"]
        assert float(lines[1][1]) == 0.0
        assert float(lines[2][1]) == 0.0

    def test_posterior_deterministic(self, tmp_path):
        cfg = write_config(tmp_path, {"output": {"covariance": True, "precision": 10}})
        data = write_train(tmp_path, [("aa", 1.0), ("ab", 0.5), ("ba", -0.2)])
        args = ("posterior", "--config", cfg, "--data", data, "--coeffs=-,1:a,2:b,1:a;2:b")
        first = run_cli(*args)
        second = run_cli(*args)
        assert first[0] == second[0] == 0
        assert first[1] == second[1]

    def test_predict_interpolates_at_low_noise(self, tmp_path):
        cfg = write_config(tmp_path, {"noise_variance": 1e-8})
        data = write_train(tmp_path, [("aa", 1.0), ("ab", 0.5)])
        code, out, err = run_cli("predict", "--config", cfg, "--data", data,
                                 "--coeffs", "aa,ab")
        assert code == 0, err
        rows = [l.split("\t") for l in out.splitlines() if not l.startswith("#")][1:]
        assert float(rows[0][1]) == pytest.approx(1.0, abs=1e-4)
        assert float(rows[1][1]) == pytest.approx(0.5, abs=1e-4)

    def test_kernel_eval(self, tmp_path):
        cfg = write_config(tmp_path)
        pairs = tmp_path / "pairs.csv"
        pairs.write_text("x,y\naa,aa\naa,bb\n")
        code, out, err = run_cli("kernel-eval", "--config", cfg, "--data", str(pairs))
        assert code == 0, err
        rows = [l.split("\t") for l in out.splitlines() if not l.startswith("#")][1:]
        assert float(rows[0][2]) == pytest.approx(1.0)
        assert float(rows[1][2]) == pytest.approx(0.25)

    def test_build_regularizer(self, tmp_path):
        cfg = write_config(tmp_path)
        out_path = tmp_path / "reg.csv"
        code, _, err = run_cli("build-regularizer", "--config", cfg, "--out", str(out_path))
        assert code == 0, err
        lines = out_path.read_text().splitlines()
        assert lines[0].split(",")[0] == "label"
        assert len(lines) == 10  # header plus one row per subsequence

    def test_simulate_deterministic_with_seed(self, tmp_path):
        cfg = write_config(tmp_path, {"simulate": {"samples": 3}})
        a = run_cli("simulate", "--config", cfg, "--seed", "42")
        b = run_cli("simulate", "--config", cfg, "--seed", "42")
        c = run_cli("simulate", "--config", cfg, "--seed", "43")
        assert a[0] == b[0] == c[0] == 0
        assert a[1] == b[1]
        assert a[1] != c[1]
        header = a[1].splitlines()[0].split(",")
        assert header == ["sequence", "sample_1", "sample_2", "sample_3"]

    def test_verify_exits_zero(self):
        code, out, err = run_cli("verify")
        assert code == 0, err
        assert "comparisons passed" in out
        assert "FAIL" not in out

    def test_json_mode(self, tmp_path):
        cfg = write_config(tmp_path)
        data = write_train(tmp_path, [("aa", 1.0)])
        code, out, err = run_cli("posterior", "--config", cfg, "--data", data,
                                 "--coeffs=-", "--json")
        assert code == 0, err
        doc = json.loads(out)
        assert doc["command"] == "posterior"
        assert doc["coefficients"][0]["label"] == "-"

    def test_query_file_and_out_file(self, tmp_path):
        cfg = write_config(tmp_path)
        data = write_train(tmp_path, [("aa", 1.0), ("bb", -1.0)])
        query = tmp_path / "query.txt"
        query.write_text("-\n1:a\n\n1:b;2:b\n")
        out_path = tmp_path / "result.tsv"
        code, out, err = run_cli("posterior", "--config", cfg, "--data", data,
                                 "--query", str(query), "--out", str(out_path))
        assert code == 0, err
        assert out == ""
        lines = out_path.read_text().splitlines()
        assert [l.split("\t")[0] for l in lines[2:]] == ["-", "1:a", "1:b;2:b"]

    def test_query_and_coeffs_are_exclusive(self, tmp_path):
        cfg = write_config(tmp_path)
        query = tmp_path / "query.txt"
        query.write_text("-\n")
        code, _, err = run_cli("posterior", "--config", cfg, "--query", str(query),
                               "--coeffs=-")
        assert code == 3

    def test_simulate_gnk_source(self, tmp_path):
        cfg = write_config(tmp_path, {
            "simulate": {"samples": 2, "source": "gnk",
                         "neighborhoods": [[1, 2], [2]]},
        })
        code, out, err = run_cli("simulate", "--config", cfg, "--seed", "5")
        assert code == 0, err
        lines = out.splitlines()
        assert lines[0] == "sequence,sample_1,sample_2"
        assert len(lines) == 5  # header plus one row per sequence


class TestCliErrors:
    def test_unknown_config_key_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, {"mystery": 1})
        code, _, err = run_cli("posterior", "--config", cfg, "--coeffs=-")
        assert code == 2
        assert "error[CONFIG]" in err

    def test_missing_config_exits_2(self):
        code, _, err = run_cli("posterior", "--coeffs=-")
        assert code == 2

    def test_bad_data_exits_3(self, tmp_path):
        cfg = write_config(tmp_path)
        data = write_train(tmp_path, [("ac", 1.0)])
        code, _, err = run_cli("posterior", "--config", cfg, "--data", data, "--coeffs=-")
        assert code == 3
        assert "error[DATA]" in err

    def test_bad_query_entry_exits_3(self, tmp_path):
        cfg = write_config(tmp_path)
        code, _, err = run_cli("posterior", "--config", cfg, "--coeffs", "3:a")
        assert code == 3

    def test_biallelic_kind_needs_alpha_two(self, tmp_path):
        cfg = write_config(tmp_path, {"alphabet": "abc",
                                      "kernel": {"family": "geometric", "beta": 0.5},
                                      "transform": {"kind": "walsh-hadamard"}})
        code, _, err = run_cli("posterior", "--config", cfg, "--coeffs=-")
        assert code == 2

    def test_size_guard_names_guard(self, tmp_path):
        cfg = write_config(tmp_path, {
            "length": 25,
            "kernel": {"family": "vc", "lambdas": [1.0] * 26},
            "transform": {"kind": "zero-sum"},
        })
        code, _, err = run_cli("posterior", "--config", cfg, "--coeffs=-")
        assert code == 2
        assert "dense" in err

    def test_main_function_return_codes(self, tmp_path):
        # exercised in-process for coverage of the dispatch
        cfg = write_config(tmp_path)
        assert main(["posterior", "--config", cfg, "--coeffs", "zz"]) == 3

    def test_numerical_failure_exits_4(self, tmp_path):
        # duplicate rows with sub-epsilon noise make the system exactly
        # singular in floats; an empty jitter ladder leaves no recovery
        cfg = write_config(tmp_path, {"noise_variance": 1e-17, "jitter": [0.0]})
        data = write_train(tmp_path, [("aa", 1.0), ("aa", 1.0), ("aa", 1.0)])
        code, _, err = run_cli("posterior", "--config", cfg, "--data", data, "--coeffs=-")
        assert code == 4
        assert "error[NUMERICAL]" in err


class TestVcRouting:
    def test_vc_posterior_uses_dense_route_and_matches_oracle(self, tmp_path):
        import numpy as np
        from seqgp import GaugeSpec, ProductDistribution, TrainingData, VcKernel, transform_rows
        from seqgp.oracle import dense_transform_posterior

        cfg = write_config(tmp_path, {
            "kernel": {"family": "vc", "lambdas": [1.0, 0.5, 0.25]},
            "output": {"covariance": False, "precision": 12},
        })
        data = write_train(tmp_path, [("aa", 1.0), ("ab", 0.4), ("bb", -0.6)])
        code, out, err = run_cli("posterior", "--config", cfg, "--data", data,
                                 "--coeffs=-,1:a,1:b;2:b")
        assert code == 0, err
        sp = SequenceSpace("ab", 2)
        kernel = VcKernel([1.0, 0.5, 0.25], sp)
        gauge = GaugeSpec(1.0, ProductDistribution.uniform(sp))
        train = TrainingData.from_sequences(sp, ["aa", "ab", "bb"], [1.0, 0.4, -0.6], 0.25)
        keys = [sp.parse_subsequence(c) for c in ("-", "1:a", "1:b;2:b")]
        t = transform_rows("gauge-weights", sp, keys, gauge=gauge)
        want = dense_transform_posterior(t.dense_matrix(sp), kernel.dense(), train, sp)
        rows = [l.split("\t") for l in out.splitlines() if not l.startswith("#")][1:]
        for i, row in enumerate(rows):
            assert float(row[1]) == pytest.approx(want.mean[i], abs=1e-10)
            assert float(row[2]) == pytest.approx(np.sqrt(want.cov[i, i]), abs=1e-10)
