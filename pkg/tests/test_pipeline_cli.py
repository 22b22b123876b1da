import json

import numpy as np
import pytest

from clusterexplain.cli import main
from clusterexplain.clustering import load_assignment
from clusterexplain.data import load_csv, save_csv
from clusterexplain.errors import ConfigError, MissingFile, PipelineError
from clusterexplain.mlp import load_model
from clusterexplain.pipeline import config_from_dict, load_config, render_report, run_pipeline
from helpers import make_dataset


def base_config(out, **changes):
    cfg = {
        "seed": 3,
        "input": {"generate": {"shape": "TwoDiamonds", "n": 800}},
        "clustering": {"algorithm": "kmeans", "k": 2},
        "sfit": {"max_order": 2},
        "top_k": 2,
        "output_dir": str(out),
    }
    cfg.update(changes)
    return cfg


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


class TestConfig:
    def test_seed_is_mandatory(self, tmp_path):
        cfg = base_config(tmp_path)
        del cfg["seed"]
        with pytest.raises(ConfigError):
            config_from_dict(cfg)

    def test_unknown_keys(self, tmp_path):
        with pytest.raises(ConfigError):
            config_from_dict(base_config(tmp_path, colour="blue"))
        with pytest.raises(PipelineError):
            config_from_dict(base_config(tmp_path, mlp={"hiden_sizes": [3]}))

    def test_invalid_fractions_name_the_split_stage(self, tmp_path):
        with pytest.raises(PipelineError) as info:
            config_from_dict(base_config(tmp_path, split={"fractions": [0.5, 0.6]}))
        assert info.value.stage == "split" and "split" in str(info.value)

    def test_seed_flows_to_substages(self, tmp_path):
        cfg = config_from_dict(base_config(tmp_path))
        assert cfg.split.seed == cfg.mlp.seed == cfg.clustering.seed == cfg.input.generate.seed == 3
        assert cfg.centroid_top_k == 4

    def test_relative_paths_follow_the_config_file(self, tmp_path):
        path = write_config(tmp_path, base_config("out"))
        assert load_config(path).output_dir == str(tmp_path / "out")

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFile):
            load_config(tmp_path / "nope.json")


class TestRun:
    def test_two_diamonds(self, tmp_path):
        report = run_pipeline(config_from_dict(base_config(tmp_path / "out")))
        s = report.summary
        assert s["sfit"]["all"]["significant"] == ["X1"]
        assert s["sfit"]["all"]["order_2_significant"] == []
        assert s["clustering"]["ari"] == pytest.approx(1.0)
        names = sorted(p.name for p in (tmp_path / "out").iterdir())
        assert names == ["centroid.json", "labels.csv", "labels.csv.json", "model.json", "sfit_all.json",
                         "sfit_cluster_1.json", "sfit_cluster_2.json", "summary.json"]

    def test_hepta_ward_recovers_the_blobs(self, tmp_path):
        cfg = base_config(tmp_path / "out", input={"generate": {"shape": "Hepta"}},
                          clustering={"algorithm": "ward", "k": 7}, sfit={})
        s = run_pipeline(config_from_dict(cfg)).summary
        assert s["clustering"]["ari"] >= 0.99
        assert s["model"]["accuracy_inference"] >= 0.95

    def test_identical_files_on_rerun(self, tmp_path):
        cfg = config_from_dict(base_config(tmp_path / "a"))
        run_pipeline(cfg)
        first = {p.name: p.read_bytes() for p in (tmp_path / "a").iterdir()}
        run_pipeline(cfg)
        assert {p.name: p.read_bytes() for p in (tmp_path / "a").iterdir()} == first

    def test_small_clusters_are_dropped_before_training(self, tmp_path):
        rng = np.random.default_rng(0)
        X = np.vstack([rng.normal([0, 0], 0.3, (150, 2)), rng.normal([6, 0], 0.3, (150, 2)),
                       rng.normal([0, 6], 0.3, (150, 2)), rng.normal([30, 30], 0.3, (5, 2))])
        save_csv(make_dataset(X), tmp_path / "in.csv")
        cfg = base_config(tmp_path / "out", input={"csv": str(tmp_path / "in.csv")},
                          clustering={"algorithm": "kmeans", "k": 4, "min_cluster_size": 10}, sfit={})
        report = run_pipeline(config_from_dict(cfg))
        s = report.summary
        assert len(s["clustering"]["dropped"]) == 1 and sorted(s["clustering"]["kept_sizes"]) == [150, 150, 150]
        labels = load_assignment(tmp_path / "out" / "labels.csv")
        assert labels.n == 450 and labels.k == 3
        assert load_model(tmp_path / "out" / "model.json").n_classes == 3
        assert s["split"]["inference"] == report.sfit_all.n_total
        assert s["clustering"]["ari"] is None

    def test_stage_named_on_failure(self, tmp_path):
        cfg = base_config(tmp_path / "out", input={"csv": str(tmp_path / "missing.csv")})
        with pytest.raises(PipelineError) as info:
            run_pipeline(config_from_dict(cfg))
        assert info.value.stage == "load"

    def test_sfit_on_all_rows(self, tmp_path):
        s = run_pipeline(config_from_dict(base_config(tmp_path / "out", sfit_on="all", sfit={}))).summary
        assert s["sfit"]["all"]["n_total"] == 800


class TestReport:
    def test_tables(self, tmp_path):
        run_pipeline(config_from_dict(base_config(tmp_path / "out")))
        text = render_report(tmp_path / "out")
        assert "Median" in text and "CI lower" in text and "Score of difference" in text
        assert "Cluster 1" in text and "Cluster 2" in text

    def test_missing(self, tmp_path):
        with pytest.raises(MissingFile):
            render_report(tmp_path / "none")
        (tmp_path / "half").mkdir()
        with pytest.raises(MissingFile):
            render_report(tmp_path / "half")


class TestCli:
    def test_step_by_step(self, tmp_path, capsys):
        data, labels, model = tmp_path / "d.csv", tmp_path / "l.csv", tmp_path / "m.json"
        assert main(["generate", "--shape", "Hepta", "--n", "420", "--seed", "2", "--out", str(data)]) == 0
        assert load_csv(data, label_column="label").n == 420
        assert main(["cluster", "--algo", "ward", "--k", "7", "--input", str(data), "--out", str(labels)]) == 0
        assert main(["cluster", "--algo", "kmeans", "--k", "7", "--input", str(data),
                     "--out", str(tmp_path / "k.csv")]) == 0
        assert main(["train", "--input", str(data), "--labels", str(labels), "--hidden", "20,10", "--seed", "1",
                     "--out", str(model)]) == 0
        assert load_model(model).layer_sizes == [4, 20, 10, 7]
        out = tmp_path / "e.json"
        assert main(["explain", "--model", str(model), "--input", str(data), "--labels", str(labels),
                     "--cluster", "1", "--alpha", "0.05", "--beta", "0.05", "--order", "2", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["cluster"] == 1
        assert main(["explain", "--model", str(model), "--input", str(data), "--labels", str(labels)]) == 0
        capsys.readouterr()
        assert main(["centroid", "--input", str(data), "--labels", str(labels), "--top", "2"]) == 0
        assert "Score of difference" in capsys.readouterr().out

    def test_pipeline_and_report(self, tmp_path, capsys):
        path = write_config(tmp_path, base_config("out"))
        assert main(["pipeline", "--config", str(path)]) == 0
        capsys.readouterr()
        assert main(["report", str(tmp_path / "out")]) == 0
        assert "Score of difference" in capsys.readouterr().out

    def test_invalid_fractions_exit_code(self, tmp_path, capsys):
        path = write_config(tmp_path, base_config("out", split={"fractions": [0.7, 0.2]}))
        assert main(["pipeline", "--config", str(path)]) == 2
        assert "'split'" in capsys.readouterr().err

    def test_config_errors_exit_two(self, tmp_path):
        assert main(["generate", "--shape", "Donut", "--out", str(tmp_path / "x.csv")]) == 2
        assert main(["pipeline", "--config", str(write_config(tmp_path, {"input": {}}))]) == 2

    def test_runtime_errors_exit_one(self, tmp_path):
        assert main(["cluster", "--algo", "kmeans", "--k", "2", "--input", str(tmp_path / "none.csv"),
                     "--out", str(tmp_path / "l.csv")]) == 1
        assert main(["report", str(tmp_path / "nothing")]) == 1

    def test_bad_arguments(self):
        with pytest.raises(SystemExit) as info:
            main(["explain", "--order", "4"])
        assert info.value.code == 2
