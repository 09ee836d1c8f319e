import json
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import pytest

import mbhd
from mbhd.cli import main
from mbhd.reproduce import MUSHROOM_COLUMNS


def schema(name):
    text = resources.files("mbhd").joinpath(f"schemas/{name}").read_text()
    return json.loads(text)


@pytest.fixture
def fgm_files(tmp_path):
    pmf_path = tmp_path / "pmf.json"
    model_path = tmp_path / "model.json"
    mbhd.save_pmf(mbhd.fgm_threshold(0.3), pmf_path)
    mbhd.save_model(mbhd.BoolExprModel("x1*x2"), model_path)
    return pmf_path, model_path


def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr().out
    return code, json.loads(out)


class TestDecomposeCommand:
    def test_report_and_schema(self, fgm_files, tmp_path, capsys):
        pmf_path, model_path = fgm_files
        out = tmp_path / "out"
        code, doc = run(
            ["decompose", "--pmf", pmf_path, "--model", model_path, "-o", out], capsys
        )
        assert code == 0
        jsonschema.validate(doc, schema("decomposition.schema.json"))
        np.testing.assert_allclose(doc["beta"], [0.3, -0.125, -0.125, 0.06], atol=1e-12)
        on_disk = json.loads((out / "decomposition.json").read_text())
        assert on_disk == doc

    def test_degenerate_table_routed(self, tmp_path, capsys):
        pmf_path = tmp_path / "pmf.json"
        model_path = tmp_path / "model.json"
        mbhd.save_pmf(mbhd.from_table([0.2, 0.4, 0.4, 0.0]), pmf_path)
        mbhd.save_model(mbhd.BoolExprModel("x1*x2"), model_path)
        code, doc = run(
            ["decompose", "--pmf", pmf_path, "--model", model_path, "-o", tmp_path / "o"],
            capsys,
        )
        assert code == 0
        assert doc["mode"] == "degenerate"
        assert doc["unidentifiable"] == [[1, 2]]

    def test_byte_reproducible(self, fgm_files, tmp_path, capsys):
        pmf_path, model_path = fgm_files
        args = ["decompose", "--pmf", pmf_path, "--model", model_path, "-o", tmp_path / "o"]
        main([str(a) for a in args])
        first = (tmp_path / "o" / "decomposition.json").read_bytes()
        main([str(a) for a in args])
        second = (tmp_path / "o" / "decomposition.json").read_bytes()
        assert first == second
        capsys.readouterr()


class TestIndicesCommand:
    def test_report_and_schema(self, fgm_files, tmp_path, capsys):
        pmf_path, model_path = fgm_files
        out = tmp_path / "out"
        code, doc = run(
            ["indices", "--pmf", pmf_path, "--model", model_path, "-o", out], capsys
        )
        assert code == 0
        jsonschema.validate(doc, schema("sensitivity.schema.json"))
        s1 = [e for e in doc["sobol"] if e["subset"] == [1]][0]
        assert s1["S"] == pytest.approx(0.3571428571, abs=1e-9)
        matrix_lines = (out / "sobol_matrix.csv").read_text().splitlines()
        assert matrix_lines[0] == "subset,[],[1],[2],[1,2]"


class TestEstimateCommand:
    def test_with_known_pmf_and_prediction(self, fgm_files, tmp_path, capsys):
        pmf_path, model_path = fgm_files
        samples = mbhd.sample(mbhd.load_pmf(pmf_path), 5000, seed=3)
        samples_path = tmp_path / "samples.csv"
        mbhd.save_samples(samples, samples_path)
        code, doc = run(
            [
                "estimate",
                "--samples", samples_path,
                "--model", model_path,
                "--pmf", pmf_path,
                "--predict", "1,1",
                "-o", tmp_path / "out",
            ],
            capsys,
        )
        assert code == 0
        jsonschema.validate(doc, schema("estimation.schema.json"))
        assert doc["n"] == 5000
        assert doc["flags"] == []
        assert doc["prediction"]["interval"][0] <= doc["prediction"]["g_hat"]

    def test_empirical_gram_flagged(self, fgm_files, tmp_path, capsys):
        pmf_path, model_path = fgm_files
        samples = mbhd.sample(mbhd.load_pmf(pmf_path), 2000, seed=5)
        samples_path = tmp_path / "samples.csv"
        mbhd.save_samples(samples, samples_path)
        code, doc = run(
            ["estimate", "--samples", samples_path, "--model", model_path,
             "--n-cap", "1", "-o", tmp_path / "out"],
            capsys,
        )
        assert code == 0
        assert doc["flags"] == ["empirical-gram"]
        assert doc["c"] == 1
        assert len(doc["beta_hat"]) == 3


class TestErrors:
    def test_missing_file_error_json(self, tmp_path, capsys):
        code = main(["decompose", "--pmf", "nope.json", "--model", "nada.json",
                     "-o", str(tmp_path)])
        assert code == 1
        doc = json.loads(capsys.readouterr().out)
        jsonschema.validate(doc, schema("error.schema.json"))
        assert doc["error"] == "invalid-input"

    def test_collapsed_support_error_json(self, tmp_path, capsys):
        pmf_path = tmp_path / "pmf.json"
        model_path = tmp_path / "model.json"
        mbhd.save_pmf(mbhd.from_table([0.5, 0.5, 0.0, 0.0]), pmf_path)
        mbhd.save_model(mbhd.BoolExprModel("x1*x2"), model_path)
        code = main(["decompose", "--pmf", str(pmf_path), "--model", str(model_path),
                     "-o", str(tmp_path / "o")])
        assert code == 1
        doc = json.loads(capsys.readouterr().out)
        assert doc["error"] == "collapsed-support"

    def test_mushroom_without_data(self, tmp_path, capsys):
        code = main(["reproduce", "mushroom", "-o", str(tmp_path)])
        assert code == 1
        doc = json.loads(capsys.readouterr().out)
        assert doc["error"] == "dataset-missing"


class TestReproduceFgm:
    def test_bundle(self, tmp_path, capsys):
        code, doc = run(["reproduce", "fgm", "-o", tmp_path / "out"], capsys)
        assert code == 0
        jsonschema.validate(doc, schema("reproduce.schema.json"))
        rows = {row["rho"]: row for row in doc["rows"]}
        assert rows[0.0]["S12_closed"] == pytest.approx(0.5)
        assert rows[0.5]["S12_closed"] == pytest.approx(0.0)
        assert rows[0.0]["S12"] is None  # collapsed endpoint has no computed value
        assert rows[0.3]["S12"] == pytest.approx(0.2 / 0.7, abs=1e-12)
        assert rows[0.3]["var"] == pytest.approx(0.21, abs=1e-12)
        text = (tmp_path / "out" / "fgm_curves.csv").read_text().splitlines()
        assert len(text) == 12

    def test_computed_matches_closed_forms_on_grid(self, tmp_path, capsys):
        code, doc = run(["reproduce", "fgm", "-o", tmp_path / "out"], capsys)
        for row in doc["rows"]:
            if row["S1"] is None:
                continue
            assert row["S1"] == pytest.approx(row["S1_closed"], abs=1e-12)
            assert row["S12"] == pytest.approx(row["S12_closed"], abs=1e-12)
            assert row["var"] == pytest.approx(row["var_closed"], abs=1e-12)


def synthesize_mushroom_csv(path, n=4000, seed=9):
    """A fake dataset with the real column layout and value codes."""
    rng = np.random.default_rng(seed)
    odor = rng.choice(["n", "f", "a"], size=n, p=[0.45, 0.35, 0.2])
    stalk = rng.choice(["c", "r", "b", "e"], size=n, p=[0.05, 0.05, 0.5, 0.4])
    gill = rng.choice(["c", "w"], size=n, p=[0.8, 0.2])
    bruises = rng.choice(["t", "f"], size=n, p=[0.4, 0.6])
    spore = rng.choice(["r", "k", "w"], size=n, p=[0.02, 0.5, 0.48])
    x1 = (odor != "n").astype(int)
    x2 = (~np.isin(stalk, ["c", "r"])).astype(int)
    x3 = (gill != "w").astype(int)
    x4 = (bruises != "t").astype(int)
    x5 = (spore != "r").astype(int)
    g = x1 * x2 * (x3 + (1 - x3) * x4) + (1 - x1) * (1 - x5)
    label = np.where(g == 1, "p", "e")
    rows = []
    for i in range(n):
        row = ["?"] * len(MUSHROOM_COLUMNS)
        row[0] = label[i]
        row[MUSHROOM_COLUMNS.index("odor")] = odor[i]
        row[MUSHROOM_COLUMNS.index("stalk-root")] = stalk[i]
        row[MUSHROOM_COLUMNS.index("gill-spacing")] = gill[i]
        row[MUSHROOM_COLUMNS.index("bruises")] = bruises[i]
        row[MUSHROOM_COLUMNS.index("spore-print-color")] = spore[i]
        rows.append(",".join(row))
    Path(path).write_text("\n".join(rows) + "\n")


class TestReproduceMushroom:
    def test_pipeline_on_synthetic_data(self, tmp_path, capsys):
        data = tmp_path / "fake.data"
        synthesize_mushroom_csv(data)
        code, doc = run(
            ["reproduce", "mushroom", "--data", data, "-o", tmp_path / "out"], capsys
        )
        assert code == 0
        jsonschema.validate(doc, schema("reproduce.schema.json"))
        assert doc["informational"] is True
        assert doc["n"] == 4000
        assert len(doc["shapley"]) == 5
        assert doc["model_label_agreement"] == 1.0
        assert abs(sum(e["S"] for e in doc["sobol"]) - 1.0) < 1e-9
        files = {f for f in doc["files"]}
        assert files == {"mushroom_indices.csv", "mushroom_shapley.csv"}


class TestVersionFlag:
    def test_version(self, capsys):
        with pytest.raises(SystemExit):
            main(["--version"])
        assert "mbhd" in capsys.readouterr().out
