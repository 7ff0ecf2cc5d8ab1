import json
from pathlib import Path

import pandas as pd
import pytest

from enaqt.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_OUTPUT,
    EXIT_RUNTIME,
    EXIT_USAGE,
    ConfigError,
    main,
    parse_config,
)
from enaqt.sweep import CSV_COLUMNS, read_records_csv


def write_config(tmp_path, text, name="run.conf"):
    path = tmp_path / name
    path.write_text(text)
    return path


SMALL_SWEEP = """
# tiny smoke sweep
lengths = 5
gradients = 0.0
sigmas = 0.0, 1.0
realizations = 2
seed = 7
"""


class TestParseConfig:
    def test_parses_values_comments_and_blanks(self, tmp_path):
        path = write_config(tmp_path, SMALL_SWEEP)
        values = parse_config(path, "sweep")
        assert values == {
            "lengths": (5,),
            "gradients": (0.0,),
            "sigmas": (0.0, 1.0),
            "realizations": 2,
            "seed": 7,
        }

    def test_unknown_key_rejected(self, tmp_path):
        path = write_config(tmp_path, "lengths = 5\nshenanigans = 1\n")
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(path, "sweep")

    def test_bad_value_rejected(self, tmp_path):
        path = write_config(tmp_path, "lengths = five\n")
        with pytest.raises(ConfigError, match="bad value"):
            parse_config(path, "sweep")

    def test_missing_equals_rejected(self, tmp_path):
        path = write_config(tmp_path, "lengths 5\n")
        with pytest.raises(ConfigError, match="key = value"):
            parse_config(path, "sweep")

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            parse_config(tmp_path / "absent.conf", "sweep")


class TestExitCodes:
    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["no-such-experiment", "--config", "x", "--out", "y"])
        assert excinfo.value.code == EXIT_USAGE
        capsys.readouterr()

    def test_config_error(self, tmp_path, capsys):
        path = write_config(tmp_path, "bogus = 1\n")
        code = main(["sweep", "--config", str(path), "--out", str(tmp_path / "out")])
        assert code == EXIT_CONFIG
        report = json.loads(capsys.readouterr().err)
        assert report["error"] == "config"

    def test_output_error(self, tmp_path, capsys):
        path = write_config(tmp_path, SMALL_SWEEP)
        blocker = tmp_path / "blocked"
        blocker.write_text("")  # a file where the output directory should go
        code = main(["sweep", "--config", str(path), "--out", str(blocker)])
        assert code == EXIT_OUTPUT
        assert json.loads(capsys.readouterr().err)["error"] == "output"

    def test_runtime_error(self, tmp_path, capsys):
        config = write_config(tmp_path, "input = does-not-exist.csv\n", "fit.conf")
        code = main(["fit", "--config", str(config), "--out", str(tmp_path / "out")])
        assert code == EXIT_RUNTIME
        assert json.loads(capsys.readouterr().err)["error"] == "runtime"


@pytest.fixture(scope="module")
def outdir(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("cli-sweep")
    config = write_config(tmp_path, SMALL_SWEEP)
    out = tmp_path / "out"
    code = main(["sweep", "--config", str(config), "--out", str(out), "--workers", "1"])
    assert code == EXIT_OK
    return out


class TestSweepRun:
    def test_emits_contract_files(self, outdir):
        frame = pd.read_csv(outdir / "records.csv")
        assert tuple(frame.columns) == CSV_COLUMNS
        assert len(frame) == 4
        manifest = json.loads((outdir / "manifest.json").read_text())
        assert manifest["records"] == 4
        assert manifest["config"]["master_seed"] == 7
        assert manifest["runtime_seconds"] > 0

    def test_seed_override_changes_records(self, outdir, tmp_path):
        config = write_config(tmp_path, SMALL_SWEEP)
        out = tmp_path / "out"
        code = main(
            ["sweep", "--config", str(config), "--out", str(out), "--seed", "99", "--workers", "1"]
        )
        assert code == EXIT_OK
        base = pd.read_csv(outdir / "records.csv")
        override = pd.read_csv(out / "records.csv")
        assert set(base["seed"]) != set(override["seed"])
        assert json.loads((out / "manifest.json").read_text())["config"]["master_seed"] == 99


class TestOtherExperiments:
    def test_optimize_single_chain(self, tmp_path):
        config = write_config(tmp_path, "n_sites = 5\nsigma = 1.0\nseed = 3\n")
        out = tmp_path / "out"
        assert main(["optimize", "--config", str(config), "--out", str(out)]) == EXIT_OK
        [record] = read_records_csv(out / "records.csv")
        assert record.n_sites == 5
        assert record.status == "interior"

    def test_fit_pipeline(self, tmp_path):
        sweep_config = write_config(
            tmp_path,
            "lengths = 6\ngradients = 0.0\nsigmas = 0.5, 1.0, 2.0\nrealizations = 5\nseed = 11\n",
        )
        sweep_out = tmp_path / "sweep"
        assert main(
            ["sweep", "--config", str(sweep_config), "--out", str(sweep_out), "--workers", "1"]
        ) == EXIT_OK
        fit_config = write_config(
            tmp_path, f"input = {sweep_out / 'records.csv'}\nn_sites = 6\n", "fit.conf"
        )
        fit_out = tmp_path / "fit"
        assert main(["fit", "--config", str(fit_config), "--out", str(fit_out)]) == EXIT_OK
        payload = json.loads((fit_out / "fit.json").read_text())
        assert payload["n_points"] >= 10
        assert payload["lambda"] < 0
        assert payload["fit_error"] > 0

    def test_dynamics(self, tmp_path):
        config = write_config(tmp_path, "n_sites = 9\ngammas = 2.0\nt_max = 50\nn_times = 21\n")
        out = tmp_path / "out"
        assert main(["dynamics", "--config", str(config), "--out", str(out)]) == EXIT_OK
        frame = pd.read_csv(out / "dynamics.csv")
        assert tuple(frame.columns) == ("t", "gamma", "variance")
        assert len(frame) == 21
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["steady_value"] == pytest.approx(60.0 / 9.0)

    def test_uniformisation(self, tmp_path):
        config = write_config(
            tmp_path, "lengths = 5\nsigmas = 1.0\nrealizations = 2\nseed = 3\n"
        )
        out = tmp_path / "out"
        assert main(["uniformisation", "--config", str(config), "--out", str(out), "--workers", "1"]) == EXIT_OK
        frame = pd.read_csv(out / "uniformisation.csv")
        assert "gamma_opt_current" in frame.columns
        assert "gamma_min_variance" in frame.columns
        assert len(frame) == 2

    def test_gradient_scan(self, tmp_path):
        config = write_config(tmp_path, "lengths = 5\ngradients = 0.0, 1.0, 5.0\n")
        out = tmp_path / "out"
        assert main(["gradient-scan", "--config", str(config), "--out", str(out), "--workers", "1"]) == EXIT_OK
        frame = pd.read_csv(out / "records.csv")
        assert list(frame["eta"]) == [0.0, 1.0, 5.0]

    def test_redfield_sweep(self, tmp_path):
        config = write_config(
            tmp_path,
            "lengths = 4\ngradients = 0.0\nsigmas = 0.5\nrealizations = 1\n"
            "beta = 1.0\nspectral_density = flat\nmagnitude = 1.0\n",
        )
        out = tmp_path / "out"
        assert main(["redfield-sweep", "--config", str(config), "--out", str(out), "--workers", "1"]) == EXIT_OK
        [record] = read_records_csv(out / "records.csv")
        assert record.current_max > 0

    def test_redfield_requires_beta(self, tmp_path, capsys):
        config = write_config(tmp_path, "lengths = 4\nsigmas = 0.5\nrealizations = 1\n")
        code = main(["redfield-sweep", "--config", str(config), "--out", str(tmp_path / "o")])
        assert code == EXIT_CONFIG
        capsys.readouterr()

    def test_redfield_drude_lorentz_needs_parameters(self, tmp_path, capsys):
        config = write_config(
            tmp_path,
            "lengths = 4\nsigmas = 0.5\nrealizations = 1\nbeta = 1.0\n"
            "spectral_density = drude_lorentz\n",
        )
        code = main(["redfield-sweep", "--config", str(config), "--out", str(tmp_path / "o")])
        assert code == EXIT_CONFIG
        capsys.readouterr()
