"""Command-line tests through click's runner."""

import os

import pytest
import yaml
from click.testing import CliRunner

from src.main.python.core.main import cli
from src.main.python.services.codebook import load_codebook

SMALL = {
    "M": 2, "N": 4, "L": 2, "T": 4, "Q": 2,
    "mode": ["ST", "SF"], "scenario": "indoor",
    "fsk_order": 2, "codebook_budget": 4,
    "n_trials": 3, "master_seed": 5,
    "sweep_param": None, "sweep_values": [],
}


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.setattr(os, "environ", os.environ.copy())
    for name in ("STFSIM_MASTER_SEED", "STFSIM_WORKERS", "STFSIM_OUTPUT_DIR"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "settings.yaml"
    path.write_text(yaml.safe_dump(SMALL))
    return str(path)


class TestValidate:
    def test_valid_config(self, runner, config_file):
        result = runner.invoke(cli, ["validate", "--config", config_file])
        assert result.exit_code == 0
        assert "Configuration OK" in result.output

    def test_invalid_config_exits_2(self, runner, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text(yaml.safe_dump({**SMALL, "T": 1}))
        result = runner.invoke(cli, ["validate", "-c", str(path)])
        assert result.exit_code == 2

    def test_unknown_key_exits_2(self, runner, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text(yaml.safe_dump({**SMALL, "devices": 3}))
        assert runner.invoke(cli, ["validate", "-c", str(path)]).exit_code == 2

    def test_missing_config_file_exits_3(self, runner, tmp_path, monkeypatch):
        monkeypatch.setenv("STFSIM_MASTER_SEED", "5")
        missing = tmp_path / "typo.yaml"

        result = runner.invoke(cli, ["validate", "--config", str(missing)])

        assert result.exit_code == 3
        assert "Configuration OK" not in result.output

    def test_string_dimension_exits_2(self, runner, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text(yaml.safe_dump({**SMALL, "M": "8"}))
        result = runner.invoke(cli, ["validate", "-c", str(path)])
        assert result.exit_code == 2
        assert result.exception is None or isinstance(result.exception, SystemExit)


class TestRun:
    def test_writes_csv(self, runner, config_file, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(cli, ["run", "-c", config_file, "-o", str(out)])

        assert result.exit_code == 0, result.output
        written = out / "results.csv"
        assert str(written) in result.output
        lines = written.read_text().splitlines()
        assert lines[0] == "sweep_value,metric,estimate,ci_lo,ci_hi,n,seed"
        assert any("@SF/indoor" in line for line in lines[1:])

    def test_options_override_config(self, runner, config_file, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(cli, ["run", "-c", config_file, "-o", str(out), "-f", "json", "-n", "2", "-s", "9"])

        assert result.exit_code == 0, result.output
        text = (out / "results.json").read_text()
        assert '"seed": 9' in text
        assert '"n": 4' in text

    def test_plotdata(self, runner, config_file, tmp_path):
        result = runner.invoke(cli, ["run", "-c", config_file, "-o", str(tmp_path), "-f", "plotdata"])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "results.dat").read_text().count("# series") == 2

    def test_unwritable_output_exits_3(self, runner, config_file, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        result = runner.invoke(cli, ["run", "-c", config_file, "-o", str(blocker)])
        assert result.exit_code == 3

    def test_seed_from_environment(self, runner, tmp_path, monkeypatch):
        path = tmp_path / "settings.yaml"
        path.write_text(yaml.safe_dump({k: v for k, v in SMALL.items() if k != "master_seed"}))
        monkeypatch.setenv("STFSIM_OUTPUT_DIR", str(tmp_path / "env_out"))
        monkeypatch.setenv("STFSIM_MASTER_SEED", "17")

        result = runner.invoke(cli, ["run", "-c", str(path)])

        assert result.exit_code == 0, result.output
        assert ",17" in (tmp_path / "env_out" / "results.csv").read_text()

    def test_config_file_layers_over_preset(self, runner, config_file, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(cli, ["run", "--preset", "fig6", "--config", config_file, "-o", str(out)])

        assert result.exit_code == 0, result.output
        lines = (out / "fig6.csv").read_text().splitlines()[1:]
        # seed, modes and sweep come from the file, not the preset
        assert all(line.endswith(",5") for line in lines)
        assert not any("@STF/" in line or "@none/" in line for line in lines)

    def test_preset_with_missing_config_exits_3(self, runner, tmp_path):
        result = runner.invoke(cli, ["run", "-p", "fig6", "-c", str(tmp_path / "nope.yaml")])
        assert result.exit_code == 3


class TestInspection:
    def test_grid_report(self, runner):
        result = runner.invoke(cli, ["grid", "--preset", "fig4"])

        assert result.exit_code == 0, result.output
        assert "STF:" in result.output
        assert "5 slots x 4 subbands" in result.output
        assert "Frame latency:" in result.output
        assert "Guard spectrum:" in result.output
        assert "Pilot overhead:" in result.output

    def test_presets(self, runner):
        result = runner.invoke(cli, ["presets"])
        assert result.exit_code == 0
        for name in ("fig3", "fig4", "fig5", "fig6", "fig7"):
            assert f"{name}:" in result.output

    def test_show_config(self, runner, config_file):
        result = runner.invoke(cli, ["show-config", "-c", config_file])
        assert result.exit_code == 0
        assert "M: 2" in result.output


class TestCodebook:
    def test_gen(self, runner, tmp_path):
        out = tmp_path / "book.yaml"
        result = runner.invoke(cli, ["codebook", "gen", "--q", "4", "--t", "6", "--seed", "3", "--out", str(out)])

        assert result.exit_code == 0, result.output
        book = load_codebook(out)
        assert (book.q, book.t, book.seed) == (4, 6, 3)

    def test_optimize_unitary(self, runner, tmp_path):
        out = tmp_path / "book.yaml"
        result = runner.invoke(cli, [
            "codebook", "optimize", "--q", "4", "--t", "4", "--construction", "unitary", "--source", "haar",
            "--budget", "3", "--seed", "1", "--out", str(out),
        ])

        assert result.exit_code == 0, result.output
        book = load_codebook(out)
        assert book.construction == "unitary"
        assert book.criterion == "max_min_distance"
