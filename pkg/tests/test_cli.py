# Copyright (c) 2023-2024 DepGSA developers
# MIT License

import os
import json
import logging

import pytest

from depgsa.analysis import RunConfig, run
from depgsa.cli import (EXIT_CONFIG, EXIT_DEGENERATE, EXIT_EVALUATION,
                        EXIT_OK, main, validate_config)
from depgsa.configs.manager import ConfigManager
from depgsa.configs.presets import PRESET_SUBSETS
from depgsa.models import ExpressionModel
from depgsa.utils.io import csv_to_dataframe, json_load


@pytest.fixture
def quiet_configs():
    """Configurations that log nowhere, so the CLI leaves no handlers."""
    configs = ConfigManager()
    configs.setn("logging/stream", "")
    yield configs
    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler, logging.FileHandler):
            handler.close()
            root.removeHandler(handler)


def test_validate_config(custom_config_text):
    config = validate_config(custom_config_text)
    assert isinstance(config, RunConfig)
    assert config.prefix == "custom"


def test_validate_config_lists_all_errors(custom_config):
    custom_config["sampling"]["m"] = 10
    custom_config["subsets"]["list"] = [[12]]
    errors = validate_config(json.dumps(custom_config))
    assert isinstance(errors, list)
    assert len(errors) == 2
    assert any("sampling/m" in e for e in errors)
    assert any("subsets/list" in e for e in errors)
    errors = validate_config('{"model": {}}')
    assert len(errors) == 1 and "schema" in errors[0]


def test_dry_run(quiet_configs, tmp_path):
    code = main(["--preset", "gsobol", "--dry-run", "-o", str(tmp_path)],
                configs=quiet_configs)
    assert code == EXIT_OK
    assert list(tmp_path.iterdir()) == []


def test_missing_config(quiet_configs, tmp_path):
    code = main(["-c", str(tmp_path / "missing.conf")],
                configs=quiet_configs)
    assert code == EXIT_CONFIG
    assert main([], configs=quiet_configs) == EXIT_CONFIG


def test_bad_json(quiet_configs, tmp_path):
    userconfig = tmp_path / "bad.json"
    userconfig.write_text('{"schema": "depgsa/1", "sampling": ')
    assert main(["-c", str(userconfig)], configs=quiet_configs) == \
        EXIT_CONFIG


def test_invalid_config(quiet_configs, custom_config, tmp_path):
    custom_config["model"]["expressions"] = ["x1 + foo(x2)"]
    userconfig = tmp_path / "run.json"
    userconfig.write_text(json.dumps(custom_config))
    assert main(["-c", str(userconfig)], configs=quiet_configs) == \
        EXIT_CONFIG


def test_preset_run(quiet_configs, tmp_path):
    outdir = tmp_path / "out"
    argv = ["--preset", "linear", "--m", "1024", "-o", str(outdir),
            "--seed", "3"]
    assert main(argv, configs=quiet_configs) == EXIT_OK
    df, comments = csv_to_dataframe(str(outdir / "depgsa-indices.csv"))
    assert "model: linear" in comments
    assert set(df["index_family"]) == {"dS", "dGSI1", "dGSI2"}
    assert len(df) == 6 * 6
    data = json_load(str(outdir / "depgsa-indices.json"))
    assert len(data["indices"]) == 6
    audit = json_load(str(outdir / "depgsa-audit.json"))
    assert audit["R_min"] == 3
    assert audit["config"]["seed"] == 3
    assert "1:2" in audit["analytic"]
    # existing outputs are kept unless --clobber
    assert main(argv, configs=quiet_configs) == EXIT_CONFIG
    assert main(argv + ["--clobber"], configs=quiet_configs) == EXIT_OK


def test_custom_run(quiet_configs, custom_config, tmp_path):
    custom_config["model"]["dim"] = 5
    custom_config["output"]["dir"] = "results"
    userconfig = tmp_path / "run.json"
    userconfig.write_text(json.dumps(custom_config))
    argv = ["-c", str(userconfig), "--format", "csv",
            "--subsets", "1;2,3;4,5", "-L", str(tmp_path / "run.log")]
    assert main(argv, configs=quiet_configs) == EXIT_OK
    # relative output directory next to the configuration file
    df, comments = csv_to_dataframe(
        str(tmp_path / "results" / "custom-indices.csv"))
    assert list(df["subset"].unique()) == ["1", "2:3", "4:5"]
    assert not (tmp_path / "results" / "custom-indices.json").exists()
    assert "Wrote" in (tmp_path / "run.log").read_text()


def test_degenerate_output(quiet_configs, custom_config, tmp_path):
    custom_config["model"]["dim"] = 5
    custom_config["model"]["expressions"] = ["0*x1 + 1"]
    userconfig = tmp_path / "run.json"
    userconfig.write_text(json.dumps(custom_config))
    assert main(["-c", str(userconfig)], configs=quiet_configs) == \
        EXIT_DEGENERATE


def test_model_evaluation_failure(quiet_configs, custom_config, tmp_path):
    # x4 + x5 <= 1 on the simplex, so log(x4 + x5 - 1) is undefined
    custom_config["model"]["dim"] = 5
    custom_config["model"]["expressions"] = ["log(x4 + x5 - 1)"]
    userconfig = tmp_path / "run.json"
    userconfig.write_text(json.dumps(custom_config))
    assert main(["-c", str(userconfig)], configs=quiet_configs) == \
        EXIT_EVALUATION


def test_run_api(linear_model, tmp_path):
    structure = linear_model.structure()
    model = ExpressionModel(["x1 + x2 + x3", "x1 - x3"], dim=3)
    config = RunConfig(model, structure, [(1,), (2, 3)], m=512, M=2048,
                       generator="prng", seed=11, sigma="pooled",
                       outdir=str(tmp_path), fmt="json")
    result = run(config)
    assert result.report is not None
    assert len(result.report) == 2
    entry = result.report[(2, 3)]
    # the pooled covariance uses the rows of every representation
    assert entry.m == 512
    assert entry.M == len(result.table.labels) * 2048
    assert [os.path.basename(f) for f in result.files] == \
        ["depgsa-indices.json", "depgsa-audit.json"]
    dry = run(config, dry_run=True)
    assert dry.report is None
    assert dry.audit["representations_built"] == len(result.table.labels)


def test_gsobol_representation_audit(gsobol_model, tmp_path):
    structure = gsobol_model.structure()
    singletons = [(i,) for i in range(1, 11)]
    config = RunConfig(gsobol_model, structure, singletons, m=1024,
                       outdir=str(tmp_path))
    audit = run(config, dry_run=True).audit
    assert audit["R_min"] == 6
    assert audit["representations_built"] == 3
    config = RunConfig(gsobol_model, structure, PRESET_SUBSETS["gsobol"],
                       m=1024, outdir=str(tmp_path))
    assert run(config, dry_run=True).audit["representations_built"] == 6
