from __future__ import annotations

import json
import logging
from pathlib import Path

import pytest

from core.pipeline import (
    DEFAULT_TOLERANCES,
    INTEGRALITY_BITS,
    SUITES,
    Case,
    Config,
    ConfigError,
    _run_case,
    run_suite,
)


@pytest.fixture
def config(tmp_path: Path) -> Config:
    return Config(cache_dir=tmp_path / "constants", samples={suite: 2 for suite in SUITES}, height=10)


def test_config_layers_file_then_overrides(tmp_path: Path) -> None:
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"disc": -7, "level": "w", "seed": 3, "samples": {"hecke": 4}}), encoding="utf-8")
    config = Config.from_sources(path, seed=11, precision=None)
    assert config.disc == -7
    assert config.seed == 11
    assert config.samples["hecke"] == 4
    assert config.samples["lseries"] == 5
    config.validate()
    assert config.level_ideal().generator.norm() == 2


def test_config_rejects_bad_input(tmp_path: Path) -> None:
    with pytest.raises(ConfigError):
        Config.from_sources(tmp_path / "missing.json")
    with pytest.raises(ConfigError):
        Config().update({"colour": "blue"})
    with pytest.raises(ConfigError):
        Config(tolerances={"cocycle-relation": 1e-60}).validate()
    with pytest.raises(ConfigError):
        Config(tolerances={"made-up": 1.0}).validate()
    with pytest.raises(ConfigError):
        Config(level="1+x").validate()
    with pytest.raises(ConfigError):
        Config(evaluator="abacus").validate()
    with pytest.raises(ConfigError):
        Config(workers=0).validate()


def test_default_level_does_not_exist_in_every_order() -> None:
    with pytest.raises(ConfigError):
        Config(disc=-7).validate()


def test_integrality_runs_at_raised_precision() -> None:
    config = Config()
    assert config.suite_precision("integrality") == INTEGRALITY_BITS
    assert config.suite_precision("hecke") == config.precision
    assert config.minimum_tolerance(INTEGRALITY_BITS) < DEFAULT_TOLERANCES["integrality"]
    assert set(config.echo()) >= {"disc", "level", "precision", "seed", "cache_dir"}


def test_failing_case_is_recorded_not_raised(caplog: pytest.LogCaptureFixture) -> None:
    def explode() -> float:
        raise ArithmeticError("no convergence")

    with caplog.at_level(logging.ERROR, logger="core.pipeline"):
        result = _run_case(0, Case({"A": "I"}, explode), 1e-20)
    assert not result.passed
    assert result.residual is None
    assert result.error == "ArithmeticError: no convergence"
    assert "Case 0 failed" in caplog.text
    assert _run_case(1, Case({}, lambda: 0.5, tolerance=1.0), 1e-20).passed


@pytest.mark.parametrize("suite", ["homomorphism", "cocycle-relation", "phi-n-consistency"])
def test_small_suites_pass(config: Config, suite: str) -> None:
    config.pq_per_pair = 1
    report = run_suite(suite, config)
    assert report.passed, report.failing
    assert len(report.cases) >= 2
    assert report.max_residual is not None and report.max_residual <= report.tolerance
    document = json.loads(json.dumps(report.to_json()))
    assert document["suite"] == suite
    assert document["environment"]["precision"] == config.precision
    assert document["failing"] == []


def test_reports_are_reproducible(config: Config) -> None:
    first = run_suite("homomorphism", config)
    second = run_suite("homomorphism", config)
    assert [case.inputs for case in first.cases] == [case.inputs for case in second.cases]


def test_parallel_workers_keep_submission_order(config: Config) -> None:
    serial = run_suite("homomorphism", config)
    config.workers = 3
    parallel = run_suite("homomorphism", config)
    assert [case.inputs for case in serial.cases] == [case.inputs for case in parallel.cases]
    assert [case.index for case in parallel.cases] == list(range(len(parallel.cases)))


def test_unknown_suite(config: Config) -> None:
    with pytest.raises(ConfigError):
        run_suite("everything", config)
