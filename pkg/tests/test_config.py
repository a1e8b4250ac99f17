import pytest

from coxtet.config import CACHE_ENV_VAR, EngineConfig


def test_defaults():
    config = EngineConfig(cache_dir="/tmp/coxtet")
    assert (config.max_label, config.max_tiles) == (10, 64)
    assert (config.tol_signature, config.tol_volume) == (1e-9, 1e-6)
    assert config.dps == 64


def test_from_env(monkeypatch, tmp_path):
    monkeypatch.setenv(CACHE_ENV_VAR, str(tmp_path))
    assert EngineConfig.from_env().cache_dir == str(tmp_path)


def test_overrides_skip_none():
    config = EngineConfig(cache_dir="/tmp/coxtet").with_overrides(max_tiles=24, seed=None)
    assert config.max_tiles == 24
    assert config.seed == 0


def test_fingerprint_ignores_jobs_and_cache_location():
    first = EngineConfig(cache_dir="/tmp/a")
    assert first.fingerprint() == first.with_overrides(jobs=4, cache_dir="/tmp/b").fingerprint()
    assert first.fingerprint() != first.with_overrides(max_tiles=32).fingerprint()
    assert len(first.fingerprint()) == 16


@pytest.mark.parametrize("overrides", [{"max_label": 5}, {"max_tiles": 0}, {"jobs": 0}, {"tol_volume": 0.0}])
def test_invalid_settings(overrides):
    with pytest.raises(ValueError):
        EngineConfig(cache_dir="/tmp/coxtet", **overrides)
