# -*- coding: utf-8 -*-
import json

import pytest

from config import RunConfig, get_thread_count, level_preset, roundtrip_preset
from errors import ConfigError


def test_defaults_are_valid():
    config = RunConfig()
    assert config.n == 512
    assert config.h == pytest.approx(2.0 / 512)
    assert config.tail_correction and not config.taper


@pytest.mark.parametrize("changes", [
    {"n": 100},
    {"n": 1},
    {"L": 0.0},
    {"eta": -1.0},
    {"tol_weyl": 0.0},
    {"procedure": "D"},
    {"b_schedule": (2.0, 1.0)},
    {"b_schedule": (1.0,)},
    {"extend_to": -3.0},
    {"extend_mode": "mirror"},
])
def test_invalid_values_raise_config_error(changes):
    with pytest.raises(ConfigError):
        RunConfig(**changes)


def test_json_round_trip_is_canonical():
    config = RunConfig(L=1.5, n=256, b_schedule=[6, 7, 8])
    text = config.to_json()
    assert RunConfig.from_json(text) == config
    assert RunConfig.from_json(text).to_json() == text
    keys = list(json.loads(text))
    assert keys == sorted(keys)
    assert json.loads(text)["b_schedule"] == [6.0, 7.0, 8.0]


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError):
        RunConfig.from_json('{"n": 64, "colour": "blue"}')
    with pytest.raises(ConfigError):
        RunConfig.from_json("[1, 2]")
    with pytest.raises(ConfigError):
        RunConfig.from_json("{not json")


def test_load_from_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text('{"n": 64, "eta": 0.5}', encoding="utf-8")
    config = RunConfig.load(str(path))
    assert config.n == 64 and config.eta == 0.5
    with pytest.raises(FileNotFoundError):
        RunConfig.load(str(tmp_path / "missing.json"))


def test_override_ignores_none():
    config = RunConfig().override(n=128, eta=None)
    assert config.n == 128 and config.eta == 1.0
    with pytest.raises(ConfigError):
        RunConfig().override(n=3)


def test_roundtrip_preset_extends_past_window():
    preset = roundtrip_preset(RunConfig(L=2.0, eta=1.0))
    assert preset.taper
    assert preset.extend_to == pytest.approx(12.0)
    assert preset.b_schedule == pytest.approx((10.0, 11.0, 12.0))

    preset = roundtrip_preset(RunConfig(L=2.0, eta=0.5))
    assert preset.extend_to == pytest.approx(24.0)
    assert preset.b_schedule == pytest.approx((20.0, 22.0, 24.0))


def test_thread_count_from_environment(monkeypatch):
    monkeypatch.setenv("WEYL_THREADS", "4")
    assert get_thread_count() == 4
    monkeypatch.setenv("WEYL_THREADS", "zero")
    with pytest.raises(ConfigError):
        get_thread_count()
    monkeypatch.setenv("WEYL_THREADS", "0")
    with pytest.raises(ConfigError):
        get_thread_count()


def test_level_preset_scales_truncation_with_n():
    base = RunConfig(n=256, a=100.0, nz=1024)
    fine = level_preset(base, 512)
    assert fine.n == 512
    assert fine.a == pytest.approx(200.0) and fine.nz == 2048
    assert fine.a * fine.h == pytest.approx(base.a * base.h)
    assert 2 * fine.a / fine.nz == pytest.approx(2 * base.a / base.nz)
    assert level_preset(base, 256) == base
