"""
Tests for experiment configs, schema validation, power units and runtime settings
"""

import json
import os
from pathlib import Path
from unittest.mock import patch

import pytest

from src.core.config import Settings, load_config, parse_config, serialize_config, with_seed
from src.core.errors import ConfigError
from src.core.models import ExperimentKind, ExperimentSpec, RegionPreset, Scheme
from src.core.units import dbm_to_watts, parse_power, watts_to_dbm

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


class TestUnits:
    def test_dbm(self):
        assert dbm_to_watts(50.0) == pytest.approx(100.0)
        assert dbm_to_watts(-90.0) == pytest.approx(1e-12)
        assert watts_to_dbm(1.0) == pytest.approx(30.0)

    @pytest.mark.parametrize(
        "text, watts",
        [("50 dBm", 100.0), ("-90 dBm", 1e-12), ("20 dBW", 100.0), ("250 mW", 0.25), ("1.5e-3 W", 1.5e-3)],
    )
    def test_parse_power(self, text, watts):
        assert parse_power(text) == pytest.approx(watts)

    def test_plain_number_is_watts(self):
        assert parse_power(3) == 3.0

    def test_unknown_unit(self):
        with pytest.raises(ValueError, match="cannot parse power"):
            parse_power("50 dB")


class TestParseConfig:
    """JSON configs against the schema"""

    def test_empty_is_default(self):
        spec = parse_config("   \n")
        assert spec == ExperimentSpec()
        assert spec.kind == ExperimentKind.CONVERGENCE
        assert spec.schemes == [Scheme.TOMA_OPT, Scheme.UPPER_BOUND]
        assert spec.scenario.radio.tx_power == pytest.approx(100.0)

    def test_power_strings(self):
        spec = parse_config('{"scenario": {"radio": {"tx_power": "50 dBm", "noise_power": "-90 dBm"}}}')
        assert spec.scenario.radio.tx_power == pytest.approx(100.0)
        assert spec.scenario.radio.noise_power == pytest.approx(1e-12)

    def test_sweep_defaults(self):
        spec = parse_config('{"kind": "sweep_rician"}')
        assert spec.sweep_values[-1] == float("inf")
        assert spec.schemes == [Scheme.TOMA_OPT, Scheme.FPA_DENSE]
        assert parse_config('{"kind": "sweep_n"}').schemes == list(Scheme)
        assert parse_config('{"kind": "sweep_m_fixed_budget"}').sweep_values == [1, 2, 4, 8, 16]

    def test_unknown_key_location(self):
        """The error points at the misspelled key"""
        text = '{\n  "kind": "sweep_n",\n  "scenario": {\n    "num_cable": 8\n  }\n}'
        with pytest.raises(ConfigError) as exc_info:
            parse_config(text)
        assert exc_info.value.line == 4
        assert exc_info.value.column == 5
        assert "num_cable" in exc_info.value.detail

    def test_negative_separation(self):
        with pytest.raises(ConfigError, match="min_separation must be non-negative"):
            parse_config('{"scenario": {"min_separation": -0.5}}')

    def test_malformed_json(self):
        with pytest.raises(ConfigError) as exc_info:
            parse_config('{\n  "kind": "sweep_n",\n}')
        assert exc_info.value.line == 3

    def test_top_level_must_be_object(self):
        with pytest.raises(ConfigError):
            parse_config("[1, 2]")

    @pytest.mark.parametrize(
        "text",
        [
            '{"kind": "sweep_n", "sweep_values": [8, 4]}',
            '{"kind": "sweep_m_fixed_budget", "sweep_values": [3]}',
            '{"scenario": {"num_cables": 1, "elements_per_cable": 4, "num_users": 3, "num_eves": 2}}',
            '{"kind": "sweep_rician", "sweep_values": [-1]}',
            '{"schemes": ["toma_opt", "toma_opt"]}',
            '{"scenario": {"seed": -1}}',
            '{"optimizer": {"shrink": 1.5}}',
            '{"kind": "sweep_eves", "sweep_values": [2, 70]}',
            '{"kind": "analyze_theorems", "analysis": {"pair_resolution": 32}}',
            '{"kind": "analyze_theorems", "analysis": {"resolution": 63}}',
            '{"kind": "sweep_sphere_radius", "region_preset": "downward_10"}',
            '{"region_preset": "upward"}',
        ],
    )
    def test_invalid_specs(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_round_trip(self):
        """Serialized configs parse back to the same spec, including infinite Rician factors"""
        spec = parse_config('{"kind": "sweep_rician", "scenario": {"rician_factor": Infinity, "seed": 99}}')
        text = serialize_config(spec)
        assert "Infinity" in text
        assert parse_config(text) == spec

    def test_serialized_is_json(self):
        data = json.loads(serialize_config(ExperimentSpec()))
        assert data["scenario"]["num_cables"] == 8
        assert data["optimizer"]["mc_samples"] == 100


class TestLoadConfig:
    def test_default_without_path(self):
        assert load_config(None) == ExperimentSpec()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "missing.json")

    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.json")), ids=lambda p: p.stem)
    def test_shipped_configs(self, path):
        spec = load_config(path)
        assert path.stem.startswith(spec.kind.value)

    @pytest.mark.parametrize(
        "stem, preset",
        [
            ("sweep_cable_length_downward10", RegionPreset.DOWNWARD_10),
            ("sweep_cable_length_leftward20", RegionPreset.LEFTWARD_20),
        ],
    )
    def test_cable_length_presets(self, stem, preset):
        spec = load_config(CONFIG_DIR / f"{stem}.json")
        assert spec.kind == ExperimentKind.SWEEP_CABLE_LENGTH
        assert spec.region_preset == preset

    def test_fixed_budget_includes_single_cable(self):
        spec = load_config(CONFIG_DIR / "sweep_m_fixed_budget.json")
        assert spec.sweep_values[0] == 1
        assert 1 in load_config(CONFIG_DIR / "sweep_sphere_radius.json").budget_m_values

    def test_seed_override(self):
        spec = with_seed(ExperimentSpec(), 12345)
        assert spec.scenario.seed == 12345
        assert with_seed(spec, None) is spec


class TestSettings:
    def test_defaults(self):
        with patch.dict(os.environ, {}, clear=True):
            settings = Settings()
        assert settings.threads == 1
        assert settings.cache_size == 4096
        assert settings.output_dir == Path("results")
        assert settings.log_dir is None

    def test_environment(self):
        env = {"TOMA_THREADS": "4", "TOMA_CACHE_SIZE": "0", "TOMA_OUTPUT_DIR": "/tmp/out", "TOMA_LOG_LEVEL": "DEBUG"}
        with patch.dict(os.environ, env):
            settings = Settings()
        assert settings.threads == 4
        assert settings.cache_size == 0
        assert settings.output_dir == Path("/tmp/out")
        assert settings.log_level == "DEBUG"
