"""Tests for configuration loading."""

import logging

import pytest

from doctrina.config_loader import DEFAULTS, Config, ConfigurationError, load_config_or_defaults


class TestConfig:
    """Tests for Config."""

    def test_file_values(self, temp_config_dir):
        """Values from the file override the defaults."""
        config = Config(temp_config_dir / "configuration.yaml")
        assert config.get_app_setting("log_level") == "DEBUG"
        assert config.equality_budget() == {"depth": 2, "budget": 500, "fuel": 200}
        assert config.enumeration_limits() == {"hom_size": 3, "max_derivations": 1000}
        assert config.probe_limits() == {"bound": 1, "node_bound": 3}
        assert config.closure_settings() == {"trials": 100, "seed": 7, "exhaustive_length": 4}
        budget = config.search_budget()
        assert (budget.max_depth, budget.max_cut_depth, budget.max_nodes) == (4, 1, 5000)

    def test_untouched_sections_keep_defaults(self, temp_config_dir):
        """Sections missing from the file keep their defaults."""
        config = Config(temp_config_dir / "configuration.yaml")
        assert config.get_section("types") == DEFAULTS["types"]

    def test_defaults_only(self):
        """use_file=False skips the file entirely."""
        config = Config(use_file=False)
        assert config.config_path is None
        assert config.get_budget("rewrite", "fuel") == 5000
        assert config.get_budget("rewrite", "missing", 3) == 3

    def test_missing_file(self, tmp_path):
        """A missing file is a configuration error."""
        with pytest.raises(ConfigurationError):
            Config(tmp_path / "absent.yaml")

    def test_bad_yaml(self, tmp_path):
        """Unparseable YAML is a configuration error."""
        path = tmp_path / "configuration.yaml"
        path.write_text("rewrite: [unclosed\n")
        with pytest.raises(ConfigurationError):
            Config(path)

    def test_section_must_be_mapping(self, tmp_path):
        """Known sections must hold mappings."""
        path = tmp_path / "configuration.yaml"
        path.write_text("search: 3\n")
        with pytest.raises(ConfigurationError):
            Config(path)

    def test_unknown_keys_warn(self, tmp_path, caplog):
        """Unknown sections and settings are ignored with a warning."""
        path = tmp_path / "configuration.yaml"
        path.write_text("colors: {a: 1}\nsearch: {speed: 9}\n")
        with caplog.at_level(logging.WARNING, logger="doctrina.config_loader"):
            config = Config(path)
        assert "colors" in caplog.text
        assert "search.speed" in caplog.text
        assert config.get_section("search") == DEFAULTS["search"]

    def test_unknown_section(self):
        """Asking for an unknown section is an error."""
        with pytest.raises(ConfigurationError):
            Config(use_file=False).get_section("colors")

    def test_explicit_path_or_defaults(self, temp_config_dir):
        """An explicit path is always read."""
        config = load_config_or_defaults(temp_config_dir / "configuration.yaml")
        assert config.get_budget("search", "max_depth") == 4


class TestDirectives:
    """Tests for apply_directives."""

    def test_apply(self):
        """Directives land in their section of a copy."""
        config = Config(use_file=False)
        updated = config.apply_directives({"fuel": 10, "max_nodes": 7})
        assert updated.get_budget("rewrite", "fuel") == 10
        assert updated.get_budget("search", "max_nodes") == 7
        assert config.get_budget("rewrite", "fuel") == 5000

    def test_unknown(self):
        """Unknown directive names are rejected."""
        with pytest.raises(ConfigurationError):
            Config(use_file=False).apply_directives({"speed": 1})
