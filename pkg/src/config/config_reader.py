"""
Configuration Reader for the Fall Detection Toolkit

Loads and validates configuration from YAML file, with environment
variable overrides of the form FALLDET_<SECTION>__<KEY>.
"""

import os
import yaml
import logging
from typing import Dict, Any, Optional, Mapping
from pathlib import Path


ENV_PREFIX = "FALLDET_"


class ConfigReader:
    """Handles loading and validation of configuration."""

    def __init__(self, config_path: Optional[str] = None,
                 environ: Optional[Mapping[str, str]] = None):
        """
        Initialize the configuration reader.

        Args:
            config_path: Path to configuration file. If not provided,
                        looks for config.yml in the project root.
            environ: Environment mapping used for overrides (defaults to os.environ)
        """
        self.logger = logging.getLogger(__name__)

        if config_path is None:
            # Look for config.yml in project root
            project_root = Path(__file__).parent.parent.parent
            config_path = project_root / "config.yml"

        self.config_path = Path(config_path)
        self._environ = os.environ if environ is None else environ
        self.config = self._load_config()
        self._apply_env_overrides()
        self._validate_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from YAML file."""
        if not self.config_path.exists():
            raise FileNotFoundError(
                f"Configuration file not found: {self.config_path}\n"
                f"Please ensure config.yml exists and is properly configured."
            )

        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                config = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ValueError(f"Invalid YAML in configuration file: {e}")
        except OSError as e:
            raise ValueError(f"Error loading configuration: {e}")

        if config is None:
            raise ValueError("Configuration file is empty")
        if not isinstance(config, dict):
            raise ValueError("Configuration root must be a mapping")

        return config

    def _apply_env_overrides(self):
        """Apply FALLDET_<SECTION>__<KEY> environment overrides."""
        for name, raw in self._environ.items():
            if not name.startswith(ENV_PREFIX) or "__" not in name:
                continue
            section, _, key = name[len(ENV_PREFIX):].partition("__")
            section, key = section.lower(), key.lower()
            if not section or not key:
                continue
            try:
                value = yaml.safe_load(raw)
            except yaml.YAMLError:
                value = raw
            self.config.setdefault(section, {})
            if not isinstance(self.config[section], dict):
                raise ValueError(f"Cannot override '{name}': section '{section}' is not a mapping")
            self.config[section][key] = value
            self.logger.debug(f"Config override from environment: {section}.{key}")

    def _validate_config(self):
        """Validate the configuration structure and required fields."""
        required_sections = ['features', 'classifiers', 'evaluation', 'gateway']

        for section in required_sections:
            if section not in self.config:
                raise ValueError(f"Missing required configuration section: {section}")

        features = self.config['features']
        if not features.get('enabled'):
            raise ValueError("Missing 'enabled' in features configuration")

        evaluation = self.config['evaluation']
        fraction = evaluation.get('train_fraction', 0.7)
        if not 0 < float(fraction) < 1:
            raise ValueError(f"evaluation.train_fraction must be in (0, 1), got {fraction}")
        if int(evaluation.get('folds', 5)) < 1:
            raise ValueError("evaluation.folds must be at least 1")

        gateway = self.config['gateway']
        window = float(gateway.get('window_length', 3.0))
        stride = float(gateway.get('stride', 0.5))
        if not 0 < stride <= window:
            raise ValueError(f"gateway stride must satisfy 0 < stride <= window_length ({stride}, {window})")
        if float(gateway.get('debounce', 10.0)) < 0:
            raise ValueError("gateway.debounce must be non-negative")

    def get_dataset_settings(self) -> Dict[str, Any]:
        """Get dataset settings (extra fall activities, units)."""
        return self.config.get('dataset', {
            'fall_activities': [],
            'units': 'm/s^2'
        })

    def get_feature_settings(self) -> Dict[str, Any]:
        """
        Get feature extraction settings.

        Returns:
            Dictionary with 'enabled' extractor names and 'wavelet' settings
        """
        settings = dict(self.config['features'])
        settings.setdefault('wavelet', {})
        settings['wavelet'] = {
            'family': 'bior2.2',
            'scale': 250.0,
            'resolution': 1024,
            **settings['wavelet'],
        }
        return settings

    def get_classifier_settings(self) -> Dict[str, Any]:
        """Get classifier settings, including presets."""
        return {
            'knn_k': 5,
            'enn_e': 5,
            'bdt': True,
            'presets': {
                'feature_sweep': {'knn_k': 3, 'enn_e': 3},
                'comparison': {'knn_k': 5, 'enn_e': 5},
            },
            **self.config['classifiers'],
        }

    def get_preset(self, name: str) -> Dict[str, Any]:
        """
        Get a named neighbor-count preset.

        Raises:
            ValueError: If preset not found
        """
        presets = self.get_classifier_settings()['presets']
        if name not in presets:
            raise ValueError(
                f"Preset '{name}' not found. "
                f"Available presets: {', '.join(presets)}"
            )
        return presets[name]

    def get_evaluation_settings(self) -> Dict[str, Any]:
        """Get evaluation protocol settings."""
        return {
            'train_fraction': 0.7,
            'folds': 5,
            'seed': 0,
            'rounding': 'half_up',
            'threads': 1,
            'report_timing': True,
            **self.config['evaluation'],
        }

    def get_gateway_settings(self) -> Dict[str, Any]:
        """Get streaming gateway settings."""
        return {
            'window_length': 3.0,
            'stride': 0.5,
            'debounce': 10.0,
            'listen': '-',
            'alert_address': None,
            'queue_size': 8,
            'model_path': None,
            **self.config['gateway'],
        }

    def get_output_settings(self) -> Dict[str, Any]:
        """Get report output settings."""
        return self.config.get('output', {
            'format': 'text',
            'pretty_print': True
        })

    def get_logging_settings(self) -> Dict[str, Any]:
        """Get logging settings from configuration."""
        return self.config.get('logging', {
            'level': 'INFO'
        })

    def reload(self):
        """Reload configuration from file."""
        self.config = self._load_config()
        self._apply_env_overrides()
        self._validate_config()
        self.logger.info("Configuration reloaded successfully")


# Singleton instance
_config_reader = None

def get_config_reader(config_path: Optional[str] = None) -> ConfigReader:
    """
    Get the singleton ConfigReader instance.

    Args:
        config_path: Path to configuration file (only used on first call)

    Returns:
        ConfigReader instance
    """
    global _config_reader
    if _config_reader is None:
        _config_reader = ConfigReader(config_path)
    return _config_reader


def reset_config_reader():
    """Drop the singleton so the next get_config_reader() re-reads the file."""
    global _config_reader
    _config_reader = None
