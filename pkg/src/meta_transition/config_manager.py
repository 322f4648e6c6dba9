"""Configuration management for meta-transition."""

import copy
import os
import logging
from typing import Dict, Any, Optional, Tuple

import yaml

from .errors import InvalidConfigError
from .logging_config import setup_logging

OUTPUT_DIR_ENV = "META_TRANSITION_OUTPUT_DIR"
DEFAULT_CONFIG_FILE = "config.yml"

DEFAULT_CONFIG: Dict[str, Any] = {
    'logging': {
        'level': 'INFO',
        'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        'file': None,
    },
    'data': {
        'classes': 3,
        'dim': 2,
        'radius': 2.5,
        'std': 1.0,
        'per_class': 3020,
        'n_train': 6000,
        'n_meta': 60,
        'n_test': 3000,
    },
    'model': {
        'hidden_dims': [32, 32],
        'init_scale': 0.3,
    },
    'baselines': {
        'lr': 0.1,
        'epochs': 20,
        'batch_size': 100,
        'finetune_lr': 0.05,
        'finetune_epochs': 20,
        'smodel_lr_theta': None,
        'retrain_from_scratch': True,
    },
    'meta': {
        'alpha': 0.1,
        'beta': None,
        'batch_size': 100,
        'meta_batch_size': 30,
        'iterations': 1200,
        'init_source': 'glc',
        'hypergrad_mode': 'exact',
        'fd_epsilon': 1e-4,
        'log_interval': 100,
        'divergence_threshold': 1e6,
    },
    'evaluation': {
        'delta': 0.05,
        'eps': 1e-12,
    },
    'sweep': {
        'workers': 1,
        'show_progress': True,
    },
    'processing': {
        'enable_timing': True,
    },
    'output': {
        'dir': 'runs',
    },
}


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Return ``base`` with ``override`` merged in, recursing into dicts."""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


class ConfigManager:
    """Manages configuration loading and typed access to its sections."""

    def __init__(self, config_path: Optional[str] = None,
                 configure_logging: bool = True):
        """Initialize the configuration manager.

        Args:
            config_path: Path to the configuration file. When None,
                ``config.yml`` in the working directory is used if present,
                otherwise the built-in defaults.
            configure_logging: Set up logging from the loaded config
        """
        self.config_path = config_path
        self.config = deep_merge(DEFAULT_CONFIG, self._load_config())
        if configure_logging:
            setup_logging(self.config)
        self.logger = logging.getLogger(__name__)
        self.logger.debug("Configuration loaded from %s", self.config_path or "defaults")

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from YAML file.

        Returns:
            Configuration dictionary (empty when falling back to defaults)

        Raises:
            FileNotFoundError: If an explicit config file doesn't exist
            yaml.YAMLError: If config file is invalid
        """
        path = self.config_path
        if path is None:
            if not os.path.exists(DEFAULT_CONFIG_FILE):
                return {}
            path = DEFAULT_CONFIG_FILE
            self.config_path = path
        try:
            with open(path, 'r', encoding='utf-8') as file:
                config = yaml.safe_load(file) or {}
        except FileNotFoundError:
            raise FileNotFoundError(f"Configuration file not found: {path}")
        except yaml.YAMLError as e:
            raise yaml.YAMLError(f"Error parsing configuration file: {e}")
        if not isinstance(config, dict):
            raise InvalidConfigError(f"Configuration root must be a mapping: {path}")
        return config

    def section(self, name: str) -> Dict[str, Any]:
        return self.config.get(name) or {}

    def get_mixture_spec(self, per_class: Optional[int] = None):
        """Build the Gaussian-mixture spec from the ``data`` section."""
        from .data.mixture import MixtureSpec

        data = self.section('data')
        return MixtureSpec.on_circle(
            num_classes=int(data['classes']),
            dim=int(data['dim']),
            radius=float(data['radius']),
            std=float(data['std']),
            per_class=int(per_class if per_class is not None else data['per_class']),
        )

    def get_split_counts(self) -> Tuple[Optional[int], int, int]:
        """Get (n_train, n_meta, n_test); n_train None means all remaining rows."""
        data = self.section('data')
        n_train = data.get('n_train')
        return (
            None if n_train is None else int(n_train),
            int(data.get('n_meta', 0)),
            int(data.get('n_test', 0)),
        )

    def get_mlp_config(self):
        """Get the classifier architecture settings."""
        from .model.classifier import MlpConfig

        model = self.section('model')
        return MlpConfig(
            hidden_dims=tuple(int(d) for d in model.get('hidden_dims', ())),
            init_scale=float(model.get('init_scale', 0.3)),
        )

    def get_baseline_config(self):
        """Get the baseline training settings."""
        from .estimators.baselines import BaselineConfig

        return BaselineConfig.from_dict(self.section('baselines'))

    def get_train_config(self, seed: int = 0, **overrides: Any):
        """Get the meta-adaptation settings for one run.

        Args:
            seed: Run seed
            **overrides: Field overrides, ``None`` values are ignored

        Returns:
            TrainConfig
        """
        from .training.meta_trainer import TrainConfig

        values = dict(self.section('meta'))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return TrainConfig.from_dict(values, seed=seed)

    def get_evaluation_config(self) -> Dict[str, float]:
        evaluation = self.section('evaluation')
        return {
            'delta': float(evaluation.get('delta', 0.05)),
            'eps': float(evaluation.get('eps', 1e-12)),
        }

    def get_sweep_config(self) -> Dict[str, Any]:
        """Get sweep worker settings."""
        sweep = self.section('sweep')
        workers = int(sweep.get('workers', 1))
        if workers < 1:
            raise InvalidConfigError(f"sweep.workers must be >= 1, got {workers}")
        return {
            'workers': workers,
            'show_progress': bool(sweep.get('show_progress', True)),
        }

    def is_timing_enabled(self) -> bool:
        """Check if wall-time measurement is enabled."""
        return bool(self.section('processing').get('enable_timing', True))

    def get_output_dir(self) -> str:
        """Get the output directory; the environment variable wins over config."""
        env_dir = os.environ.get(OUTPUT_DIR_ENV)
        if env_dir:
            return env_dir
        return str(self.section('output').get('dir', 'runs'))
