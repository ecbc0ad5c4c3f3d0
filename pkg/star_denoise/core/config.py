import json
import os

from pathlib import Path
from typing import Any, Callable, Dict

from .errors import ParamError

# Solver defaults
DEFAULT_RANK = 9
DEFAULT_PATCH = 9
DEFAULT_STRIDE = 6
DEFAULT_TOL = 1e-4
DEFAULT_MAX_ITERS = 100
CLASSICAL_INNER_ITERS = 10
UNROLLED_INNER_ITERS = 1
DEFAULT_STAGES = 9
PARAM_INIT = 0.02
LIPSCHITZ_SAFETY = 1.05
POWER_ITERS = 50
LIPSCHITZ_FLOOR = 1e-6
LIPSCHITZ_SEED = 0
DEFAULT_TNN = "tsvd"
DEFAULT_A_SOURCE = "residual"
LOG_LEVEL = "INFO"

# Metrics
PSNR_CAP = 120.0
MSE_FLOOR = 10.0 ** (-PSNR_CAP / 10.0)

# Noise simulation
DEFAULT_SIGMA_LADDER = (10.0, 30.0, 50.0, 70.0)

HOME_ENV = "STAR_DENOISE_HOME"

TNN_CHOICES = ("tsvd", "mode3-unfold")
A_SOURCE_CHOICES = ("residual", "observed")
LOG_LEVEL_CHOICES = ("DEBUG", "INFO", "WARNING", "ERROR")


def _choice(options) -> Callable[[str], str]:
    def coerce(value: str) -> str:
        if value not in options:
            raise ParamError(f"expected one of {', '.join(options)}, got {value!r}")
        return value

    return coerce


def _positive_int(value: Any) -> int:
    number = int(value)
    if number < 1:
        raise ParamError(f"expected a positive integer, got {value!r}")
    return number


def _positive_float(value: Any) -> float:
    number = float(value)
    if not number > 0:
        raise ParamError(f"expected a positive number, got {value!r}")
    return number


# Types accepted by `config set`
CONFIG_KEYS: Dict[str, Callable[[Any], Any]] = {
    "rank": _positive_int,
    "patch": _positive_int,
    "stride": _positive_int,
    "tol": _positive_float,
    "max_iters": _positive_int,
    "inner_iters": _positive_int,
    "threads": _positive_int,
    "tnn": _choice(TNN_CHOICES),
    "a_block_source": _choice(A_SOURCE_CHOICES),
    "log_level": lambda v: _choice(LOG_LEVEL_CHOICES)(str(v).upper()),
}


def default_threads() -> int:
    return os.cpu_count() or 1


class ConfigManager:
    def __init__(self, config_dir: Path = None):
        if config_dir is None:
            config_dir = Path(
                os.getenv(HOME_ENV, str(Path.home() / ".star-denoise"))
            ).expanduser()
        self.config_dir = Path(config_dir)
        self.config_file = self.config_dir / "config.json"
        self._config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from file"""
        config = self._get_default_config()
        if self.config_file.exists():
            try:
                with open(self.config_file) as f:
                    stored = json.load(f)
                if isinstance(stored, dict):
                    config.update(stored)
            except (json.JSONDecodeError, IOError):
                pass
        return config

    def _get_default_config(self) -> Dict[str, Any]:
        """Get default configuration"""
        return {
            "rank": DEFAULT_RANK,
            "patch": DEFAULT_PATCH,
            "stride": DEFAULT_STRIDE,
            "tol": DEFAULT_TOL,
            "max_iters": DEFAULT_MAX_ITERS,
            "inner_iters": CLASSICAL_INNER_ITERS,
            "threads": default_threads(),
            "tnn": DEFAULT_TNN,
            "a_block_source": DEFAULT_A_SOURCE,
            "log_level": LOG_LEVEL,
        }

    def _save_config(self):
        """Save configuration to file"""
        try:
            self.config_dir.mkdir(parents=True, exist_ok=True)
            with open(self.config_file, "w") as f:
                json.dump(self._config, f, indent=2)
        except IOError:
            pass

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value"""
        return self._config.get(key, default)

    def set(self, key: str, value: Any):
        """Set configuration value, coercing it to the key's type"""
        if key not in CONFIG_KEYS:
            raise ParamError(
                f"unknown config key {key!r}; known keys: {', '.join(CONFIG_KEYS)}"
            )
        try:
            self._config[key] = CONFIG_KEYS[key](value)
        except (TypeError, ValueError) as e:
            if isinstance(e, ParamError):
                raise
            raise ParamError(f"invalid value for {key}: {value!r}") from e
        self._save_config()

    def get_all(self) -> Dict[str, Any]:
        """Get all configuration values"""
        return self._config.copy()

    def reset(self):
        """Reset configuration to defaults"""
        self._config = self._get_default_config()
        self._save_config()
