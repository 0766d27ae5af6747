try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from typing import Any, Mapping, Optional

from frailz.constants import DEFAULT_REPLICATES, DEFAULT_SEED, OUTLIER_THRESHOLD
from frailz.errors import ConfigError
from frailz.model.FrailtyFit import ThetaMode
from frailz.utils.utils import resolve_threads


def load_config(path: Optional[str]) -> dict:
    """Parse a TOML config file; None gives an empty config."""
    if not path:
        return {}
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e


class Defaults:
    """
    Run settings resolved as command line > config file > environment > built-in.

    The environment only takes part for the thread count (FRAILZ_THREADS).
    """

    def __init__(
        self,
        args=None,
        config: Optional[Mapping[str, Any]] = None,
        seed: int = DEFAULT_SEED,
        threshold: float = OUTLIER_THRESHOLD,
        replicates: int = DEFAULT_REPLICATES,
        theta_mode: str = "profile",
    ):
        self.args = args
        self.config = dict(config or {})
        self._seed = seed
        self._threshold = threshold
        self._replicates = replicates
        self._theta_mode = theta_mode

        self.debug = bool(getattr(args, "debug", False))
        self.quiet = bool(getattr(args, "quiet", False))

    def _resolve(self, arg_name: str, config_key: str, builtin: Any) -> Any:
        value = getattr(self.args, arg_name, None) if self.args is not None else None
        if value is not None:
            return value
        if config_key in self.config:
            return self.config[config_key]
        return builtin

    @property
    def seed(self) -> int:
        value = self._resolve("seed", "seed", self._seed)
        try:
            seed = int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"seed must be an integer, got {value!r}") from None
        if seed < 0:
            raise ConfigError(f"seed must be >= 0, got {seed}")
        return seed

    @property
    def threads(self) -> int:
        return resolve_threads(self._resolve("threads", "threads", None))

    @property
    def threshold(self) -> float:
        value = float(self._resolve("threshold", "threshold", self._threshold))
        if not value > 0:
            raise ConfigError(f"threshold must be > 0, got {value}")
        return value

    @property
    def replicates(self) -> int:
        value = int(self._resolve("replicates", "replicates", self._replicates))
        if value < 1:
            raise ConfigError(f"replicates must be >= 1, got {value}")
        return value

    @property
    def theta_mode(self) -> ThetaMode:
        try:
            return ThetaMode.parse(self._resolve("theta", "theta", self._theta_mode))
        except ValueError as e:
            raise ConfigError(str(e)) from e

    @property
    def progress(self) -> bool:
        return not self.quiet

    def snapshot(self) -> dict:
        """Resolved values, as recorded in run manifests."""
        return {
            "seed": self.seed,
            "threads": self.threads,
            "threshold": self.threshold,
            "replicates": self.replicates,
            "theta": str(self.theta_mode),
        }
