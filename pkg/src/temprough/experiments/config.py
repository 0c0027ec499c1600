"""Experiment configuration: defaults, config-file parsing, flag overrides.

Configs are plain key-value text files::

    # comment
    hurst = 0.3, 0.4
    lambda = 1
    steps = 64, 128, 256, 512
    mc = 1000
    seed = 1729

Lists are comma separated.  Command-line flags override file values, which
override per-experiment defaults.  Unknown keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Any, Mapping

from ..errors import ConfigError

__all__ = ["ExperimentConfig", "EXPERIMENTS", "parse_config_file", "build_config"]

EXPERIMENTS = (
    "simulate",
    "levy-convergence",
    "milstein-convergence",
    "signature-features",
    "covariance-check",
    "rho-variation",
)

# keys accepted in config files and their target field
_KEY_TO_FIELD = {
    "hurst": "hurst",
    "lambda": "lam",
    "horizon": "horizon",
    "steps": "resolutions",
    "mc": "n_mc",
    "depth": "depth",
    "seed": "seed",
    "out": "out",
    "fast": "fast",
    "dim": "dim",
    "binary": "binary",
}

_FIELD_TO_KEY = {field: key for key, field in _KEY_TO_FIELD.items()}

_LIST_FLOAT_FIELDS = {"hurst", "lam"}
_LIST_INT_FIELDS = {"resolutions"}
_INT_FIELDS = {"n_mc", "depth", "seed", "dim"}
_FLOAT_FIELDS = {"horizon"}
_BOOL_FIELDS = {"fast", "binary"}

_DEFAULTS: dict[str, dict[str, Any]] = {
    "levy-convergence": dict(
        hurst=(0.3, 0.4, 0.6),
        lam=(0.1, 1.0, 10.0),
        resolutions=(64, 128, 256, 512, 1024, 2048, 4096),
        n_mc=1000,
    ),
    "milstein-convergence": dict(
        hurst=(0.3, 0.4, 0.6, 0.7),
        lam=(1.0,),
        resolutions=(16, 32, 64, 128, 256, 512, 1024),
        n_mc=1000,
    ),
    "signature-features": dict(
        hurst=(0.3, 0.5, 0.7),
        lam=(1.0,),
        resolutions=(256,),
        n_mc=500,
    ),
    "covariance-check": dict(
        hurst=(0.3, 0.4, 0.6, 0.7),
        lam=(0.1, 1.0, 10.0),
        resolutions=(64,),
        n_mc=1,
    ),
    "rho-variation": dict(
        hurst=(0.3, 0.5, 0.7),
        lam=(1.0,),
        resolutions=tuple(range(1, 11)),  # dyadic depths
        n_mc=1,
    ),
    "simulate": dict(
        hurst=(0.5,),
        lam=(1.0,),
        resolutions=(256,),
        n_mc=1,
    ),
}

_FAST_N_MC = 200


@dataclass(frozen=True)
class ExperimentConfig:
    """Full, validated configuration of one experiment run."""

    experiment: str
    hurst: tuple[float, ...]
    lam: tuple[float, ...]
    horizon: float
    resolutions: tuple[int, ...]
    n_mc: int
    depth: int
    seed: int
    out: str | None
    fast: bool
    dim: int
    binary: bool

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}"
            )
        if not self.hurst:
            raise ConfigError("hurst list must be nonempty")
        for h in self.hurst:
            if not 0.0 < h < 1.0:
                raise ConfigError(f"hurst values must lie in (0, 1), got {h}")
        if not self.lam:
            raise ConfigError("lambda list must be nonempty")
        for lam in self.lam:
            if lam <= 0.0:
                raise ConfigError(f"lambda values must be positive, got {lam}")
        if self.horizon <= 0.0:
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if not self.resolutions:
            raise ConfigError("steps list must be nonempty")
        if any(n < 1 for n in self.resolutions):
            raise ConfigError(f"steps must be positive, got {self.resolutions}")
        if list(self.resolutions) != sorted(set(self.resolutions)):
            raise ConfigError(
                f"steps must be strictly increasing, got {self.resolutions}"
            )
        if self.n_mc < 1:
            raise ConfigError(f"mc must be >= 1, got {self.n_mc}")
        if not 1 <= self.depth <= 8:
            raise ConfigError(f"depth must be in 1..8, got {self.depth}")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")
        if self.dim < 1:
            raise ConfigError(f"dim must be >= 1, got {self.dim}")

    def echo_items(self) -> list[tuple[str, str]]:
        """(key, rendered value) pairs in field order, for the CSV `#` header.

        Keys use the config-file vocabulary (`lambda`, `steps`, `mc`), so
        the echoed header doubles as a rerun recipe.
        """
        items = []
        for f in fields(self):
            value = getattr(self, f.name)
            key = _FIELD_TO_KEY.get(f.name, f.name)
            if isinstance(value, tuple):
                rendered = ",".join(_render_scalar(v) for v in value)
            elif value is None:
                rendered = ""
            else:
                rendered = _render_scalar(value)
            items.append((key, rendered))
        return items


def _render_scalar(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(key: str, field_name: str, raw: str) -> Any:
    raw = raw.strip()
    try:
        if field_name in _LIST_FLOAT_FIELDS:
            return tuple(float(part) for part in raw.split(","))
        if field_name in _LIST_INT_FIELDS:
            return tuple(int(part) for part in raw.split(","))
        if field_name in _INT_FIELDS:
            return int(raw)
        if field_name in _FLOAT_FIELDS:
            return float(raw)
        if field_name in _BOOL_FIELDS:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        return raw  # string fields (out)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}") from exc


def parse_config_file(path: str) -> dict[str, Any]:
    """Read `key = value` lines into a field->value dict; strict on keys."""
    overrides: dict[str, Any] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected `key = value`, got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip().lower()
        if key not in _KEY_TO_FIELD:
            raise ConfigError(
                f"{path}:{lineno}: unknown key {key!r}; known keys: "
                + ", ".join(sorted(_KEY_TO_FIELD))
            )
        field_name = _KEY_TO_FIELD[key]
        overrides[field_name] = _parse_value(key, field_name, raw)
    return overrides


def build_config(
    experiment: str,
    file_overrides: Mapping[str, Any] | None = None,
    flag_overrides: Mapping[str, Any] | None = None,
) -> ExperimentConfig:
    """Merge defaults <- config file <- flags into a validated config.

    ``--fast`` lowers n_mc to 200 unless mc was set explicitly by file or
    flag (explicit values always win).
    """
    if experiment not in _DEFAULTS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}"
        )
    merged: dict[str, Any] = dict(
        experiment=experiment,
        horizon=1.0,
        depth=2,
        seed=1729,
        out=None,
        fast=False,
        dim=1,
        binary=False,
    )
    merged.update(_DEFAULTS[experiment])
    explicit_mc = False
    for source in (file_overrides or {}), (flag_overrides or {}):
        for field_name, value in source.items():
            if value is None:
                continue
            if field_name == "n_mc":
                explicit_mc = True
            merged[field_name] = value
    if merged["fast"] and not explicit_mc:
        merged["n_mc"] = _FAST_N_MC
    return ExperimentConfig(**merged)
