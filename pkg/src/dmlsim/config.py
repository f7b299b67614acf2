"""Flat key=value scenario configs: parsing, serialization, presets.

The format is one `key = value` per line with `#` comments. Sparse
coefficient lists are comma-separated `index:value` pairs with 1-based
indices, e.g. `beta_nonzero = 39:1.0, 40:1.0`.
"""

from __future__ import annotations

from .dgp import PRESET_NAMES, ScenarioConfig, paper_scenario
from .errors import ParseError, ValidationError

REQUIRED_KEYS = (
    "n_train",
    "n_holdout",
    "p",
    "c",
    "alpha",
    "sigma_eps",
    "sigma_nu",
    "replications",
    "master_seed",
)

OPTIONAL_KEYS = (
    "beta_nonzero",
    "gamma_nonzero",
    "penalty_method",
    "cross_fit_folds",
    "intercept",
    "naive_selection_includes_d",
)

KNOWN_KEYS = REQUIRED_KEYS + OPTIONAL_KEYS

PRESETS = PRESET_NAMES

_INT_KEYS = {"n_train", "n_holdout", "p", "replications", "master_seed"}
_FLOAT_KEYS = {"c", "alpha", "sigma_eps", "sigma_nu"}
_BOOL_KEYS = {"intercept", "naive_selection_includes_d"}


def _parse_sparse(text: str, key: str, line_no: int) -> tuple[tuple[int, float], ...]:
    entries = []
    if not text.strip():
        return ()
    for chunk in text.split(","):
        chunk = chunk.strip()
        head, sep, tail = chunk.partition(":")
        if not sep:
            raise ParseError(f"{key}: expected index:value, got {chunk!r}", line_no)
        try:
            entries.append((int(head), float(tail)))
        except ValueError:
            raise ParseError(
                f"{key}: bad index:value pair {chunk!r}", line_no
            ) from None
    return tuple(entries)


def _parse_bool(text: str, key: str, line_no: int) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ParseError(f"{key}: expected true/false, got {text!r}", line_no)


def parse_config(text: str) -> ScenarioConfig:
    """Parse flat key=value text into a validated ScenarioConfig.

    Unknown keys are an error rather than a warning, so typos cannot
    silently fall back to defaults.
    """
    values: dict = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError(f"expected key = value, got {raw.strip()!r}", line_no)
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ParseError(f"unknown key {key!r}", line_no)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", line_no)
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _BOOL_KEYS:
                values[key] = _parse_bool(value, key, line_no)
            elif key in ("beta_nonzero", "gamma_nonzero"):
                values[key] = _parse_sparse(value, key, line_no)
            elif key == "penalty_method":
                values[key] = value
            elif key == "cross_fit_folds":
                values[key] = None if value.lower() in ("", "none") else int(value)
        except ParseError:
            raise
        except ValueError:
            raise ParseError(f"{key}: could not parse value {value!r}", line_no) from None
    missing = [key for key in REQUIRED_KEYS if key not in values]
    if missing:
        raise ValidationError(f"missing required keys: {', '.join(missing)}")
    config = ScenarioConfig(**values)
    config.validate()
    return config


def _format_sparse(entries: tuple[tuple[int, float], ...]) -> str:
    return ", ".join(f"{idx}:{value!r}" for idx, value in entries)


def serialize_config(config: ScenarioConfig) -> str:
    """Render a config as parseable key=value text (round-trip safe)."""
    lines = [
        f"n_train = {config.n_train}",
        f"n_holdout = {config.n_holdout}",
        f"p = {config.p}",
        f"c = {config.c!r}",
        f"alpha = {config.alpha!r}",
        f"sigma_eps = {config.sigma_eps!r}",
        f"sigma_nu = {config.sigma_nu!r}",
        f"replications = {config.replications}",
        f"master_seed = {config.master_seed}",
        f"beta_nonzero = {_format_sparse(config.beta_nonzero)}",
        f"gamma_nonzero = {_format_sparse(config.gamma_nonzero)}",
        f"penalty_method = {config.penalty_method}",
        f"cross_fit_folds = {config.cross_fit_folds}",
        f"intercept = {str(config.intercept).lower()}",
        f"naive_selection_includes_d = {str(config.naive_selection_includes_d).lower()}",
    ]
    return "\n".join(lines) + "\n"


def load_preset(name: str) -> ScenarioConfig:
    """Resolve a built-in preset name to its ScenarioConfig."""
    key = name.lower()
    if key not in PRESETS:
        raise ValidationError(
            f"unknown preset {name!r}; available: {', '.join(PRESETS)}"
        )
    return paper_scenario(key)
