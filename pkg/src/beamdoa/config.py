"""Flat ``key=value`` run configuration.

Blank lines and ``#`` comments are ignored. Omitted keys take their
defaults; unknown keys are reported with a warning and otherwise ignored.
List values are comma separated (``snr=0,5,10,15``), interval values are
``lo,hi``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

from .array_model import ArrayGeometry
from .augmentation import AugmentationConfig
from .errors import InvalidArgumentError
from .mlp import INPUT_NORMS, PLACEMENTS, TrainHyper

log = logging.getLogger(__name__)


class ConfigError(InvalidArgumentError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class RunConfig:
    geom: ArrayGeometry = field(default_factory=ArrayGeometry)
    full_beams: int = 64
    beams: int = 8
    b_list: tuple[int, ...] = (3, 4, 6, 8, 12, 16)
    grid_step: float = 0.25
    alpha_step: float = 1.0
    samples_per_beam: int = 512
    scan_snr_db: float = 40.0
    hyper: TrainHyper = field(default_factory=TrainHyper)
    aug: AugmentationConfig = field(default_factory=AugmentationConfig)
    snr_list: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0)
    trials: int = 20
    seed: int = 0
    out_dir: str = "out"
    jobs: int = 1


def _float(s: str) -> float:
    return float(s)


def _int(s: str) -> int:
    v = float(s)
    if not v.is_integer():
        raise ValueError(f"expected an integer, got {s!r}")
    return int(v)


def _floats(s: str) -> tuple[float, ...]:
    vals = tuple(float(t) for t in s.split(",") if t.strip())
    if not vals:
        raise ValueError("empty list")
    return vals


def _ints(s: str) -> tuple[int, ...]:
    vals = tuple(_int(t) for t in s.split(",") if t.strip())
    if not vals:
        raise ValueError("empty list")
    return vals


def _pair(parse):
    def inner(s: str):
        parts = [t for t in s.split(",") if t.strip()]
        if len(parts) != 2:
            raise ValueError(f"expected 'lo,hi', got {s!r}")
        return (parse(parts[0]), parse(parts[1]))
    return inner


def _choice(options):
    def inner(s: str) -> str:
        s = s.strip()
        if s not in options:
            raise ValueError(f"expected one of {options}, got {s!r}")
        return s
    return inner


def _positive(v):
    return v > 0


# key -> (group, attribute, parser, check, requirement text)
KEYS: dict[str, tuple[str, str, Callable[[str], Any], Callable[[Any], bool] | None, str]] = {
    "num_elements": ("geom", "num_elements", _int, lambda v: v >= 1, "must be >= 1"),
    "spacing": ("geom", "element_spacing", _float, _positive, "must be > 0"),
    "scan_min": ("geom", "scan_min", _float, math.isfinite, "must be finite"),
    "scan_max": ("geom", "scan_max", _float, math.isfinite, "must be finite"),
    "full_beams": ("run", "full_beams", _int, lambda v: v >= 2, "must be >= 2"),
    "beams": ("run", "beams", _int, lambda v: v >= 2, "must be >= 2"),
    "b_list": ("run", "b_list", _ints, lambda v: all(b >= 2 for b in v), "entries must be >= 2"),
    "grid_step": ("run", "grid_step", _float, _positive, "must be > 0"),
    "alpha_step": ("run", "alpha_step", _float, _positive, "must be > 0"),
    "samples_per_beam": ("run", "samples_per_beam", _int, _positive, "must be >= 1"),
    "scan_snr": ("run", "scan_snr_db", _float, lambda v: not math.isnan(v), "must be a number"),
    "snr": ("run", "snr_list", _floats, lambda v: not any(map(math.isnan, v)), "must be numbers"),
    "trials": ("run", "trials", _int, _positive, "must be >= 1"),
    "seed": ("run", "seed", _int, lambda v: v >= 0, "must be >= 0"),
    "out": ("run", "out_dir", str.strip, bool, "must be non-empty"),
    "jobs": ("run", "jobs", _int, _positive, "must be >= 1"),
    "hidden": ("hyper", "hidden_dim", _int, lambda v: v >= 2, "must be >= 2"),
    "batch_size": ("hyper", "batch_size", _int, _positive, "must be >= 1"),
    "iters": ("hyper", "total_iters", _int, lambda v: v >= 0, "must be >= 0"),
    "lr_start": ("hyper", "lr_start", _float, _positive, "must be > 0"),
    "lr_end": ("hyper", "lr_end", _float, _positive, "must be > 0"),
    "l2": ("hyper", "l2_coeff", _float, lambda v: v >= 0, "must be >= 0"),
    "dropout": ("hyper", "dropout_rate", _float, lambda v: 0 <= v < 1, "must be in [0, 1)"),
    "adam_beta1": ("hyper", "adam_beta1", _float, lambda v: 0 <= v < 1, "must be in [0, 1)"),
    "adam_beta2": ("hyper", "adam_beta2", _float, lambda v: 0 <= v < 1, "must be in [0, 1)"),
    "adam_eps": ("hyper", "adam_eps", _float, _positive, "must be > 0"),
    "ln_placement": ("hyper", "ln_placement", _choice(PLACEMENTS), None, ""),
    "input_norm": ("hyper", "input_norm", _choice(INPUT_NORMS), None, ""),
    "aug_m": ("aug", "m_range", _pair(_int), None, ""),
    "aug_p_rel": ("aug", "p_rel_range", _pair(_float), None, ""),
    "aug_alpha": ("aug", "alpha_i_range", _pair(_float), None, ""),
    "aug_beta": ("aug", "beta_i_range", _pair(_float), None, ""),
    "aug_sigma_alpha": ("aug", "sigma_alpha_range", _pair(_float), None, ""),
    "aug_sigma_beta": ("aug", "sigma_beta_range", _pair(_float), None, ""),
    "aug_k": ("aug", "k_range", _pair(_float), None, ""),
    "aug_snr": ("aug", "snr_range_db", _pair(_float), None, ""),
}


def parse_pairs(text: str) -> dict[str, str]:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {raw!r}")
        pairs[key.strip()] = value.strip()
    return pairs


def build_config(pairs: dict[str, str], base: RunConfig | None = None) -> RunConfig:
    """Apply ``pairs`` on top of ``base`` (defaults if omitted) and re-validate."""
    unknown = sorted(set(pairs) - set(KEYS))
    if unknown:
        log.warning("ignoring unknown config keys: %s", ", ".join(unknown))
    base = base or RunConfig()
    updates: dict[str, dict[str, Any]] = {"geom": {}, "run": {}, "hyper": {}, "aug": {}}
    for key, raw in pairs.items():
        if key not in KEYS:
            continue
        group, attr, parse, check, need = KEYS[key]
        try:
            value = parse(raw)
        except ValueError as exc:
            raise ConfigError(key, f"cannot parse {raw!r} ({exc})") from None
        if check is not None and not check(value):
            raise ConfigError(key, f"{need}, got {raw!r}")
        updates[group][attr] = value

    def rebuild(group, obj):
        try:
            return replace(obj, **updates[group])
        except InvalidArgumentError as exc:
            keys = [k for k, spec in KEYS.items() if spec[0] == group and k in pairs] or [group]
            raise ConfigError(",".join(keys), str(exc)) from None

    cfg = replace(base, **updates["run"])
    cfg.geom = rebuild("geom", base.geom)
    cfg.hyper = rebuild("hyper", base.hyper)
    cfg.aug = rebuild("aug", base.aug)
    if cfg.beams > cfg.full_beams:
        raise ConfigError("beams", f"must be <= full_beams ({cfg.full_beams}), got {cfg.beams}")
    if max(cfg.b_list) > cfg.full_beams:
        raise ConfigError("b_list", f"entries must be <= full_beams ({cfg.full_beams})")
    return cfg


def load_config(path) -> RunConfig:
    return build_config(parse_pairs(Path(path).read_text()))
