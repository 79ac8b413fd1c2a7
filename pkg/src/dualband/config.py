"""Flat `key = value` run configuration shared by the CLI subcommands.

Lines are `key = value`, `#` starts a comment, list values are
comma-separated.  Unknown keys are rejected so a typo cannot silently fall
back to a default.  Every output CSV embeds a hash of the effective config
so a result file can always be traced to the exact settings that made it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .model import RateParams


class InvalidConfig(ValueError):
    """Configuration file or override that cannot be used as given."""


def _as_float(text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise InvalidConfig(f"expected a number, got {text!r}") from exc


def _as_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        # allow 1e7-style integer literals
        val = _as_float(text)
        if val != int(val):
            raise InvalidConfig(f"expected an integer, got {text!r}") from None
        return int(val)


def _as_floats(text: str) -> tuple[float, ...]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise InvalidConfig("expected a non-empty comma-separated list")
    return tuple(_as_float(t) for t in items)


def _as_ints(text: str) -> tuple[int, ...]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise InvalidConfig("expected a non-empty comma-separated list")
    return tuple(_as_int(t) for t in items)


@dataclass(frozen=True, slots=True)
class RunConfig:
    """Every tunable of the suite with its default.

    Field names match config-file keys except `lam`, whose file key is
    `lambda` (reserved word in Python).
    """

    lam: float = 45.0
    mu_p: float = 100.0
    mu_mm: float = 100.0
    mu_sub6: float = 1.0
    p_a: float = 0.6
    betas: tuple[float, ...] = (0.9, 0.99, 0.999, 0.9999)
    verify_beta: float = 0.999
    box_x: int = 60
    box_q1: int = 60
    tol: float = 1e-9
    check_tol: float = 1e-7
    max_iter: int = 1_000_000
    horizon: int = 10_000_000
    warmup: int | None = None
    seed: int = 20240901
    replications: int = 5
    jobs: int = 1
    m_list: tuple[int, ...] = tuple(range(1, 31))
    lambda_list: tuple[float, ...] = (30.0, 35.0, 40.0, 45.0, 50.0, 55.0)
    p_na_list: tuple[float, ...] = (
        0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45,
    )
    out_dir: str = "."

    def rates(self, lam: float | None = None, beta: float | None = None) -> RateParams:
        return RateParams(
            lam=self.lam if lam is None else lam,
            mu_p=self.mu_p,
            mu_mm=self.mu_mm,
            mu_sub6=self.mu_sub6,
            p_a=self.p_a,
            beta=self.verify_beta if beta is None else beta,
        )

    @property
    def effective_warmup(self) -> int:
        return self.horizon // 10 if self.warmup is None else self.warmup


_KEY_TO_FIELD = {"lambda": "lam"}
_FIELD_TO_KEY = {"lam": "lambda"}

_PARSERS = {
    "lam": _as_float,
    "mu_p": _as_float,
    "mu_mm": _as_float,
    "mu_sub6": _as_float,
    "p_a": _as_float,
    "betas": _as_floats,
    "verify_beta": _as_float,
    "box_x": _as_int,
    "box_q1": _as_int,
    "tol": _as_float,
    "check_tol": _as_float,
    "max_iter": _as_int,
    "horizon": _as_int,
    "warmup": _as_int,
    "seed": _as_int,
    "replications": _as_int,
    "jobs": _as_int,
    "m_list": _as_ints,
    "lambda_list": _as_floats,
    "p_na_list": _as_floats,
    "out_dir": str,
}


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = base if base is not None else RunConfig()
    updates: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        field = _KEY_TO_FIELD.get(key, key)
        if field not in _PARSERS:
            raise InvalidConfig(f"line {lineno}: unknown key {key!r}")
        if not value:
            raise InvalidConfig(f"line {lineno}: empty value for {key!r}")
        try:
            updates[field] = _PARSERS[field](value)
        except InvalidConfig as exc:
            raise InvalidConfig(f"line {lineno}: {key}: {exc}") from None
    return replace(cfg, **updates)


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise InvalidConfig(f"config file not found: {p}")
    return parse_config_text(p.read_text(), base)


def _canon(value: object) -> str:
    if value is None:
        return "auto"
    if isinstance(value, tuple):
        return ", ".join(_canon(v) for v in value)
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def canonical_lines(cfg: RunConfig) -> list[str]:
    lines = []
    for f in sorted(fields(cfg), key=lambda f: _FIELD_TO_KEY.get(f.name, f.name)):
        key = _FIELD_TO_KEY.get(f.name, f.name)
        lines.append(f"{key} = {_canon(getattr(cfg, f.name))}")
    return lines


def config_hash(cfg: RunConfig) -> str:
    """Stable 16-hex digest of the effective configuration."""
    blob = "\n".join(canonical_lines(cfg)).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
