"""Experiment configuration: JSON schema, loading, validation.

The on-disk format is a single JSON object; see schema/experiment.json
and the README for the documented field set.  All validation errors
name the offending field and the violated constraint.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .decoy import EVE_ACTIONS
from .primitives import ChannelSpec
from .protocol import InputStateSpec

KINDS = ("enumerate", "montecarlo", "decoy", "sweep")
FORMATS = ("json", "csv")


class ConfigError(ValueError):
    """Malformed or constraint-violating experiment configuration."""


@dataclass
class ExperimentConfig:
    """Validated campaign description.

    For kind "sweep", channel/input are generated per sweep point and
    coeffs/beta stay None; otherwise both are fully resolved here.
    """

    kind: str
    d: int = 2
    m: int = 1
    n: int = 0
    coeffs: tuple[complex, ...] | None = None
    beta: np.ndarray | None = None
    trials: int = 1000
    seed: int = 0
    eve: str = "random_basis_resend"
    out: str | None = None
    fmt: str = "json"
    sweep: dict | None = None
    raw: dict = field(default_factory=dict)

    def channel_spec(self) -> ChannelSpec:
        return ChannelSpec(self.d, self.n, self.m, self.coeffs)

    def input_spec(self) -> InputStateSpec:
        return InputStateSpec(self.d, self.m, self.beta)


def random_coeffs(d: int, seed: int) -> tuple[complex, ...]:
    """Random valid channel coefficients, bounded away from zero.

    Weights |c_j|^2 are drawn uniformly from [0.25, 1.75] and rescaled
    so that (1/d) * sum |c_j|^2 = 1.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    weights = rng.uniform(0.25, 1.75, size=d)
    weights *= d / weights.sum()
    return tuple(complex(v) for v in np.sqrt(weights))


def _as_complex_list(value, fieldname: str) -> list[complex]:
    out = []
    for i, entry in enumerate(value):
        if isinstance(entry, (int, float)):
            out.append(complex(entry))
        elif isinstance(entry, (list, tuple)) and len(entry) == 2:
            out.append(complex(entry[0], entry[1]))
        else:
            raise ConfigError(
                f"{fieldname}[{i}]: expected a number or [re, im] pair, got {entry!r}"
            )
    return out


def _parse_seed_directive(value: str, fieldname: str) -> int:
    try:
        return int(value.split(":", 1)[1])
    except (IndexError, ValueError):
        raise ConfigError(f"{fieldname}: malformed directive {value!r}") from None


def resolve_coeffs(value, d: int) -> tuple[complex, ...]:
    """Expand "uniform" / "random:<seed>" / explicit list into c_0..c_{d-1}."""
    if value == "uniform" or value is None:
        return (complex(1.0),) * d
    if isinstance(value, str) and value.startswith("random:"):
        return random_coeffs(d, _parse_seed_directive(value, "coeffs"))
    if isinstance(value, str):
        raise ConfigError(f"coeffs: unknown directive {value!r}")
    coeffs = _as_complex_list(value, "coeffs")
    if len(coeffs) != d:
        raise ConfigError(f"coeffs: need exactly d = {d} entries, got {len(coeffs)}")
    return tuple(coeffs)


def resolve_beta(value, d: int, m: int) -> np.ndarray:
    """Expand explicit amplitudes, {"basis": k}, or "random:<seed>"."""
    size = d**m
    if value is None:
        value = {"basis": 0}
    if isinstance(value, dict):
        if set(value) != {"basis"}:
            raise ConfigError(f"beta: unknown object form {value!r}")
        k = value["basis"]
        if not isinstance(k, int) or not 0 <= k < size:
            raise ConfigError(f"beta.basis: index {k!r} out of range for d^m = {size}")
        return InputStateSpec.basis(d, m, k).beta
    if isinstance(value, str) and value.startswith("random:"):
        return InputStateSpec.random(d, m, _parse_seed_directive(value, "beta")).beta
    if isinstance(value, str):
        raise ConfigError(f"beta: unknown directive {value!r}")
    beta = np.asarray(_as_complex_list(value, "beta"))
    if beta.size != size:
        raise ConfigError(f"beta: length must be d^m = {size}, got {beta.size}")
    norm = float(np.linalg.norm(beta))
    if abs(norm - 1.0) > 1e-10:
        raise ConfigError(
            f"beta: amplitudes must satisfy sum|beta|^2 = 1, got {norm**2!r}"
        )
    return beta


def _expect_int(doc: dict, key: str, default: int, minimum: int) -> int:
    value = doc.get(key, default)
    if not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{key}: expected an integer >= {minimum}, got {value!r}")
    return value


def load_config(source) -> ExperimentConfig:
    """Parse and validate a config from a dict, JSON text, or file path."""
    if isinstance(source, dict):
        doc = source
    else:
        text = source
        path = Path(str(source))
        if path.suffix == ".json" or path.exists():
            text = path.read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")

    kind = doc.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind: expected one of {KINDS}, got {kind!r}")
    fmt = doc.get("format", "json")
    if fmt not in FORMATS:
        raise ConfigError(f"format: expected one of {FORMATS}, got {fmt!r}")
    seed = _expect_int(doc, "seed", 0, 0)
    trials = _expect_int(doc, "trials", 1000, 1)
    out = doc.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError(f"out: expected a path string, got {out!r}")

    cfg = ExperimentConfig(
        kind=kind, trials=trials, seed=seed, out=out, fmt=fmt, raw=dict(doc)
    )

    if kind == "sweep":
        sweep = doc.get("sweep")
        if not isinstance(sweep, dict):
            raise ConfigError('sweep: kind "sweep" requires a "sweep" object')
        for key in ("d", "m", "n"):
            values = sweep.get(key)
            if (
                not isinstance(values, list)
                or not values
                or not all(isinstance(v, int) and v >= (2 if key == "d" else 0) for v in values)
            ):
                raise ConfigError(f"sweep.{key}: expected a non-empty list of integers")
        if any(v < 1 for v in sweep["m"]):
            raise ConfigError("sweep.m: copy counts must be >= 1")
        cfg.sweep = {k: list(sweep[k]) for k in ("d", "m", "n")}
        return cfg

    cfg.d = _expect_int(doc, "d", 2, 2)
    cfg.m = _expect_int(doc, "m", 1, 1)
    cfg.n = _expect_int(doc, "n", 0, 0)

    if kind == "decoy":
        eve = doc.get("eve", "random_basis_resend")
        if eve not in EVE_ACTIONS:
            raise ConfigError(f"eve: expected one of {EVE_ACTIONS}, got {eve!r}")
        cfg.eve = eve
        return cfg

    cfg.coeffs = resolve_coeffs(doc.get("coeffs"), cfg.d)
    try:
        cfg.channel_spec()
    except ValueError as exc:
        raise ConfigError(f"coeffs: {exc}") from None
    cfg.beta = resolve_beta(doc.get("beta"), cfg.d, cfg.m)
    try:
        cfg.input_spec()
    except ValueError as exc:
        raise ConfigError(f"beta: {exc}") from None
    return cfg
