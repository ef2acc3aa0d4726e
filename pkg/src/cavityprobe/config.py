"""Run configuration: JSON schema, flag overrides, defaults, validation.

A run is described by one flat JSON document; command-line flags override
file values key by key.  The fully resolved configuration is echoed into
the metadata header of every output file, and feeding that header back as
a config reproduces the identical data section.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field

from .cavity import CavityConfig
from .errors import SchemaError, ValidationError
from .experiment import ExperimentSetup
from .response import DetectorConfig, FieldPreparation
from .worldline import LAB_FRAME, PROPER_FRAME

_VERSION = "0.1.0"  # keep in step with cavityprobe.__version__


@dataclass(frozen=True)
class SweepSpec:
    parameter: str = "epsilon"
    min: float = 0.0
    max: float = 0.1
    count: int = 11
    spacing: str = "linear"

    def __post_init__(self):
        if self.parameter not in ("epsilon", "gamma", "Omega"):
            raise ValidationError(
                f"sweep parameter must be epsilon, gamma or Omega, got "
                f"{self.parameter!r}"
            )
        if self.count < 1:
            raise ValidationError(f"sweep count must be >= 1, got {self.count}")
        if self.spacing not in ("linear", "log"):
            raise ValidationError(f"spacing must be linear or log, got {self.spacing!r}")
        if self.spacing == "log" and self.min <= 0:
            raise ValidationError("log spacing requires positive sweep bounds")
        if self.max < self.min:
            raise ValidationError("sweep max must be >= min")

    def grid(self):
        import numpy as np

        if self.count == 1:
            return np.array([self.min])
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


_SCHEMA: dict = {
    # key: (type, default)
    "scenario": (str, PROPER_FRAME),
    "a0": (float, 1.0),
    "epsilon": (float, 0.0),
    "gamma": (float, 0.0),
    "xi0": (float, 0.0),
    "x0": (float, 0.0),
    "t0": (float, 0.0),
    "L": (float, 1.0),
    "n_max": (int, 200),
    "n_min": (int, 20),
    "mode_tail_tol": (float, 1e-6),
    "Omega": (float, 15.707963267948966),
    "lambda": (float, 0.01),
    "alpha": (float, 0.0),
    "j": (int, 1),
    "quad_tol": (float, 1e-8),
    "root_tol": (float, 1e-12),
    "tau_mode": (str, "linearized"),
    "drop_redshift": (bool, False),
    "threads": (int, 0),  # 0 = hardware parallelism, resolved at parse time
    "seed": (int, 0),
    "noise_sigma": (float, 0.0),
    "budget": (int, 2000),
    "search_box": (list, [[0.0, 0.2], [0.5, 8.0]]),
    "sweep": (dict, {}),
    "output": (str, ""),
    "format": (str, "csv"),
    "preset": (str, ""),
}


@dataclass(frozen=True)
class RunConfig:
    values: dict = field(repr=False)
    sweep: SweepSpec = field(repr=False)

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError as exc:  # pragma: no cover - attribute typo guard
            raise AttributeError(name) from exc

    @property
    def coupling(self) -> float:
        return self.values["lambda"]

    def setup(self) -> ExperimentSetup:
        v = self.values
        return ExperimentSetup(
            scenario=v["scenario"],
            a0=v["a0"],
            cavity=CavityConfig(
                L=v["L"],
                n_max=v["n_max"],
                n_min=v["n_min"],
                mode_tail_tol=v["mode_tail_tol"],
            ),
            detector=DetectorConfig(Omega=v["Omega"], coupling=v["lambda"]),
            field=FieldPreparation(mode_index=v["j"], alpha=v["alpha"]),
            xi0=v["xi0"],
            x0=v["x0"],
            t0=v["t0"],
            quad_tol=v["quad_tol"],
            root_tol=v["root_tol"],
            tau_mode=v["tau_mode"],
            drop_redshift=v["drop_redshift"],
        )

    def to_json(self) -> str:
        doc = dict(self.values)
        doc["sweep"] = asdict(self.sweep)
        return json.dumps(doc, sort_keys=True)


def parse_config(document: dict | None, overrides: dict | None = None) -> RunConfig:
    """Merge a config document with flag overrides, fill defaults, validate.

    Raises SchemaError for unknown keys or wrong types (message carries the
    key path) and ValidationError when a value breaks an invariant.
    """
    values = {k: default for k, (_, default) in _SCHEMA.items()}
    for layer_name, layer in (("config", document), ("flag", overrides)):
        if not layer:
            continue
        for key, raw in layer.items():
            if raw is None:
                continue
            if key not in _SCHEMA:
                raise SchemaError(f"unknown {layer_name} key: {key!r}")
            typ, _ = _SCHEMA[key]
            try:
                if typ is bool:
                    coerced = _as_bool(raw)
                elif typ is int:
                    coerced = _as_int(key, raw)
                elif typ is float:
                    coerced = float(raw)
                elif typ is list:
                    coerced = raw if isinstance(raw, list) else json.loads(raw)
                elif typ is dict:
                    coerced = raw if isinstance(raw, dict) else json.loads(raw)
                else:
                    coerced = typ(raw)
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{key}: expected {typ.__name__}, got {raw!r}") from exc
            values[key] = coerced

    sweep_doc = values.pop("sweep") or {}
    unknown = set(sweep_doc) - {"parameter", "min", "max", "count", "spacing"}
    if unknown:
        raise SchemaError(f"sweep.{sorted(unknown)[0]}: unknown key")
    try:
        sweep = SweepSpec(**sweep_doc)
    except TypeError as exc:
        raise SchemaError(f"sweep: {exc}") from exc

    if values["threads"] == 0:
        values["threads"] = os.cpu_count() or 1
    _validate(values)
    cfg = RunConfig(values=values, sweep=sweep)
    cfg.setup()  # constructs every domain object, surfacing invariant violations
    return cfg


def _as_bool(raw) -> bool:
    if isinstance(raw, bool):
        return raw
    if isinstance(raw, str) and raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    raise ValueError(f"not a boolean: {raw!r}")


def _as_int(key, raw) -> int:
    if isinstance(raw, bool):
        raise ValueError("booleans are not integers")
    if isinstance(raw, float) and raw != int(raw):
        raise ValueError(f"{key} must be an integer")
    return int(raw)


def _validate(values: dict):
    if values["scenario"] not in (PROPER_FRAME, LAB_FRAME):
        raise ValidationError(
            f"scenario must be {PROPER_FRAME!r} or {LAB_FRAME!r}, got "
            f"{values['scenario']!r}"
        )
    for key in ("quad_tol", "root_tol", "mode_tail_tol"):
        if not (0 < values[key] < 1):
            raise ValidationError(f"{key} must lie in (0, 1), got {values[key]}")
    eps = values["epsilon"]
    if values["scenario"] == PROPER_FRAME and not (0 <= eps < 1):
        raise ValidationError(
            f"epsilon={eps} violates 0 <= epsilon < 1 (proper-frame amplitude "
            f"is relative: the instantaneous acceleration must stay positive)"
        )
    if values["scenario"] == LAB_FRAME and eps < 0:
        raise ValidationError(f"epsilon={eps} must be nonnegative")
    if values["threads"] < 1:
        raise ValidationError(f"threads must be >= 1, got {values['threads']}")
    if values["format"] not in ("csv", "json"):
        raise ValidationError(f"format must be csv or json, got {values['format']!r}")


def format_number(x) -> str:
    """Serialize a number with 17 significant digits, locale-free."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.17g}"


def metadata_header(cfg: RunConfig, command: str) -> list[str]:
    return [
        f"# cavityprobe {_VERSION}",
        f"# command: {command}",
        f"# config: {cfg.to_json()}",
    ]


def read_config_header(path) -> dict:
    """Recover the resolved config JSON from an output file's header."""
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("# config: "):
                return json.loads(line[len("# config: ") :])
            if not line.startswith("#"):
                break
    raise SchemaError(f"{path}: no '# config:' metadata header found")
