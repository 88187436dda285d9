"""Job configuration: TOML file plus command-line overrides (flags win).

Example::

    command = "smt-const"
    seed = 20240607
    r0 = "inf"

    [radii]
    min = 2.0
    max = 50.0
    count = 12          # or: list = [2, 4, 8]

    [expressions]
    f = "exp(z)"

    targets = ["0", "inf", "1", "-1"]

    [tolerances]
    quad = 1e-9
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field

from .errors import ConfigError
from .functionals import geometric_radii

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

COMMANDS = (
    "analyze",
    "jensen",
    "smt-const",
    "smt-moving",
    "lemma31",
    "lemma32",
    "claim38",
    "sharing",
    "bound-table",
)
DEFAULT_SEED = 20240607
DEFAULT_RADII = (2.0, 50.0, 12)


@dataclass
class Tolerances:
    quad: float = 1e-9
    identity: float = 1e-9
    jensen: float = 1e-6
    small_term_limit: float = 100.0


@dataclass
class JobConfig:
    command: str
    r0: float = math.inf
    radii: list = field(default_factory=lambda: geometric_radii(*DEFAULT_RADII))
    expressions: dict = field(default_factory=dict)
    targets: list = field(default_factory=list)
    set: list = field(default_factory=list)
    level: float = math.inf
    candidates: list = field(default_factory=list)
    ks: list = field(default_factory=lambda: [1, 2, 3])
    levels: list = field(default_factory=lambda: [88, 100, math.inf])
    q: int | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = DEFAULT_SEED
    out: str = "out"

    def echo(self) -> dict:
        d = asdict(self)
        d["r0"] = _num_text(self.r0)
        d["level"] = _num_text(self.level)
        d["levels"] = [_num_text(x) for x in self.levels]
        return d


def _num_text(x):
    return "inf" if isinstance(x, float) and math.isinf(x) else x


def parse_real(value, path: str, allow_inf: bool = True) -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "∞"):
        if allow_inf:
            return math.inf
        raise ConfigError(path, "infinity not allowed here")
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected a number, got {value!r}") from None
    if math.isnan(x):
        raise ConfigError(path, "NaN not allowed")
    return x


def parse_level(value, path: str = "level") -> float:
    x = parse_real(value, path)
    if math.isinf(x):
        return x
    if x != int(x) or x < 1:
        raise ConfigError(path, f"truncation level must be an integer >= 1 or inf, got {value!r}")
    return int(x)


def parse_radii_spec(text: str, path: str = "radii") -> list[float]:
    """``a:b:n`` geometric schedule or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(path, f"expected a:b:n, got {text!r}")
        a = parse_real(parts[0], path + ".min", False)
        b = parse_real(parts[1], path + ".max", False)
        try:
            n = int(parts[2])
        except ValueError:
            raise ConfigError(path + ".count", f"expected an integer, got {parts[2]!r}") from None
        return _schedule(a, b, n, path)
    return [parse_real(x, f"{path}[{i}]", False) for i, x in enumerate(text.split(","))]


def _schedule(a: float, b: float, n: int, path: str) -> list[float]:
    if n < 2:
        raise ConfigError(path + ".count", "schedule count must be >= 2")
    if not 0 < a < b:
        raise ConfigError(path, f"need 0 < min < max, got {a}, {b}")
    return geometric_radii(a, b, n)


def _radii_from_table(v, path: str = "radii") -> list[float]:
    if isinstance(v, str):
        return parse_radii_spec(v, path)
    if isinstance(v, list):
        return [parse_real(x, f"{path}[{i}]", False) for i, x in enumerate(v)]
    if isinstance(v, dict):
        if "list" in v:
            return _radii_from_table(v["list"], path + ".list")
        for key in ("min", "max", "count"):
            if key not in v:
                raise ConfigError(f"{path}.{key}", "missing")
        if not isinstance(v["count"], int):
            raise ConfigError(path + ".count", "expected an integer")
        return _schedule(parse_real(v["min"], path + ".min", False), parse_real(v["max"], path + ".max", False), v["count"], path)
    raise ConfigError(path, f"unsupported value {v!r}")


def _str_list(v, path: str) -> list[str]:
    if isinstance(v, str):
        return [x.strip() for x in v.split(",") if x.strip()]
    if not isinstance(v, list):
        raise ConfigError(path, "expected a list")
    return [str(x) for x in v]


def validate(cfg: JobConfig) -> JobConfig:
    if cfg.command not in COMMANDS:
        raise ConfigError("command", f"unknown command {cfg.command!r}; one of {', '.join(COMMANDS)}")
    if not cfg.r0 > 1:
        raise ConfigError("r0", "R0 must exceed 1")
    if cfg.command != "bound-table":
        if len(cfg.radii) < 1:
            raise ConfigError("radii", "empty")
        for i, (a, b) in enumerate(zip(cfg.radii, cfg.radii[1:])):
            if not b > a:
                raise ConfigError(f"radii[{i + 1}]", "radii must be strictly increasing")
        for i, r in enumerate(cfg.radii):
            if not 1 < r < cfg.r0:
                raise ConfigError(f"radii[{i}]", f"radius {r} outside (1, R0)")
    if cfg.tolerances.quad <= 0:
        raise ConfigError("tolerances.quad", "must be positive")
    return cfg


_KNOWN = {
    "command", "r0", "radii", "expressions", "targets", "set", "level", "candidates",
    "ks", "levels", "q", "tolerances", "seed", "out",
}


def from_mapping(data: dict) -> JobConfig:
    unknown = sorted(set(data) - _KNOWN)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    if "command" not in data:
        raise ConfigError("command", "missing")
    cfg = JobConfig(str(data["command"]))
    if "r0" in data:
        cfg.r0 = parse_real(data["r0"], "r0")
    if "radii" in data:
        cfg.radii = _radii_from_table(data["radii"])
    elif not math.isinf(cfg.r0):
        from .functionals import finite_r0_radii

        cfg.radii = finite_r0_radii(cfg.r0, DEFAULT_RADII[2])
    if "expressions" in data:
        if not isinstance(data["expressions"], dict):
            raise ConfigError("expressions", "expected a table of name = text")
        cfg.expressions = {str(k): str(v) for k, v in data["expressions"].items()}
    for key in ("targets", "set", "candidates"):
        if key in data:
            setattr(cfg, key, _str_list(data[key], key))
    if "level" in data:
        cfg.level = parse_level(data["level"])
    if "ks" in data:
        cfg.ks = [int(x) for x in data["ks"]]
    if "levels" in data:
        cfg.levels = [parse_level(x, f"levels[{i}]") for i, x in enumerate(data["levels"])]
    if "q" in data:
        cfg.q = int(data["q"])
    if "seed" in data:
        if not isinstance(data["seed"], int):
            raise ConfigError("seed", "expected an integer")
        cfg.seed = data["seed"]
    if "out" in data:
        cfg.out = str(data["out"])
    tol = data.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("tolerances", "expected a table")
    for k, v in tol.items():
        if not hasattr(cfg.tolerances, k):
            raise ConfigError(f"tolerances.{k}", "unknown tolerance")
        setattr(cfg.tolerances, k, parse_real(v, f"tolerances.{k}", False))
    return cfg


def load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(path, f"invalid TOML: {exc}") from None
    except OSError as exc:
        raise ConfigError(path, str(exc)) from None
