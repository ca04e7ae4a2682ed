"""``key = value`` run configuration files.

Lines hold one or more ``key = value`` assignments; ``#`` starts a comment.
Keys may use dashes or underscores. Values given as overrides (the CLI
flags) replace file values, and ``None`` overrides are ignored.
"""

import re
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from pq_eigen.core.errors import ConfigError
from pq_eigen.models.config import RunConfig
from pq_eigen.models.params import DomainSpec, NewtonConfig, OuterConfig

DOMAIN_ALIASES = {
    "interval": "interval",
    "disc": "disc_radial",
    "disc_radial": "disc_radial",
    "square": "rectangle",
    "rectangle": "rectangle",
    "lshape": "lshape",
    "l-shape": "lshape",
    "triangle": "isosceles_triangle",
    "isosceles_triangle": "isosceles_triangle",
    "external_file": "external_file",
}

DOMAIN_KEYS = {"h", "length", "width", "height", "arm", "outer_side", "base", "altitude", "radius"}
OUTER_KEYS = {"eps": "eps", "max_outer": "max_outer", "initial_guess": "initial_guess",
              "monotone_tol": "monotone_tol"}
NEWTON_KEYS = {"newton_tol": "residual_tol", "relative_tol": "relative_tol", "max_iters": "max_iters",
               "regularization": "regularization", "damping": "damping",
               "linear_solver": "linear_solver"}
RUN_KEYS = {"command", "p", "q", "alpha", "beta", "n", "weight", "h_values", "p_values",
            "out", "format", "threads", "export_field"}
LIST_KEYS = {"continuation", "h_values", "p_values"}
KNOWN_KEYS = (DOMAIN_KEYS | set(OUTER_KEYS) | set(NEWTON_KEYS) | RUN_KEYS
              | LIST_KEYS | {"domain", "mesh"})

# Commands whose outer iteration climbs the exponent ladder itself.
EIGEN_CONTINUATION_COMMANDS = ("scalar", "fp-curve")

_ASSIGNMENT = re.compile(r"([A-Za-z_][\w-]*)\s*=\s*(\S+)")


def _normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def parse_number_list(text: str) -> List[float]:
    """Comma-separated numbers; 'inf' is accepted."""
    items = [t.strip() for t in str(text).split(",") if t.strip()]
    try:
        return [float(_fraction(t)) for t in items]
    except ValueError:
        raise ConfigError(f"malformed number list '{text}'")


def _fraction(token: str) -> float:
    if "/" in token:
        num, den = token.split("/", 1)
        return float(num) / float(den)
    return float(token)


def read_config_file(file_path: str) -> Dict[str, str]:
    """Raw key/value pairs of a configuration file."""
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {file_path}")
    values: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for number, raw in enumerate(f, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            if text.count("=") == 1:
                key, value = text.split("=", 1)
                pairs = [(key.strip(), value.strip())]
            else:
                pairs = _ASSIGNMENT.findall(text)
                if not pairs or _ASSIGNMENT.sub("", text).strip():
                    raise ConfigError(f"line {number}: expected 'key = value', got '{text}'")
            for key, value in pairs:
                key = _normalize_key(key)
                if key not in KNOWN_KEYS:
                    raise ConfigError(f"line {number}: unknown configuration key '{key}'")
                values[key] = value
    return values


def parse_config(file_path: Optional[str] = None,
                 overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Resolve a RunConfig from an optional file plus flag overrides."""
    raw: Dict[str, Any] = read_config_file(file_path) if file_path else {}
    for key, value in (overrides or {}).items():
        key = _normalize_key(key)
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown configuration key '{key}'")
        if value is not None:
            raw[key] = value

    command = raw.pop("command", "solve")
    domain = _domain_spec(raw, command)

    continuation = raw.pop("continuation", None)
    ladder = parse_number_list(continuation) if isinstance(continuation, str) else list(continuation or [])

    outer = {OUTER_KEYS[k]: raw.pop(k) for k in list(raw) if k in OUTER_KEYS}
    newton = {NEWTON_KEYS[k]: raw.pop(k) for k in list(raw) if k in NEWTON_KEYS}
    if ladder:
        target = outer if command in EIGEN_CONTINUATION_COMMANDS else newton
        target["continuation"] = ladder
    if command == "radial" and "initial_guess" not in outer:
        outer["initial_guess"] = "radial_quadratic"

    for key in ("h_values", "p_values"):
        if isinstance(raw.get(key), str):
            raw[key] = parse_number_list(raw[key])

    try:
        return RunConfig(
            command=command,
            domain=domain,
            outer=OuterConfig(**outer),
            newton=NewtonConfig(**newton),
            **raw,
        )
    except ValidationError as exc:
        raise ConfigError(_first_error(exc))


def _domain_spec(raw: Dict[str, Any], command: str) -> DomainSpec:
    mesh_path = raw.pop("mesh", None)
    kind = raw.pop("domain", None)
    fields = {}
    for key in list(raw):
        if key in DOMAIN_KEYS:
            value = raw.pop(key)
            fields["outer" if key == "outer_side" else key] = _fraction(value) if isinstance(value, str) else value
    if mesh_path is not None:
        kind, fields["path"] = "external_file", str(mesh_path)
    elif command == "radial":
        kind = "disc_radial"
    elif command == "fp-curve":
        kind = "interval"
    elif kind is None:
        kind = "rectangle"
    else:
        resolved = DOMAIN_ALIASES.get(str(kind).lower())
        if resolved is None:
            raise ConfigError(f"unknown domain '{kind}' (choose from {sorted(DOMAIN_ALIASES)})")
        kind = resolved
    try:
        return DomainSpec(kind=kind, **fields)
    except ValidationError as exc:
        raise ConfigError(_first_error(exc))


def _first_error(exc: ValidationError) -> str:
    error = exc.errors()[0]
    where = ".".join(str(part) for part in error.get("loc", ()))
    message = error["msg"].removeprefix("Value error, ")
    return f"{where}: {message}" if where else message
