"""Scenario files: flat ``[section]`` blocks of ``key = value`` lines.

UTF-8 text, ``#`` starts a comment, one key per line.  Every key is checked
against the schema of the scenario kind; unknown or malformed keys are
reported with file and line.  ``echo`` writes the fully resolved scenario in
the same format, so parse -> echo -> parse is an identity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

REQUIRED = object()


class ConfigError(ValueError):
    def __init__(self, message, path=None, line=None):
        where = f"{path}:{line}: " if path is not None and line is not None else (
            f"{path}: " if path is not None else "")
        super().__init__(where + message)
        self.path = path
        self.line = line


# --------------------------------------------------------------------------
# value types

def _float(text):
    return float(text)


def _int(text):
    v = float(text)
    if v != int(v):
        raise ValueError(f"{text!r} is not an integer")
    return int(v)


def _bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _strs(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


@dataclass(frozen=True)
class Key:
    parse: object
    default: object = REQUIRED
    check: object = None  # callable(value) -> error text or None
    path: bool = False


def positive(v):
    values = v if isinstance(v, tuple) else (v,)
    return None if all(x > 0 for x in values) else "must be positive"


def at_least(n):
    return lambda v: None if v >= n else f"must be >= {n}"


def in_range(lo, hi):
    return lambda v: None if lo <= v <= hi else f"must lie in [{lo}, {hi}]"


def one_of(*choices):
    return lambda v: None if v in choices else f"must be one of {', '.join(choices)}"


def length(n, inner=None):
    def check(v):
        if len(v) != n:
            return f"needs {n} comma-separated values"
        return inner(v) if inner else None
    return check


def viscosity_model(v):
    if v in ("plain", "rescaled"):
        return None
    try:
        return positive(float(v))
    except ValueError:
        return "must be plain, rescaled or a positive viscosity ratio"


SECTIONS = {
    "scenario": {
        "kind": Key(str, REQUIRED, one_of("poiseuille", "couette_porous", "sphere_pack_dns",
                                          "grid_study", "re_sweep", "glbm_rev",
                                          "two_domain_analytic", "extract_params", "bench")),
        "name": Key(str, None),
        "seed": Key(_int, 0, at_least(0)),
        "out": Key(str, "out"),  # relative to the working directory
    },
    "fluid": {
        "nu": Key(_float, 1.0 / 6.0, positive),
        "lambda": Key(_float, 3.0 / 16.0, positive),
    },
    "run": {
        "tol": Key(_float, 1e-8, positive),
        "check_interval": Key(_int, 1000, at_least(1)),
        "max_steps": Key(_int, 200_000, at_least(1)),
        "scheme": Key(str, "cli", one_of("sbb", "cli")),
    },
    "drive": {
        "mode": Key(str, "body_force", one_of("body_force", "pressure_gradient")),
        "magnitude": Key(_float, 1e-6),
    },
    "channel": {
        "height": Key(_int, 32, at_least(2)),
        "length": Key(_int, 1, at_least(1)),
        "width": Key(_int, 1, at_least(1)),
    },
    "packing": {
        "diameter": Key(_float, 8.0, at_least(4.0)),
        "box": Key(_floats, (3.0, 3.0, 3.0), length(3, positive)),
        "bed_height": Key(_float, 1.25, positive),
        "r_spread": Key(_float, 0.25, in_range(0.0, 0.5)),
        "offset_plate": Key(_bool, True),
        "pack_file": Key(str, None, path=True),
        "voxel_file": Key(str, None, path=True),
    },
    "grid": {
        "diameters": Key(_floats, (8.0, 16.0, 32.0), positive),
        "reynolds": Key(_float, 2.0, positive),
        "nu_per_diameter": Key(_float, 0.025, positive),
        "lambda": Key(_float, 3.0 / 16.0, positive),
    },
    "sweep": {
        "reynolds": Key(_floats, (0.2, 2.0, 20.0), positive),
    },
    "couette": {
        "height": Key(_int, 64, at_least(4)),
        "porosity": Key(_float, 0.4, in_range(1e-3, 1.0)),
        "darcy": Key(_float, 1.2e-4, positive),
        "reynolds": Key(_float, 0.1, positive),
        "viscosity": Key(str, "plain", viscosity_model),
    },
    "glbm": {
        "profile": Key(str, REQUIRED, path=True),
        "diameter": Key(_float, 8.0, positive),
        "variants": Key(_strs, ("rescaled", "plain", "darcy"),
                        lambda v: None if set(v) <= {"rescaled", "plain", "darcy"}
                        else "variants are rescaled, plain, darcy"),
        "window": Key(_floats, None, length(2)),
        "force": Key(_float, None),
    },
    "two_domain": {
        "condition": Key(str, "br", one_of("br", "otw", "bj", "bjs")),
        "h_f": Key(_float, 1.0, positive),
        "h_p": Key(_float, 1.0, positive),
        "mu": Key(_float, 0.1, positive),
        "k": Key(_float, 1e-4, positive),
        "force": Key(_float, 1e-5, positive),
        "J": Key(_float, 1.0, positive),
        "alpha": Key(_float, 1.0, positive),
        "beta": Key(_float, 0.0),
        "porosity": Key(_float, 1.0, in_range(1e-3, 1.0)),
        "points": Key(_int, 201, at_least(3)),
    },
    "extract": {
        "profile": Key(str, REQUIRED, path=True),
        "interface_z": Key(_float, None),
        "nu": Key(_float, None, positive),
        "force": Key(_float, None),
    },
    "bench": {
        "size": Key(_int, 128, at_least(8)),
        "diameter": Key(_float, 76.0, at_least(0.0)),  # 0: no sphere
        "steps": Key(_int, 200, at_least(1)),
        "warmup": Key(_int, 10, at_least(0)),
    },
}

KINDS = {
    "poiseuille": ("fluid", "run", "drive", "channel"),
    "couette_porous": ("fluid", "run", "couette"),
    "sphere_pack_dns": ("fluid", "run", "drive", "packing"),
    "grid_study": ("run", "packing", "grid"),
    "re_sweep": ("fluid", "run", "packing", "sweep"),
    "glbm_rev": ("fluid", "run", "glbm"),
    "two_domain_analytic": ("two_domain",),
    "extract_params": ("extract",),
    "bench": ("fluid", "bench"),
}


@dataclass(frozen=True)
class Scenario:
    kind: str
    name: str
    seed: int
    out: str
    params: dict = field(default_factory=dict, compare=True, hash=False)
    source: str | None = field(default=None, compare=False)

    def __getitem__(self, section) -> dict:
        return self.params[section]

    def get(self, section, key, default=None):
        return self.params.get(section, {}).get(key, default)


def _convert(section, key, raw, path, lineno, base):
    spec = SECTIONS[section][key]
    try:
        value = spec.parse(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} ({exc})", path, lineno) from None
    if spec.check is not None:
        msg = spec.check(value)
        if msg:
            raise ConfigError(f"[{section}] {key} = {raw}: {msg}", path, lineno)
    if spec.path and value and base is not None:
        value = str((base / value).resolve()) if not Path(value).is_absolute() else value
    return value


def parse_text(text, path="<string>", base=None) -> Scenario:
    raw: dict = {}
    where: dict = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if s.startswith("["):
            if not s.endswith("]"):
                raise ConfigError(f"malformed section header {s!r}", path, lineno)
            section = s[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", path, lineno)
            if section in raw:
                raise ConfigError(f"duplicate section [{section}]", path, lineno)
            raw[section] = {}
            where[section] = lineno
            continue
        if "=" not in s:
            raise ConfigError(f"expected 'key = value', got {s!r}", path, lineno)
        if section is None:
            raise ConfigError("key outside of any [section]", path, lineno)
        key, val = (t.strip() for t in s.split("=", 1))
        if key not in SECTIONS[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", path, lineno)
        if key in raw[section]:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", path, lineno)
        raw[section][key] = (val, lineno)

    if "scenario" not in raw or "kind" not in raw["scenario"]:
        raise ConfigError("missing required key [scenario] kind", path)
    kind_raw, kind_line = raw["scenario"]["kind"]
    kind = _convert("scenario", "kind", kind_raw, path, kind_line, base)
    allowed = ("scenario",) + KINDS[kind]
    for sec in raw:
        if sec not in allowed:
            raise ConfigError(f"section [{sec}] does not apply to kind {kind!r}", path, where[sec])

    params = {}
    for sec in allowed:
        values = {}
        for key, spec in SECTIONS[sec].items():
            if key in raw.get(sec, {}):
                val, lineno = raw[sec][key]
                values[key] = _convert(sec, key, val, path, lineno, base)
            elif spec.default is REQUIRED:
                raise ConfigError(f"missing required key [{sec}] {key}", path, where.get(sec))
            else:
                values[key] = spec.default
        params[sec] = values
    head = params.pop("scenario")
    name = head["name"] or (Path(path).stem if path != "<string>" else kind)
    return Scenario(kind, name, head["seed"], head["out"], params, str(path))


def parse_config(path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path) from None
    except UnicodeDecodeError:
        raise ConfigError("config is not valid UTF-8", path) from None
    return parse_text(text, str(p), p.resolve().parent)


def echo(scn: Scenario) -> str:
    """Fully resolved scenario in config syntax."""
    lines = ["# resolved scenario; re-runnable as is", "[scenario]", f"kind = {scn.kind}",
             f"name = {scn.name}", f"seed = {scn.seed}", f"out = {scn.out}"]
    for sec in KINDS[scn.kind]:
        lines += ["", f"[{sec}]"]
        for key, value in scn.params[sec].items():
            if value is None:
                continue
            lines.append(f"{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"


def with_overrides(scn: Scenario, seed=None, out=None, max_steps=None) -> Scenario:
    params = {s: dict(v) for s, v in scn.params.items()}
    if max_steps is not None and "run" in params:
        params["run"]["max_steps"] = int(max_steps)
    return Scenario(scn.kind, scn.name, scn.seed if seed is None else int(seed),
                    scn.out if out is None else str(out), params, scn.source)
