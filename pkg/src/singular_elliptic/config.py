"""Strict INI run configurations.

Every section and key is declared in ``SCHEMA``; anything else is
rejected with a ``ConfigError`` naming the offending entry. Lists are
comma separated, atoms are ``location:mass`` and schedule pairs are
``N:epsilon``. ``levels`` is either an explicit list or ``pow2:K`` for
``1, 2, 4, ..., 2**K``.
"""

import configparser
from dataclasses import dataclass
from pathlib import Path

from . import grid_operator as go
from .errors import ConfigError, ParameterError
from .feynman_kac import WalkConfig
from .measures import MeasureSpec
from .nonlinearity import Nonlinearity
from .semilinear import SolverConfig
from .stability import RefinementSchedule

__all__ = ["RunConfig", "SCHEMA", "parse_config", "load_config", "STABILITY_MODES"]

STABILITY_MODES = ("tv", "vanishing", "split", "additive")


def _bool(s):
    v = s.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt(parse):
    def inner(s):
        return None if s.strip() in ("", "none") else parse(s)
    inner.optional = True
    return inner


def _list(parse):
    def inner(s):
        return tuple(parse(p.strip()) for p in s.split(",") if p.strip())
    return inner


def _pair(left, right):
    def inner(s):
        x, y = s.split(":")
        return left(x), right(y)
    return inner


def _levels(s):
    s = s.strip()
    if s.startswith("pow2:"):
        return tuple(2**k for k in range(int(s[5:]) + 1))
    return _list(int)(s)


def _text(s):
    return s.strip()


def _fmt(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(":".join(_fmt(x) for x in p) if isinstance(p, tuple) else _fmt(p) for p in v)
    return str(v)


# section -> key -> (parser, default)
SCHEMA = {
    "domain": {"a": (float, 0.0), "b": (float, 1.0)},
    "grid": {"n": (int, 511)},
    "operator": {"alpha": (float, 2.0)},
    "nonlinearity": {
        "kind": (_text, "pure_power"),
        "gamma": (float, 1.0),
        "beta": (_opt(float), None),
        "c1": (float, 1.0),
        "c2": (float, 1.0),
        "omega": (float, 4.0),
        "monotone": (_opt(_bool), None),
    },
    "measure": {
        "density_id": (_opt(_text), "constant"),
        "density_params": (_list(float), (1.0,)),
        "atoms": (_list(_pair(float, float)), ()),
    },
    "solver": {
        "inner_tol": (float, 1e-10),
        "outer_tol": (float, 1e-6),
        "levels": (_levels, tuple(2**k for k in range(25))),
        "method": (_text, "newton"),
    },
    "mc": {
        "samples": (int, 200_000),
        "dt": (float, 1e-5),
        "seed": (int, 0),
        "batch": (int, 10_000),
        "workers": (int, 1),
        "max_steps": (int, 10_000_000),
        "points": (_list(float), (0.25, 0.5, 0.75)),
    },
    "schedule": {"pairs": (_list(_pair(int, float)), ())},
    "capacity": {"x0": (float, 0.5), "sizes": (_list(int), (255, 511, 1023, 2047))},
    "stability": {
        "mode": (_text, "tv"),
        "exclusion_radius": (float, 0.1),
        "perturbations": (int, 64),
        "singular_atoms": (_list(_pair(float, float)), ()),
    },
    "output": {"dir": (_text, "out")},
}


@dataclass(frozen=True)
class RunConfig:
    """Typed values for every schema key (defaults filled in)."""

    values: tuple

    def __getitem__(self, section):
        return dict(dict(self.values)[section])

    def get(self, section, key):
        return self[section][key]

    def replace(self, section, key, value):
        vals = {s: dict(kv) for s, kv in self.values}
        vals[section][key] = value
        return _freeze(vals)

    def domain(self, n=None):
        d = self["domain"]
        return go.Domain(d["a"], d["b"], self.get("grid", "n") if n is None else n)

    @property
    def alpha(self):
        return self.get("operator", "alpha")

    def nonlinearity(self, gamma=None):
        nl = self["nonlinearity"]
        return Nonlinearity(nl["kind"], nl["gamma"] if gamma is None else gamma, nl["c1"], nl["c2"],
                            nl["omega"], nl["monotone"])

    def second_nonlinearity(self):
        beta = self.get("nonlinearity", "beta")
        return None if beta is None else self.nonlinearity(beta)

    def measure_spec(self):
        m = self["measure"]
        dens = () if m["density_id"] is None else ((m["density_id"], m["density_params"]),)
        return MeasureSpec(dens, m["atoms"])

    def singular_spec(self):
        return MeasureSpec((), self.get("stability", "singular_atoms"))

    def solver_config(self):
        s = self["solver"]
        return SolverConfig(inner_tol=s["inner_tol"], outer_tol=s["outer_tol"], levels=s["levels"],
                            method=s["method"])

    def walk_config(self):
        m = self["mc"]
        return WalkConfig(dt=m["dt"], n_paths=m["samples"], batch=m["batch"], seed=m["seed"],
                          max_steps=m["max_steps"], workers=m["workers"])

    def schedule(self):
        d = self["domain"]
        return RefinementSchedule(self.get("schedule", "pairs"), d["a"], d["b"])

    def echo(self):
        """INI text that parses back to an equal ``RunConfig``."""
        lines = []
        for section, kv in self.values:
            lines.append(f"[{section}]")
            lines += [f"{k} = {_fmt(v)}" for k, v in kv]
            lines.append("")
        return "\n".join(lines)

    def as_dict(self):
        return {s: dict(kv) for s, kv in self.values}


def _freeze(vals):
    cfg = RunConfig(tuple((s, tuple(vals[s].items())) for s in SCHEMA))
    _validate(cfg)
    return cfg


def _validate(cfg):
    checks = [
        ("domain", lambda: cfg.domain()),
        ("operator.alpha", lambda: go.assemble(go.Domain(0.0, 1.0, 1), cfg.alpha)),
        ("nonlinearity", cfg.nonlinearity),
        ("nonlinearity.beta", cfg.second_nonlinearity),
        ("measure", cfg.measure_spec),
        ("solver", cfg.solver_config),
        ("mc", cfg.walk_config),
        ("stability.singular_atoms", cfg.singular_spec),
    ]
    if cfg.get("schedule", "pairs"):
        checks.append(("schedule.pairs", cfg.schedule))
    for key, check in checks:
        try:
            check()
        except ParameterError as exc:
            raise ConfigError(f"[{key}] {exc}", key=key) from None
    if cfg.get("stability", "mode") not in STABILITY_MODES:
        raise ConfigError(f"[stability.mode] must be one of {STABILITY_MODES}", key="stability.mode")
    if cfg.get("stability", "perturbations") < 1:
        raise ConfigError("[stability.perturbations] must be >= 1", key="stability.perturbations")
    if not all(cfg.get("domain", "a") < x < cfg.get("domain", "b") for x in cfg.get("mc", "points")):
        raise ConfigError("[mc.points] must lie inside the domain", key="mc.points")


def parse_config(text, source="<config>"):
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    vals = {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]", key=section)
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key {section}.{key}", key=f"{section}.{key}")
            parse = SCHEMA[section][key][0]
            try:
                vals[section][key] = parse(raw)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{source}: bad value for {section}.{key}: {exc}", key=f"{section}.{key}") from None
    try:
        return _freeze(vals)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}", key=exc.key) from None


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", key=str(path)) from None
    return parse_config(text, source=str(path))
