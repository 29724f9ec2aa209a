"""Run configuration and its plain-text ``key = value`` file format.

Schema (version 1)::

    version = 1
    kind = fixed              # fixed | random | chern | custom
    j1 = 0.2
    j2 = 0.2
    n_shells = 100
    theta0 = 1.5707963267948966
    phi0 = 3.141592653589793
    dtheta = 0.031415926535897934
    dphi = 0.06283185307179587
    grid = 9 9 9              # (n_alpha, n_theta, n_phi) for kind = random
    sphere = 20 20            # (n_theta, n_phi) for kind = chern
    amplitude = 0.1
    envelope_width = 0.3
    seed = 0
    analytic = false
    warm_start = false
    threads = 1
    out = results
    solver.sv_cutoff = 1e-8
    solver.dtau = 0.1 0.0316 0.01 0.00316 0.001

Blank lines and ``#`` comments are ignored; unknown keys are an error.
"""

from dataclasses import asdict, dataclass, field, fields, replace
import math

from .errors import ConfigError
from .io import stable_hash
from .solver import SolverOptions

CONFIG_VERSION = 1
KINDS = ("fixed", "random", "chern", "custom")


@dataclass(frozen=True)
class RunConfig:
    kind: str = "fixed"
    j1: float = 0.0
    j2: float = 0.0
    n_shells: int = 100
    theta0: float = math.pi / 2
    phi0: float = math.pi
    dtheta: float = math.pi / 100
    dphi: float = 2 * math.pi / 100
    grid: tuple = (9, 9, 9)
    sphere: tuple = (20, 20)
    amplitude: float = 0.1
    envelope_width: float = 0.3
    seed: int = 0
    analytic: bool = False
    warm_start: bool = False
    threads: int = 1
    out: str = None
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n_shells < 2 or min(self.grid) < 2 or min(self.sphere) < 2:
            raise ConfigError("grid sizes must be >= 2")
        if len(self.grid) != 3 or len(self.sphere) != 2:
            raise ConfigError("grid needs 3 sizes and sphere needs 2")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.analytic and (self.j1 or self.j2):
            raise ConfigError("analytic states exist only for j1 = j2 = 0")

    def physics(self):
        """Fields that determine the numbers (everything but output and threads)."""
        doc = asdict(self)
        doc.pop("out")
        doc.pop("threads")
        doc["solver"] = list(self.solver.key())
        return doc

    def config_hash(self):
        return stable_hash(self.physics())


_TUPLE_INT = {"grid", "sphere"}


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _convert(name, text, proto):
    if name in _TUPLE_INT:
        return tuple(int(x) for x in text.split())
    if name == "dtau":
        return tuple(float(x) for x in text.split())
    if isinstance(proto, bool):
        return _parse_bool(text)
    if isinstance(proto, int):
        return int(text)
    if isinstance(proto, float):
        return float(text)
    return text.strip()


def parse_config(text):
    top, solver = {}, {}
    version = None
    top_fields = {f.name: f for f in fields(RunConfig)}
    solver_defaults = SolverOptions()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        try:
            if key == "version":
                version = int(value)
            elif key.startswith("solver."):
                name = key[len("solver."):]
                if not hasattr(solver_defaults, name):
                    raise ConfigError(f"line {lineno}: unknown solver option {name!r}")
                solver[name] = _convert(name, value, getattr(solver_defaults, name))
            elif key in top_fields and key != "solver":
                proto = getattr(RunConfig(), key)
                top[key] = _convert(key, value, proto if proto is not None else "")
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    if version != CONFIG_VERSION:
        raise ConfigError(f"config version must be {CONFIG_VERSION}, got {version}")
    return RunConfig(**top, solver=SolverOptions(**solver))


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def dump_config(cfg):
    lines = [f"version = {CONFIG_VERSION}"]
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if f.name == "solver" or value is None:
            continue
        lines.append(f"{f.name} = {_format(value)}")
    for f in fields(SolverOptions):
        lines.append(f"solver.{f.name} = {_format(getattr(cfg.solver, f.name))}")
    return "\n".join(lines) + "\n"


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return " ".join(repr(x) for x in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def with_overrides(cfg, **kw):
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
