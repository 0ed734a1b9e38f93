"""Flat dotted key = value run configuration.

    # comment
    problem.s = 0.5
    grid.n = 128
    scan.eps_list = 0.8, 0.4, 0.2, 0.1

Unknown keys and malformed values are errors that carry the file and line.
"""
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FracgroundError, ParameterError
from .grid import Grid
from .nonlinearity import ProblemParams, validate_params
from .solver import SolverConfig


class ConfigError(FracgroundError):
    pass


@dataclass
class GridSpec:
    dim: int = 2
    n: int = 128
    L: float = 12.0

    def build(self):
        return Grid(self.dim, self.n, self.L)


@dataclass
class ScanSpec:
    eps_list: tuple = (0.8, 0.4, 0.2, 0.1)
    n: int = 256
    L: float = 12.0
    kappa: float = 1.0


@dataclass
class PathSpec:
    t_max: float = 0.0  # 0 selects the default 1.5 (N/(N-2s))^{1/(2s)}
    samples: int = 101


@dataclass
class VerifySpec:
    el_tol: float = 1e-2
    pohozaev_tol: float = 1e-2
    mu_tol: float = 5e-2
    geometry_samples: int = 200


@dataclass
class OutputSpec:
    directory: str = "out"
    formats: tuple = ("json", "csv", "bin")


@dataclass
class RunConfig:
    problem: ProblemParams = field(default_factory=ProblemParams)
    grid: GridSpec = field(default_factory=GridSpec)
    solver: SolverConfig = field(default_factory=SolverConfig)
    scan: ScanSpec = field(default_factory=ScanSpec)
    path: PathSpec = field(default_factory=PathSpec)
    verify: VerifySpec = field(default_factory=VerifySpec)
    outputs: OutputSpec = field(default_factory=OutputSpec)
    seed: int = 0

    def as_dict(self):
        return dataclasses.asdict(self)


_SECTIONS = ("problem", "grid", "solver", "scan", "path", "verify", "outputs")


def _convert(raw, current, where):
    try:
        if isinstance(current, bool):
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(current, int):
            return int(raw)
        if isinstance(current, float):
            return float(raw)
        if isinstance(current, tuple):
            items = [x.strip() for x in raw.split(",") if x.strip()]
            if current and isinstance(current[0], float):
                return tuple(float(x) for x in items)
            return tuple(items)
        return raw
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {type(current).__name__}") from None


def parse_config_text(text, source="<config>"):
    """Parse config text into {section: {key: raw string}} plus top-level keys."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        where = f"{source}:{lineno}"
        if "=" not in body:
            raise ConfigError(f"{where}: expected 'key = value'")
        key, value = (x.strip() for x in body.split("=", 1))
        if not key:
            raise ConfigError(f"{where}: empty key")
        if key in out:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        out[key] = (value, where)
    return out


def build_config(entries):
    sections = {name: {} for name in _SECTIONS}
    defaults = RunConfig()
    seed = defaults.seed
    for key, (raw, where) in entries.items():
        if key == "seed":
            seed = _convert(raw, 0, where)
            continue
        if "." not in key:
            raise ConfigError(f"{where}: unknown top-level key {key!r}")
        sec, name = key.split(".", 1)
        if sec not in sections:
            raise ConfigError(f"{where}: unknown section {sec!r}")
        proto = getattr(defaults, sec)
        if name not in {f.name for f in dataclasses.fields(proto)}:
            raise ConfigError(f"{where}: unknown key {key!r}")
        sections[sec][name] = (_convert(raw, getattr(proto, name), where), where)

    def make(sec, cls):
        vals = {k: v for k, (v, _) in sections[sec].items()}
        try:
            return cls(**{**dataclasses.asdict(getattr(defaults, sec)), **vals})
        except (ParameterError, ValueError, TypeError) as exc:
            where = ", ".join(w for _, w in sections[sec].values()) or sec
            raise ConfigError(f"{where}: invalid [{sec}] settings: {exc}") from None

    problem = make("problem", ProblemParams)
    try:
        validate_params(problem)
    except ParameterError as exc:
        raise ConfigError(f"[problem]: {exc}") from None
    cfg = RunConfig(problem=problem, grid=make("grid", GridSpec), solver=make("solver", SolverConfig),
                    scan=make("scan", ScanSpec), path=make("path", PathSpec), verify=make("verify", VerifySpec),
                    outputs=make("outputs", OutputSpec), seed=seed)
    try:
        cfg.grid.build()
    except ParameterError as exc:
        raise ConfigError(f"[grid]: {exc}") from None
    return cfg


def load_config(path=None):
    if path is None:
        return RunConfig()
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    return build_config(parse_config_text(text, str(p)))


def dump_config(cfg):
    """Inverse of load_config for the supported keys."""
    lines = []
    for sec in _SECTIONS:
        for k, v in dataclasses.asdict(getattr(cfg, sec)).items():
            if sec == "problem" and k == "two_star":
                continue
            if isinstance(v, (tuple, list)):
                v = ", ".join(str(x) for x in v)
            lines.append(f"{sec}.{k} = {v}")
    lines.append(f"seed = {cfg.seed}")
    return "\n".join(lines) + "\n"
