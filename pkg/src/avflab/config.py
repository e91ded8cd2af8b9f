"""Experiment configuration: flat ``key = value`` text with dotted keys.

Recognised keys::

    preset               start from a named preset, then apply the other keys
    problem.name         problem name (see ``avflab list-problems``)
    problem.N            resolution (polynomial degree p for Wave2dGll)
    problem.domain       "a,b"
    problem.paper_scale  true -> published resolution where the default is desk-sized
    problem.<param>      model parameter (alpha, gamma, c, d, p, q, r, epsilon)
    seed                 seed for random initial data
    scheme               avf | midpoint | backward_euler | reference
    dt, steps, record_every
    solver.method        newton | fixed_point
    solver.tol, solver.max_iter, solver.predictor
    out_dir
    emit.csv, emit.svg   true | false
"""
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .integrators import SCHEMES
from .solve import ImplicitSolveConfig
from .zoo import PROBLEMS, ProblemSpec, _snake, canonical_name


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    params: dict = field(default_factory=dict)
    N: int | None = None
    domain: tuple | None = None
    paper_scale: bool = False
    seed: int = 0
    scheme: str = "avf"
    dt: float = 0.01
    steps: int = 100
    record_every: int = 1
    solver: ImplicitSolveConfig = ImplicitSolveConfig()
    out_dir: str = "runs/out"
    emit_csv: bool = True
    emit_svg: bool = False
    preset: str = ""

    def validate(self):
        try:
            canonical_name(self.problem)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if not self.steps >= 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if not self.record_every >= 1:
            raise ConfigError(f"record_every must be >= 1, got {self.record_every}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        try:
            self.problem_spec().resolved()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def problem_spec(self):
        info = PROBLEMS[canonical_name(self.problem)]
        params = dict(info.params)
        params.update(self.params)
        N = self.N
        if N is None:
            N = info.paper_N if self.paper_scale else info.N
        return ProblemSpec(info.name, params, N, self.domain, self.seed)

    def to_items(self):
        """Fully resolved ``(key, value)`` pairs in a stable order."""
        spec = self.problem_spec().resolved()
        items = [("preset", self.preset), ("problem.name", spec.name), ("problem.N", spec.N),
                 ("problem.domain", f"{spec.domain[0]!r},{spec.domain[1]!r}"),
                 ("problem.paper_scale", self.paper_scale)]
        items += [(f"problem.{k}", v) for k, v in sorted(spec.params.items())]
        items += [("seed", self.seed), ("scheme", self.scheme), ("dt", self.dt), ("steps", self.steps),
                  ("record_every", self.record_every)]
        items += [(f"solver.{k}", v) for k, v in asdict(self.solver).items()]
        items += [("out_dir", self.out_dir), ("emit.csv", self.emit_csv), ("emit.svg", self.emit_svg)]
        return [(k, _fmt(v)) for k, v in items]


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _bool(s):
    t = str(s).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _preset_table():
    table = {}
    for name, info in PROBLEMS.items():
        base = dict(problem=name, dt=info.dt, steps=info.steps)
        table[f"{_snake(name)}_paper"] = ExperimentConfig(
            **base, paper_scale=True, preset=f"{_snake(name)}_paper")
        table[f"{_snake(name)}_desk"] = ExperimentConfig(
            problem=name, dt=info.dt, steps=max(1, info.steps // 2), preset=f"{_snake(name)}_desk")
    return table


PRESETS = _preset_table()


def parse_text(text):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def apply(cfg, pairs):
    """Return ``cfg`` with the string ``pairs`` applied on top."""
    pairs = dict(pairs)
    if "preset" in pairs:
        cfg = get_preset(pairs.pop("preset"))
    changes, params, solver = {}, dict(cfg.params), {}
    try:
        for key, val in pairs.items():
            if key == "problem.name":
                changes["problem"] = canonical_name(val)
            elif key == "problem.N":
                changes["N"] = int(val)
            elif key == "problem.domain":
                a, b = (float(x) for x in val.split(","))
                changes["domain"] = (a, b)
            elif key == "problem.paper_scale":
                changes["paper_scale"] = _bool(val)
            elif key.startswith("problem."):
                params[key.split(".", 1)[1]] = float(val)
            elif key == "seed":
                changes["seed"] = int(val)
            elif key == "scheme":
                changes["scheme"] = val
            elif key == "dt":
                changes["dt"] = float(val)
            elif key in ("steps", "record_every"):
                changes[key] = int(val)
            elif key == "solver.method":
                solver["method"] = val
            elif key == "solver.tol":
                solver["tol"] = float(val)
            elif key == "solver.max_iter":
                solver["max_iter"] = int(val)
            elif key == "solver.predictor":
                solver["predictor"] = val
            elif key == "out_dir":
                changes["out_dir"] = val
            elif key == "emit.csv":
                changes["emit_csv"] = _bool(val)
            elif key == "emit.svg":
                changes["emit_svg"] = _bool(val)
            else:
                raise ConfigError(f"unknown config key {key!r}")
        if solver:
            changes["solver"] = replace(cfg.solver, **solver)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if "problem" in changes and changes["problem"] != canonical_name(cfg.problem):
        params = {k: v for k, v in params.items() if k not in PROBLEMS[canonical_name(cfg.problem)].params}
    changes["params"] = params
    return replace(cfg, **changes)


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}") from None


def load(source, overrides=()):
    """Build a validated config from a preset name or a config file, plus
    ``key=value`` override strings."""
    path = Path(source)
    if source in PRESETS:
        cfg = PRESETS[source]
        pairs = {}
    elif path.is_file():
        pairs = parse_text(path.read_text(encoding="utf-8"))
        cfg = get_preset(pairs.pop("preset")) if "preset" in pairs else None
        if cfg is None:
            if "problem.name" not in pairs:
                raise ConfigError(f"{source}: needs a preset or problem.name")
            cfg = ExperimentConfig(problem=canonical_name(pairs["problem.name"]))
    else:
        raise ConfigError(f"{source!r} is neither a preset nor a config file")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        pairs[k.strip()] = v.strip()
    return apply(cfg, pairs).validate()
