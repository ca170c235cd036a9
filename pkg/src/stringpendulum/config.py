"""Run configuration: INI-style files, validation, and initial-state assembly.

The file format is flat sectioned key-value text with sections [reel],
[string], [body], [sim], [initial], [control], [newton], [output].  Every key
is validated; unknown sections or keys are hard errors so that typos cannot
silently fall back to defaults.  ``load_config(write_config(c)) == c`` holds
for all valid configs (floats are serialized with full round-trip precision).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
import configparser

import numpy as np

from .errors import ConfigError
from .integrator import InitialVelocities, NewtonSettings
from .params import (
    BodyParams,
    ControlInput,
    Discretization,
    Environment,
    ModelParams,
    ReelParams,
    StringParams,
)
from .state import Configuration

__all__ = [
    "InitialConditions",
    "RunSettings",
    "RunConfig",
    "load_config",
    "loads_config",
    "write_config",
    "dumps_config",
    "build_initial_state",
    "config_equal",
]


@dataclass(frozen=True)
class InitialConditions:
    """Initial configuration and velocities in declarative form.

    ``layout = "direction"`` places the nodes on a straight line from the
    pivot: node ``a`` at ``spacing * (a - 1) * direction`` (direction is
    normalized; spacing defaults to the unstretched element length at
    ``s_p0``).  ``layout = "explicit"`` takes the node list verbatim.
    """

    s_p0: float
    layout: str = "direction"
    direction: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    spacing: float = 0.0          # 0 means "use the unstretched element length"
    nodes: tuple = ()             # explicit layout only: ((x, y, z), ...)
    s_p_rate: float = 0.0
    end_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    attitude: np.ndarray = field(default_factory=lambda: np.eye(3))
    omega0: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.layout not in ("direction", "explicit"):
            raise ConfigError(f"initial.layout must be 'direction' or 'explicit', "
                              f"got {self.layout!r}")
        object.__setattr__(self, "direction",
                           np.asarray(self.direction, dtype=float))
        object.__setattr__(self, "end_velocity",
                           np.asarray(self.end_velocity, dtype=float))
        object.__setattr__(self, "attitude", np.asarray(self.attitude, dtype=float))
        object.__setattr__(self, "omega0", np.asarray(self.omega0, dtype=float))
        if self.layout == "direction":
            if np.linalg.norm(self.direction) == 0.0:
                raise ConfigError("initial.direction must be nonzero")
        else:
            nodes = tuple(tuple(float(x) for x in row) for row in self.nodes)
            if not nodes or any(len(row) != 3 for row in nodes):
                raise ConfigError("initial.nodes must be a list of 3-vectors")
            object.__setattr__(self, "nodes", nodes)
        if self.spacing < 0.0:
            raise ConfigError("initial.spacing must be non-negative")


@dataclass(frozen=True)
class RunSettings:
    duration: float = 10.0
    output_every: int = 20        # steps between time-series rows
    snapshot_every: int = 2000    # steps between geometry snapshots, 0 disables
    fixed_length: bool = False
    init: str = "momentum"        # first-update scheme: momentum | simple

    def __post_init__(self):
        if self.duration <= 0.0:
            raise ConfigError("sim.duration must be positive")
        if self.output_every < 1:
            raise ConfigError("sim.output_every must be >= 1")
        if self.snapshot_every < 0:
            raise ConfigError("sim.snapshot_every must be >= 0")
        if self.init not in ("momentum", "simple"):
            raise ConfigError("sim.init must be 'momentum' or 'simple'")


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    initial: InitialConditions
    control: ControlInput
    run: RunSettings
    newton: NewtonSettings
    output_dir: str = "out"


def build_initial_state(cfg: RunConfig):
    """Expand the declarative initial conditions to ``(g0, velocities)``."""
    n = cfg.model.disc.n_elements
    init = cfg.initial
    if init.layout == "direction":
        direction = init.direction / np.linalg.norm(init.direction)
        spacing = init.spacing
        if spacing == 0.0:
            spacing = (cfg.model.string.total_length - init.s_p0) / n
        q = spacing * np.arange(n + 1)[:, None] * direction
    else:
        q = np.array(init.nodes, dtype=float)
        if q.shape != (n + 1, 3):
            raise ConfigError(
                f"initial.nodes has {q.shape[0]} rows, expected {n + 1}")
    g0 = Configuration(init.s_p0, q, init.attitude)
    q_rates = np.zeros_like(q)
    q_rates[-1] = init.end_velocity
    vel = InitialVelocities(init.s_p_rate, q_rates, init.omega0)
    return g0, vel


# --- serialization ---------------------------------------------------------

def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _fmt_vec(v):
    return " ".join(_fmt(float(x)) for x in np.asarray(v).ravel())


def _parse_vec(text, size, key):
    parts = text.split()
    if len(parts) != size:
        raise ConfigError(f"{key} must have {size} entries")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _parse_bool(text, key):
    t = text.strip().lower()
    if t in ("true", "1", "yes", "on"):
        return True
    if t in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {text!r}")


_SCHEMA = {
    "reel": {"d", "b", "kappa_d", "r_d"},
    "string": {"mu", "ea", "total_length"},
    "body": {"mass", "rho_c", "inertia"},
    "sim": {"n_elements", "time_step", "gravity", "r_p", "duration",
            "output_every", "snapshot_every", "fixed_length", "init"},
    "initial": {"s_p0", "layout", "direction", "spacing", "nodes", "s_p_rate",
                "end_velocity", "attitude", "omega0"},
    "control": {"mode", "value", "table"},
    "newton": {"tol", "max_iter", "fd_step", "jacobian_reuse"},
    "output": {"dir"},
}


def _section(parser, name):
    if not parser.has_section(name):
        return {}
    items = dict(parser.items(name))
    unknown = set(items) - _SCHEMA[name]
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    return items


def loads_config(text, source="<string>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    unknown_sections = set(parser.sections()) - set(_SCHEMA)
    if unknown_sections:
        raise ConfigError(f"unknown sections: {sorted(unknown_sections)}")

    def num(items, key, section, cast=float, default=None):
        if key not in items:
            if default is None:
                raise ConfigError(f"missing key {section}.{key}")
            return default
        try:
            return cast(items[key])
        except ValueError as exc:
            raise ConfigError(f"{section}.{key}: {exc}") from exc

    reel_items = _section(parser, "reel")
    reel = ReelParams(
        d=num(reel_items, "d", "reel", default=0.5),
        b=num(reel_items, "b", "reel", default=0.5),
        kappa_d=num(reel_items, "kappa_d", "reel", default=1.0),
        r_d=_parse_vec(reel_items["r_d"], 3, "reel.r_d")
        if "r_d" in reel_items else np.zeros(3),
    )
    s_items = _section(parser, "string")
    string = StringParams(
        mu=num(s_items, "mu", "string", default=0.025),
        ea=num(s_items, "ea", "string", default=40.0),
        total_length=num(s_items, "total_length", "string", default=100.0),
    )
    b_items = _section(parser, "body")
    body = BodyParams(
        mass=num(b_items, "mass", "body", default=0.1),
        rho_c=_parse_vec(b_items["rho_c"], 3, "body.rho_c")
        if "rho_c" in b_items else np.zeros(3),
        inertia=_parse_vec(b_items["inertia"], 9, "body.inertia").reshape(3, 3)
        if "inertia" in b_items else 0.01 * np.eye(3),
    )
    sim_items = _section(parser, "sim")
    disc = Discretization(
        n_elements=num(sim_items, "n_elements", "sim", cast=int, default=20),
        time_step=num(sim_items, "time_step", "sim", default=0.0005),
    )
    env = Environment(
        gravity=num(sim_items, "gravity", "sim", default=9.81),
        r_p=_parse_vec(sim_items["r_p"], 3, "sim.r_p")
        if "r_p" in sim_items else np.zeros(3),
    )
    run = RunSettings(
        duration=num(sim_items, "duration", "sim", default=10.0),
        output_every=num(sim_items, "output_every", "sim", cast=int, default=20),
        snapshot_every=num(sim_items, "snapshot_every", "sim", cast=int,
                           default=2000),
        fixed_length=_parse_bool(sim_items["fixed_length"], "sim.fixed_length")
        if "fixed_length" in sim_items else False,
        init=sim_items.get("init", "momentum"),
    )

    i_items = _section(parser, "initial")
    if "s_p0" not in i_items:
        raise ConfigError("missing key initial.s_p0")
    nodes = ()
    if "nodes" in i_items:
        rows = [r for r in i_items["nodes"].split(";") if r.strip()]
        nodes = tuple(tuple(_parse_vec(r, 3, "initial.nodes")) for r in rows)
    initial = InitialConditions(
        s_p0=num(i_items, "s_p0", "initial"),
        layout=i_items.get("layout", "direction"),
        direction=_parse_vec(i_items["direction"], 3, "initial.direction")
        if "direction" in i_items else np.array([1.0, 0.0, 0.0]),
        spacing=num(i_items, "spacing", "initial", default=0.0),
        nodes=nodes,
        s_p_rate=num(i_items, "s_p_rate", "initial", default=0.0),
        end_velocity=_parse_vec(i_items["end_velocity"], 3,
                                "initial.end_velocity")
        if "end_velocity" in i_items else np.zeros(3),
        attitude=_parse_vec(i_items["attitude"], 9,
                            "initial.attitude").reshape(3, 3)
        if "attitude" in i_items else np.eye(3),
        omega0=_parse_vec(i_items["omega0"], 3, "initial.omega0")
        if "omega0" in i_items else np.zeros(3),
    )

    c_items = _section(parser, "control")
    table = ()
    if "table" in c_items:
        rows = [r for r in c_items["table"].split(";") if r.strip()]
        table = tuple(tuple(_parse_vec(r, 2, "control.table")) for r in rows)
    control = ControlInput(
        mode=c_items.get("mode", "none"),
        value=num(c_items, "value", "control", default=0.0),
        table=table,
    )

    n_items = _section(parser, "newton")
    try:
        newton = NewtonSettings(
            tol=num(n_items, "tol", "newton", default=1e-10),
            max_iter=num(n_items, "max_iter", "newton", cast=int, default=50),
            fd_step=num(n_items, "fd_step", "newton", default=1e-7),
            jacobian_reuse=num(n_items, "jacobian_reuse", "newton", cast=int,
                               default=1),
        )
    except ValueError as exc:
        raise ConfigError(f"newton: {exc}") from exc

    o_items = _section(parser, "output")
    model = ModelParams(reel=reel, string=string, body=body, env=env, disc=disc)
    cfg = RunConfig(model=model, initial=initial, control=control, run=run,
                    newton=newton, output_dir=o_items.get("dir", "out"))
    build_initial_state(cfg)  # validate node counts and layout up front
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return loads_config(path.read_text(), source=str(path))


def dumps_config(cfg: RunConfig) -> str:
    m = cfg.model
    lines = []

    def sec(name, pairs):
        lines.append(f"[{name}]")
        for k, v in pairs:
            lines.append(f"{k} = {v}")
        lines.append("")

    sec("reel", [("d", _fmt(m.reel.d)), ("b", _fmt(m.reel.b)),
                 ("kappa_d", _fmt(m.reel.kappa_d)),
                 ("r_d", _fmt_vec(m.reel.r_d))])
    sec("string", [("mu", _fmt(m.string.mu)), ("ea", _fmt(m.string.ea)),
                   ("total_length", _fmt(m.string.total_length))])
    sec("body", [("mass", _fmt(m.body.mass)),
                 ("rho_c", _fmt_vec(m.body.rho_c)),
                 ("inertia", _fmt_vec(m.body.inertia))])
    sec("sim", [("n_elements", _fmt(m.disc.n_elements)),
                ("time_step", _fmt(m.disc.time_step)),
                ("gravity", _fmt(m.env.gravity)),
                ("r_p", _fmt_vec(m.env.r_p)),
                ("duration", _fmt(cfg.run.duration)),
                ("output_every", _fmt(cfg.run.output_every)),
                ("snapshot_every", _fmt(cfg.run.snapshot_every)),
                ("fixed_length", _fmt(cfg.run.fixed_length)),
                ("init", cfg.run.init)])
    init_pairs = [("s_p0", _fmt(cfg.initial.s_p0)),
                  ("layout", cfg.initial.layout)]
    if cfg.initial.layout == "direction":
        init_pairs += [("direction", _fmt_vec(cfg.initial.direction)),
                       ("spacing", _fmt(cfg.initial.spacing))]
    else:
        init_pairs.append(
            ("nodes", "; ".join(_fmt_vec(row) for row in cfg.initial.nodes)))
    init_pairs += [("s_p_rate", _fmt(cfg.initial.s_p_rate)),
                   ("end_velocity", _fmt_vec(cfg.initial.end_velocity)),
                   ("attitude", _fmt_vec(cfg.initial.attitude)),
                   ("omega0", _fmt_vec(cfg.initial.omega0))]
    sec("initial", init_pairs)
    ctrl_pairs = [("mode", cfg.control.mode), ("value", _fmt(cfg.control.value))]
    if cfg.control.table:
        ctrl_pairs.append(
            ("table", "; ".join(_fmt_vec(row) for row in cfg.control.table)))
    sec("control", ctrl_pairs)
    sec("newton", [("tol", _fmt(cfg.newton.tol)),
                   ("max_iter", _fmt(cfg.newton.max_iter)),
                   ("fd_step", _fmt(cfg.newton.fd_step)),
                   ("jacobian_reuse", _fmt(cfg.newton.jacobian_reuse))])
    sec("output", [("dir", cfg.output_dir)])
    return "\n".join(lines)


def write_config(cfg: RunConfig, path):
    Path(path).write_text(dumps_config(cfg))


def config_equal(a: RunConfig, b: RunConfig) -> bool:
    """Field-wise equality including array-valued fields."""
    return dumps_config(a) == dumps_config(b)
