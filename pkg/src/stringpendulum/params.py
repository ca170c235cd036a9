"""Physical and numerical parameters of the string pendulum model.

Conventions (see also the glossary in the README):

* ``e3 = [0, 0, 1]`` is the direction of the gravitational *force*; gravitational
  potentials carry a ``-m g r . e3`` term, so bodies accelerate toward +e3.
* ``s_p`` is the unstretched arc length between the drum attachment point and the
  material point at the guide way entrance.  The deployed portion of the string
  has unstretched length ``L - s_p``.
* Node positions ``q_a`` are measured relative to the (inertially fixed) guide
  way entrance ``r_p``.  Node 1 is pinned: ``q_1 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

E3 = np.array([0.0, 0.0, 1.0])


def _vec3(v, name):
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} must be a finite 3-vector")
    return arr


@dataclass(frozen=True)
class ReelParams:
    """Drum plus guide way.  ``kappa_d`` scales the drum inertia ``I_d = kappa_d d^2``."""

    d: float = 0.5            # drum radius (m)
    b: float = 0.5            # drum-to-guide-way length (m)
    kappa_d: float = 1.0      # drum inertia coefficient (kg)
    r_d: np.ndarray = field(default_factory=lambda: np.zeros(3))  # drum axis origin (m)

    def __post_init__(self):
        object.__setattr__(self, "r_d", _vec3(self.r_d, "reel.r_d"))
        if self.d <= 0.0:
            raise ConfigError("reel.d must be positive")
        if self.b < 0.0:
            raise ConfigError("reel.b must be non-negative")
        if self.kappa_d < 0.0:
            raise ConfigError("reel.kappa_d must be non-negative")


@dataclass(frozen=True)
class StringParams:
    mu: float = 0.025          # mass per unit unstretched length (kg/m)
    ea: float = 40.0           # axial stiffness EA (N)
    total_length: float = 100.0  # total unstretched length L (m)

    def __post_init__(self):
        if self.mu <= 0.0:
            raise ConfigError("string.mu must be positive")
        if self.ea <= 0.0:
            raise ConfigError("string.ea must be positive")
        if self.total_length <= 0.0:
            raise ConfigError("string.total_length must be positive")


@dataclass(frozen=True)
class BodyParams:
    """Rigid body attached at the free end of the string.

    The body frame origin is the attachment point; ``rho_c`` is the offset to the
    center of mass in the body frame and ``inertia`` is taken about the
    attachment point in the body frame.
    """

    mass: float = 0.1
    inertia: np.ndarray = field(default_factory=lambda: 0.01 * np.eye(3))
    rho_c: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "rho_c", _vec3(self.rho_c, "body.rho_c"))
        J = np.asarray(self.inertia, dtype=float)
        if J.shape != (3, 3) or not np.all(np.isfinite(J)):
            raise ConfigError("body.inertia must be a finite 3x3 matrix")
        if np.linalg.norm(J - J.T) > 1e-12 * max(1.0, np.linalg.norm(J)):
            raise ConfigError("body.inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(J) <= 0.0):
            raise ConfigError("body.inertia must be positive definite")
        object.__setattr__(self, "inertia", J)
        if self.mass <= 0.0:
            raise ConfigError("body.mass must be positive")


@dataclass(frozen=True)
class Environment:
    gravity: float = 9.81
    r_p: np.ndarray = field(default_factory=lambda: np.zeros(3))  # guide way entrance

    def __post_init__(self):
        object.__setattr__(self, "r_p", _vec3(self.r_p, "env.r_p"))
        if self.gravity < 0.0:
            raise ConfigError("env.gravity must be non-negative")

    @property
    def down(self):
        """Direction of the gravitational force (fixed convention)."""
        return E3


@dataclass(frozen=True)
class Discretization:
    n_elements: int = 20
    time_step: float = 0.0005

    def __post_init__(self):
        if int(self.n_elements) < 1:
            raise ConfigError("disc.n_elements must be >= 1")
        object.__setattr__(self, "n_elements", int(self.n_elements))
        if self.time_step <= 0.0:
            raise ConfigError("disc.time_step must be positive")


@dataclass(frozen=True)
class ModelParams:
    reel: ReelParams = field(default_factory=ReelParams)
    string: StringParams = field(default_factory=StringParams)
    body: BodyParams = field(default_factory=BodyParams)
    env: Environment = field(default_factory=Environment)
    disc: Discretization = field(default_factory=Discretization)


@dataclass(frozen=True)
class ControlInput:
    """Control moment applied at the drum.

    ``mode`` is one of ``"none"``, ``"constant"`` or ``"tabulated"``.  A table is
    a sequence of ``(t, u)`` pairs interpreted as a piecewise-constant signal
    (value holds from its time until the next entry).
    """

    mode: str = "none"
    value: float = 0.0
    table: tuple = ()

    def __post_init__(self):
        if self.mode not in ("none", "constant", "tabulated"):
            raise ConfigError(f"unknown control mode {self.mode!r}")
        if self.mode == "tabulated":
            tab = tuple((float(t), float(u)) for t, u in self.table)
            if not tab:
                raise ConfigError("tabulated control requires a non-empty table")
            if any(not np.isfinite(t) or not np.isfinite(u) for t, u in tab):
                raise ConfigError("control table entries must be finite")
            if list(tab) != sorted(tab, key=lambda p: p[0]):
                raise ConfigError("control table times must be increasing")
            object.__setattr__(self, "table", tab)
        if not np.isfinite(self.value):
            raise ConfigError("control value must be finite")

    def moment(self, t):
        """Control moment u(t) in N*m."""
        if self.mode == "none":
            return 0.0
        if self.mode == "constant":
            return self.value
        times = [p[0] for p in self.table]
        i = int(np.searchsorted(times, t, side="right")) - 1
        return self.table[max(i, 0)][1]
