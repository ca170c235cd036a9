"""Configuration group elements and relative updates.

The configuration manifold is the product group R x (R^3)^(N+1) x SO(3): the reel
coordinate and node positions compose by addition, the body attitude by matrix
multiplication.  A :class:`RelativeUpdate` is itself a group element; the flow map
only ever updates a configuration through :meth:`Configuration.advance`, which
keeps the attitude on SO(3) by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import liegroup
from .errors import ConfigError

__all__ = ["Configuration", "RelativeUpdate"]


@dataclass(frozen=True)
class Configuration:
    """One group element ``(s_p; q_1..q_{N+1}; R)``.

    ``q`` has shape ``(N+1, 3)``; row 0 is the pinned node at the guide way
    entrance and must be zero.
    """

    s_p: float
    q: np.ndarray
    R: np.ndarray = field(default_factory=liegroup.identity)

    def __post_init__(self):
        q = np.ascontiguousarray(self.q, dtype=float)
        if q.ndim != 2 or q.shape[1] != 3 or q.shape[0] < 2:
            raise ConfigError("q must have shape (N+1, 3) with N >= 1")
        if not np.all(np.isfinite(q)):
            raise ConfigError("q must be finite")
        if np.any(q[0] != 0.0):
            raise ConfigError("node 1 is pinned at the guide way entrance (q[0] must be 0)")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "s_p", float(self.s_p))
        object.__setattr__(self, "R", liegroup.check_rotation(self.R))

    @property
    def n_elements(self):
        return self.q.shape[0] - 1

    def advance(self, f: "RelativeUpdate") -> "Configuration":
        """Group action ``g * f``: add increments, right-multiply the attitude."""
        return Configuration(self.s_p + f.ds_p, self.q + f.dq, self.R @ f.F)

    def retreat(self, f: "RelativeUpdate") -> "Configuration":
        """Group action ``g * f^{-1}``: reconstruct the previous configuration."""
        return Configuration(self.s_p - f.ds_p, self.q - f.dq, self.R @ f.F.T)


@dataclass(frozen=True)
class RelativeUpdate:
    """One group element ``(ds_p; dq_1..dq_{N+1}; F)`` with Cayley coordinate ``c``.

    ``F`` is always derived from ``c`` through the Cayley transform, so it is
    orthogonal up to round-off and the pinned node never moves (``dq[0] = 0``).
    """

    ds_p: float
    dq: np.ndarray
    c: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        dq = np.ascontiguousarray(self.dq, dtype=float)
        if dq.ndim != 2 or dq.shape[1] != 3:
            raise ConfigError("dq must have shape (N+1, 3)")
        if not np.all(np.isfinite(dq)):
            raise ConfigError("dq must be finite")
        if np.any(dq[0] != 0.0):
            raise ConfigError("the pinned node never moves (dq[0] must be 0)")
        c = np.asarray(self.c, dtype=float)
        if c.shape != (3,) or not np.all(np.isfinite(c)):
            raise ConfigError("c must be a finite 3-vector")
        object.__setattr__(self, "dq", dq)
        object.__setattr__(self, "ds_p", float(self.ds_p))
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "F", liegroup.cayley(c))

    @classmethod
    def identity(cls, n_elements):
        return cls(0.0, np.zeros((n_elements + 1, 3)))

    @classmethod
    def _fast(cls, ds_p, dq, c):
        """Trusted-input constructor for solver inner loops; skips validation."""
        self = object.__new__(cls)
        object.__setattr__(self, "ds_p", ds_p)
        object.__setattr__(self, "dq", dq)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "F", liegroup.cayley(c))
        return self

    @classmethod
    def from_rotation(cls, ds_p, dq, F):
        """Build an update from an explicit relative rotation (angle < pi)."""
        return cls(ds_p, dq, liegroup.cayley_inverse(F))
