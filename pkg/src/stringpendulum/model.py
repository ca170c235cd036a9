"""Discrete energies, the discrete Lagrangian, and its closed-form derivatives.

The deployed string is discretized into N identical line elements with linear
(tent) shape functions.  All kinetic energies are finite-difference quadratic
forms in the increments of a :class:`~stringpendulum.state.RelativeUpdate`; the
element inertia coefficients depend on the configuration through the unstretched
element length and the node positions.

Every closed-form derivative in :func:`derivatives_of_Ld` is validated against
central finite differences of :func:`discrete_lagrangian` in the test suite; the
integrator assembles its residual purely from these derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateElementError, FullyDeployedError
from .params import E3, ModelParams
from .state import Configuration, RelativeUpdate

__all__ = [
    "InertiaCoeffs",
    "PotentialParts",
    "DerivativeBundle",
    "element_length",
    "inertia_coeffs",
    "kinetic_reel",
    "kinetic_element",
    "kinetic_body",
    "kinetic_rotational",
    "kinetic_total",
    "potential",
    "grad_elastic",
    "potential_gradients",
    "discrete_lagrangian",
    "derivatives_of_Ld",
    "coadjoint_F",
]

#: Elements shorter than this are treated as degenerate.
MIN_NODE_SEPARATION = 1e-12

_EYE3 = np.eye(3)


def _cross3(a, b):
    """Cross product of two 3-vectors; avoids np.cross dispatch overhead."""
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


def element_length(s_p, params: ModelParams):
    """Unstretched length of one element, ``(L - s_p) / N``."""
    l = (params.string.total_length - s_p) / params.disc.n_elements
    if l <= 0.0:
        raise FullyDeployedError(f"string fully deployed (s_p = {s_p} >= L)")
    return l


@dataclass(frozen=True)
class InertiaCoeffs:
    """Element inertia coefficients of the discrete kinetic energy.

    Scalars ``m1, m2, m12`` are shared by all elements; ``m3`` (shape ``(N,)``)
    and the coupling vectors ``m23, m31`` (shape ``(N, 3)``) are per element.
    ``m0`` collects the reel inertia together with the total ``m3`` sum; ``j_d``
    is the non-standard body inertia ``tr(J)/2 I - J``.
    """

    m0: float
    m1: float
    m2: float
    m12: float
    m3: np.ndarray
    m23: np.ndarray
    m31: np.ndarray
    j_d: np.ndarray


def inertia_coeffs(s_p, q, params: ModelParams) -> InertiaCoeffs:
    n = params.disc.n_elements
    mu = params.string.mu
    l = element_length(s_p, params)
    a = np.arange(1, n + 1, dtype=float)
    m3 = (mu * l / 3.0) * (3 * n**2 + 3 * n + 1 - 6 * n * a - 3 * a + 3 * a**2) / n**2
    edge = q[:-1] - q[1:]
    m23 = (mu / 6.0) * ((1 + 3 * n - 3 * a) / n)[:, None] * edge
    m31 = (mu / 6.0) * ((2 + 3 * n - 3 * a) / n)[:, None] * edge
    J = params.body.inertia
    j_d = 0.5 * np.trace(J) * np.eye(3) - J
    m0 = mu * s_p + params.reel.kappa_d + mu * (params.string.total_length - s_p) / 3.0
    return InertiaCoeffs(
        m0=m0, m1=mu * l / 3.0, m2=mu * l / 3.0, m12=mu * l / 6.0,
        m3=m3, m23=m23, m31=m31, j_d=j_d,
    )


def kinetic_reel(s_p, ds_p, params: ModelParams):
    """Kinetic energy of the string on the drum and guide way plus the drum."""
    h = params.disc.time_step
    return (params.string.mu * s_p + params.reel.kappa_d) * ds_p**2 / (2.0 * h**2)


def kinetic_element(a, g: Configuration, f: RelativeUpdate,
                    coeffs: InertiaCoeffs, params: ModelParams):
    """Contribution of element ``a`` (1-based) to the string kinetic energy."""
    h2 = params.disc.time_step**2
    e = a - 1
    da, db = f.dq[e], f.dq[e + 1]
    ds = f.ds_p
    return (
        0.5 * coeffs.m1 * da @ da
        + 0.5 * coeffs.m2 * db @ db
        + 0.5 * coeffs.m3[e] * ds**2
        + coeffs.m12 * da @ db
        + ds * (coeffs.m23[e] @ db)
        + ds * (coeffs.m31[e] @ da)
    ) / h2


def _kinetic_string(f: RelativeUpdate, coeffs: InertiaCoeffs, h):
    dq = f.dq
    ds = f.ds_p
    da, db = dq[:-1], dq[1:]
    quad = (
        0.5 * coeffs.m1 * np.einsum("ij,ij->", da, da)
        + 0.5 * coeffs.m2 * np.einsum("ij,ij->", db, db)
        + 0.5 * np.sum(coeffs.m3) * ds**2
        + coeffs.m12 * np.einsum("ij,ij->", da, db)
        + ds * (np.einsum("ij,ij->", coeffs.m23, db) + np.einsum("ij,ij->", coeffs.m31, da))
    )
    return quad / h**2


def kinetic_body(g: Configuration, f: RelativeUpdate, params: ModelParams):
    h2 = params.disc.time_step**2
    M = params.body.mass
    rho_c = params.body.rho_c
    J = params.body.inertia
    j_d = 0.5 * np.trace(J) * np.eye(3) - J
    dq_end = f.dq[-1]
    return (
        0.5 * M * dq_end @ dq_end
        + np.trace((np.eye(3) - f.F) @ j_d)
        + M * dq_end @ (g.R @ ((f.F - np.eye(3)) @ rho_c))
    ) / h2


def kinetic_rotational(f: RelativeUpdate, params: ModelParams):
    """Rotational part of the body kinetic energy, ``tr[(I - F) J_d] / h^2``."""
    J = params.body.inertia
    j_d = 0.5 * np.trace(J) * np.eye(3) - J
    return float(np.trace((np.eye(3) - f.F) @ j_d)) / params.disc.time_step**2


def kinetic_total(g: Configuration, f: RelativeUpdate, params: ModelParams):
    coeffs = inertia_coeffs(g.s_p, g.q, params)
    h = params.disc.time_step
    return (
        kinetic_reel(g.s_p, f.ds_p, params)
        + _kinetic_string(f, coeffs, h)
        + kinetic_body(g, f, params)
    )


@dataclass(frozen=True)
class PotentialParts:
    reel: float
    string_gravity: float
    string_elastic: float
    body_gravity: float

    @property
    def total(self):
        return self.reel + self.string_gravity + self.string_elastic + self.body_gravity


def _edge_norms(q):
    delta = q[1:] - q[:-1]
    norms = np.sqrt(np.einsum("ij,ij->i", delta, delta))
    if np.any(norms < MIN_NODE_SEPARATION):
        bad = int(np.argmin(norms)) + 1
        raise DegenerateElementError(f"coincident nodes in element {bad}")
    return delta, norms


def potential(g: Configuration, params: ModelParams) -> PotentialParts:
    """Total potential energy split into its four named parts.

    The reel gravity term is taken from the integral form ``-mu g [(s_p - b)
    r_d.e3 + d^2 (cos((s_p - b)/d) - 1)]``, which is what the closed-form
    derivative below corresponds to.
    """
    mu = params.string.mu
    grav = params.env.gravity
    r_p = params.env.r_p
    reel = params.reel
    l = element_length(g.s_p, params)
    delta, norms = _edge_norms(g.q)

    phase = (g.s_p - reel.b) / reel.d
    v_reel = -mu * grav * (
        (g.s_p - reel.b) * (reel.r_d @ E3) + reel.d**2 * (math.cos(phase) - 1.0)
    )
    mid = 2.0 * r_p + g.q[:-1] + g.q[1:]
    v_sg = -0.5 * mu * grav * l * float(np.sum(mid @ E3))
    v_el = 0.5 * (params.string.ea / l) * float(np.sum((norms - l) ** 2))
    v_bg = -params.body.mass * grav * float(
        E3 @ (g.q[-1] + r_p + g.R @ params.body.rho_c)
    )
    return PotentialParts(v_reel, v_sg, v_el, v_bg)


def grad_elastic(a, q, l, params: ModelParams):
    """Tension vector of element ``a`` (1-based): gradient of its elastic energy
    with respect to the second node."""
    delta = q[a] - q[a - 1]
    norm = float(np.linalg.norm(delta))
    if norm < MIN_NODE_SEPARATION:
        raise DegenerateElementError(f"coincident nodes in element {a}")
    return (params.string.ea / l) * ((norm - l) / norm) * delta


def _elastic_gradients(delta, norms, l, ea):
    return (ea / l) * ((norms - l) / norms)[:, None] * delta


def potential_gradients(g: Configuration, params: ModelParams):
    """Closed-form gradient of the total potential at configuration ``g``.

    Returns ``(d_sp, d_q)`` where ``d_q`` has shape ``(N+1, 3)``; the pinned row
    0 is left at zero.  The elastic part of ``d_sp`` sits inside the element sum
    with a ``1/(2N)`` prefactor, which is what differentiating the element length
    ``(L - s_p)/N`` through the elastic energy yields.
    """
    return _potential_gradients_raw(g.s_p, g.q, params)


def _potential_gradients_raw(s_p, q, params: ModelParams):
    n = params.disc.n_elements
    mu = params.string.mu
    grav = params.env.gravity
    ea = params.string.ea
    r_p = params.env.r_p
    reel = params.reel
    l = element_length(s_p, params)
    delta, norms = _edge_norms(q)
    grad_e = _elastic_gradients(delta, norms, l, ea)

    mid = 2.0 * r_p + q[:-1] + q[1:]
    d_sp = (
        -mu * grav * (reel.r_d @ E3)
        + mu * grav * reel.d * math.sin((s_p - reel.b) / reel.d)
        + (mu * grav / (2.0 * n)) * float(np.sum(mid @ E3))
        + (ea / (2.0 * n * l**2)) * float(np.sum(norms**2 - l**2))
    )
    d_q = np.zeros_like(q)
    d_q[1:-1] = -mu * grav * l * E3 + grad_e[:-1] - grad_e[1:]
    d_q[-1] = -(0.5 * mu * l + params.body.mass) * grav * E3 + grad_e[-1]
    return d_sp, d_q


def discrete_lagrangian(g: Configuration, f: RelativeUpdate, params: ModelParams):
    """Trapezoidal discrete Lagrangian ``h T - (h/2) V_k - (h/2) V_{k+1}``."""
    h = params.disc.time_step
    g1 = g.advance(f)
    return (
        h * kinetic_total(g, f, params)
        - 0.5 * h * potential(g, params).total
        - 0.5 * h * potential(g1, params).total
    )


@dataclass(frozen=True)
class DerivativeBundle:
    """All closed-form derivatives of the discrete Lagrangian at ``(g, f)``.

    ``d_dq`` and ``d_q`` hold one row per node; row 0 (pinned node) is zero.
    The SO(3) derivatives are left-trivialized cotangent values in R^3:
    ``d_rot_update`` pairs with variations ``F hat(zeta)`` of the relative
    rotation, ``d_attitude`` with variations ``R hat(eta)`` of the attitude.
    """

    d_dsp: float
    d_dq: np.ndarray
    d_sp: float
    d_q: np.ndarray
    d_rot_update: np.ndarray
    d_attitude: np.ndarray


def _skew_vee(m):
    """vee of the skew part; equal to vee(m) when m is skew in exact arithmetic."""
    return 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def derivatives_of_Ld(g: Configuration, f: RelativeUpdate, params: ModelParams,
                      grads_k=None, coeffs=None) -> DerivativeBundle:
    """Closed-form derivatives of :func:`discrete_lagrangian` at ``(g, f)``.

    ``grads_k`` and ``coeffs`` may carry precomputed ``potential_gradients(g,
    params)`` and ``inertia_coeffs(g.s_p, g.q, params)`` when the caller
    evaluates many updates from the same configuration.
    """
    n = params.disc.n_elements
    h = params.disc.time_step
    mu = params.string.mu
    M = params.body.mass
    rho_c = params.body.rho_c
    grav = params.env.gravity

    if coeffs is None:
        coeffs = inertia_coeffs(g.s_p, g.q, params)
    if grads_k is None:
        grads_k = potential_gradients(g, params)
    dV0_sp, dV0_q = grads_k
    dV1_sp, dV1_q = _potential_gradients_raw(g.s_p + f.ds_p, g.q + f.dq, params)

    dq, ds, F, R = f.dq, f.ds_p, f.F, g.R
    m1, m2, m12 = coeffs.m1, coeffs.m2, coeffs.m12
    couple = coeffs.m31[1:] + coeffs.m23[:-1]      # per interior node 2..N
    body_drag = R @ ((F - _EYE3) @ rho_c)

    d_dq = np.zeros_like(dq)
    d_dq[1:-1] = (
        m12 * (dq[:-2] + dq[2:]) + 2.0 * m1 * dq[1:-1] + ds * couple
    ) / h - 0.5 * h * dV1_q[1:-1]
    d_dq[-1] = (
        (m2 + M) * dq[-1] + m12 * dq[-2] + ds * coeffs.m23[-1] + M * body_drag
    ) / h - 0.5 * h * dV1_q[-1]

    d_dsp = (
        coeffs.m0 * ds
        + float(np.einsum("ij,ij->", couple, dq[1:-1]))
        + coeffs.m23[-1] @ dq[-1]
    ) / h - 0.5 * h * dV1_sp

    pair = np.einsum("ij,ij->", dq[:-1], dq[:-1]) \
        + np.einsum("ij,ij->", dq[1:], dq[1:]) \
        + np.einsum("ij,ij->", dq[:-1], dq[1:])
    d_sp = mu * ds**2 / (3.0 * h) - mu * pair / (6.0 * n * h) \
        - 0.5 * h * (dV0_sp + dV1_sp)

    a = np.arange(2, n + 1, dtype=float)
    d_q = np.zeros_like(dq)
    d_q[1:-1] = (mu * ds / (6.0 * n * h)) * (
        (1 + 3 * n - 3 * a)[:, None] * dq[2:]
        - 2.0 * dq[1:-1]
        - (5 + 3 * n - 3 * a)[:, None] * dq[:-2]
    ) - 0.5 * h * (dV0_q[1:-1] + dV1_q[1:-1])
    d_q[-1] = -(mu * ds / (6.0 * n * h)) * (dq[-1] + 2.0 * dq[-2]) \
        - 0.5 * h * (dV0_q[-1] + dV1_q[-1])

    Rt_dq_end = R.T @ dq[-1]
    Rt_e3 = R.T @ E3
    Ft_Rt_e3 = F.T @ Rt_e3
    d_rot_update = (
        _skew_vee(coeffs.j_d @ F - F.T @ coeffs.j_d) / h
        + (M / h) * _cross3(rho_c, F.T @ Rt_dq_end)
        + 0.5 * h * M * grav * _cross3(rho_c, Ft_Rt_e3)
    )
    d_attitude = (
        (M / h) * _cross3((F - _EYE3) @ rho_c, Rt_dq_end)
        + 0.5 * h * M * grav * _cross3(rho_c, Rt_e3)
        + 0.5 * h * M * grav * (F @ _cross3(rho_c, Ft_Rt_e3))
    )
    return DerivativeBundle(d_dsp, d_dq, d_sp, d_q, d_rot_update, d_attitude)


def coadjoint_F(p, F):
    """Co-adjoint action of ``F^{-1}`` on a trivialized cotangent vector: ``F p``."""
    return F @ np.asarray(p, dtype=float)
