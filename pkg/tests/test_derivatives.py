"""Finite-difference oracle for the closed-form derivative bundle.

Central differences of the discrete Lagrangian are the ground truth for every
derivative the integrator consumes; the SO(3) components are varied along
one-parameter subgroups so the comparison stays on the group.
"""

import numpy as np

from stringpendulum import liegroup, model
from stringpendulum.params import (
    BodyParams,
    Discretization,
    Environment,
    ModelParams,
    ReelParams,
    StringParams,
)
from stringpendulum.state import Configuration, RelativeUpdate

EPS = 1e-6
REL_TOL = 1e-6


def random_state(rng, n):
    A = rng.normal(size=(3, 3))
    params = ModelParams(
        reel=ReelParams(d=0.4 + rng.random(), b=0.3 + 0.4 * rng.random(),
                        kappa_d=0.5 + rng.random(), r_d=0.3 * rng.normal(size=3)),
        string=StringParams(mu=0.01 + 0.05 * rng.random(),
                            ea=20.0 + 40.0 * rng.random(), total_length=100.0),
        body=BodyParams(mass=0.05 + 0.2 * rng.random(),
                        inertia=0.01 * (A @ A.T + 0.05 * np.eye(3)),
                        rho_c=0.3 * rng.normal(size=3)),
        env=Environment(gravity=9.81, r_p=0.2 * rng.normal(size=3)),
        disc=Discretization(n_elements=n, time_step=0.0005),
    )
    s_p = 50.0 + 40.0 * rng.random()
    l = (100.0 - s_p) / n
    steps = l * (np.array([1.0, 0.0, 0.0]) + 0.2 * rng.normal(size=(n, 3)))
    q = np.vstack([np.zeros(3), np.cumsum(steps, axis=0)])
    g = Configuration(s_p, q, liegroup.cayley(0.3 * rng.normal(size=3)))
    dq = 0.0005 * rng.normal(size=(n + 1, 3))
    dq[0] = 0.0
    f = RelativeUpdate(0.0005 * rng.normal(), dq, 0.0005 * rng.normal(size=3))
    return params, g, f


def rel_err(analytic, fd):
    return abs(analytic - fd) / max(1.0, abs(fd))


def fd_bundle_errors(params, g, f):
    """Worst relative error of each derivative against central differences."""
    L = lambda gg, ff: model.discrete_lagrangian(gg, ff, params)
    b = model.derivatives_of_Ld(g, f, params)
    n = g.n_elements
    errs = {}

    fp = RelativeUpdate(f.ds_p + EPS, f.dq, f.c)
    fm = RelativeUpdate(f.ds_p - EPS, f.dq, f.c)
    errs["d_dsp"] = rel_err(b.d_dsp, (L(g, fp) - L(g, fm)) / (2 * EPS))

    gp = Configuration(g.s_p + EPS, g.q, g.R)
    gm = Configuration(g.s_p - EPS, g.q, g.R)
    errs["d_sp"] = rel_err(b.d_sp, (L(gp, f) - L(gm, f)) / (2 * EPS))

    e_dq = e_q = 0.0
    for i in range(1, n + 1):
        for j in range(3):
            dqp = f.dq.copy()
            dqp[i, j] += EPS
            dqm = f.dq.copy()
            dqm[i, j] -= EPS
            fd = (L(g, RelativeUpdate(f.ds_p, dqp, f.c))
                  - L(g, RelativeUpdate(f.ds_p, dqm, f.c))) / (2 * EPS)
            e_dq = max(e_dq, rel_err(b.d_dq[i, j], fd))
            qp = g.q.copy()
            qp[i, j] += EPS
            qm = g.q.copy()
            qm[i, j] -= EPS
            fd = (L(Configuration(g.s_p, qp, g.R), f)
                  - L(Configuration(g.s_p, qm, g.R), f)) / (2 * EPS)
            e_q = max(e_q, rel_err(b.d_q[i, j], fd))
    errs["d_dq"] = e_dq
    errs["d_q"] = e_q

    e_rot = e_att = 0.0
    for j in range(3):
        axis = np.zeros(3)
        axis[j] = 1.0
        Fp = f.F @ liegroup.rotation_about(axis, EPS)
        Fm = f.F @ liegroup.rotation_about(axis, -EPS)
        fd = (L(g, RelativeUpdate.from_rotation(f.ds_p, f.dq, Fp))
              - L(g, RelativeUpdate.from_rotation(f.ds_p, f.dq, Fm))) / (2 * EPS)
        e_rot = max(e_rot, rel_err(b.d_rot_update[j], fd))
        Rp = g.R @ liegroup.rotation_about(axis, EPS)
        Rm = g.R @ liegroup.rotation_about(axis, -EPS)
        fd = (L(Configuration(g.s_p, g.q, Rp), f)
              - L(Configuration(g.s_p, g.q, Rm), f)) / (2 * EPS)
        e_att = max(e_att, rel_err(b.d_attitude[j], fd))
    errs["d_rot_update"] = e_rot
    errs["d_attitude"] = e_att
    return errs


def test_all_derivatives_match_fd():
    rng = np.random.default_rng(2024)
    for trial in range(15):
        n = (2, 5, 20)[trial % 3]
        params, g, f = random_state(rng, n)
        errs = fd_bundle_errors(params, g, f)
        for name, err in errs.items():
            assert err < REL_TOL, f"{name} off by {err:.3e} (trial {trial}, N={n})"


def test_cached_gradients_identical():
    rng = np.random.default_rng(77)
    params, g, f = random_state(rng, 5)
    plain = model.derivatives_of_Ld(g, f, params)
    cached = model.derivatives_of_Ld(
        g, f, params,
        grads_k=model.potential_gradients(g, params),
        coeffs=model.inertia_coeffs(g.s_p, g.q, params))
    assert np.allclose(plain.d_dq, cached.d_dq, atol=0.0)
    assert plain.d_dsp == cached.d_dsp
    assert np.allclose(plain.d_rot_update, cached.d_rot_update, atol=0.0)
