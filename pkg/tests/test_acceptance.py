"""End-to-end acceptance checks.

Each test prints a single PASS/FAIL line (written past the capture plugin so
it shows up in plain pytest output) and then asserts the gated bound.  The
three standard scenarios are each run once at full length and shared across
tests; the whole module takes a few minutes.
"""

import sys
from dataclasses import replace

import numpy as np
import pytest

from stringpendulum import liegroup
from stringpendulum.config import build_initial_state
from stringpendulum.integrator import (
    InitialVelocities,
    simulate,
)
from stringpendulum.presets import elliptic_cylinder_inertia, expand_preset
from stringpendulum.state import Configuration

from test_derivatives import fd_bundle_errors, random_state
from test_integrator import fd_two_step_residual, random_update


ACCEPTANCE_LINES = []


def report(name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line, flush=True)


def _full_run(name):
    cfg = expand_preset(name)
    g0, vel = build_initial_state(cfg)
    res = simulate(cfg.model, g0, vel, cfg.control, cfg.run.duration,
                   settings=cfg.newton, fixed_length=cfg.run.fixed_length,
                   record_every=10)
    assert res.status == "ok", res.status
    return res


@pytest.fixture(scope="module")
def case1_run():
    return _full_run("case1")


@pytest.fixture(scope="module")
def case2_run():
    return _full_run("case2")


@pytest.fixture(scope="module")
def case3_run():
    return _full_run("case3")


def test_derivative_oracle_randomized():
    # every closed-form derivative of the discrete Lagrangian against central
    # finite differences, 100 randomized states across element counts
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for trial in range(100):
        n = (2, 5, 20)[trial % 3]
        params, g, f = random_state(rng, n)
        errs = fd_bundle_errors(params, g, f)
        worst = max(worst, max(errs.values()))
    ok = worst <= 1e-6
    report("derivative oracle (100 random states)", ok,
           f"worst relative error {worst:.3e}, bound 1e-06")
    assert ok


def test_residual_oracle_randomized():
    # assembled stepping residual against the finite-difference variation of
    # the two-step action sum plus the reel forcing, 50 randomized triples
    rng = np.random.default_rng(20240602)
    worst = 0.0
    for trial in range(50):
        n = (2, 5, 20)[trial % 3]
        params, g_prev, f_prev = random_state(rng, n)
        f_k = random_update(rng, n)
        u = rng.normal()
        from stringpendulum.integrator import residual
        assembled = residual(g_prev.advance(f_prev), f_prev, f_k, u, params)
        oracle = fd_two_step_residual(params, g_prev, f_prev, f_k, u)
        scale = max(1.0, float(np.max(np.abs(oracle))))
        worst = max(worst, float(np.max(np.abs(assembled - oracle))) / scale)
    ok = worst <= 1e-6
    report("residual oracle (50 random triples)", ok,
           f"worst relative error {worst:.3e}, bound 1e-06")
    assert ok


def test_fixed_reel_energy_conservation(case1_run):
    recs = case1_run.records
    E = np.array([r.energy for r in recs])
    T = np.array([r.kinetic for r in recs])
    t = np.array([r.t for r in recs])
    max_dev = float(np.max(np.abs(E - E[0])))
    bound = 1e-4 * float(T.max())
    short = t <= 2.0
    dev_short = float(np.max(np.abs(E[short] - E[0])))
    bound_short = 1e-4 * float(T[short].max())
    ok = max_dev <= bound
    report("fixed-reel energy conservation (10 s)", ok,
           f"max|dE| {max_dev:.3e} J vs bound {bound:.3e} J "
           f"(ratio {max_dev / float(T.max()):.3e}); "
           f"2 s window {dev_short:.3e} J vs {bound_short:.3e} J "
           f"({'ok' if dev_short <= bound_short else 'exceeded'})")
    # the 2 s window meets the bound; the 10 s deviation stays a bounded
    # second-order oscillation (halving h quarters it) but its envelope grows
    # past the bound once the slack-string tumbling phase starts
    assert dev_short <= bound_short
    assert ok


def test_fixed_reel_vertical_momentum_conservation(case1_run):
    pi = np.array([r.pi3 for r in case1_run.records])
    drift = float(np.max(np.abs(pi - pi[0])))
    rel = drift / abs(pi[0])
    ok = rel <= 1e-7
    report("fixed-reel vertical angular momentum (10 s)", ok,
           f"max|dpi3|/|pi3(0)| {rel:.3e}, bound 1e-07")
    assert ok


def test_deployment_energy_balance(case2_run):
    recs = case2_run.records
    E = np.array([r.energy for r in recs])
    W = np.array([r.cum_dissipation + r.cum_control_work for r in recs])
    T = np.array([r.kinetic for r in recs])
    defect = float(np.max(np.abs(E - E[0] - W)))
    bound = 3e-6 * float(T.max())
    ok = defect <= bound
    report("deployment energy balance (8 s)", ok,
           f"max|dE - work| {defect:.3e} J vs bound {bound:.3e} J "
           f"(ratio {defect / float(T.max()):.3e}, bound 3e-06)")
    assert ok


def test_attitude_orthogonality_drift(case1_run, case2_run, case3_run):
    worst = max(case1_run.max_ortho_err, case2_run.max_ortho_err,
                case3_run.max_ortho_err)
    ok = worst <= 1e-12
    report("attitude orthogonality drift (all runs)", ok,
           f"max deviation {worst:.3e}, bound 1e-12")
    assert ok


def test_self_convergence_order():
    cfg = expand_preset("case1")
    g0, vel = build_initial_state(cfg)

    def final_state(h):
        params = replace(cfg.model, disc=replace(cfg.model.disc, time_step=h))
        res = simulate(params, g0, vel, cfg.control, 1.0,
                       settings=cfg.newton, fixed_length=True, record_every=0)
        assert res.status == "ok"
        return res.final_config

    ref = final_state(1.25e-4)

    def err(g):
        return float(np.sqrt(np.sum((g.q - ref.q) ** 2)
                             + np.sum((g.R - ref.R) ** 2)))

    errs = [err(final_state(h)) for h in (2e-3, 1e-3, 5e-4)]
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    ok = min(orders) >= 1.9
    report("self-convergence order", ok,
           f"errors {[f'{e:.3e}' for e in errs]}, "
           f"observed orders {[f'{o:.2f}' for o in orders]}, bound 1.9")
    assert ok


def test_vertical_axis_equivariance():
    cfg = expand_preset("case1")
    g0, vel = build_initial_state(cfg)
    S = liegroup.rotation_about([0.0, 0.0, 1.0], np.radians(73.0))

    def run(g, v):
        res = simulate(cfg.model, g, v, cfg.control, 1.0,
                       settings=cfg.newton, fixed_length=True, record_every=100)
        assert res.status == "ok"
        return res

    base = run(g0, vel)
    g0_rot = Configuration(g0.s_p, g0.q @ S.T, S @ g0.R)
    vel_rot = InitialVelocities(vel.s_p_rate, vel.q_rates @ S.T, vel.omega)
    rot = run(g0_rot, vel_rot)
    err = float(np.max(np.abs(rot.final_config.q - base.final_config.q @ S.T)))
    ok = err <= 1e-9
    report("vertical-axis equivariance (73 deg, 1 s)", ok,
           f"max node-position error {err:.3e}, bound 1e-09")
    assert ok


def test_centered_body_attitude_decoupling():
    # with the attachment at the center of mass and zero initial spin, the
    # attitude dynamics decouple and the body never rotates
    cfg = expand_preset("case1")
    body = replace(cfg.model.body, rho_c=np.zeros(3),
                   inertia=elliptic_cylinder_inertia(0.1, 0.5, 0.4, 0.8,
                                                     np.zeros(3)))
    params = replace(cfg.model, body=body)
    g0, vel = build_initial_state(cfg)

    def attitude_dev(t, g, f, step, cum_d, cum_c):
        return float(np.max(np.abs(g.R - np.eye(3))))

    res = simulate(params, g0, vel, cfg.control, 1.0, settings=cfg.newton,
                   fixed_length=True, record_every=1, record_fn=attitude_dev)
    assert res.status == "ok"
    dev = max(res.records)
    ok = dev <= 1e-10
    report("centered-body attitude decoupling (1 s)", ok,
           f"max|R - I| {dev:.3e}, bound 1e-10")
    assert ok


def test_deployment_and_retrieval_directions(case2_run, case3_run):
    sp2 = np.array([r.s_p for r in case2_run.records])
    t2 = np.array([r.t for r in case2_run.records])
    after = t2 > 0.1
    increases = bool(np.all(np.diff(sp2[after]) > 0.0))
    decreases = bool(np.all(np.diff(sp2[after]) < 0.0))

    rate3 = np.array([r.s_p_rate for r in case3_run.records])
    mean3 = float(np.mean(rate3))
    retrieves = mean3 > 0.0

    ok = increases and retrieves
    report("deployment / retrieval directions", ok,
           f"free deployment: s_p strictly increasing after 0.1 s = {increases}"
           f" (strictly decreasing = {decreases}, final s_p "
           f"{sp2[-1]:.2f} from {sp2[0]:.2f}); "
           f"controlled retrieval: mean s_p rate {mean3:+.3f} m/s > 0 = "
           f"{retrieves}")
    # the gated deployment clause demands an increasing reel coordinate, but
    # the reel coordinate measures the undeployed length, which shrinks as
    # string pays out; the run deploys correctly (monotone decrease) and the
    # retrieval clause holds, so the direction conventions are self-consistent
    assert retrieves
    assert increases
