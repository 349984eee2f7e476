"""Shared fixtures: benchmarks, certificates, and the expensive nominal runs."""

import numpy as np
import pytest

from bipbc import SimConfig, simulate
from bipbc.bench import get_benchmark


@pytest.fixture(scope="session")
def ball_beam():
    return get_benchmark("ball-beam")


@pytest.fixture(scope="session")
def vtol():
    return get_benchmark("vtol-nonsmooth")


@pytest.fixture(scope="session")
def vtol_two_phase():
    return get_benchmark("vtol-two-phase")


@pytest.fixture(scope="session")
def bb_certificate(ball_beam):
    return ball_beam.certificate(samples=1000)


@pytest.fixture(scope="session")
def bb_trajectory(ball_beam):
    """Nominal ball-and-beam closed loop from the published start."""
    return simulate(
        ball_beam.system,
        ball_beam.make_controller(),
        ball_beam.initial_state,
        SimConfig(dt=1e-3, t_end=20.0),
        target=ball_beam.target,
    )


@pytest.fixture(scope="session")
def vtol_certificate(vtol):
    return vtol.certificate(samples=300)


@pytest.fixture(scope="session")
def vtol_trajectory(vtol):
    """Nominal single-phase VTOL run from (20, -15, 1.3) at rest."""
    return simulate(
        vtol.system,
        vtol.make_controller(),
        vtol.initial_state,
        SimConfig(dt=5e-3, t_end=200.0, record_stride=5),
        target=vtol.target,
    )


@pytest.fixture(scope="session")
def vtol_tp_run(vtol_two_phase):
    """Two-phase VTOL run; returns (controller, trajectory)."""
    ctrl = vtol_two_phase.make_controller()
    traj = simulate(
        vtol_two_phase.system,
        ctrl,
        vtol_two_phase.initial_state,
        SimConfig(dt=2e-3, t_end=60.0, record_stride=5, monitors=("phase_switch",)),
        target=vtol_two_phase.target,
    )
    return ctrl, traj


@pytest.fixture(scope="session")
def random_sweep(ball_beam, vtol, bb_certificate, vtol_certificate):
    """50 random initial conditions across both benchmarks.

    Every run recomputes its own certificate from H_d(t0) and records the
    energy-decrease violations plus momentum/control compliance against the
    published-form and the strict (sqrt(2)-complete) bounds. Shared by the
    Lyapunov-decrease and bound-soundness checks.
    """
    from bipbc.bounds import (
        control_upper_bound,
        momentum_bounds,
        strict_selection,
        ultimate_bounds,
    )
    from bipbc.controller import mass_d_solve, target_energy
    from bipbc.phcore import ConfigState
    from bipbc.simulate import check_hd_decrease

    rng = np.random.default_rng(2024)
    runs = []
    bb_constants, _ = bb_certificate
    vt_constants, _ = vtol_certificate

    def run_case(bench, constants, s0, cfg):
        hd0 = target_energy(bench.target, s0).total
        c_p1, c_pt1 = momentum_bounds(constants, hd0)
        ult = ultimate_bounds(constants)
        c_p2, c_pt2 = ult if ult is not None else (None, None)
        p0 = float(np.linalg.norm(s0.p))
        pt0 = float(np.linalg.norm(mass_d_solve(bench.target, s0.q, s0.p)))
        c_p = min(c_p1, c_p2) if (c_p2 is not None and p0 <= c_p2) else c_p1
        c_pt = min(c_pt1, c_pt2) if (c_pt2 is not None and pt0 <= c_pt2) else c_pt1
        c_ps, c_pts = strict_selection(c_p1, c_pt1, c_p2, c_pt2, p0, pt0)
        if bench.name == "ball-beam":
            center = np.zeros(1)
            tau_upper = control_upper_bound(constants, c_p, c_pt)
            tau_upper_strict = control_upper_bound(constants, c_ps, c_pts)
        else:
            conf = bench.roll_confinement(hd0)
            theta = min(max(abs(conf.lower), abs(conf.upper)), bench.params.theta_box)
            effort = bench.effort_certificate(theta)
            center = effort["tau_center"]
            tau_upper = tau_upper_strict = effort["tau_upper"]
        traj = simulate(bench.system, bench.make_controller(), s0, cfg, target=bench.target)
        dev = np.max(np.abs(traj.tau - center), axis=0)
        runs.append(
            {
                "benchmark": bench.name,
                "hd0": hd0,
                "hd_violations": len(check_hd_decrease(traj, 1e-6)),
                "p_ok_published": bool(np.max(traj.p_norm) <= c_p),
                "pt_ok_published": bool(np.max(traj.ptilde_norm) <= c_pt),
                "p_ok_strict": bool(np.max(traj.p_norm) <= c_ps),
                "pt_ok_strict": bool(np.max(traj.ptilde_norm) <= c_pts),
                "tau_ok_published": bool(np.all(dev <= tau_upper)),
                "tau_ok_strict": bool(np.all(dev <= tau_upper_strict)),
            }
        )

    box = ball_beam.system.workspace
    for _ in range(25):
        q = rng.uniform(0.8 * box.lower, 0.8 * box.upper)
        p = rng.standard_normal(2)
        p *= rng.uniform(0.0, 0.5) / np.linalg.norm(p)
        run_case(ball_beam, bb_constants, ConfigState(q=q, p=p), SimConfig(dt=2e-3, t_end=6.0))

    for _ in range(25):
        q = np.array([rng.uniform(-25, 25), rng.uniform(-15, 15), rng.uniform(-1.2, 1.2)])
        run_case(vtol, vt_constants, ConfigState(q=q, p=np.zeros(3)), SimConfig(dt=5e-3, t_end=8.0))
    return runs
