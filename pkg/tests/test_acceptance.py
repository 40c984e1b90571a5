"""Acceptance suite: one test per release criterion, each printing a
pass/fail line (run with -s to see them)."""

import dataclasses
import math
import time

import numpy as np

from wipsim import (
    ActuatorCommand,
    DesiredState,
    PilotInput,
    SimState,
    World,
    accel_to_desired,
    compose_command,
    finite_difference_model,
    height_control,
    linearize,
    lqr_gains,
    map_acceleration,
    mechanical_energy,
    piecewise_eval,
    solve_dare,
    spectral_radius,
    speed_run_mapping,
    stabilize,
    step_rk4,
    straight_course,
    three_cone_course,
)
from wipsim.bench import run_course
from wipsim.mapping import AccelMapConfig, MappingConfig, PiecewiseMapConfig
from wipsim.pilots import StepPilot, StraightlinePilot, WeavePilot
from wipsim.runlog import read_log, verify_replay, write_log
from wipsim.synthesis import default_Q, default_R


def _report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[acceptance] {name}: {status}{suffix}")
    assert ok, f"{name}: {detail}"


def test_linearization(params):
    start = time.perf_counter()
    m = linearize(params)
    A_fd, B_fd = finite_difference_model(params)
    err = max(float(np.max(np.abs(m.A - A_fd))), float(np.max(np.abs(m.B - B_fd))))
    elapsed = time.perf_counter() - start
    _report("linearization", err < 1e-6 and elapsed < 1.0,
            f"max entry error {err:.2e}, {elapsed:.3f}s")


def test_dare(model):
    P = solve_dare(model.A_d, model.B_d, default_Q(), default_R())
    K = np.linalg.solve(default_R() + model.B_d.T @ P @ model.B_d,
                        model.B_d.T @ P @ model.A_d)
    residual = P - (default_Q() + model.A_d.T @ P @ model.A_d
                    - (model.A_d.T @ P @ model.B_d) @ K)
    res = float(np.max(np.abs(residual)))

    P1 = solve_dare(np.array([[1.0]]), np.array([[1.0]]),
                    np.array([[1.0]]), np.array([[1.0]]))
    golden_P = (1.0 + math.sqrt(5.0)) / 2.0
    K1 = lqr_gains(np.array([[1.0]]), np.array([[1.0]]), P1, np.array([[1.0]]))
    scalar_ok = abs(P1[0, 0] - golden_P) < 1e-9 and abs(K1[0] - 0.6180339887498949) < 1e-9
    _report("dare", res < 1e-8 and scalar_ok,
            f"residual {res:.2e}, scalar P err {abs(P1[0,0]-golden_P):.2e}")


def test_stability(params, model, gains):
    K = np.array(gains.k_effective()).reshape(1, 4)
    rho = spectral_radius(model.A_d - model.B_d @ K)

    s = SimState(theta_R=0.1)
    desired = DesiredState(theta_1_des=s.theta_1)
    k = gains.k_effective()
    settle_t = None
    for _ in range(2000):
        u = stabilize(desired, s.planar(), k)
        tau_hip, _ = height_control(desired.theta_1_des, s.theta_1, s.thetadot_1,
                                    params, gains)
        cmd, _ = compose_command(u, 0.0, tau_hip, params)
        s = step_rk4(s, cmd, params, 1e-3)
        if settle_t is None and abs(s.theta_R) < 0.01:
            settle_t = s.t
    ok = rho < 1.0 and settle_t is not None and settle_t <= 2.0 and abs(s.theta_R) < 0.01
    _report("stability", ok, f"rho {rho:.6f}, settle {settle_t}s")


def test_energy(params):
    s = SimState(theta_R=0.3)
    e0 = mechanical_energy(s.planar(), params)
    worst = 0.0
    for _ in range(1000):
        s = step_rk4(s, ActuatorCommand(), params, 1e-3)
        s = dataclasses.replace(s, theta_1=SimState().theta_1, thetadot_1=0.0)
        drift = abs(mechanical_energy(s.planar(), params) - e0) / abs(e0)
        worst = max(worst, drift)
    _report("energy", worst < 1e-6, f"max relative drift {worst:.2e}")


def test_mapping_continuity():
    cfg = PiecewiseMapConfig(deadband=0.01, swp=0.05, max_in=0.15, alpha1=2.0, alpha2=10.0)
    jump = 0.0
    for x0 in (cfg.deadband, cfg.swp, cfg.max_in):
        lo = piecewise_eval(math.nextafter(x0, -math.inf), cfg)
        mid = piecewise_eval(x0, cfg)
        hi = piecewise_eval(math.nextafter(x0, math.inf), cfg)
        jump = max(jump, abs(hi - mid), abs(mid - lo))
    odd_ok = all(
        piecewise_eval(x, cfg) == -piecewise_eval(-x, cfg)
        for x in np.linspace(0.0, 0.3, 301))
    bounded_ok = all(
        abs(piecewise_eval(float(x), cfg)) <= cfg.max_out
        for x in np.linspace(-1.0, 1.0, 401))

    # the 1.5-degree tilt preset must construct and cap the output
    paper_tilt = math.radians(1.5)
    acc_cfg = MappingConfig(
        mode="acceleration", vel=cfg,
        yaw=PiecewiseMapConfig(deadband=0.03, swp=0.15, max_in=0.5, alpha1=1.5, alpha2=4.0),
        acc=AccelMapConfig(deadband=0.02, slope=0.0936, max_tilt=paper_tilt),
        theta_H_max=0.3)
    cap_ok = (abs(map_acceleration(PilotInput(p_x=0.3), acc_cfg) - paper_tilt) < 1e-12
              and abs(map_acceleration(PilotInput(p_x=5.0), acc_cfg)) <= paper_tilt)
    _report("mapping-continuity", jump < 1e-12 and odd_ok and bounded_ok and cap_ok,
            f"max breakpoint jump {jump:.2e}")


def test_tilt_conversion_consistency(params):
    xdd, _, _, _ = accel_to_desired([0.01] * 500, params, dt=1e-3)
    constant_ok = all(a == params.g * 0.01 for a in xdd)

    n = 1000
    tilts = [0.01 * i * 1e-3 for i in range(n + 1)]
    _, xd, _, _ = accel_to_desired(tilts, params, dt=1e-3)
    analytic = params.g * 0.01 / 2.0
    ramp_err = abs(xd[-1] - analytic) / analytic
    _report("tilt-conversion", constant_ok and ramp_err < 0.02,
            f"ramp integral error {100.0 * ramp_err:.2f}%")


def test_non_minimum_phase(params, gains, mapping):
    start = time.perf_counter()
    world = World(params, gains, mapping)
    pilot = StepPilot(countdown=0.0, lean=0.15)
    dip = 0.0
    frame = None
    for i in range(2500):
        t = world.tick_count * world.dt
        frame = world.tick(pilot.input_at(t, i + 1))
        if frame.t <= 0.5:
            dip = min(dip, frame.state.x_w)
    elapsed = time.perf_counter() - start
    ok = dip < 0.0 and frame.state.x_w > 0.1 and elapsed < 5.0
    _report("non-minimum-phase", ok,
            f"dip {dip:.4f} m, x(2.5s) {frame.state.x_w:.2f} m, {elapsed:.2f}s")


def test_benchmark_bracketing(params, cruise_gains, mapping):
    wall0 = time.perf_counter()
    course = straight_course()
    rec_fast = run_course(params, cruise_gains, speed_run_mapping(), course,
                          StraightlinePilot(countdown=course.countdown))
    straight_wall = time.perf_counter() - wall0
    straight_ok = (rec_fast.verdict == "success"
                   and 3.5 <= rec_fast.completion_time <= 6.5
                   and straight_wall < 60.0)

    wall1 = time.perf_counter()
    cones = three_cone_course()
    rec_weave = run_course(params, cruise_gains, mapping, cones,
                           WeavePilot(countdown=cones.countdown))
    weave_wall = time.perf_counter() - wall1
    weave_ok = (rec_weave.verdict == "success"
                and 4.5 <= rec_weave.path_length <= 5.5
                and weave_wall < 60.0)
    _report("benchmark-bracketing", straight_ok and weave_ok,
            f"straight {rec_fast.completion_time and round(rec_fast.completion_time, 2)}s, "
            f"weave path {rec_weave.path_length and round(rec_weave.path_length, 2)}m")


def test_odometry_exactness(params, cruise_gains, mapping):
    # a gently turning ~10 m drive; odometry must track ground truth
    world = World(params, cruise_gains, mapping)
    worst = 0.0
    for i in range(20000):
        t = world.tick_count * world.dt
        lean = 0.12 if t > 0.5 else 0.0
        twist = 0.2 * math.sin(2.0 * math.pi * t / 8.0) if t > 0.5 else 0.0
        frame = world.tick(PilotInput(p_x=lean, gamma_h=twist, t=t, seq=i + 1))
        err = math.hypot(frame.odometry[0] - frame.state.x_world,
                         frame.odometry[1] - frame.state.y_w)
        worst = max(worst, err)
    dist = frame.state.x_w
    ok = dist >= 10.0 and worst < 1e-6 * (dist / 10.0)
    _report("odometry-exactness", ok, f"{dist:.1f} m traveled, worst error {worst:.2e} m")


def test_determinism_replay(params, cruise_gains, mapping, tmp_path):
    course = three_cone_course()
    record = run_course(params, cruise_gains, mapping, course,
                        WeavePilot(countdown=course.countdown))
    path = tmp_path / "acceptance.log"
    write_log(record, path)
    loaded = read_log(path)
    ok, bad_tick = verify_replay(loaded)
    same_metrics = (loaded.verdict == record.verdict
                    and loaded.completion_time == record.completion_time)
    _report("determinism-replay", ok and same_metrics,
            "bit-identical" if ok else f"mismatch at tick {bad_tick}")


def test_safety_stale_input(params, gains, mapping):
    world = World(params, gains, mapping)
    for i in range(1000):
        world.tick(PilotInput(p_x=0.092, t=world.state.t, seq=i + 1))
    assert world.tick(None).desired.xdot_des > 0.4
    # silence: staleness trips at 0.2 s; desired velocity must be zero
    # within 1 s of that and the robot must stay upright
    frame = None
    zero_by_deadline = None
    for j in range(3000):
        frame = world.tick(None)
        if frame.t <= 1.001 + 0.2 + 1.0 and zero_by_deadline is None \
                and frame.desired.xdot_des == 0.0:
            zero_by_deadline = frame.t
    balanced = abs(frame.state.theta_R) < 0.05
    ok = zero_by_deadline is not None and zero_by_deadline <= 1.001 + 0.2 + 1.0 and balanced
    _report("safety-stale-input", ok,
            f"desired zero at t={zero_by_deadline}, pitch {frame.state.theta_R:.4f}")
