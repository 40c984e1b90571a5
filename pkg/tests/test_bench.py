import dataclasses
import math

import pytest

from wipsim import speed_run_mapping, straight_course, three_cone_course
from wipsim.bench import convex_hull_area, run_course, run_many, summarize
from wipsim.pilots import CustomPilot, StepPilot, StraightlinePilot, WeavePilot, scripted_pilot
from wipsim.world import World


@pytest.fixture(scope="module")
def fast_mapping():
    return speed_run_mapping()


def test_straightline_brackets_reported_time(params, cruise_gains, fast_mapping):
    course = straight_course()
    pilot = StraightlinePilot(countdown=course.countdown)
    record = run_course(params, cruise_gains, fast_mapping, course, pilot)
    assert record.verdict == "success"
    assert 3.5 <= record.completion_time <= 6.5
    # desired velocity rides the hardware cap
    assert max(f.desired.xdot_des for f in record.frames) == pytest.approx(1.4)
    # straight path: length about equals displacement
    assert record.path_length == pytest.approx(4.0, abs=0.1)


def test_weave_succeeds_with_expected_path(params, cruise_gains, mapping):
    course = three_cone_course()
    pilot = WeavePilot(countdown=course.countdown)
    record = run_course(params, cruise_gains, mapping, course, pilot)
    assert record.verdict == "success"
    assert 4.5 <= record.path_length <= 5.5
    clearance = min(
        math.hypot(f.state.x_world - cx, f.state.y_w - cy)
        for f in record.frames for cx, cy in course.cones)
    assert clearance > course.robot_radius + course.cone_radius


def test_step_pilot_shows_backward_dip(params, gains, mapping):
    world = World(params, gains, mapping)
    pilot = StepPilot(countdown=0.0, lean=0.15)
    dip = 0.0
    final = None
    for i in range(3000):
        t = world.tick_count * world.dt
        final = world.tick(pilot.input_at(t, i + 1))
        if final.t <= 0.5:
            dip = min(dip, final.state.x_w)
    assert dip < -1e-4
    assert final.state.x_w > 0.5  # net forward progress afterward


def test_run_many_deterministic(params, cruise_gains, mapping):
    course = three_cone_course()
    pilot = WeavePilot(countdown=course.countdown)
    records = run_many(params, cruise_gains, mapping, course, pilot, runs=3)
    assert len(records) == 3
    times = {r.completion_time for r in records}
    assert len(times) == 1  # identical inputs, identical runs


def test_summary_and_csv(params, cruise_gains, mapping):
    course = three_cone_course()
    records = run_many(params, cruise_gains, mapping, course,
                       WeavePilot(countdown=course.countdown), runs=2)
    summary = summarize(records)
    assert summary.runs == 2 and summary.successes == 2
    assert summary.mean_time == pytest.approx(records[0].completion_time)
    assert summary.min_time == summary.max_time == summary.mean_time
    rows = summary.csv_rows(records)
    assert rows[0] == "run,verdict,completion_time_s,path_length_m"
    assert len(rows) == 3
    assert rows[1].startswith("1,success,")
    table = summary.table()
    assert "completion time mean [s]" in table


def test_failed_run_summary(params, cruise_gains, mapping):
    course = dataclasses.replace(three_cone_course(), timeout=1.0)
    pilot = CustomPilot([(0.0, 0.0, 0.0)])  # never moves
    records = run_many(params, cruise_gains, mapping, course, pilot, runs=1)
    summary = summarize(records)
    assert summary.successes == 0
    assert summary.failures == {"timeout": 1}
    assert summary.mean_time is None


def test_scripted_pilot_factory():
    assert isinstance(scripted_pilot("straightline"), StraightlinePilot)
    assert isinstance(scripted_pilot("weave", countdown=1.0).input_at(0.0, 1), object)
    assert isinstance(scripted_pilot("step"), StepPilot)
    pilot = scripted_pilot("custom", waypoints=[(0.0, 0.0, 0.0), (1.0, 0.1, 0.2)])
    mid = pilot.input_at(0.5, 1)
    assert mid.p_x == pytest.approx(0.05)
    assert mid.gamma_h == pytest.approx(0.1)
    with pytest.raises(Exception):
        scripted_pilot("moonwalk")


def test_convex_hull_area():
    square = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)]
    assert convex_hull_area(square) == pytest.approx(1.0)
    assert convex_hull_area([(0, 0), (1, 1)]) == 0.0
    tri = [(0, 0), (2, 0), (0, 2)]
    assert convex_hull_area(tri) == pytest.approx(2.0)
