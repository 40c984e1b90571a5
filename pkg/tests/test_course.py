import math

import pytest

from wipsim import (
    CourseSpec,
    Judge,
    Odometry,
    SimState,
    odometry_update,
    path_length,
    straight_course,
    three_cone_course,
)
from wipsim.course import dump_course, load_course
from wipsim.errors import ConfigError


def state(t, x=0.0, y=0.0, theta=0.0):
    return SimState(x_world=x, y_w=y, theta_R=theta, t=t)


def test_countdown_then_running():
    judge = Judge(three_cone_course())
    assert judge.step(state(1.0)) == "countdown"
    assert judge.step(state(3.0)) == "running"


def test_timeout():
    course = CourseSpec(name="t", start=(0, 0, 0), goal_line=4.0, cones=(),
                        countdown=1.0, timeout=2.0)
    judge = Judge(course)
    judge.step(state(1.5))
    assert judge.step(state(3.1)) == "timeout"
    assert judge.verdict == "timeout"


def test_collision_boundary():
    course = three_cone_course()
    limit = course.robot_radius + course.cone_radius
    judge = Judge(course)
    judge.step(state(3.5))
    # 1 mm outside the contact distance: no collision
    assert judge.step(state(3.6, x=1.0, y=-0.25 + limit + 0.001)) == "running"
    # 1 mm inside: collision, and the offending cone is recorded
    assert judge.step(state(3.7, x=1.0, y=-0.25 + limit - 0.001)) == "collision"
    assert judge.hit_cone == 0


def test_out_of_bounds():
    judge = Judge(three_cone_course())
    judge.step(state(3.5))
    assert judge.step(state(3.6, y=1.2)) == "out_of_bounds"


def test_fall_detection():
    judge = Judge(three_cone_course())
    judge.step(state(3.5))
    assert judge.step(state(3.6, theta=0.51)) == "fell"


def test_success_needs_stability_window():
    course = straight_course()
    judge = Judge(course)
    judge.step(state(3.5))
    assert judge.step(state(4.0, x=4.1)) == "finishing"
    assert judge.completion_time == pytest.approx(1.0)
    # pitch excursion during the window fails the run
    judge2 = Judge(course)
    judge2.step(state(3.5))
    judge2.step(state(4.0, x=4.1))
    assert judge2.step(state(4.5, x=4.2, theta=0.25)) == "fell"
    # quiet window ends in success
    assert judge.step(state(5.0, x=4.2)) == "finishing"
    assert judge.step(state(6.01, x=4.2)) == "success"
    assert judge.verdict == "success"


def test_judging_is_replayable():
    course = three_cone_course()
    states = [state(0.001 * i, x=0.002 * i, y=0.3) for i in range(1, 7001)]

    def run():
        judge = Judge(course)
        for s in states:
            judge.step(s)
        return judge.status, judge.verdict, judge.completion_time

    assert run() == run()


def test_odometry_straight(params):
    est = odometry_update((0.0, 0.0, 0.0), 1.0, 1.0, params)
    assert est[0] == pytest.approx(0.05)
    assert est[1] == 0.0 and est[2] == 0.0


def test_odometry_spin_in_place(params):
    est = odometry_update((0.0, 0.0, 0.0), -0.5, 0.5, params)
    assert est[0] == pytest.approx(0.0, abs=1e-12)
    assert est[1] == pytest.approx(0.0, abs=1e-12)
    assert est[2] == pytest.approx((params.r_w / params.r_c) * 1.0)


def test_odometry_class_accumulates(params):
    odo = Odometry(params, (1.0, 2.0, 0.0))
    odo.update(0.0, 0.0)
    est = odo.update(1.0, 1.0)
    assert est == pytest.approx((1.05, 2.0, 0.0))


def test_path_length_basics():
    assert path_length([(0, 0), (4, 0)]) == pytest.approx(4.0)
    square = [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)]
    assert path_length(square) == pytest.approx(4.0)
    with pytest.raises(ConfigError):
        path_length([(0, 0)])


def test_path_length_at_least_displacement(rng):
    pts = [(float(x), float(y)) for x, y in rng.uniform(-5, 5, size=(30, 2))]
    disp = math.hypot(pts[-1][0] - pts[0][0], pts[-1][1] - pts[0][1])
    assert path_length(pts) >= disp - 1e-12


def test_course_file_round_trip(tmp_path):
    course = three_cone_course()
    path = tmp_path / "course.cfg"
    path.write_text(dump_course(course))
    loaded = load_course(path)
    assert loaded == course


def test_course_validation():
    with pytest.raises(ConfigError):
        CourseSpec(name="bad", start=(0, 0, 0), goal_line=4.0,
                   cones=((99.0, 0.0),))  # cone outside bounds
    with pytest.raises(ConfigError):
        CourseSpec(name="bad", start=(0, 0, 0), goal_line=4.0, cones=(), cone_radius=0.0)
