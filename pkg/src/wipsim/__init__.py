"""Self-balancing wheeled-inverted-pendulum simulator and teleoperation stack."""

from .control import (
    DesiredState,
    compose_command,
    height_control,
    stabilize,
    yaw_control,
    yaw_from_encoders,
)
from .course import (
    CourseSpec,
    Judge,
    Odometry,
    odometry_update,
    path_length,
    straight_course,
    three_cone_course,
)
from .mapping import (
    AccelMapConfig,
    DesiredTracker,
    MappingConfig,
    PiecewiseMapConfig,
    PilotInput,
    TiltToMotion,
    accel_to_desired,
    default_mapping,
    map_acceleration,
    map_velocity,
    piecewise_eval,
    sensitivity,
    speed_run_mapping,
    virtual_spring,
)
from .model import (
    ActuatorCommand,
    RobotParams,
    SimState,
    default_params,
    full_derivative,
    mechanical_energy,
    nominal_hip_angle,
    planar_derivative,
    step_rk4,
)
from .synthesis import (
    GainSet,
    cruise_Q,
    LinearModel,
    discretize,
    finite_difference_model,
    is_stabilizing,
    linearize,
    lqr_gains,
    solve_dare,
    spectral_radius,
    synthesize,
)
from .world import Frame, World, WorldOptions

__version__ = "0.1.0"
