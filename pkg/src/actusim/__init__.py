"""actusim: deterministic simulator and control stack for a backdrivable
tendon/joint actuation module (motor, gearbox, encoder, winch) with a
two-rate control architecture and proprioceptive load sensing."""

__version__ = "0.1.0"

from .actuator import (  # noqa: E402,F401
    ActuatorParams,
    JointView,
    Measurement,
    PlantState,
    counts_from_tendon,
    current_loop,
    joint_view,
    quantize_encoder,
    step_physics,
    tendon_from_counts,
    torque_balance,
)
from .loads import BeamLoad, GravityLoad, LoadModel, NullLoad, PulseLoad  # noqa: F401
from .control import (  # noqa: F401
    ControllerKind,
    ControllerSpec,
    GainSet,
    PositionController,
    control_step,
    steady_state_error_pd,
)
from .trajectory import (  # noqa: F401
    Composite,
    ReferenceSignal,
    Smooth,
    Staircase,
    Step,
    smooth_path,
    smooth_profile,
    smooth_profile_rate,
)
from .simcore import (  # noqa: F401
    NoiseConfig,
    SimConfig,
    SimulationDiverged,
    run_scenario,
    substream,
)
from .record import RunRecord, RunMeta  # noqa: F401
from .metrics import Metrics, compute_metrics  # noqa: F401
from .tuning import NoOscillation, TuningFailed, Unstable, ZnResult, ziegler_nichols_tune  # noqa: F401
from .proprioception import (  # noqa: F401
    DetectionEvent,
    DetectorConfig,
    LoadEstimate,
    detect_disturbances,
    estimate_load,
)
