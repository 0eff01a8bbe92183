"""qrfsim: quantum reference frames, quantum clocks, relativistic time dilation.

The package is organized in five layers: momentum-space wave packets
(``packets``), Jacobi-coordinate frame changes and measurement reduction
(``frames``), the two quantum-clock models (``clocks``), relativistic
proper-time statistics and two-body kinematics (``relkin``), and a
scenario-driven batch CLI (``cli``).  The names below cover the common
entry points; the submodules carry the rest.
"""

__version__ = "0.1.0"

from .clocks import (
    FreeClockState,
    RotatorClockState,
    freeclock_read,
    rotator_init,
    rotator_read,
)
from .frames import (
    FrameSystem,
    build_chart,
    compose_transform,
    exchange_chain,
    measurement_reduce,
)
from .packets import MomentumGrid, WavePacket, default_grid, evolve_free, make_gaussian
from .relkin import (
    ModeSuperposition,
    RelClockSystem,
    TwoBodyKinematics,
    boosted_evolve,
    frame_to_frame,
    proper_time_stats,
    time_boost,
)

__all__ = [
    "__version__",
    "FreeClockState",
    "RotatorClockState",
    "freeclock_read",
    "rotator_init",
    "rotator_read",
    "FrameSystem",
    "build_chart",
    "compose_transform",
    "exchange_chain",
    "measurement_reduce",
    "MomentumGrid",
    "WavePacket",
    "default_grid",
    "evolve_free",
    "make_gaussian",
    "ModeSuperposition",
    "RelClockSystem",
    "TwoBodyKinematics",
    "boosted_evolve",
    "frame_to_frame",
    "proper_time_stats",
    "time_boost",
]
