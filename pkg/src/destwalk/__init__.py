"""Destination-attractiveness walk model.

One parameter ``gamma`` moves the walker continuously from Brownian motion
(``gamma = 1``, weighted-average steps) through Cauchy walks (``gamma = 0``)
to heavier-tailed Levy walks (``gamma < 0``).
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    StepParams,
    clip_step,
    delta_z,
    eta_weights,
    frame_from,
    frame_to,
    min_step,
    propose_step,
    random_frame,
    raw_step,
    sample_beta,
    satisfaction_z,
)
from .destinations import DestinationSpec, sim1_destination, sim2_destination, uniform_direction  # noqa: E402
from .simulator import (  # noqa: E402
    ReplicaAggregate,
    Trajectory,
    WalkConfig,
    derive_replica_seed,
    run_replicas,
    run_walk,
)
