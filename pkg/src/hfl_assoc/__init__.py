"""User-edge association and bandwidth allocation for hierarchical federated learning."""

from .baselines import bag_assign, exhaustive_solve, fedch_assign, max_snr_assign
from .core import (
    Assignment,
    BandwidthAllocation,
    InstanceTooLargeError,
    InvalidAllocationError,
    InvalidAssignmentError,
    PhysicalParams,
    Scenario,
    SolveReport,
    UnsupportedDimensionError,
    beta_from_physical,
    critical_path,
    device_delay_eba,
    round_latency_dba,
    round_latency_eba,
)
from .dba import EdgeAllocation, mlbs_solve, solve_allocation
from .refine import PipelineConfig, cpr_migrate, cpr_swap, gst_pass, gst_step, tsdp_assisted
from .scenario import (
    GeometricLayout,
    Ranges,
    geometric_topology,
    heterogeneous_topology,
    load_scenario,
    random_instance,
    save_scenario,
    two_edge_topology,
)
from .tsdp import tsdp_solve

__version__ = "0.1.0"
