"""Analysis of 3R orthogonal positioning manipulators.

Geometry and kinematics (model), posture enumeration (ik), singular
curves with cusps/nodes/aspects (singular), workspace-topology
classification (classify, calibrate), performance indices (perf) and a
CLI (cli).
"""

from .classify import (
    SurfaceValues,
    TopologyReport,
    classify_domain,
    classify_topology,
    region_census,
    surfaces,
)
from .ik import PostureSet, count_solutions, ik_full, ik_section
from .model import (
    CartesianPoint,
    JointConfig,
    Params,
    SectionPoint,
    det_j_closed,
    fk,
    jacobian,
    reach,
    to_section,
)
from .perf import (
    IsoMap,
    KinvReport,
    VolumeReport,
    inv_condition,
    iso_map,
    isotropic_on_e2,
    kinv_sweep,
    volume_proportions,
)
from .singular import (
    SingularBranch,
    SingularPoint,
    SingularPointSet,
    branch_theta2,
    count_aspects,
    count_cusps,
    count_nodes,
    find_cusps,
    find_nodes,
    is_generic,
    singular_point_set,
    trace_branches,
)

__version__ = "0.1.0"

__all__ = [
    "CartesianPoint",
    "IsoMap",
    "JointConfig",
    "KinvReport",
    "Params",
    "PostureSet",
    "SectionPoint",
    "SingularBranch",
    "SingularPoint",
    "SingularPointSet",
    "SurfaceValues",
    "TopologyReport",
    "VolumeReport",
    "branch_theta2",
    "classify_domain",
    "classify_topology",
    "count_aspects",
    "count_cusps",
    "count_nodes",
    "count_solutions",
    "det_j_closed",
    "find_cusps",
    "find_nodes",
    "fk",
    "ik_full",
    "ik_section",
    "inv_condition",
    "is_generic",
    "iso_map",
    "isotropic_on_e2",
    "jacobian",
    "kinv_sweep",
    "reach",
    "region_census",
    "singular_point_set",
    "surfaces",
    "to_section",
    "trace_branches",
    "volume_proportions",
]
