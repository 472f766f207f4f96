"""Part-guided 6-DoF grasp synthesis on point clouds.

Single-arm planning samples grasp candidates with an annealed Langevin
walk on SE(3), steered at every step by the worse of two energies (whole
object vs target part), then keeps the minimum-global-energy grasp.
Dual-arm planning splits the object into two target regions, plans per
arm, and picks the widest collision-free, force-closure-stable pair.
"""

from .collision import Contact, extract_contacts, gripper_gripper_collision, gripper_object_collision
from .dual_arm import (
    DualArmPlan,
    DualArmThresholds,
    GraspPair,
    StageCounts,
    filter_candidates,
    plan_dual,
    plan_dual_baseline,
    select_pair,
)
from .energy import (
    AntipodalSurrogateField,
    EnergyField,
    EnergyWeights,
    GripperModel,
    NoiseSchedule,
    make_schedule,
    surrogate_energy,
    surrogate_score,
)
from .errors import (
    DegenerateCloudError,
    EmptyPartError,
    MissingNormalsError,
    NoFeasiblePairError,
    PartGraspError,
    PartIndexError,
    PartOverlapError,
    RegionTooSmallError,
    SceneCloudMissingError,
    SceneParseError,
    UnknownPartError,
)
from .force_closure import cone_wrenches, force_closure_epsilon
from .objects import KINDS, gen_object
from .pointcloud import (
    PointCloud,
    estimate_normals,
    farthest_point_sample,
    knn,
    load_ply,
    pca_major_axis,
    save_ply,
)
from .sampler import GraspCandidate, SamplerConfig, guided_energy, guided_score, sample_grasps
from .scene import (
    GroundingResult,
    SceneDescription,
    baseline_fps_knn_regions,
    determine_target_regions,
    geometric_split,
    ground_target,
    load_scene,
    save_scene,
)
from .se3 import Pose, Twist, perturb, se3_exp, se3_log
from .single_arm import SingleArmPlan, plan_single, select_minimum_energy

__version__ = "0.1.0"
