"""Exception types shared across the package."""


class PartGraspError(Exception):
    """Base class for all package-specific errors."""


class DegenerateCloudError(PartGraspError):
    """Point cloud has no usable spatial extent (zero covariance)."""


class MissingNormalsError(PartGraspError):
    """Operation requires per-point normals but the cloud has none."""


class SceneParseError(PartGraspError):
    """Scene file is malformed (bad JSON, missing or mistyped fields)."""


class SceneCloudMissingError(PartGraspError):
    """Scene references a PLY file that does not exist."""


class PartIndexError(PartGraspError):
    """A part index set references a point outside the cloud."""


class EmptyPartError(PartGraspError):
    """A part index set is empty."""


class PartOverlapError(PartGraspError):
    """Part index sets overlap but the scene does not allow overlap."""


class UnknownPartError(PartGraspError):
    """Requested part label is not present in the scene."""


class RegionTooSmallError(PartGraspError):
    """A target region ended up with fewer than 2 points."""


class NoFeasiblePairError(PartGraspError):
    """No dual-arm grasp pair survived filtering, collision and stability checks.

    Carries stage-by-stage survivor counts so callers can see where the
    pipeline emptied out.
    """

    def __init__(self, n_filter1: int, n_filter2: int, n_nocollide: int, n_stable: int):
        self.n_filter1 = n_filter1
        self.n_filter2 = n_filter2
        self.n_nocollide = n_nocollide
        self.n_stable = n_stable
        super().__init__(
            "no feasible grasp pair "
            f"(filtered arm1={n_filter1}, arm2={n_filter2}, "
            f"collision-free pairs={n_nocollide}, stable pairs={n_stable})"
        )

    @property
    def survivors(self) -> list:
        return [self.n_filter1, self.n_filter2, self.n_nocollide, self.n_stable]
