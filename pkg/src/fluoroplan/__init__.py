"""fluoroplan: biplanar fluoroscopic pedicle-screw planning.

One simulated 3D screw per pedicle is the single source of truth; the
anterior-posterior (AP) and lateral (LP) views render its projections, and
an edit in either view updates the 3D screw so both views stay synchronized
exactly.
"""

from .anatomy import (
    MAX_VERTEBRAE,
    SIDES,
    SUPPORTED_LABELS,
    BBox2D,
    IvdlPolicy,
    VertebraPair,
    hit_test_vertebra,
    ivdl_from_overlap,
    pair_views,
    resolve_ivdl,
    split_half,
    trim_box,
)
from .caseio import (
    SCHEMA_VERSION,
    STALE_PROJECTION_PX,
    CaseFile,
    PlanDocument,
    PlannedScrew,
    load_case,
    load_catalog,
    load_grayscale,
    load_plan,
    plan_to_json,
    save_case,
    save_plan,
)
from .geometry import (
    Point2,
    Point3,
    ScrewProjection2D,
    ViewCalibration,
    ViewKind,
    backproject_point,
    hidden_axis,
    project_point,
    project_screw,
)
from .phantom import (
    Corridor,
    PhantomSpec,
    PlanError,
    evaluate_plan,
    generate_phantom,
    load_truth,
    save_truth,
)
from .planning import (
    DEFAULT_CATALOG,
    PaddingConfig,
    Screw3D,
    ScrewCatalog,
    ScrewSpec,
    compute_screw_spec,
    init_screw,
    validate_containment,
)
from .sync import (
    DEFAULT_GRAB_PX,
    DiscrepancyModel,
    EditOp,
    HitRegion,
    MoveEndpoint,
    Resize,
    Translate,
    apply_discrepancy,
    apply_edit,
    correspondences_from_pairs,
    fit_discrepancy,
    hit_test_screw,
)

__version__ = "0.1.0"

__all__ = [
    "BBox2D",
    "CaseFile",
    "Corridor",
    "DEFAULT_CATALOG",
    "DEFAULT_GRAB_PX",
    "DiscrepancyModel",
    "EditOp",
    "HitRegion",
    "IvdlPolicy",
    "MAX_VERTEBRAE",
    "MoveEndpoint",
    "PaddingConfig",
    "PhantomSpec",
    "PlanDocument",
    "PlanError",
    "PlannedScrew",
    "Point2",
    "Point3",
    "Resize",
    "SCHEMA_VERSION",
    "SIDES",
    "STALE_PROJECTION_PX",
    "SUPPORTED_LABELS",
    "Screw3D",
    "ScrewCatalog",
    "ScrewProjection2D",
    "ScrewSpec",
    "Translate",
    "VertebraPair",
    "ViewCalibration",
    "ViewKind",
    "apply_discrepancy",
    "apply_edit",
    "backproject_point",
    "compute_screw_spec",
    "correspondences_from_pairs",
    "evaluate_plan",
    "fit_discrepancy",
    "generate_phantom",
    "hidden_axis",
    "hit_test_screw",
    "hit_test_vertebra",
    "init_screw",
    "ivdl_from_overlap",
    "load_case",
    "load_catalog",
    "load_grayscale",
    "load_plan",
    "load_truth",
    "pair_views",
    "plan_to_json",
    "project_point",
    "project_screw",
    "resolve_ivdl",
    "save_case",
    "save_plan",
    "save_truth",
    "split_half",
    "trim_box",
    "validate_containment",
]
