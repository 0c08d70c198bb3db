"""Toy-model simulator: point spaces, mask graphs, spectra and bounds."""

from .closed_form import (
    ClosedFormBounds,
    CompositionForms,
    CompositionSums,
    folded_reference_bound,
    closed_form_bounds,
    composition_sums,
    mae_bound_polynomial,
    two_class_composition_forms,
)
from .graph import (
    AugmentationMatrix,
    aggregate_mask_graph,
    build_augmentation_matrix,
    downstream_bound,
    edge_weights,
    labeling_error,
    spectrum_sum_squares,
)
from .jacobi import jacobi_eigenvalues
from .partition import (
    CLASS_WISE,
    CROSS_CLASS,
    EXPLICIT,
    MAE_LIKE,
    PARTITION_KINDS,
    TokenPartition,
    bell_number,
    enumerate_partitions,
    label_partition,
    make_partition,
    restricted_growth_strings,
    rgs_to_blocks,
)
from .reconcile import BoundReport, reconcile
from .space import (
    MaskJoint,
    PointSpace,
    ToySpaceSpec,
    build_mask_joint,
    build_point_space,
)
from .theorem import TheoremSearchResult, partition_objective, verify_theorem1

__all__ = [
    "AugmentationMatrix",
    "BoundReport",
    "CLASS_WISE",
    "CROSS_CLASS",
    "ClosedFormBounds",
    "CompositionForms",
    "CompositionSums",
    "EXPLICIT",
    "MAE_LIKE",
    "MaskJoint",
    "PARTITION_KINDS",
    "PointSpace",
    "TheoremSearchResult",
    "TokenPartition",
    "ToySpaceSpec",
    "aggregate_mask_graph",
    "folded_reference_bound",
    "bell_number",
    "build_augmentation_matrix",
    "build_mask_joint",
    "build_point_space",
    "closed_form_bounds",
    "composition_sums",
    "downstream_bound",
    "edge_weights",
    "enumerate_partitions",
    "jacobi_eigenvalues",
    "label_partition",
    "labeling_error",
    "mae_bound_polynomial",
    "make_partition",
    "partition_objective",
    "reconcile",
    "restricted_growth_strings",
    "rgs_to_blocks",
    "spectrum_sum_squares",
    "two_class_composition_forms",
    "verify_theorem1",
]
