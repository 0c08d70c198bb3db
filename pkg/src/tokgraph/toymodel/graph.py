"""Mask graph aggregation, induced augmentation graph, and bound quantities.

Tokenization merges masked views into blocks, turning the view-to-view mask
graph into a bipartite view-to-block graph.  Two unmasked views become an
implicit positive pair when they hit the same block, which defines a graph
over unmasked views whose spectrum and cross-class mass drive the
downstream error bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .jacobi import jacobi_eigenvalues
from .partition import TokenPartition
from .space import MaskJoint, PointSpace

SYMMETRY_TOL = 1e-9


def aggregate_mask_graph(joint: MaskJoint, partition: TokenPartition) -> np.ndarray:
    """Bipartite weight table between unmasked views and blocks.

    Column ``b`` is the joint mass between each view and the members of
    block ``b``; summing the columns recovers the unmasked marginal exactly.
    """
    covered = sum(len(b) for b in partition.blocks)
    if covered != joint.n_points:
        raise ValidationError(
            f"partition covers {covered} points, joint has {joint.n_points}"
        )
    table = np.empty((joint.n_points, partition.n_blocks), dtype=np.float64)
    for bi, block in enumerate(partition.blocks):
        table[:, bi] = joint.joint[:, list(block)].sum(axis=1)
    return table


@dataclass
class AugmentationMatrix:
    """Normalized augmentation graph over unmasked views.

    matrix:            symmetric normalized adjacency (degree-normalized)
    pair_distribution: unnormalized positive-pair probabilities; sums to 1
    view_marginals:    per-view marginal mass, equal to the graph degrees
    """

    matrix: np.ndarray
    pair_distribution: np.ndarray
    view_marginals: np.ndarray

    @property
    def n_points(self) -> int:
        return self.matrix.shape[0]


def build_augmentation_matrix(
    joint: MaskJoint, partition: TokenPartition
) -> AugmentationMatrix:
    """Augmentation graph induced by masking through a tokenizer partition.

    The positive-pair weight of views (x, x+) sums, over blocks, the product
    of their aggregated block weights divided by the block's marginal mass.
    Degrees of that graph equal the view marginals, so the normalized
    adjacency divides by sqrt of the marginal product.
    """
    table = aggregate_mask_graph(joint, partition)
    marginal = joint.masked_marginal
    block_mass = np.array(
        [marginal[list(b)].sum() for b in partition.blocks], dtype=np.float64
    )
    if np.any(block_mass <= 0.0):
        bad = int(np.argmin(block_mass))
        raise ValidationError(f"block {bad} has zero marginal mass")

    scaled = table / np.sqrt(block_mass)[None, :]
    pair = scaled @ scaled.T
    pair = (pair + pair.T) / 2.0

    w = joint.unmasked_marginal
    if np.any(w <= 0.0):
        raise ValidationError("every view needs positive marginal mass")
    sqrt_w = np.sqrt(w)
    normalized = pair / np.outer(sqrt_w, sqrt_w)
    normalized = (normalized + normalized.T) / 2.0

    if not np.all(np.isfinite(normalized)):
        raise ValidationError("augmentation matrix has non-finite entries")
    return AugmentationMatrix(
        matrix=normalized, pair_distribution=pair, view_marginals=w
    )


def spectrum_sum_squares(aug: AugmentationMatrix | np.ndarray, method: str = "frobenius") -> float:
    """Sum of squared eigenvalues of the normalized augmentation matrix.

    For a symmetric matrix this equals the squared Frobenius norm, which is
    the primary path.  ``method="eigen"`` instead diagonalizes with the
    Jacobi solver, as an independent cross-check.
    """
    matrix = aug.matrix if isinstance(aug, AugmentationMatrix) else np.asarray(aug)
    asym = np.max(np.abs(matrix - matrix.T)) if matrix.size else 0.0
    if asym > SYMMETRY_TOL:
        raise ValidationError(f"matrix asymmetry {asym:.3e} exceeds {SYMMETRY_TOL}")
    if method == "frobenius":
        return float(np.sum(matrix * matrix))
    if method == "eigen":
        eigenvalues = jacobi_eigenvalues(matrix)
        return float(np.sum(eigenvalues**2))
    raise ValidationError(f"unknown method {method!r}")


def labeling_error(space: PointSpace, aug: AugmentationMatrix) -> float:
    """Probability that a positive pair crosses class boundaries.

    Pairs are drawn from the unnormalized pair distribution (total mass 1).
    A pair counts as cross-class only when the label sets of its two views
    are disjoint, so overlap points never conflict with either class.
    """
    disjoint = space.labels_disjoint()
    return float(aug.pair_distribution[disjoint].sum())


def downstream_bound(sum_lambda_sq: float, alpha: float, c1: float, c2: float) -> float:
    """c1 * sum of squared eigenvalues + c2 * labeling error."""
    for name, v in (("sum_lambda_sq", sum_lambda_sq), ("alpha", alpha),
                    ("c1", c1), ("c2", c2)):
        if not np.isfinite(v):
            raise ValidationError(f"{name} must be finite, got {v}")
    if c1 <= 0 or c2 <= 0:
        raise ValidationError(f"constants must be positive, got c1={c1}, c2={c2}")
    return c1 * sum_lambda_sq + c2 * alpha


def edge_weights(space: PointSpace, aug: AugmentationMatrix) -> tuple[float, float]:
    """Mean positive-pair weight of intra-class and inter-class view pairs.

    Both means run over pairs of exclusive (single-label) points: intra-class
    pairs share their label, inter-class pairs have different labels.  On the
    uniform toy space each mean equals the constant block entry it averages.
    Returns (intra, inter); inter is 0.0 for a single-class space.
    """
    single = np.array([len(lab) == 1 for lab in space.labels])
    cls = np.array([min(lab) for lab in space.labels])
    pair = aug.pair_distribution

    same = (cls[:, None] == cls[None, :]) & np.outer(single, single)
    diff = (cls[:, None] != cls[None, :]) & np.outer(single, single)
    intra = float(pair[same].mean()) if same.any() else 0.0
    inter = float(pair[diff].mean()) if diff.any() else 0.0
    return intra, inter
