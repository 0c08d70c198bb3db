"""Finite point space and masking distribution for the tokenization toy model.

The space consists of ``s`` classes of ``n`` points each, where any two
classes share exactly ``m`` points and no point belongs to more than two
classes.  A sample is drawn by picking a class uniformly and then an ordered
pair of points uniformly from that class; the first element plays the role
of the unmasked view and the second the masked view.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True)
class ToySpaceSpec:
    """Parameters of the overlapping-classes point space.

    num_classes:      number of classes s (>= 1)
    points_per_class: points n in each class
    pairwise_overlap: points m shared by every unordered class pair
    """

    num_classes: int
    points_per_class: int
    pairwise_overlap: int = 0

    def __post_init__(self) -> None:
        s, n, m = self.num_classes, self.points_per_class, self.pairwise_overlap
        if s < 1:
            raise ValidationError(f"num_classes must be >= 1, got {s}")
        if n < 1:
            raise ValidationError(f"points_per_class must be >= 1, got {n}")
        if m < 0:
            raise ValidationError(f"pairwise_overlap must be >= 0, got {m}")
        if m > n:
            raise ValidationError(
                f"pairwise_overlap must not exceed points_per_class ({m} > {n})"
            )
        if s >= 2 and (s - 1) * m > n:
            raise ValidationError(
                f"each class needs (s-1)*m <= n exclusive slots; "
                f"got (s-1)*m = {(s - 1) * m} > n = {n}"
            )

    @property
    def overlap_ratio(self) -> float:
        """t = m / n."""
        return self.pairwise_overlap / self.points_per_class

    @property
    def total_points(self) -> int:
        """s*n - m*s*(s-1)/2 distinct points."""
        s = self.num_classes
        return s * self.points_per_class - self.pairwise_overlap * s * (s - 1) // 2


class PointSpace:
    """Concrete enumeration of the points described by a ToySpaceSpec.

    Points are numbered deterministically: first the exclusive points of each
    class in class order, then the overlap points of each class pair in
    lexicographic pair order.  Every point carries the set of classes it
    belongs to (size 1 or 2).
    """

    def __init__(self, spec: ToySpaceSpec, labels: tuple[frozenset[int], ...]):
        self.spec = spec
        self.labels = labels

    @property
    def n_points(self) -> int:
        return len(self.labels)

    def exclusive_ids(self, cls: int) -> list[int]:
        """Ids of points that belong to ``cls`` and no other class."""
        return [i for i, lab in enumerate(self.labels) if lab == frozenset((cls,))]

    def overlap_ids(self, a: int, b: int) -> list[int]:
        """Ids of the points shared by classes ``a`` and ``b``."""
        key = frozenset((a, b))
        return [i for i, lab in enumerate(self.labels) if lab == key]

    def class_ids(self, cls: int) -> list[int]:
        """All ids belonging to ``cls``: exclusives first, then overlaps."""
        ids = self.exclusive_ids(cls)
        for other in range(self.spec.num_classes):
            if other != cls:
                ids.extend(self.overlap_ids(cls, other))
        return ids

    def point_id(self, cls: int, within: int) -> int:
        """Global id of the ``within``-th point of class ``cls``."""
        ids = self.class_ids(cls)
        if not 0 <= within < len(ids):
            raise ValidationError(
                f"within-class index {within} out of range for class {cls}"
            )
        return ids[within]

    def labels_disjoint(self) -> np.ndarray:
        """Boolean matrix: True where two points share no class."""
        member = self.membership_matrix()
        return (member @ member.T) == 0

    def membership_matrix(self) -> np.ndarray:
        """(n_points, s) 0/1 matrix of class membership."""
        s = self.spec.num_classes
        out = np.zeros((self.n_points, s), dtype=np.int64)
        for i, lab in enumerate(self.labels):
            for cls in lab:
                out[i, cls] = 1
        return out


def build_point_space(spec: ToySpaceSpec) -> PointSpace:
    """Enumerate the point space for ``spec``.

    Deterministic: exclusive points class-by-class, then overlap points per
    class pair, pairs in lexicographic order.
    """
    s, n, m = spec.num_classes, spec.points_per_class, spec.pairwise_overlap
    labels: list[frozenset[int]] = []
    exclusive = n - (s - 1) * m if s >= 2 else n
    for cls in range(s):
        labels.extend([frozenset((cls,))] * exclusive)
    for a, b in itertools.combinations(range(s), 2):
        labels.extend([frozenset((a, b))] * m)
    space = PointSpace(spec, tuple(labels))
    assert space.n_points == spec.total_points
    return space


class MaskJoint:
    """Joint masking distribution M(x1, x2) over ordered point pairs.

    ``joint[i, j]`` is the probability that the unmasked view is point ``i``
    and the masked view is point ``j``.  The generative process makes the
    joint symmetric, so the unmasked and masked marginals coincide.
    """

    def __init__(self, joint: np.ndarray):
        self.joint = joint

    @property
    def n_points(self) -> int:
        return self.joint.shape[0]

    @property
    def unmasked_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    @property
    def masked_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=0)


def build_mask_joint(space: PointSpace) -> MaskJoint:
    """Joint distribution of the class-then-ordered-pair sampling process.

    Each class contributes mass 1/(s*n^2) to every ordered pair of its
    members, so a pair sharing two classes carries twice the mass of a pair
    sharing one.
    """
    s = space.spec.num_classes
    n = space.spec.points_per_class
    member = space.membership_matrix().astype(np.float64)
    shared = member @ member.T
    joint = shared / (s * n * n)
    return MaskJoint(joint)
