"""Closed-form reference values for the uniform toy space.

Two layers are kept deliberately separate:

* composition forms, derived from per-block composition counts of a
  two-class partition; these are algebraically exact for the pipeline's
  definitions wherever they apply, and
* tabulated per-tokenizer reference values (edge weights and bound
  expressions for the mae-like, class-wise and cross-class families) that
  the brute-force pipeline is reconciled against.  The tabulated values
  carry known convention quirks, so reconciliation records exact ratios
  instead of assuming agreement.

Where an exact bound expression exists it is used; otherwise the bound is
a truncated series in the overlap ratio t and the report notes the order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from ..errors import ValidationError
from .partition import CLASS_WISE, CROSS_CLASS, MAE_LIKE
from .space import ToySpaceSpec

DEFAULT_C3 = 2.5

BASIS_EXACT = "exact_expression"
BASIS_SERIES_O1 = "series_order_1"
BASIS_SERIES_O0 = "series_order_0"


@dataclass(frozen=True)
class CompositionSums:
    """Per-partition sums over blocks of a two-class space.

    With block counts (n1, n2, n3) for exclusive-first-class,
    exclusive-second-class and overlap members, and d = n1 + n2 + 2*n3:

    s11 = sum (n1+n3)^2 / d         s22 = sum (n2+n3)^2 / d
    s12 = sum (n1+n3)(n2+n3) / d    s12_alt = sum n3^2 / d
    s13 = sum (n1+n3)(n1+2*n3) / d  s23 = sum (n2+n3)(n2+2*n3) / d

    ``s12`` is the product convention for the inter-class term, ``s12_alt``
    the squared-overlap variant; reconciliation decides empirically which
    one the pipeline realizes.
    """

    s11: float
    s22: float
    s12: float
    s12_alt: float
    s13: float
    s23: float


def composition_sums(compositions: Sequence[tuple[int, int, int]]) -> CompositionSums:
    s11 = s22 = s12 = s12_alt = s13 = s23 = 0.0
    for n1, n2, n3 in compositions:
        d = n1 + n2 + 2 * n3
        if d <= 0:
            raise ValidationError("composition has an empty block")
        s11 += (n1 + n3) ** 2 / d
        s22 += (n2 + n3) ** 2 / d
        s12 += (n1 + n3) * (n2 + n3) / d
        s12_alt += n3 * n3 / d
        s13 += (n1 + n3) * (n1 + 2 * n3) / d
        s23 += (n2 + n3) * (n2 + 2 * n3) / d
    return CompositionSums(s11, s22, s12, s12_alt, s13, s23)


@dataclass(frozen=True)
class CompositionForms:
    """Closed quantities computed from two-class composition counts."""

    sums: CompositionSums
    sum_lambda_sq: float
    alpha: float
    intra_weight: float
    inter_weight: float            # product convention
    inter_weight_alt: float        # squared-overlap convention
    folded_bound: float            # completed-square form, equals
                                   # sum_lambda_sq + c3 * alpha


def two_class_composition_forms(
    n: int, m: int, compositions: Sequence[tuple[int, int, int]], c3: float = DEFAULT_C3
) -> CompositionForms:
    """Evaluate the composition closed forms for a two-class partition."""
    s = composition_sums(compositions)
    u2 = float(n - m) ** 2
    n2, n3, n4 = float(n) ** 2, float(n) ** 3, float(n) ** 4

    sum_lambda_sq = (
        u2 / n4 * (s.s11**2 + s.s22**2 + 2 * s.s12**2)
        + (n - m) * m / (2 * n4) * (s.s13**2 + s.s23**2)
        + m * m / n2
    )
    alpha = u2 / n3 * s.s12
    intra = (s.s11 + s.s22) / (4 * n3)
    inter = s.s12 / (2 * n3)
    inter_alt = s.s12_alt / (2 * n3)
    correction = c3 * c3 * u2 / (8 * n2)
    folded = (
        u2 / n4 * (s.s11**2 + s.s22**2 + 2 * (s.s12 + c3 * n / 4) ** 2)
        + (n - m) * m / (2 * n4) * (s.s13**2 + s.s23**2)
        + m * m / n2
        - correction
    )
    return CompositionForms(
        sums=s,
        sum_lambda_sq=sum_lambda_sq,
        alpha=alpha,
        intra_weight=intra,
        inter_weight=inter,
        inter_weight_alt=inter_alt,
        folded_bound=folded,
    )


def mae_bound_polynomial(t: float) -> float:
    """Exact reference bound for mae-like tokenization of a two-class space.

    Quartic in the overlap ratio: 2 - 15t/4 + 9t^2/2 - 11t^3/4 + t^4.
    """
    return 2.0 - 15.0 * t / 4.0 + 4.5 * t * t - 2.75 * t**3 + t**4


def _class_bound_exact(t: float, c3: float) -> float:
    poly = (
        2.0 - 7.0 * t + 16.0 * t**2 - 19.5 * t**3
        + 14.5 * t**4 - 95.0 / 16.0 * t**5 + 15.0 / 16.0 * t**6
    )
    return poly + c3 * (1.0 - t) ** 2 * (t - t * t / 2.0)


def _cross_bound_exact(t: float, c3: float) -> float:
    return (
        (1.0 - t) ** 2
        + 0.25 * (1.0 - t) * t * (1.0 + t) ** 2
        + t * t
        + (c3 / 2.0) * (1.0 - t) ** 2
    )


@dataclass(frozen=True)
class ClosedFormBounds:
    """Tabulated reference weights and bound for a named tokenization."""

    kind: str
    num_classes: int
    n: int
    m: int
    t: float
    intra_weight: float
    inter_weight: float
    bound: float
    bound_basis: str
    c3: float


def closed_form_bounds(
    spec: ToySpaceSpec, kind: str, c3: float = DEFAULT_C3
) -> ClosedFormBounds:
    """Reference intra weight, inter weight and bound for a named kind.

    Two-class bounds are exact expressions in t; multi-class bounds are the
    leading series terms with the truncation order recorded in
    ``bound_basis``.  The overall bound scale is fixed at 1 with the default
    cross-term constant c3 = 5/2.
    """
    s = spec.num_classes
    n = spec.points_per_class
    m = spec.pairwise_overlap
    t = spec.overlap_ratio

    if kind not in (MAE_LIKE, CLASS_WISE, CROSS_CLASS):
        raise ValidationError(
            f"no closed forms for partition kind {kind!r}; "
            f"expected mae_like, class_wise or cross_class"
        )

    if s == 2:
        if kind == MAE_LIKE:
            intra = (2 * n - m) / (4.0 * n**3)
            inter = m / (4.0 * n**3)
            bound, basis = mae_bound_polynomial(t), BASIS_EXACT
        elif kind == CLASS_WISE:
            intra = ((n - m / 2.0) ** 2 + (m / 2.0) ** 2) / (2.0 * n**4)
            inter = m * (n - m / 2.0) / (4.0 * n**4)
            bound, basis = _class_bound_exact(t, c3), BASIS_EXACT
        else:
            intra = inter = 1.0 / (4.0 * n**2)
            bound, basis = _cross_bound_exact(t, c3), BASIS_EXACT
    else:
        if kind == MAE_LIKE:
            intra = (2 * n - (s - 1) * m) / (2.0 * s * n**3)
            inter = m / (2.0 * s * n**3)
            bound, basis = s - 15.0 * (s - 1) * t / 4.0, BASIS_SERIES_O1
        elif kind == CLASS_WISE:
            intra = ((n - (s - 1) * m / 2.0) ** 2 + (s - 1) * (m / 2.0) ** 2) / (
                2.0 * s * n**4
            )
            inter = m * (n - (s - 1) * m / 2.0) / (2.0 * s * n**4)
            bound, basis = s - 4.5 * (s - 1) * t, BASIS_SERIES_O1
        else:
            intra = inter = 1.0 / (2.0 * s * n**2)
            bound, basis = 0.5 + 1.5 * s, BASIS_SERIES_O0

    return ClosedFormBounds(
        kind=kind,
        num_classes=s,
        n=n,
        m=m,
        t=t,
        intra_weight=intra,
        inter_weight=inter,
        bound=bound,
        bound_basis=basis,
        c3=c3,
    )


def folded_reference_bound(
    spec: ToySpaceSpec,
    compositions: Sequence[tuple[int, int, int]],
    c3: float = DEFAULT_C3,
) -> Optional[float]:
    """Completed-square bound form for a two-class partition, scale 1.

    Folds the c3-weighted labeling error into the squared inter-class sum
    and subtracts the completion constant c3^2 (n-m)^2 / (8 n^2).  Returns
    None for spaces with more than two classes, where the folded form is
    not defined.
    """
    if spec.num_classes != 2:
        return None
    forms = two_class_composition_forms(
        spec.points_per_class, spec.pairwise_overlap, compositions, c3
    )
    return forms.folded_bound
