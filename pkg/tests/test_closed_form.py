"""Closed-form reference values and brute-force reconciliation."""

import numpy as np
import pytest

from tokgraph.errors import ValidationError
from tokgraph.toymodel import (
    CLASS_WISE,
    CROSS_CLASS,
    MAE_LIKE,
    ToySpaceSpec,
    folded_reference_bound,
    closed_form_bounds,
    mae_bound_polynomial,
    make_partition,
    build_point_space,
    reconcile,
    two_class_composition_forms,
)


class TestTabulatedValues:
    def test_mae_weights_evaluated(self):
        cf = closed_form_bounds(ToySpaceSpec(2, 10, 2), MAE_LIKE)
        assert cf.intra_weight == pytest.approx(18 / 4000, abs=1e-18)
        assert cf.inter_weight == pytest.approx(2 / 4000, abs=1e-18)

    def test_mae_polynomial_at_point_two(self):
        # 2 - 0.75 + 0.18 - 0.022 + 0.0016
        cf = closed_form_bounds(ToySpaceSpec(2, 10, 2), MAE_LIKE)
        assert cf.t == pytest.approx(0.2)
        assert cf.bound == pytest.approx(1.4096, abs=1e-12)
        assert cf.bound_basis == "exact_expression"
        assert mae_bound_polynomial(0.2) == pytest.approx(1.4096, abs=1e-12)

    def test_three_class_mae_intra(self):
        cf = closed_form_bounds(ToySpaceSpec(3, 10, 1), MAE_LIKE)
        assert cf.intra_weight == pytest.approx((20 - 2) / (2 * 3 * 1000), abs=1e-18)
        assert cf.bound_basis == "series_order_1"

    def test_cross_three_class_series(self):
        cf = closed_form_bounds(ToySpaceSpec(3, 10, 1), CROSS_CLASS)
        assert cf.bound == pytest.approx(0.5 + 4.5)
        assert cf.bound_basis == "series_order_0"

    def test_unsupported_kind(self):
        with pytest.raises(ValidationError, match="no closed forms"):
            closed_form_bounds(ToySpaceSpec(2, 10, 2), "explicit")


class TestCompositionForms:
    def test_folded_equals_unfolded_plus_error_term(self):
        # completed square identity, checked on every named partition
        for kind in (MAE_LIKE, CLASS_WISE, CROSS_CLASS):
            space = build_point_space(ToySpaceSpec(2, 12, 4))
            part = make_partition(space, kind)
            forms = two_class_composition_forms(12, 4, part.two_class_compositions())
            assert forms.folded_bound == pytest.approx(
                forms.sum_lambda_sq + 2.5 * forms.alpha, abs=1e-12
            )

    def test_folded_reference_bound_none_for_multiclass(self):
        space = build_point_space(ToySpaceSpec(3, 6, 0))
        part = make_partition(space, MAE_LIKE)
        assert folded_reference_bound(space.spec, []) is None

    def test_mae_composition_matches_polynomial(self):
        # for singleton blocks the folded form collapses to the quartic
        spec = ToySpaceSpec(2, 10, 2)
        space = build_point_space(spec)
        part = make_partition(space, MAE_LIKE)
        forms = two_class_composition_forms(10, 2, part.two_class_compositions())
        assert forms.folded_bound == pytest.approx(mae_bound_polynomial(0.2), abs=1e-12)


class TestReconcile:
    def test_mae_ratios_are_one(self):
        report = reconcile(ToySpaceSpec(2, 10, 2), MAE_LIKE)
        recon = report.reconciliation
        assert recon["intra_weight"]["ratio"] == pytest.approx(1.0, abs=1e-9)
        assert recon["inter_weight"]["ratio"] == pytest.approx(1.0, abs=1e-9)
        assert recon["inter_convention"] == "both"

    def test_class_inter_ratio_is_two(self):
        # brute force doubles the tabulated class-wise inter weight; the
        # composition product form matches exactly
        report = reconcile(ToySpaceSpec(2, 10, 2), CLASS_WISE)
        recon = report.reconciliation
        assert recon["intra_weight"]["ratio"] == pytest.approx(1.0, abs=1e-9)
        assert recon["inter_weight"]["ratio"] == pytest.approx(2.0, abs=1e-9)
        assert recon["inter_weight"]["constant_factor"] == 2.0
        assert recon["composition_inter_weight"]["ratio"] == pytest.approx(1.0, abs=1e-9)
        assert recon["inter_convention"] == "product"

    def test_no_overlap_inter_weights_zero(self):
        report = reconcile(ToySpaceSpec(2, 10, 0), CLASS_WISE)
        assert report.inter_weight == 0.0
        assert report.closed.inter_weight == 0.0
        assert report.reconciliation["inter_weight"]["ratio"] == 1.0

    def test_composition_quantities_match_brute_exactly(self):
        # alpha and both edge weights agree between the pipeline and the
        # composition closed forms for every named kind
        for kind in (MAE_LIKE, CLASS_WISE, CROSS_CLASS):
            report = reconcile(ToySpaceSpec(2, 12, 4), kind)
            recon = report.reconciliation
            assert recon["composition_alpha"]["ratio"] == pytest.approx(1.0, abs=1e-9)
            assert recon["composition_intra_weight"]["ratio"] == pytest.approx(1.0, abs=1e-9)
            assert recon["composition_inter_weight"]["ratio"] == pytest.approx(1.0, abs=1e-9)

    def test_mae_bound_discrepancy_is_t_one_minus_t(self):
        # brute-force bound exceeds the quartic by exactly t*(1-t): the
        # matrix counts each exclusive-overlap rectangle twice while the
        # spectral expansion behind the quartic counts it once
        for n, m in ((10, 2), (20, 2), (25, 5)):
            report = reconcile(ToySpaceSpec(2, n, m), MAE_LIKE)
            t = m / n
            assert report.bound_raw - report.closed.bound == pytest.approx(
                t * (1 - t), abs=1e-9
            )

    def test_report_serializes(self):
        report = reconcile(ToySpaceSpec(2, 10, 2), CROSS_CLASS, cross_split=2)
        payload = report.to_dict()
        assert payload["partition"]["cross_split"] == 2
        assert payload["constants"] == {"c1": 1.0, "c2": 2.5, "c3": 2.5, "scale": 1.0}
        assert "composition_form" in payload
        # valid JSON
        assert "brute_force" in __import__("json").loads(report.to_json())

    def test_report_flags(self):
        flags = reconcile(ToySpaceSpec(2, 10, 2), MAE_LIKE).reconciliation["flags"]
        assert flags["marginalization_identity"] is True
        assert flags["spectrum_identity"] is True
        assert flags["intra_matches_closed"] is True
        assert flags["inter_matches_closed"] is True
        assert flags["composition_exact"] is True
        # the class-wise inter weight is a known constant-factor mismatch
        flags = reconcile(ToySpaceSpec(2, 10, 2), CLASS_WISE).reconciliation["flags"]
        assert flags["inter_matches_closed"] is False
        assert flags["composition_exact"] is True

    def test_three_class_ratios_recorded(self):
        # multi-class tabulated forms carry known convention gaps; the
        # report records them as exact ratios instead of absorbing them
        rep = reconcile(ToySpaceSpec(3, 20, 2), MAE_LIKE)
        assert rep.reconciliation["intra_weight"]["ratio"] == pytest.approx(1.0, abs=1e-9)
        assert rep.reconciliation["inter_weight"]["ratio"] == pytest.approx(1.0, abs=1e-9)
        assert rep.bound_folded is None  # folded form is two-class only

        rep = reconcile(ToySpaceSpec(3, 20, 2), CLASS_WISE)
        assert rep.reconciliation["intra_weight"]["constant_factor"] == 2.0

        rep = reconcile(ToySpaceSpec(3, 20, 2), CROSS_CLASS)
        assert rep.reconciliation["intra_weight"]["ratio"] == pytest.approx(2 / 3, abs=1e-9)
        assert rep.reconciliation["inter_weight"]["ratio"] == pytest.approx(2 / 3, abs=1e-9)

    def test_explicit_partition_reconciles_compositions_only(self):
        spec = ToySpaceSpec(2, 4, 2)
        space = build_point_space(spec)
        blocks = [(0, 1, 2), (3, 4, 5)]
        part = make_partition(space, "explicit", blocks=blocks)
        report = reconcile(spec, "explicit", partition=part)
        assert report.closed is None
        assert "composition_alpha" in report.reconciliation
        assert report.reconciliation["composition_alpha"]["ratio"] == pytest.approx(
            1.0, abs=1e-9
        )
