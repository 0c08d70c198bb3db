"""Aggregation, augmentation graph, spectrum, labeling error and bounds.

Brute-force oracles here are written independently of the library code:
direct summation loops over the joint matrix, with no shared helpers.
"""

import numpy as np
import pytest

from tokgraph.errors import ValidationError
from tokgraph.toymodel import (
    CLASS_WISE,
    CROSS_CLASS,
    MAE_LIKE,
    ToySpaceSpec,
    aggregate_mask_graph,
    build_augmentation_matrix,
    build_mask_joint,
    build_point_space,
    downstream_bound,
    edge_weights,
    enumerate_partitions,
    jacobi_eigenvalues,
    labeling_error,
    make_partition,
    spectrum_sum_squares,
)


def pipeline(s, n, m, kind, cross_split=2):
    space = build_point_space(ToySpaceSpec(s, n, m))
    joint = build_mask_joint(space)
    part = make_partition(space, kind, cross_split=cross_split)
    return space, joint, part, build_augmentation_matrix(joint, part)


def oracle_pair_distribution(joint, blocks):
    """Independent loop-based positive-pair distribution."""
    m = joint.joint
    n = m.shape[0]
    marg = m.sum(axis=0)
    out = np.zeros((n, n))
    for block in blocks:
        mass = sum(marg[i] for i in block)
        for x1 in range(n):
            w1 = sum(m[x1, i] for i in block)
            for x2 in range(n):
                w2 = sum(m[x2, i] for i in block)
                out[x1, x2] += w1 * w2 / mass
    return out


class TestAggregation:
    def test_singleton_partition_equals_joint(self):
        space, joint, part, _ = pipeline(2, 6, 2, MAE_LIKE)
        table = aggregate_mask_graph(joint, part)
        np.testing.assert_array_equal(table, joint.joint)

    def test_one_block_column_is_marginal(self):
        space = build_point_space(ToySpaceSpec(2, 6, 2))
        joint = build_mask_joint(space)
        part = make_partition(space, "explicit", blocks=[range(space.n_points)])
        table = aggregate_mask_graph(joint, part)
        np.testing.assert_allclose(table[:, 0], joint.unmasked_marginal, atol=1e-15)

    def test_row_sums_recover_marginal(self):
        space, joint, part, _ = pipeline(2, 10, 2, CLASS_WISE)
        table = aggregate_mask_graph(joint, part)
        np.testing.assert_allclose(
            table.sum(axis=1), joint.unmasked_marginal, atol=1e-14, rtol=0.0
        )

    def test_against_direct_summation(self):
        space, joint, part, _ = pipeline(2, 8, 2, CROSS_CLASS)
        table = aggregate_mask_graph(joint, part)
        for bi, block in enumerate(part.blocks):
            for x1 in range(space.n_points):
                expected = sum(joint.joint[x1, x2] for x2 in block)
                assert table[x1, bi] == pytest.approx(expected, abs=1e-15)

    def test_marginalization_identity_many_partitions(self):
        # every partition of a small space satisfies the identity
        space = build_point_space(ToySpaceSpec(2, 3, 0))
        joint = build_mask_joint(space)
        for part in enumerate_partitions(space):
            table = aggregate_mask_graph(joint, part)
            np.testing.assert_allclose(
                table.sum(axis=1), joint.unmasked_marginal, atol=1e-12, rtol=0.0
            )


class TestAugmentationMatrix:
    def test_disconnected_classes_block_constant(self):
        # no overlap, class partition: constant within classes, zero between
        space, joint, part, aug = pipeline(2, 5, 0, CLASS_WISE)
        a = aug.matrix
        n = 5
        ids0, ids1 = space.class_ids(0), space.class_ids(1)
        np.testing.assert_allclose(a[np.ix_(ids0, ids0)], 1.0 / n, atol=1e-14)
        np.testing.assert_allclose(a[np.ix_(ids1, ids1)], 1.0 / n, atol=1e-14)
        np.testing.assert_allclose(a[np.ix_(ids0, ids1)], 0.0, atol=1e-15)

    def test_mae_intra_entry_hand_traced(self):
        # singleton blocks, both views exclusive same-class: (2n - m)/(2 n^2)
        n, m = 10, 2
        space, joint, part, aug = pipeline(2, n, m, MAE_LIKE)
        i, j = space.exclusive_ids(0)[:2]
        assert aug.matrix[i, j] == pytest.approx((2 * n - m) / (2 * n**2), rel=1e-12)

    def test_matches_oracle_pair_distribution(self):
        space, joint, part, aug = pipeline(2, 6, 2, CLASS_WISE)
        oracle = oracle_pair_distribution(joint, part.blocks)
        np.testing.assert_allclose(aug.pair_distribution, oracle, atol=1e-14)

    def test_symmetry_nonnegativity_finite(self):
        for kind in (MAE_LIKE, CLASS_WISE, CROSS_CLASS):
            _, _, _, aug = pipeline(2, 12, 4, kind)
            np.testing.assert_array_equal(aug.matrix, aug.matrix.T)
            assert np.all(aug.matrix >= 0.0)
            assert np.all(np.isfinite(aug.matrix))

    def test_pair_distribution_sums_to_one(self):
        for kind in (MAE_LIKE, CLASS_WISE, CROSS_CLASS):
            _, _, _, aug = pipeline(3, 8, 2, kind)
            assert aug.pair_distribution.sum() == pytest.approx(1.0, abs=1e-12)

    def test_degrees_equal_marginals(self):
        _, joint, _, aug = pipeline(2, 10, 2, CLASS_WISE)
        np.testing.assert_allclose(
            aug.pair_distribution.sum(axis=1), joint.unmasked_marginal, atol=1e-14
        )


class TestSpectrum:
    def test_frobenius_equals_eigen_path(self):
        _, _, _, aug = pipeline(2, 10, 2, MAE_LIKE)
        frob = spectrum_sum_squares(aug, method="frobenius")
        eig = spectrum_sum_squares(aug, method="eigen")
        assert frob == pytest.approx(eig, abs=1e-8)

    def test_eigen_path_matches_lapack(self):
        _, _, _, aug = pipeline(2, 8, 2, CLASS_WISE)
        ours = np.sort(jacobi_eigenvalues(aug.matrix))
        ref = np.sort(np.linalg.eigvalsh(aug.matrix))
        np.testing.assert_allclose(ours, ref, atol=1e-10)

    def test_asymmetric_rejected(self):
        bad = np.array([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(ValidationError, match="asymmetry"):
            spectrum_sum_squares(bad)

    def test_one_block_rank_one(self):
        # fully merged targets: pair distribution factorizes, spectrum {1, 0...}
        space = build_point_space(ToySpaceSpec(2, 5, 0))
        joint = build_mask_joint(space)
        part = make_partition(space, "explicit", blocks=[range(10)])
        aug = build_augmentation_matrix(joint, part)
        assert spectrum_sum_squares(aug) == pytest.approx(1.0, abs=1e-12)


class TestLabelingError:
    def test_zero_for_disconnected_classes(self):
        space, _, _, aug = pipeline(2, 8, 0, CLASS_WISE)
        assert labeling_error(space, aug) == 0.0

    def test_matches_composition_formula_mae(self):
        # (n-m)^2/n^3 * sum_i (n1+n3)(n2+n3)/(n1+n2+2*n3); for singletons the
        # sum collapses to m/2
        n, m = 10, 2
        space, _, _, aug = pipeline(2, n, m, MAE_LIKE)
        expected = (n - m) ** 2 / n**3 * (m / 2)
        got = labeling_error(space, aug)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got / expected == pytest.approx(1.0, abs=1e-9)  # exact ratio 1

    def test_overlap_pairs_do_not_count(self):
        # overlap points share a class with everyone, so mae alpha only sees
        # exclusive-exclusive cross pairs
        n, m = 6, 2
        space, _, _, aug = pipeline(2, n, m, MAE_LIKE)
        disjoint = space.labels_disjoint()
        ov = space.overlap_ids(0, 1)
        assert not disjoint[ov[0], :].any()

    def test_one_block_maximal_alpha(self):
        # among all partitions of the overlap-free space, merging everything
        # maximizes the cross-class positive mass
        space = build_point_space(ToySpaceSpec(2, 3, 0))
        joint = build_mask_joint(space)
        alphas = {}
        for part in enumerate_partitions(space):
            aug = build_augmentation_matrix(joint, part)
            alphas[part.blocks] = labeling_error(space, aug)
        one_block = tuple([tuple(range(6))])
        assert alphas[one_block] == pytest.approx(0.5, abs=1e-12)
        assert alphas[one_block] == pytest.approx(max(alphas.values()), abs=1e-12)


class TestDownstreamBound:
    def test_arithmetic(self):
        assert downstream_bound(0.5, 0.1, 1.0, 1.0) == pytest.approx(0.6)

    def test_validation(self):
        with pytest.raises(ValidationError, match="positive"):
            downstream_bound(1.0, 0.1, 0.0, 1.0)
        with pytest.raises(ValidationError, match="finite"):
            downstream_bound(float("nan"), 0.1, 1.0, 1.0)

    def test_class_wise_lower_than_mae(self):
        # brute force both partitions at n=20, m=2 with (c1, c2) = (1, 2.5)
        bounds = {}
        for kind in (CLASS_WISE, MAE_LIKE, CROSS_CLASS):
            space, _, _, aug = pipeline(2, 20, 2, kind)
            bounds[kind] = downstream_bound(
                spectrum_sum_squares(aug), labeling_error(space, aug), 1.0, 2.5
            )
        assert bounds[CLASS_WISE] < bounds[MAE_LIKE]
        assert bounds[CROSS_CLASS] > bounds[MAE_LIKE]


class TestEdgeWeights:
    def test_mae_closed_values(self):
        n, m = 10, 2
        space, _, _, aug = pipeline(2, n, m, MAE_LIKE)
        intra, inter = edge_weights(space, aug)
        assert intra == pytest.approx((2 * n - m) / (4 * n**3), rel=1e-12)
        assert inter == pytest.approx(m / (4 * n**3), rel=1e-12)

    def test_cross_equal_weights(self):
        n, m = 10, 2
        space, _, _, aug = pipeline(2, n, m, CROSS_CLASS)
        intra, inter = edge_weights(space, aug)
        assert intra == pytest.approx(1 / (4 * n**2), rel=1e-12)
        assert inter == pytest.approx(intra, rel=1e-12)
