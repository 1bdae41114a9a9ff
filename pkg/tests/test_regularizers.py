"""Regularizer and drift values against hand-derived oracles."""

import numpy as np
import pytest

from pmdlab.errors import ConfigurationError, InvalidDistributionError
from pmdlab.regularizers import (
    DriftSpec,
    RegularizerSpec,
    bregman,
    bregman_generic,
    drift_value,
    h_bound,
    h_subgradient,
    h_value,
    validate_distribution,
)

ALL_KINDS = [
    RegularizerSpec.neg_shannon(),
    RegularizerSpec.neg_tsallis(0.5),
    RegularizerSpec.neg_tsallis(2.0),
    RegularizerSpec.sq_l2(),
    RegularizerSpec.max_(),
]


def simplex_pairs(rng, count, n_range=(2, 16)):
    for _ in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        yield rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))


def test_neg_shannon_uniform():
    assert h_value(RegularizerSpec.neg_shannon(), [0.5, 0.5]) == pytest.approx(
        -0.6931471805599453, abs=1e-12)


def test_max_value():
    assert h_value(RegularizerSpec.max_(), [0.2, 0.5, 0.3]) == 0.5


def test_neg_tsallis_half_uniform():
    # (1/(m-1)) sum(p - p^m) at m=0.5, p=[.5,.5]: 2(sqrt(2)-1) negated
    assert h_value(RegularizerSpec.neg_tsallis(0.5), [0.5, 0.5]) == pytest.approx(
        -0.8284271247461903, abs=1e-12)


def test_sq_l2_value():
    assert h_value(RegularizerSpec.sq_l2(), [0.25, 0.75]) == pytest.approx(
        0.25 ** 2 + 0.75 ** 2, abs=1e-15)


def test_subgradient_sq_l2():
    g = h_subgradient(RegularizerSpec.sq_l2(), [0.25, 0.75])
    np.testing.assert_allclose(g, [0.5, 1.5], atol=1e-15)


def test_subgradient_max_tie_lowest_index():
    g = h_subgradient(RegularizerSpec.max_(), [0.5, 0.5])
    np.testing.assert_array_equal(g, [1.0, 0.0])


def test_subgradient_neg_shannon():
    g = h_subgradient(RegularizerSpec.neg_shannon(), [0.5, 0.5])
    np.testing.assert_allclose(g, np.log(0.5) + 1.0, atol=1e-12)


def test_bregman_neg_shannon_is_kl():
    p, q = np.array([0.75, 0.25]), np.array([0.5, 0.5])
    kl = float(np.sum(p * np.log(p / q)))
    got = bregman(RegularizerSpec.neg_shannon(), p, q)
    assert got == pytest.approx(kl, abs=1e-10)
    assert got == pytest.approx(0.13081203594113697, abs=1e-12)


def test_bregman_max_hand_cases():
    mx = RegularizerSpec.max_()
    assert bregman(mx, [0.4, 0.6], [0.7, 0.3]) == pytest.approx(0.2, abs=1e-12)
    assert bregman(mx, [0.6, 0.4], [0.7, 0.3]) == pytest.approx(0.0, abs=1e-12)


def test_bregman_self_distance():
    rng = np.random.default_rng(7)
    for spec in ALL_KINDS:
        for p, _ in simplex_pairs(rng, 200):
            assert bregman(spec, p, p) <= 1e-12


def test_bregman_nonnegative():
    rng = np.random.default_rng(11)
    for spec in ALL_KINDS:
        for p, q in simplex_pairs(rng, 500):
            assert bregman(spec, p, q) >= -1e-9


def test_bregman_closed_matches_generic():
    rng = np.random.default_rng(13)
    for spec in ALL_KINDS:
        for p, q in simplex_pairs(rng, 300):
            closed = bregman(spec, p, q)
            generic = bregman_generic(spec, p, q)
            assert abs(closed - generic) <= 1e-9


def test_drift_reverse_kl_matches_example():
    rkl = DriftSpec.reverse_kl()
    assert drift_value(rkl, [0.5, 0.5], [0.5, 0.5]) == pytest.approx(0.0, abs=1e-15)
    assert drift_value(rkl, [0.75, 0.25], [0.5, 0.5]) == pytest.approx(
        0.13081203594113697, abs=1e-12)


def test_drift_forward_kl_swaps_arguments():
    fkl = DriftSpec.forward_kl()
    rkl = DriftSpec.reverse_kl()
    rng = np.random.default_rng(17)
    for p, q in simplex_pairs(rng, 100):
        assert drift_value(fkl, p, q) == pytest.approx(drift_value(rkl, q, p), abs=1e-12)


def test_drift_bregman_of_neg_shannon_is_reverse_kl():
    via_bregman = DriftSpec.bregman_of(RegularizerSpec.neg_shannon())
    rkl = DriftSpec.reverse_kl()
    rng = np.random.default_rng(19)
    for p, q in simplex_pairs(rng, 1000):
        a = drift_value(via_bregman, p, q)
        b = drift_value(rkl, p, q)
        assert abs(a - b) <= 1e-10


def test_tsallis_to_shannon_limit():
    rng = np.random.default_rng(23)
    shannon = RegularizerSpec.neg_shannon()
    for m in (1.0 - 1e-4, 1.0 + 1e-4):
        spec = RegularizerSpec.neg_tsallis(m)
        for p, _ in simplex_pairs(rng, 200):
            assert abs(h_value(spec, p) - h_value(shannon, p)) <= 1e-3


def test_h_bound_values():
    assert h_bound(RegularizerSpec.neg_shannon(), 2) == pytest.approx(np.log(2.0))
    assert h_bound(RegularizerSpec.neg_shannon(), 7) == pytest.approx(np.log(7.0))
    assert h_bound(RegularizerSpec.neg_tsallis(2.0), 5) == pytest.approx(1.0)
    assert h_bound(RegularizerSpec.neg_tsallis(0.5), 2) == pytest.approx(1.0)
    assert h_bound(RegularizerSpec.sq_l2(), 9) == 1.0
    assert h_bound(RegularizerSpec.max_(), 3) == 1.0


def test_h_bound_dominates_values():
    rng = np.random.default_rng(29)
    for spec in ALL_KINDS:
        for p, _ in simplex_pairs(rng, 300):
            assert abs(h_value(spec, p)) <= h_bound(spec, p.size) + 1e-9


def test_max_subgradient_inequality():
    # h(p) >= h(q) + <g, p-q> for any subgradient g at q
    mx = RegularizerSpec.max_()
    rng = np.random.default_rng(31)
    for p, q in simplex_pairs(rng, 500):
        g = h_subgradient(mx, q)
        assert h_value(mx, p) >= h_value(mx, q) + float(g @ (p - q)) - 1e-12


def test_invalid_distributions_rejected():
    with pytest.raises(InvalidDistributionError):
        validate_distribution([0.5, 0.6])
    with pytest.raises(InvalidDistributionError):
        validate_distribution([-0.1, 1.1])
    with pytest.raises(InvalidDistributionError):
        h_value(RegularizerSpec.neg_shannon(), [0.9, 0.2])


def test_spec_invariants_enforced():
    with pytest.raises(ConfigurationError):
        RegularizerSpec.neg_tsallis(1.0)
    with pytest.raises(ConfigurationError):
        RegularizerSpec.neg_tsallis(-0.5)
    with pytest.raises(ConfigurationError):
        RegularizerSpec.sq_l2(0.5)


def test_labels_distinct():
    labels = {spec.label() for spec in ALL_KINDS}
    assert len(labels) == len(ALL_KINDS)
