from fractions import Fraction

import numpy as np
import pytest

from models import CoefVector, DyadicPoint, ONE
from services import eval_service, mask_service
from utils.errors import DimensionMismatch, SumRuleRequired, ToleranceNotReached


def hat_closed_form(x):
    return (x, 1 - x)


def test_hat_matches_closed_form_at_random_dyadics(hat_pair, rng):
    for _ in range(1024):
        m = int(rng.integers(1, 24))
        k = int(rng.integers(0, 1 << m))
        point = DyadicPoint.from_index(k, m)
        phi = eval_service.eval_phi(hat_pair, point)
        assert phi.values == hat_closed_form(Fraction(k, 1 << m))
        assert phi.radius == 0


def test_hat_float_mode_matches_closed_form(hat_pair, rng):
    pair = hat_pair.as_float()
    for _ in range(256):
        m = int(rng.integers(1, 24))
        k = int(rng.integers(0, 1 << m))
        x = k / (1 << m)
        phi = eval_service.eval_phi(pair, DyadicPoint.from_index(k, m))
        assert np.allclose(phi.as_array(), hat_closed_form(x), atol=1e-12)


def test_product_order_at_one_quarter(hat_pair):
    phi = eval_service.eval_phi(hat_pair, Fraction(1, 4))
    assert phi.values == (Fraction(1, 4), Fraction(3, 4))

    # the reversed product P1^T P0^T Phi(0) lands elsewhere
    start = np.array(eval_service.phi_at_integers(hat_pair).values, dtype=object)
    reversed_order = hat_pair.P1.T.dot(hat_pair.P0.T.dot(start))
    assert tuple(reversed_order) == (Fraction(1, 2), Fraction(1, 2))
    assert tuple(reversed_order) != phi.values


def test_phi_at_integers_bspline3():
    pair = mask_service.build_two_scale(mask_service.builtin_mask('bspline', 3))
    phi = eval_service.phi_at_integers(pair)
    assert phi.values == (0, Fraction(1, 2), Fraction(1, 2))
    assert phi.total() == 1


def test_fixed_vector_residual(catalog_mask):
    pair = mask_service.build_two_scale(catalog_mask)
    v = eval_service.phi_at_integers(pair).as_array()
    P0 = np.asarray(pair.P0, dtype=float)
    assert np.max(np.abs(P0.T @ v - v)) <= 1e-12
    assert v.sum() == pytest.approx(1.0, abs=1e-12)


def test_phi_at_one_is_shifted_fixed_vector(d4_pair):
    start = eval_service.phi_at_integers(d4_pair).as_array()
    end = eval_service.phi_at_one(d4_pair).as_array()
    assert np.allclose(end, np.append(start[1:], 0.0))
    P1 = np.asarray(d4_pair.P1, dtype=float)
    assert np.allclose(P1.T @ end, end, atol=1e-12)


def test_sum_rule_required_for_evaluation():
    mask = mask_service.validate_mask('lopsided', ['1', '0', '1'])
    with pytest.raises(SumRuleRequired):
        eval_service.phi_at_integers(mask_service.build_two_scale(mask))


def test_endpoints(hat_pair):
    assert eval_service.eval_phi(hat_pair, 0).values == (0, 1)
    assert eval_service.eval_phi(hat_pair, 1).values == (1, 0)
    assert eval_service.eval_phi(hat_pair, ONE).values == (1, 0)


def test_enclosure_at_fixed_depth_contains_hat_value(hat_pair):
    phi = eval_service.eval_phi(hat_pair, Fraction(1, 3), depth=10)
    assert 0 < phi.radius <= 2 ** -10
    truth = np.array([1 / 3, 2 / 3])
    assert np.all(np.abs(phi.as_array() - truth) <= phi.radius + 1e-15)


def test_non_dyadic_point_reaches_tolerance(d4_pair):
    phi = eval_service.eval_phi(d4_pair, '0.3', tol=1e-8)
    assert phi.radius <= 1e-8
    assert phi.as_array().sum() == pytest.approx(1.0, abs=1e-7)


def test_unreachable_tolerance(d4_pair):
    with pytest.raises(ToleranceNotReached):
        eval_service.eval_phi(d4_pair, Fraction(1, 3), tol=1e-300)


def test_points_outside_unit_interval(hat_pair):
    with pytest.raises(ValueError):
        eval_service.eval_phi(hat_pair, Fraction(3, 2))


def random_dyadics(rng, count, max_depth=16):
    for _ in range(count):
        m = int(rng.integers(1, max_depth + 1))
        yield DyadicPoint.from_index(int(rng.integers(0, (1 << m) + 1)), m)


@pytest.mark.slow
def test_partition_of_unity_combination(catalog_mask, rng):
    pair = mask_service.build_two_scale(catalog_mask)
    ones = CoefVector.of([1] * pair.N)
    for point in random_dyadics(rng, 1000):
        value = eval_service.eval_combination(pair, ones, point)
        if pair.exact:
            assert value == 1
        else:
            assert float(value) == pytest.approx(1.0, abs=1e-12)



def test_combination_dimension_mismatch(hat_pair):
    with pytest.raises(DimensionMismatch):
        eval_service.eval_combination(hat_pair, CoefVector.of([1, 2, 3]), Fraction(1, 2))


def test_combination_radius_scales_with_l1_norm(hat_pair):
    c = CoefVector.of([2, -1])
    value, radius = eval_service.eval_combination(hat_pair, c, Fraction(1, 3), depth=8,
                                                  with_radius=True)
    phi = eval_service.eval_phi(hat_pair, Fraction(1, 3), depth=8)
    assert radius == pytest.approx(3 * phi.radius)
    assert value == pytest.approx(2 / 3 - 2 / 3, abs=radius + 1e-12)


def test_phi_grid_shape_and_partition_of_unity(catalog_mask):
    pair = mask_service.build_two_scale(catalog_mask)
    grid = eval_service.phi_grid(pair, 6, as_float=True)
    assert grid.shape == (65, pair.N)
    assert not grid.flags.writeable
    assert np.allclose(grid.sum(axis=1), 1.0, atol=1e-12)


def test_phi_grid_agrees_with_pointwise_evaluation(d4_pair):
    grid = eval_service.phi_grid(d4_pair, 7)
    for k in (0, 1, 37, 64, 101, 128):
        phi = eval_service.eval_phi(d4_pair, DyadicPoint.from_index(k, 7))
        assert np.allclose(grid[k].astype(float), phi.as_array(), atol=1e-13)


def test_phi_samples_hat(hat_pair):
    samples = eval_service.phi_samples(hat_pair, 3)
    x = np.arange(17) / 8
    assert np.allclose(samples, np.maximum(0.0, 1.0 - np.abs(x - 1.0)))


def test_seam_gap_is_small_for_continuous_masks(catalog_mask):
    pair = mask_service.build_two_scale(catalog_mask)
    assert eval_service.seam_gap(pair, 8) <= 1e-10


def test_all_ones_tail_is_second_representation():
    point = DyadicPoint.from_value(Fraction(1, 4))
    assert point.all_ones_tail() == (0, 0)
    assert ONE.all_ones_tail() is None
    assert DyadicPoint.from_value(0).all_ones_tail() is None


def test_batch_eval_grid_rows(hat_pair):
    rows = eval_service.batch_eval(hat_pair, resolution=10)
    assert len(rows) == 1025
    assert all(sum(r.values) == pytest.approx(1.0) for r in rows)


def test_batch_eval_points_keep_input_order(d4_pair):
    points = ['0.5', '0.25', '0.75', '0.125']
    rows = eval_service.batch_eval(d4_pair, points=points)
    assert [r.x for r in rows] == [Fraction(p) for p in points]


@pytest.mark.parametrize('source', ['bspline2', 'bspline3', 'bspline4', 'daubechies2',
                                    'daubechies3'])
def test_cascade_matches_evaluation(source):
    mask = mask_service.resolve_mask(f'builtin:{source}')
    pair = mask_service.build_two_scale(mask)
    cascade = eval_service.cascade(mask, iterations=25, resolution=10)
    samples = eval_service.phi_samples(pair, 10)
    assert np.max(np.abs(cascade - samples)) <= 1e-6


def test_cascade_start_has_unit_integral(d4):
    start = eval_service.cascade_start(d4, 8)
    assert start.sum() / 256 == pytest.approx(1.0)


@pytest.mark.slow
def test_one_step_recursion(catalog_mask, rng):
    pair = mask_service.build_two_scale(catalog_mask)
    for point in random_dyadics(rng, 1000):
        if point.is_one or point.depth == 0:
            continue
        phi = eval_service.eval_phi(pair, point).values
        rest = eval_service.eval_phi(pair, eval_service.shift(point)).values
        step = pair.transposed(point.digits[0]).dot(
            np.array(rest, dtype=object if pair.exact else float))
        if pair.exact:
            assert tuple(step) == phi
        else:
            assert np.allclose(np.asarray(phi, dtype=float), step, atol=1e-12)


def test_shift_drops_the_leading_digit():
    assert eval_service.shift(DyadicPoint.from_value(Fraction(5, 8))).digits == (0, 1)
    assert eval_service.shift(DyadicPoint.from_value(Fraction(1, 2))).digits == ()
    assert eval_service.shift(ONE) is ONE


def test_translates_vanish_outside_the_support(catalog_mask):
    pair = mask_service.build_two_scale(catalog_mask)
    last = CoefVector.of([0] * (pair.N - 1) + [1])
    assert eval_service.eval_combination(pair, last, ONE) == 0
    samples = eval_service.phi_samples(pair, 6)
    assert samples[-1] == 0
    # phi(0) = p_0 phi(0) forces zero; the float eigenvector only gets close
    if pair.exact:
        assert eval_service.phi_at_integers(pair).values[0] == 0
    assert abs(samples[0]) <= 1e-14


def test_hat_seams_agree_exactly(hat_pair):
    for level in (1, 2, 3, 8):
        assert eval_service.seam_gap(hat_pair, level) == 0.0


def test_float_enclosure_keeps_a_rounding_floor(d4_pair):
    phi = eval_service.eval_phi(d4_pair, '0.3', depth=62)
    floor = eval_service.roundoff_floor(d4_pair, phi.values, 62)
    assert floor >= 62 * d4_pair.N * np.finfo(float).eps
    assert phi.radius >= floor
    assert eval_service.eval_phi(d4_pair.as_float(), '0.3', depth=62).radius > 0


def test_tolerance_below_the_rounding_floor_stops_early(d4_pair):
    with pytest.raises(ToleranceNotReached) as excinfo:
        eval_service.eval_phi(d4_pair, '0.3', tol=1e-300)
    assert excinfo.value.details['depth'] == 1
    assert excinfo.value.details['floor'] > 1e-300


def test_exact_enclosures_have_no_rounding_floor(hat_pair):
    assert eval_service.roundoff_floor(hat_pair, (Fraction(1, 3), Fraction(2, 3)), 40) == 0.0


@pytest.mark.parametrize('iterations', [1, 3, 10])
def test_hat_is_a_cascade_fixed_point(hat, hat_pair, iterations):
    cascade = eval_service.cascade(hat, iterations=iterations, resolution=8)
    assert np.array_equal(cascade, eval_service.phi_samples(hat_pair, 8))
