from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import eigvalsh

from models import SamplingGrid, TestFunction
from services import expansion_service, mask_service
from utils.errors import (
    InconsistentSequence, InvalidExpression, ResolutionTooCoarse, SingularGramian
)


def test_hat_gramian_is_exact(hat):
    gramian = expansion_service.gramian(hat)
    assert gramian.values == (Fraction(1, 6), Fraction(2, 3), Fraction(1, 6))


def test_daubechies_gramian_is_orthonormal(d4):
    gramian = expansion_service.gramian(d4)
    assert gramian.g(0) == pytest.approx(1.0, abs=1e-10)
    assert gramian.g(1) == pytest.approx(0.0, abs=1e-10)
    assert gramian.g(2) == pytest.approx(0.0, abs=1e-10)


def test_gramian_normalization_and_definiteness(catalog_mask):
    gramian = expansion_service.gramian(catalog_mask)
    g = gramian.as_array()
    assert g.sum() == pytest.approx(1.0, abs=1e-10)
    assert np.allclose(g, g[::-1])
    assert eigvalsh(gramian.section())[0] > 0
    low, high = expansion_service.riesz_bounds(gramian)
    assert 0 < low <= high


def test_hat_riesz_bounds(hat):
    low, high = expansion_service.riesz_bounds(expansion_service.gramian(hat))
    assert low == pytest.approx(1 / 3, abs=1e-6)
    assert high == pytest.approx(1.0, abs=1e-12)


def test_projection_of_the_hat_itself(hat):
    f = expansion_service.parse_function('tent:1')
    projection = expansion_service.project(f, hat, 0, 14, window=(-1, 3))
    assert projection.coefficient(0) == pytest.approx(1.0, abs=1e-8)
    others = [projection.coefficient(k) for k in range(projection.k_min, projection.k_max + 1)
              if k != 0]
    assert max(abs(v) for v in others) <= 1e-8


def test_constants_are_reproduced(hat):
    f = expansion_service.parse_function('poly:1')
    projection = expansion_service.project(f, hat, 0, 8, window=(0, 32))
    # the window edges bias the coefficients next to them
    interior = [projection.coefficient(k) for k in range(13, 19)]
    assert np.allclose(interior, 1.0, atol=1e-6)


def test_finer_level_reproduces_coarse_functions(hat):
    f = expansion_service.parse_function('tent:1')
    grid = SamplingGrid(-1, 3, 14)
    projection = expansion_service.project(f, hat, 1, 14, window=(-1, 3))
    values = expansion_service.evaluate(projection, hat, grid)
    assert np.max(np.abs(values - f(grid.points()))) <= 1e-6


def test_kept_translates_refine_into_the_next_level():
    grid = SamplingGrid(-1, 2, 10)
    assert expansion_service.translate_range(2, 0, grid) == (-2, 1)
    for level in range(4):
        k_min, k_max = expansion_service.translate_range(3, level, grid)
        fine_min, fine_max = expansion_service.translate_range(3, level + 1, grid)
        assert 2 * k_min == fine_min
        assert 2 * k_max + 3 == fine_max


def test_resolution_must_exceed_level(hat):
    with pytest.raises(ResolutionTooCoarse):
        expansion_service.project(expansion_service.parse_function('tent:1'), hat, 4, 9)


def test_translates_without_riesz_bound_are_rejected():
    mask = mask_service.validate_mask('gapped', ['1', '0', '1'])
    low, _ = expansion_service.riesz_bounds(expansion_service.gramian(mask))
    assert low == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(SingularGramian):
        expansion_service.project(expansion_service.parse_function('tent:1'), mask, 0, 8,
                                  window=(-1, 3))


@pytest.mark.parametrize('source', ['bspline2', 'bspline3', 'daubechies2'])
@pytest.mark.parametrize('expr', ['jump:0.5', 'tent:0.3', 'sin:1', 'poly:0,1,-1', 'tent:0.77'])
def test_nesting_and_idempotence(source, expr):
    mask = mask_service.resolve_mask(f'builtin:{source}')
    f = expansion_service.parse_function(expr)
    window = f.default_window()
    resolution = 9
    coarse = expansion_service.project(f, mask, 2, resolution, window)
    fine = expansion_service.project(f, mask, 3, resolution, window)
    again = expansion_service.restrict(fine, mask)
    assert again.k_min == coarse.k_min
    assert np.max(np.abs(again.coefficients - coarse.coefficients)) <= 2e-8

    gramian = expansion_service.gramian(mask)
    repeat = expansion_service.solve_gram(
        gramian, expansion_service.gram_apply(gramian, coarse.coefficients))
    assert np.max(np.abs(repeat - coarse.coefficients)) <= 1e-8


def test_gram_apply_matches_the_dense_section():
    gramian = expansion_service.gramian(mask_service.resolve_mask('builtin:bspline3'))
    a = np.arange(1.0, 8.0)
    assert np.allclose(expansion_service.gram_apply(gramian, a), gramian.section(7) @ a)


def test_stationary_sequence(hat):
    seq = expansion_service.build_sequence(expansion_service.parse_function('tent:1'), hat, 2, 16)
    sq = expansion_service.square_function(seq)
    f0 = np.abs(seq.values[0])
    assert np.allclose(sq.S_final, f0, atol=1e-8)
    assert np.allclose(sq.fstar_final, f0, atol=1e-8)
    assert max(seq.consistency) <= 1e-10


def test_square_function_properties(hat):
    seq = expansion_service.build_sequence(expansion_service.parse_function('jump:0.5'), hat, 6, 12)
    sq = expansion_service.square_function(seq)
    assert np.all(np.diff(sq.S, axis=0) >= 0)
    increments = seq.increments()
    for j in range(seq.levels):
        assert np.all(sq.S_final ** 2 >= increments[j] ** 2 - 1e-12)
    assert np.all(sq.fstar_final >= np.abs(seq.values).max(axis=0) - 1e-15)


def test_tent_increments_decay(hat):
    seq = expansion_service.build_sequence(expansion_service.parse_function('tent:0.3'), hat, 6, 18)
    increments = np.abs(seq.increments())
    earlier, last = increments[-3], increments[-1]
    # 1e-7 sits above the quadrature error of the finest level
    fast = (last <= 1e-7) | (last <= earlier * 2.0 ** -3)
    assert fast.mean() >= 0.9
    assert expansion_service.decay_rate(expansion_service.increment_norms(seq), first=3) > 1.0


def test_square_function_needs_two_levels(hat):
    seq = expansion_service.build_sequence(expansion_service.parse_function('tent:1'), hat, 0, 8)
    with pytest.raises(InconsistentSequence):
        expansion_service.square_function(seq)


def test_square_function_rejects_inconsistent_levels(hat):
    seq = expansion_service.build_sequence(expansion_service.parse_function('sin:1'), hat, 3, 9)
    seq.consistency[1] = 1.0
    with pytest.raises(InconsistentSequence):
        expansion_service.square_function(seq)


def test_equivalence_report_for_stationary_sequence(hat):
    seq = expansion_service.build_sequence(expansion_service.parse_function('tent:1'), hat, 2, 16)
    report = expansion_service.equivalence_report(seq, thresholds=[2.0])
    assert report['note'].startswith('Diagnostic only')
    [row] = report['thresholds']
    assert row['measure_tail'] == row['measure_S'] == row['measure_fstar'] == 1.0
    assert all(v == 0 for v in row['symmetric_differences'].values())
    assert row['verdict'] == 'consistent with'
    assert report['riesz_bounds'][0] == pytest.approx(1 / 3, abs=1e-6)
    assert report['gramian']['g']['1'] == pytest.approx(1 / 6)


@pytest.mark.slow
def test_equivalence_report_for_a_jump(hat):
    seq = expansion_service.build_sequence(expansion_service.parse_function('jump:0.5'), hat, 10, 16)
    report = expansion_service.equivalence_report(seq, thresholds=[10.0])
    assert report['thresholds'][0]['measure_S'] == 1.0
    assert report['thresholds'][0]['measure_fstar'] == 1.0
    peak = report['increments']['growth_peak_x']
    assert min(abs(peak), abs(peak - 0.5)) <= 2 ** -8


def test_equivalence_report_without_thresholds(hat):
    seq = expansion_service.build_sequence(expansion_service.parse_function('sin:1'), hat, 3, 9)
    report = expansion_service.equivalence_report(seq)
    assert report['thresholds'] == []
    assert set(report['S_J']) == {'max', 'mean'}


def test_parse_function_grammar():
    f = expansion_service.parse_function('poly:1,2')
    assert isinstance(f, TestFunction)
    assert f(np.array([0.0, 1.0])).tolist() == [1.0, 3.0]
    assert expansion_service.parse_function('jump:0.5').default_window() == (-1, 2)
    assert expansion_service.parse_function('sin:2').params == (2,)


@pytest.mark.parametrize('expr', ['', 'exp:1', 'jump:', 'tent:abc', 'sin:1.5', 'poly:1,inf',
                                  '__import__("os")'])
def test_parse_function_rejects(expr):
    with pytest.raises(InvalidExpression):
        expansion_service.parse_function(expr)
