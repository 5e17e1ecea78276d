from fractions import Fraction

import numpy as np
import pytest

from models import CoefVector, GridSet
from services import independence_service, mask_service
from utils.errors import (
    AnnihilatedVector, DimensionMismatch, EmptySet, IntervalNotFound, SearchBudgetExceeded,
    ZeroVector
)


def test_hat_zero_set_is_a_single_point(hat_pair):
    c = CoefVector.of([1, -1])
    K = independence_service.zero_set(hat_pair, c, 12, 1e-9)
    assert K.measure <= 2 * 2 ** -12


def test_hat_zero_set_with_cell_sized_tolerance(hat_pair):
    c = CoefVector.of([1, -1])
    K = independence_service.zero_set(hat_pair, c, 12, 1.5 / 4096)
    assert K.indices().tolist() == [2047, 2048]


def test_density_interval_needs_the_cell_depth(hat_pair):
    K = independence_service.zero_set(hat_pair, CoefVector.of([1, -1]), 12, 1.5 / 4096)
    for depth in (0, 5, 11):
        with pytest.raises(IntervalNotFound):
            independence_service.density_interval(K, 0.5, max_depth=depth)
    word = independence_service.density_interval(K, 0.5, max_depth=12)
    assert word == (0,) + (1,) * 11


def test_density_interval_rejects_empty_sets_and_bad_eta():
    with pytest.raises(IntervalNotFound):
        independence_service.density_interval(GridSet.empty(6), 0.5)
    with pytest.raises(ValueError):
        independence_service.density_interval(GridSet.full(6), 1.0)


def test_push_forward_along_one(hat_pair):
    b = independence_service.push_forward(hat_pair, CoefVector.of([1, -1]), (1,))
    assert b.components == (Fraction(1), Fraction(0))


def test_push_forward_reads_the_word_left_to_right(hat_pair):
    raw = independence_service.pushforward_raw(hat_pair, CoefVector.of([1, -1]), (0, 1))
    assert raw.components == (0, Fraction(-1, 2))


def test_amplify_hat_example(hat_pair):
    result = independence_service.amplify(hat_pair, CoefVector.of([1, -1]), 12, 0.3, eta=0.5)
    assert result['word'] == '01'
    assert result['density'] == pytest.approx(0.6, abs=1e-3)
    assert result['measure_after'] == pytest.approx(result['density'])
    assert result['measure_after'] > result['measure_before']
    assert result['pushforward'] == [0.0, -1.0]
    assert result['resolution_after'] == 10
    assert result['tol_after'] == pytest.approx(0.6)


def test_trapezoid_vector_is_annihilated(trapezoid_pair):
    result = independence_service.annihilation_search(trapezoid_pair, CoefVector.of([1, -1, 1]), 8)
    assert result.found
    assert result.word == (0,)
    assert result.exact
    with pytest.raises(AnnihilatedVector):
        independence_service.push_forward(trapezoid_pair, CoefVector.of([1, -1, 1]), (0,))


def test_trapezoid_vector_is_never_zero(trapezoid_pair):
    c = CoefVector.of([1, -1, 0])
    assert not independence_service.annihilation_search(trapezoid_pair, c, 10).found
    certificate = independence_service.never_zero_certificate(trapezoid_pair, c, 10)
    assert certificate.positive
    assert certificate.min_norm > 0
    assert certificate.threshold == 0


def test_annihilated_vector_has_zero_measure_complement(trapezoid_pair):
    K = independence_service.zero_set(trapezoid_pair, CoefVector.of([1, -1, 1]), 8)
    assert K.measure == 1.0


def test_classify_cases(hat_pair, trapezoid_pair):
    case, search, certificate = independence_service.classify(hat_pair, CoefVector.of([1, -1]), 12)
    assert case == 'certified'
    assert certificate.positive
    case, search, certificate = independence_service.classify(
        trapezoid_pair, CoefVector.of([1, -1, 1]), 4)
    assert case == 'annihilated'
    assert certificate is None


def test_daubechies_vector_is_certified(d4_pair):
    c = CoefVector.of([1, -1, 0], exact=False)
    certificate = independence_service.never_zero_certificate(d4_pair, c, 16)
    assert certificate.positive
    assert certificate.min_norm > certificate.threshold > 0


@pytest.mark.slow
def test_random_daubechies_vectors_are_never_zero(d4_pair, rng):
    vectors = []
    for _ in range(100):
        v = rng.standard_normal(3)
        vectors.append(CoefVector.of(list(v / np.linalg.norm(v)), exact=False))
    certificates = independence_service.certify_many(d4_pair, vectors, 16)
    assert all(cert.positive for cert in certificates)
    for c in vectors:
        assert independence_service.zero_set(d4_pair, c, 14, 1e-9).measure <= 2 ** -10


def test_certify_many_keeps_input_order(hat_pair):
    vectors = [CoefVector.of([1, 0]), CoefVector.of([0, 1]), CoefVector.of([1, -1])]
    certificates = independence_service.certify_many(hat_pair, vectors, 6)
    singles = [independence_service.never_zero_certificate(hat_pair, c, 6) for c in vectors]
    assert [c.min_norm for c in certificates] == [c.min_norm for c in singles]


def test_search_budget(d4_pair, monkeypatch):
    independence_service._setup()
    monkeypatch.setattr(independence_service.settings, 'SEARCH_MAX_FRONTIER', 64)
    with pytest.raises(SearchBudgetExceeded):
        independence_service.never_zero_certificate(d4_pair, CoefVector.of([1.0, 2.0, 3.0]), 10)


def test_input_checks(hat_pair):
    with pytest.raises(DimensionMismatch):
        independence_service.zero_set(hat_pair, CoefVector.of([1, 2, 3]))
    with pytest.raises(ZeroVector):
        independence_service.annihilation_search(hat_pair, CoefVector.of([0, 0]), 4)


def test_restricted_gram(hat_pair):
    gram, smallest = independence_service.restricted_gram(hat_pair, GridSet.full(10))
    assert np.allclose(gram, [[1 / 3, 1 / 6], [1 / 6, 1 / 3]], atol=1e-6)
    assert smallest == pytest.approx(1 / 6, abs=1e-6)

    single = np.zeros(1 << 10, dtype=bool)
    single[100] = True
    _, smallest = independence_service.restricted_gram(hat_pair, GridSet.from_mask(single))
    assert smallest == pytest.approx(0.0, abs=1e-15)

    with pytest.raises(EmptySet):
        independence_service.restricted_gram(hat_pair, GridSet.empty(4))


def test_independence_report(d4_pair):
    report = independence_service.independence_report(
        d4_pair, CoefVector.of([1, -1, 0], exact=False), 12, resolutions=(8, 10))
    assert report['case'] == 'certified'
    assert report['min_norm'] > 0
    assert [z['resolution'] for z in report['zero_set']] == [8, 10]
    assert set(report['thresholds']) == {'annihilation_rtol', 'certificate_threshold',
                                         'relative_to'}


def test_fitted_to_drops_vanishing_translates():
    assert CoefVector.of([1, -1, 0, 0]).fitted_to(3).components == (1, -1, 0)
    assert CoefVector.of([1, 2, 3]).fitted_to(2).N == 3


def test_alternating_set_has_no_dense_coarse_cell():
    K = GridSet.alternating(10)
    for depth in (0, 4, 9):
        with pytest.raises(IntervalNotFound):
            independence_service.density_interval(K, 0.4, max_depth=depth)
    word = independence_service.density_interval(K, 0.4)
    assert word == (0,) * 10
    assert K.density(word) == 1.0


def test_grid_set_algebra():
    left = GridSet.from_interval(0, 0.5, 6)
    right = GridSet.from_interval(0.25, 1, 6)
    assert (left.measure, right.measure) == (0.5, 0.75)
    assert left.intersection(right).measure == 0.25
    assert left.union(right).measure == 1.0
    assert left.symmetric_difference(right).measure == 0.75
    assert left.intersection(right).issubset(left)
    assert not left.issubset(right)
    assert GridSet.from_mask(left.cells).resolution == 6
    with pytest.raises(ValueError):
        left.union(GridSet.full(5))


def every_word_pushforward(pair, c, depth):
    """(word, P_w c) for every word of length <= depth, shortest first, then lexicographic"""
    level = [((), c.as_array())]
    yield level[0]
    for _ in range(depth):
        level = [(word + (digit,), pair.matrix(digit).dot(vector))
                 for word, vector in level for digit in (0, 1)]
        yield from level


@pytest.mark.slow
@pytest.mark.parametrize('components', [[1, -1, 0], [1, -1, 1], [1, 0, -1], [2, -1, 1]])
def test_trapezoid_searches_match_brute_force(trapezoid_pair, components):
    c = CoefVector.of(components)
    depth = 12
    norms = [(word, sum((v * v for v in vector), Fraction(0)))
             for word, vector in every_word_pushforward(trapezoid_pair, c, depth)]
    first_zero = next((word for word, sq in norms if sq == 0), None)
    smallest = min(sq for _, sq in norms)

    search = independence_service.annihilation_search(trapezoid_pair, c, depth)
    assert search.found == (first_zero is not None)
    if first_zero is not None:
        assert search.word == first_zero
        return

    certificate = independence_service.never_zero_certificate(trapezoid_pair, c, depth)
    assert certificate.positive
    assert float(certificate.min_norm) ** 2 == pytest.approx(float(smallest), rel=1e-12)
    reached = independence_service.pushforward_raw(trapezoid_pair, c, certificate.arg_word)
    assert reached.l2_squared == smallest


@pytest.mark.parametrize('source', ['hat_pair', 'trapezoid_pair', 'd4_pair'])
def test_pushforward_composes_along_concatenated_words(request, source, rng):
    pair = request.getfixturevalue(source)
    c = CoefVector.of([1, -2, 3][:pair.N]) if pair.exact else \
        CoefVector.of(list(rng.standard_normal(pair.N)), exact=False)
    for _ in range(50):
        first = tuple(int(d) for d in rng.integers(0, 2, int(rng.integers(0, 6))))
        second = tuple(int(d) for d in rng.integers(0, 2, int(rng.integers(0, 6))))
        whole = independence_service.pushforward_raw(pair, c, first + second)
        stepwise = independence_service.pushforward_raw(
            pair, independence_service.pushforward_raw(pair, c, first), second)
        if pair.exact:
            assert whole.components == stepwise.components
        else:
            assert np.allclose(whole.as_array().astype(float),
                               stepwise.as_array().astype(float), atol=1e-13)
        if not whole.is_zero:
            direct = independence_service.push_forward(pair, c, first + second)
            assert np.allclose(direct.as_array().astype(float),
                               (whole.as_array().astype(float) / float(whole.l2)), atol=1e-13)


@pytest.mark.parametrize('source', ['bspline3', 'daubechies2', 'daubechies3'])
def test_zero_sets_shrink_as_resolution_and_tolerance_tighten(source, rng):
    pair = mask_service.build_two_scale(mask_service.resolve_mask(f'builtin:{source}'))
    totals = np.zeros(4)
    for _ in range(3):
        v = rng.standard_normal(pair.N)
        c = CoefVector.of(list(v / np.linalg.norm(v)), exact=False)
        measures = [independence_service.zero_set(pair, c, 8 + 2 * i, 1e-2 / 4 ** i).measure
                    for i in range(4)]
        assert measures[-1] <= measures[0]
        totals += measures
    assert all(later <= earlier for earlier, later in zip(totals, totals[1:]))
    assert totals[-1] < totals[0]
