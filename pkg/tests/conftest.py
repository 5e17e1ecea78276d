import os

os.environ['REFINEKIT_CONFIG'] = 'testing'

import numpy as np
import pytest

from services import mask_service


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def hat():
    return mask_service.builtin_mask('bspline', 2)


@pytest.fixture
def hat_pair(hat):
    return mask_service.build_two_scale(hat)


@pytest.fixture
def d4():
    return mask_service.builtin_mask('daubechies', 2)


@pytest.fixture
def d4_pair(d4):
    return mask_service.build_two_scale(d4)


@pytest.fixture
def trapezoid_pair():
    mask = mask_service.validate_mask('trapezoid', ['1/2', '1/2', '1/2', '1/2'])
    return mask_service.build_two_scale(mask)


@pytest.fixture(params=['bspline2', 'bspline3', 'bspline4', 'bspline5',
                        'daubechies2', 'daubechies3', 'daubechies4', 'daubechies5'])
def catalog_mask(request):
    return mask_service.resolve_mask(f'builtin:{request.param}')
