import os
from dotenv import load_dotenv

load_dotenv()


def _env_int(name, default):
    value = os.getenv(name)
    return int(value) if value not in (None, '') else default


def _env_float(name, default):
    value = os.getenv(name)
    return float(value) if value not in (None, '') else default


class Config:
    """Base configuration class"""
    VERSION = '1.0.0'

    # Worker threads; REFINEKIT_THREADS is the documented fallback for --threads
    THREADS = _env_int('REFINEKIT_THREADS', os.cpu_count() or 1)

    LOG_LEVEL = os.getenv('REFINEKIT_LOG_LEVEL', 'WARNING')

    # Mask validation
    SUM_TOLERANCE = _env_float('REFINEKIT_SUM_TOLERANCE', 1e-12)

    # Evaluation engine
    DEPTH_CAP = _env_int('REFINEKIT_DEPTH_CAP', 64)  # exactness of double-precision dyadics
    EVAL_TOLERANCE = _env_float('REFINEKIT_EVAL_TOLERANCE', 1e-10)
    EIGEN_TOLERANCE = _env_float('REFINEKIT_EIGEN_TOLERANCE', 1e-8)
    FIXED_POINT_RESIDUAL = 1e-12
    CASCADE_ITERATIONS = _env_int('REFINEKIT_CASCADE_ITERATIONS', 25)

    # Independence searches
    ANNIHILATION_RTOL = 1e-13
    CERTIFICATE_THRESHOLD = 1e-10
    DEDUP_DECIMALS = 12
    SEARCH_MAX_FRONTIER = _env_int('REFINEKIT_SEARCH_MAX_FRONTIER', 2 ** 22)

    # Grids, seeds, optimizer
    DEFAULT_RESOLUTION = _env_int('REFINEKIT_RESOLUTION', 12)
    DEFAULT_SEED = _env_int('REFINEKIT_SEED', 7)
    MZ_MULTISTARTS = _env_int('REFINEKIT_MZ_MULTISTARTS', 64)
    MZ_MAX_ITER = _env_int('REFINEKIT_MZ_MAX_ITER', 400)
    MZ_SWEEP_POINTS = _env_int('REFINEKIT_MZ_SWEEP_POINTS', 20000)

    # Expansion lab
    QUADRATURE_EXTRA_LEVELS = 6
    TAIL_TOLERANCE = _env_float('REFINEKIT_TAIL_TOLERANCE', 1e-6)
    CONSISTENCY_TOLERANCE = 1e-8
    RIESZ_FLOOR = 1e-10  # relative to the upper Riesz bound


class DevelopmentConfig(Config):
    """Development configuration"""
    LOG_LEVEL = os.getenv('REFINEKIT_LOG_LEVEL', 'INFO')


class ProductionConfig(Config):
    """Production configuration"""


class TestingConfig(Config):
    """Testing configuration"""
    TESTING = True
    THREADS = 2
    LOG_LEVEL = 'DEBUG'
    MZ_MULTISTARTS = 64
    SEARCH_MAX_FRONTIER = 2 ** 21


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': ProductionConfig
}


def get_config(config_name=None):
    """Return the configuration class selected by name or REFINEKIT_CONFIG"""
    if config_name is None:
        config_name = os.environ.get('REFINEKIT_CONFIG', 'default')
    return config.get(config_name, config['default'])
