"""
Evaluation engine: Phi(x) = (phi(x), ..., phi(x+N-1)) on [0, 1] through the
binary-shift recursion Phi(x) = P_{e1}^T Phi(Tx), and the cascade oracle.
"""
import logging
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy
from scipy.linalg import null_space

from config import get_config
from models import DyadicPoint, ONE, PhiVector
from services.worker_pool import worker_pool
from utils.decorators import log_duration
from utils.helpers import unit_multiplicity
from utils.errors import (
    DimensionMismatch, NoUnitEigenvalue, NonSimpleEigenvalue, SumRuleRequired,
    ToleranceNotReached
)

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)


class EvalService:
    """Service for pointwise evaluation of scale functions"""

    def __init__(self):
        self.settings = None
        self._initialized = False

    def _setup(self):
        if self._initialized:
            return
        self.settings = get_config()
        self._initialized = True

    # Fixed vectors

    @lru_cache(maxsize=None)
    def phi_at_integers(self, pair):
        """Phi(0): the fixed vector of P0^T normalized by partition of unity

        Raises:
            SumRuleRequired: the mask fails the sum rule, so no normalization exists
            NoUnitEigenvalue: 1 is not an eigenvalue of P0^T
            NonSimpleEigenvalue: 1 has multiplicity > 1
        """
        self._setup()
        mask = pair.mask
        if not mask.satisfies_sum_rule:
            raise SumRuleRequired(f"{mask.name} fails the sum rule; Phi(0) has no normalization",
                                  mask=mask.name)
        if pair.exact:
            values = self._fixed_vector_exact(pair)
        else:
            values = self._fixed_vector_float(pair)
        logger.debug(f"Phi(0) for {mask.name}: {[float(v) for v in values]}")
        return PhiVector(tuple(values), x=Fraction(0))

    def _fixed_vector_exact(self, pair):
        transposed = sympy.Matrix(pair.N, pair.N, lambda i, j: sympy.Rational(
            pair.P0[j, i].numerator, pair.P0[j, i].denominator))
        multiplicity = unit_multiplicity(transposed)
        if multiplicity == 0:
            raise NoUnitEigenvalue(f"P0 of {pair.mask.name} has no eigenvalue 1", mask=pair.mask.name)
        if multiplicity > 1:
            raise NonSimpleEigenvalue(f"eigenvalue 1 of P0 has multiplicity {multiplicity}",
                                      mask=pair.mask.name, multiplicity=multiplicity)
        basis = (transposed - sympy.eye(pair.N)).nullspace()
        vector = basis[0]
        total = sum(vector)
        if total == 0:
            raise SumRuleRequired("fixed vector sums to zero", mask=pair.mask.name)
        normalized = [sympy.Rational(v / total) for v in vector]
        return [Fraction(int(v.p), int(v.q)) for v in normalized]

    def _fixed_vector_float(self, pair):
        tol = self.settings.EIGEN_TOLERANCE
        transposed = np.asarray(pair.P0, dtype=float).T
        eigenvalues = np.linalg.eigvals(transposed)
        multiplicity = int(np.count_nonzero(np.abs(eigenvalues - 1.0) <= tol))
        if multiplicity == 0:
            raise NoUnitEigenvalue(f"P0 of {pair.mask.name} has no eigenvalue 1 within {tol}",
                                   mask=pair.mask.name)
        if multiplicity > 1:
            raise NonSimpleEigenvalue(f"eigenvalue 1 of P0 has multiplicity {multiplicity}",
                                      mask=pair.mask.name, multiplicity=multiplicity)
        basis = null_space(transposed - np.eye(pair.N), rcond=tol)
        if basis.shape[1] != 1:
            values, vectors = np.linalg.eig(transposed)
            vector = np.real(vectors[:, np.argmin(np.abs(values - 1.0))])
        else:
            vector = basis[:, 0]
        vector = vector / vector.sum()
        residual = float(np.max(np.abs(transposed @ vector - vector)))
        if residual > self.settings.FIXED_POINT_RESIDUAL:
            logger.warning(f"Phi(0) residual {residual:.3g} for {pair.mask.name} exceeds "
                           f"{self.settings.FIXED_POINT_RESIDUAL}")
        return [float(v) for v in vector]

    def phi_at_one(self, pair):
        """Phi(1) = (phi(1), ..., phi(N-1), 0), the fixed vector of P1^T"""
        start = self.phi_at_integers(pair)
        zero = start.values[0] * 0
        return PhiVector(start.values[1:] + (zero,), x=Fraction(1))

    def shift(self, point):
        """The doubling map on digits: drop the first digit; ONE stays ONE"""
        return point.shift()

    # Pointwise evaluation

    def _start_array(self, pair, vector):
        if pair.exact:
            arr = np.empty(pair.N, dtype=object)
            arr[:] = list(vector.values)
            return arr
        return np.asarray(vector.values, dtype=float)

    def phi_dyadic(self, pair, point):
        """Exact Phi at a dyadic point: P_{e1}^T ... P_{em}^T Phi(0)"""
        if point.is_one:
            return self.phi_at_one(pair)
        vector = self._start_array(pair, self.phi_at_integers(pair))
        for digit in reversed(point.digits):
            vector = pair.transposed(digit).dot(vector)
        return PhiVector(tuple(vector), x=point.value, depth=point.depth)

    @staticmethod
    def roundoff_floor(pair, values, m):
        """Rounding bound of m float matrix-vector steps; 0 for exact pairs

        Endpoint values agree to the last bit at large depth, so the spread
        alone would report a zero radius.
        """
        if pair.exact:
            return 0.0
        scale = max(abs(float(v)) for v in values)
        return m * pair.N * EPS * max(scale, 1.0)

    def _enclosure(self, pair, q, m):
        lo, hi = DyadicPoint.bracket(q, m)
        a = self.phi_dyadic(pair, lo).values
        b = self.phi_dyadic(pair, hi).values
        # differences are taken before rounding in exact mode
        spread = max(abs(u - v) for u, v in zip(a, b))
        mid = tuple(float(u + v) / 2.0 for u, v in zip(a, b))
        radius = float(spread) / 2.0 + self.roundoff_floor(pair, mid, m)
        return PhiVector(mid, x=q, radius=radius, depth=m)

    def eval_phi(self, pair, x, depth=None, tol=None):
        """Evaluate Phi at a point of [0, 1]

        Dyadic points (up to the depth cap) are evaluated exactly. Other points
        are enclosed between the dyadic endpoints of their cell of width 2^-m:
        with a fixed ``depth`` the enclosure at that depth is returned, otherwise
        m grows until the radius drops to ``tol``.

        Args:
            pair (TwoScalePair): two-scale matrices
            x: DyadicPoint, Fraction, int, float or decimal string
            depth (int): fixed enclosure depth
            tol (float): target uncertainty radius

        Returns:
            PhiVector: values with their uncertainty radius

        Raises:
            ToleranceNotReached: the depth cap was hit before tol
        """
        self._setup()
        if isinstance(x, DyadicPoint):
            return self.phi_dyadic(pair, x)
        q = Fraction(x) if not isinstance(x, str) else Fraction(x.strip())
        cap = self.settings.DEPTH_CAP if depth is None or tol is not None else depth
        point = DyadicPoint.from_value(q, max(cap, self.settings.DEPTH_CAP))
        if point is not None:
            return self.phi_dyadic(pair, point)

        if depth is not None and tol is None:
            return self._enclosure(pair, q, depth)

        tol = self.settings.EVAL_TOLERANCE if tol is None else tol
        enclosure = None
        for m in range(1, cap + 1):
            enclosure = self._enclosure(pair, q, m)
            if enclosure.radius <= tol:
                return enclosure
            floor = self.roundoff_floor(pair, enclosure.values, m)
            if floor >= tol:
                # the floor only grows with depth
                raise ToleranceNotReached(
                    f"tolerance {tol} is below the rounding floor {floor:.3g} at depth {m}",
                    depth=m, radius=enclosure.radius, floor=floor)
        raise ToleranceNotReached(
            f"radius {enclosure.radius:.3g} above {tol} at depth cap {cap}",
            depth_cap=cap, radius=enclosure.radius)

    def eval_combination(self, pair, c, x, depth=None, tol=None, with_radius=False):
        """c . Phi(x); the uncertainty of an enclosure is ||c||_1 times its radius"""
        if c.N != pair.N:
            raise DimensionMismatch(f"coefficient vector has {c.N} entries, expected {pair.N}",
                                    expected=pair.N, actual=c.N)
        phi = self.eval_phi(pair, x, depth=depth, tol=tol)
        if phi.radius == 0 and c.exact and pair.exact:
            value = sum((ci * vi for ci, vi in zip(c.components, phi.values)), Fraction(0))
        else:
            value = float(np.dot(c.as_array().astype(float), phi.as_array()))
        if with_radius:
            return value, float(c.l1) * phi.radius
        return value

    # Grid evaluation

    @lru_cache(maxsize=32)
    def phi_grid(self, pair, level, as_float=False):
        """Phi at every point k 2^-level, k = 0..2^level, as a (2^level + 1, N) array

        Each level is obtained from the previous one by the two halves of the
        recursion: the left half through P0^T, the right half through P1^T.
        Object arrays of Fractions in exact mode, float64 otherwise.
        """
        exact = pair.exact and not as_float
        P0 = pair.P0 if exact else np.asarray(pair.P0, dtype=float)
        P1 = pair.P1 if exact else np.asarray(pair.P1, dtype=float)
        start, end = self.phi_at_integers(pair), self.phi_at_one(pair)
        grid = np.empty((2, pair.N), dtype=object if exact else float)
        grid[0, :] = list(start.values) if exact else [float(v) for v in start.values]
        grid[1, :] = list(end.values) if exact else [float(v) for v in end.values]
        for _ in range(level):
            half = grid.shape[0] - 1
            refined = np.empty((2 * half + 1, pair.N), dtype=grid.dtype)
            refined[:half] = grid[:half].dot(P0)
            refined[half:2 * half] = grid[:half].dot(P1)
            refined[2 * half] = grid[half]
            grid = refined
        grid.flags.writeable = False
        return grid

    def phi_samples(self, pair, level):
        """phi on {k 2^-level : 0 <= k <= N 2^level} as a float array"""
        grid = self.phi_grid(pair, level, as_float=True)
        size = 1 << level
        samples = np.zeros(pair.N * size + 1)
        for n in range(pair.N):
            samples[n * size:(n + 1) * size] = grid[:size, n]
        samples[-1] = grid[size, pair.N - 1]
        return samples

    def seam_gap(self, pair, level):
        """Largest difference between the two binary representations of dyadic points

        A dyadic point 0.e1...e_{m-1}1 is also 0.e1...e_{m-1}0111...; the second
        form evaluates to P_{e1}^T ... P_{e_{m-1}}^T P0^T Phi(1). For continuous
        phi both agree at every point of the level.
        """
        grid = self.phi_grid(pair, level, as_float=True)
        P0 = np.asarray(pair.P0, dtype=float)
        P1 = np.asarray(pair.P1, dtype=float)
        ones_tail = grid[[0, -1]].copy()
        for _ in range(level):
            half = ones_tail.shape[0] - 1
            refined = np.empty((2 * half + 1, pair.N))
            refined[0] = ones_tail[0]
            refined[1:half + 1] = ones_tail[1:half + 1] @ P0
            refined[half + 1:2 * half] = ones_tail[1:half] @ P1
            refined[2 * half] = ones_tail[half]
            ones_tail = refined
        return float(np.max(np.abs(grid - ones_tail)))

    @log_duration
    def batch_eval(self, pair, points=None, resolution=None, tol=None, depth=None):
        """PhiVectors at explicit points (evaluated in parallel) or on the grid k 2^-resolution"""
        if resolution is not None:
            grid = self.phi_grid(pair, resolution, as_float=True)
            size = 1 << resolution
            return [PhiVector(tuple(float(v) for v in grid[k]), x=Fraction(k, size), depth=resolution)
                    for k in range(size + 1)]
        return worker_pool.map(lambda x: self.eval_phi(pair, x, depth=depth, tol=tol), points or [])

    # Cascade oracle

    @staticmethod
    def cascade_start(mask, resolution):
        """Piecewise-linear start with integral 1 and the mask's first moment

        The integer values sit on two adjacent interior integers near the first
        moment sum_k k p_k / 2 (extrapolating when the moment lies outside
        [1, N-1]); for the hat mask this is the hat itself.
        """
        N = mask.N
        size = 1 << resolution
        x = np.arange(N * size + 1) / size
        nodes = np.zeros(N + 1)
        if N < 2:
            return (x < 1).astype(float)
        if N == 2:
            nodes[1] = 1.0
        else:
            moment = sum(k * float(p) for k, p in enumerate(mask.coeffs)) / 2.0
            a = min(max(int(math.floor(moment)), 1), N - 2)
            nodes[a] = a + 1 - moment
            nodes[a + 1] = moment - a
        return np.interp(x, np.arange(N + 1), nodes)

    @log_duration
    def cascade(self, mask, iterations=None, resolution=10):
        """Cascade iteration phi_{n+1}(x) = sum_k p_k phi_n(2x - k) on the grid k 2^-resolution

        The grid is closed under x -> 2x - k, so each step is exact on it.

        Returns:
            np.ndarray: phi_n sampled at k 2^-resolution, 0 <= k <= N 2^resolution
        """
        self._setup()
        iterations = self.settings.CASCADE_ITERATIONS if iterations is None else iterations
        size = 1 << resolution
        coeffs = [float(p) for p in mask.coeffs]
        phi = self.cascade_start(mask, resolution)
        j = np.arange(phi.size)
        for _ in range(iterations):
            refined = np.zeros_like(phi)
            for k, p in enumerate(coeffs):
                index = 2 * j - k * size
                valid = (index >= 0) & (index < phi.size)
                refined[valid] += p * phi[index[valid]]
            phi = refined
        logger.info(f"Cascade for {mask.name}: {iterations} iterations at resolution {resolution}")
        return phi


# Global eval service instance
eval_service = EvalService()
