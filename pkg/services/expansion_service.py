"""
Expansion lab: Gramians, projections P_j f onto the translates of
2^{j/2} phi(2^j x - k), square and maximal functions of the sequence
f_j = P_j f, and the convergence-set diagnostic.
"""
import logging
import math
import re
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy
from scipy import sparse
from scipy.linalg import LinAlgError, solveh_banded

from config import get_config
from models import (
    ExpansionSequence, Gramian, Projection, SamplingGrid, SquareFunction, TestFunction
)
from services.eval_service import eval_service
from services.mask_service import mask_service
from services.worker_pool import worker_pool
from utils.decorators import log_duration
from utils.helpers import unit_multiplicity
from utils.errors import (
    InconsistentSequence, InvalidExpression, NoUnitEigenvalue, NonSimpleEigenvalue,
    ResolutionTooCoarse, SingularGramian
)

logger = logging.getLogger(__name__)

_EXPR_RE = re.compile(r'^\s*(jump|tent|sin|poly)\s*:\s*(.+?)\s*$')

RIESZ_POINTS = 4096

EQUIVALENCE_NOTE = (
    'Diagnostic only: the equivalence of the convergence, square-function and '
    'maximal-function finiteness sets is an almost-everywhere statement about '
    'J = infinity and cannot be decided from finitely many levels. Verdicts read '
    '"consistent with" or "tension with", never "verified".'
)


class ExpansionService:
    """Service for multiresolution expansions"""

    def __init__(self):
        self.settings = None
        self._initialized = False

    def _setup(self):
        if self._initialized:
            return
        self.settings = get_config()
        self._initialized = True

    # Gramian

    @staticmethod
    def autocorrelation_matrix(mask):
        """T[k, l] = a_{2k-l} / 2 on k, l in -(N-1)..N-1, a_m = sum_i p_i p_{i+m}"""
        N = mask.N
        half = Fraction(1, 2) if mask.exact else 0.5
        auto = {m: sum((mask.coefficient(i) * mask.coefficient(i + m) for i in range(N + 1)),
                       mask.zero)
                for m in range(-2 * N, 2 * N + 1)}
        size = 2 * N - 1
        T = np.empty((size, size), dtype=object if mask.exact else float)
        for row, k in enumerate(range(-(N - 1), N)):
            for col, l in enumerate(range(-(N - 1), N)):
                T[row, col] = half * auto.get(2 * k - l, mask.zero)
        return T

    @lru_cache(maxsize=None)
    def gramian(self, mask):
        """g_k = integral of phi(x) phi(x+k), the fixed vector of the autocorrelation matrix

        Raises:
            NonSimpleEigenvalue: eigenvalue 1 is not simple
        """
        self._setup()
        T = self.autocorrelation_matrix(mask)
        size = T.shape[0]
        if mask.exact:
            matrix = sympy.Matrix(size, size, lambda i, j: sympy.Rational(
                T[i, j].numerator, T[i, j].denominator))
            multiplicity = unit_multiplicity(matrix)
            self._check_multiplicity(mask, multiplicity)
            vector = (matrix - sympy.eye(size)).nullspace()[0]
            total = sum(vector)
            normalized = [sympy.Rational(v / total) for v in vector]
            values = tuple(Fraction(int(v.p), int(v.q)) for v in normalized)
        else:
            T = np.asarray(T, dtype=float)
            eigenvalues, vectors = np.linalg.eig(T)
            multiplicity = int(np.count_nonzero(
                np.abs(eigenvalues - 1.0) <= self.settings.EIGEN_TOLERANCE))
            self._check_multiplicity(mask, multiplicity)
            vector = np.real(vectors[:, np.argmin(np.abs(eigenvalues - 1.0))])
            vector = vector / vector.sum()
            vector = (vector + vector[::-1]) / 2.0
            residual = float(np.max(np.abs(T @ vector - vector)))
            if residual > self.settings.FIXED_POINT_RESIDUAL:
                logger.warning(f"Gramian residual {residual:.3g} for {mask.name}")
            values = tuple(float(v) for v in vector)
        return Gramian(mask=mask, values=values)

    @staticmethod
    def _check_multiplicity(mask, multiplicity):
        if multiplicity == 0:
            raise NoUnitEigenvalue(f"autocorrelation matrix of {mask.name} has no eigenvalue 1",
                                   mask=mask.name)
        if multiplicity > 1:
            raise NonSimpleEigenvalue(
                f"eigenvalue 1 of the autocorrelation matrix has multiplicity {multiplicity}",
                mask=mask.name, multiplicity=multiplicity)

    def riesz_bounds(self, gramian, points=RIESZ_POINTS):
        """min and max over xi of the symbol g_0 + 2 sum_k g_k cos(k xi)"""
        xi = np.linspace(0.0, np.pi, points)
        symbol = np.full(points, float(gramian.g(0)))
        for k in range(1, gramian.half_width + 1):
            symbol += 2.0 * float(gramian.g(k)) * np.cos(k * xi)
        return float(symbol.min()), float(symbol.max())

    def checked_gramian(self, mask):
        """Gramian with its Riesz bounds, rejecting a symbol that is not positive

        Raises:
            SingularGramian: the lower Riesz bound is not positive
        """
        self._setup()
        gramian = self.gramian(mask)
        low, high = self.riesz_bounds(gramian)
        if low <= self.settings.RIESZ_FLOOR * high:
            raise SingularGramian(f"translates of {mask.name} are not a Riesz basis "
                                  f"(symbol min {low:.3g}, max {high:.3g})",
                                  mask=mask.name, riesz_low=low, riesz_high=high)
        return gramian, (low, high)

    # Projections

    def _check_resolution(self, level, resolution):
        self._setup()
        needed = level + self.settings.QUADRATURE_EXTRA_LEVELS
        if resolution < needed:
            raise ResolutionTooCoarse(
                f"resolution {resolution} too coarse for level {level}; need >= {needed}",
                level=level, resolution=resolution, required=needed)

    @staticmethod
    def translate_range(N, level, grid):
        """First and last k of the translates kept at a level

        Kept are the 2^{j/2} phi(2^j x - k) supported in the window widened by
        N - 1 on both sides. At level 0 these are exactly the translates that
        meet the window; at every level they include them, and the kept set of
        level j refines into the kept set of level j + 1.
        """
        scale = 1 << level
        return (grid.lo - N + 1) * scale, (grid.hi + N - 1) * scale - N

    @lru_cache(maxsize=64)
    def design_matrix(self, pair, level, grid):
        """Sparse matrix of 2^{j/2} phi(2^j x_i - k) at the grid midpoints

        With t = 2^j x_i = n + u (u at an odd index of the level-L grid,
        L = resolution - level + 1), the entry for k = n - s is Phi_L[u, s].
        """
        if grid.resolution < level:
            raise ResolutionTooCoarse("sampling grid is coarser than the expansion level",
                                      level=level, resolution=grid.resolution)
        N = pair.N
        L = grid.resolution - level + 1
        table = eval_service.phi_grid(pair, L, as_float=True)
        k_min, k_max = self.translate_range(N, level, grid)
        index = (grid.lo << (level + L)) + 2 * np.arange(grid.size, dtype=np.int64) + 1
        whole = index >> L
        frac = index - (whole << L)
        rows, cols, data = [], [], []
        amplitude = 2.0 ** (level / 2.0)
        for s in range(N):
            rows.append(np.arange(grid.size))
            cols.append(whole - s - k_min)
            data.append(amplitude * table[frac, s])
        return sparse.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(grid.size, k_max - k_min + 1))

    def _samples(self, f, grid):
        if callable(f):
            return np.asarray(f(grid.points()), dtype=float)
        values = np.asarray(f, dtype=float)
        if values.shape != (grid.size,):
            raise ValueError(f"expected {grid.size} samples, got {values.shape}")
        return values

    @staticmethod
    def gram_banded(gramian, size):
        """Upper banded storage of the Toeplitz Gram matrix for solveh_banded"""
        bandwidth = gramian.half_width
        banded = np.zeros((bandwidth + 1, size))
        for d in range(bandwidth + 1):
            banded[bandwidth - d, d:] = float(gramian.g(d))
        return banded

    @staticmethod
    def gram_apply(gramian, coefficients):
        """G a for coefficients on a run of consecutive translates (zero outside)"""
        g = gramian.as_array()
        full = np.convolve(coefficients, g)
        return full[gramian.half_width:gramian.half_width + len(coefficients)]

    def solve_gram(self, gramian, rhs, level=None):
        """Solve G a = b by a banded Cholesky solve

        Raises:
            SingularGramian: the truncated Gram matrix is not positive definite
        """
        try:
            return solveh_banded(self.gram_banded(gramian, len(rhs)), rhs)
        except LinAlgError as e:
            raise SingularGramian(f"Gram system at level {level} is not positive definite: {e}",
                                  level=level, mask=gramian.mask.name)

    def project(self, f, mask, level, resolution, window=(0, 1)):
        """Coefficients of P_j f in the basis 2^{j/2} phi(2^j x - k)

        b_k = <f, 2^{j/2} phi(2^j . - k)> by composite-midpoint quadrature on
        the window's 2^-resolution grid (f is taken as zero outside the
        window), then the banded symmetric Toeplitz system G a = b with the
        Gramian of the mask. Translates are truncated to the kept range of
        ``translate_range``; the bias this leaves sits next to the window edges.

        Args:
            f: callable or samples at the grid midpoints
            mask (Mask): scale function mask
            level (int): j >= 0
            resolution (int): grid resolution, at least j + QUADRATURE_EXTRA_LEVELS
            window (tuple): integer window (lo, hi)

        Raises:
            ResolutionTooCoarse, SingularGramian
        """
        self._check_resolution(level, resolution)
        gramian, _ = self.checked_gramian(mask)
        pair = mask_service.build_two_scale(mask)
        grid = SamplingGrid(int(window[0]), int(window[1]), resolution)
        design = self.design_matrix(pair, level, grid)
        rhs = design.T @ self._samples(f, grid) * grid.step
        coefficients = self.solve_gram(gramian, rhs, level)
        k_min, _ = self.translate_range(pair.N, level, grid)
        return Projection(level=level, k_min=k_min, coefficients=coefficients)

    def restrict(self, projection, mask):
        """P_{j-1} of a level-j expansion, with exact inner products

        <f_j, phi_{j-1,k}> = sum_m p_m / sqrt(2) (G a_j)_{2k+m} since
        phi_{j-1,k} = sum_m p_m / sqrt(2) phi_{j,2k+m}; the kept range of
        level j - 1 refines into the one of level j, so no term is lost.
        """
        if projection.level < 1:
            raise ValueError("level 0 has no coarser level")
        gramian, _ = self.checked_gramian(mask)
        inner = self.gram_apply(gramian, np.asarray(projection.coefficients, dtype=float))
        p = np.asarray([float(v) for v in mask.coeffs])
        rhs = np.correlate(inner, p, mode='valid')[0::2] / math.sqrt(2.0)
        k_min = projection.k_min // 2
        coefficients = self.solve_gram(gramian, rhs, projection.level - 1)
        return Projection(level=projection.level - 1, k_min=k_min, coefficients=coefficients)

    def evaluate(self, projection, mask, grid):
        """Values of P_j f at the midpoints of ``grid``"""
        pair = mask_service.build_two_scale(mask)
        design = self.design_matrix(pair, projection.level, grid)
        k_min, _ = self.translate_range(pair.N, projection.level, grid)
        coefficients = np.array([projection.coefficient(k)
                                 for k in range(k_min, k_min + design.shape[1])])
        return design @ coefficients

    # Sequences

    @log_duration
    def build_sequence(self, f, mask, levels, resolution, window=None):
        """f_j = P_j f for j = 0..levels on one grid, with the nesting check P_j f_{j+1} = f_j

        Levels are independent and run on the worker pool.
        """
        self._setup()
        if window is None:
            window = f.default_window() if isinstance(f, TestFunction) else (0, 1)
        grid = SamplingGrid(int(window[0]), int(window[1]), resolution)
        samples = self._samples(f, grid)
        projections = worker_pool.map(
            lambda j: self.project(samples, mask, j, resolution, window), range(levels + 1))
        values = np.vstack([self.evaluate(p, mask, grid) for p in projections])
        consistency = []
        for j in range(levels):
            again = self.restrict(projections[j + 1], mask)
            consistency.append(float(np.max(np.abs(again.coefficients - projections[j].coefficients))))
        source = f.expr if isinstance(f, TestFunction) else getattr(f, '__name__', 'samples')
        logger.info(f"✅ Built {levels + 1} levels of {source} with {mask.name} on {grid.size} points")
        return ExpansionSequence(mask=mask, grid=grid, projections=list(projections),
                                 values=values, source=source, consistency=consistency)

    def square_function(self, seq):
        """Running S_j = sqrt(f_0^2 + sum_{i<j} (f_{i+1} - f_i)^2) and f*_j = max_{i<=j} |f_i|

        Raises:
            InconsistentSequence: the nesting check failed beyond tolerance
        """
        self._setup()
        if seq.values.shape[0] < 2:
            raise InconsistentSequence("square function needs at least two levels",
                                       levels=seq.values.shape[0] - 1)
        scale = 1.0 + float(np.max(np.abs(seq.values)))
        for j, gap in enumerate(seq.consistency):
            if gap > self.settings.CONSISTENCY_TOLERANCE * scale:
                raise InconsistentSequence(f"P_{j} f_{j + 1} differs from f_{j} by {gap:.3g}",
                                           level=j, gap=gap)
        squares = np.concatenate([seq.values[:1] ** 2, np.diff(seq.values, axis=0) ** 2])
        S = np.sqrt(np.cumsum(squares, axis=0))
        fstar = np.maximum.accumulate(np.abs(seq.values), axis=0)
        return SquareFunction(S=S, fstar=fstar)

    def increment_norms(self, seq):
        """Discrete L2 norms of f_{j+1} - f_j over the window"""
        increments = seq.increments()
        return np.sqrt(np.sum(increments ** 2, axis=1) * seq.grid.step)

    @staticmethod
    def decay_rate(norms, first=None, last=None):
        """Least-squares decay of log2 of the norms, in bits per level"""
        first = 0 if first is None else first
        last = len(norms) if last is None else last
        levels = np.arange(first, last)
        logs = np.log2(np.maximum(norms[first:last], np.finfo(float).tiny))
        if levels.size < 2:
            return 0.0
        slope = np.polyfit(levels, logs, 1)[0]
        return float(-slope)

    def equivalence_report(self, seq, thresholds=(), j0=None, tail_tol=None, slack=0.01):
        """Grid measures of the convergence, square-function and maximal-function sets

        (a) Cauchy tail: max - min of f_j over j >= j0 is <= tail_tol,
        (b) S_J <= M, (c) f*_J <= M, with pairwise symmetric differences for
        every threshold M. Measures are fractions of the window.
        """
        self._setup()
        sq = self.square_function(seq)
        gramian, riesz = self.checked_gramian(seq.mask)
        J = seq.levels
        j0 = J // 2 if j0 is None else j0
        tail_tol = self.settings.TAIL_TOLERANCE if tail_tol is None else tail_tol
        points = seq.grid.points()
        tail = seq.values[j0:]
        cauchy = (tail.max(axis=0) - tail.min(axis=0)) <= tail_tol
        S_J, fstar_J = sq.S_final, sq.fstar_final

        norms = self.increment_norms(seq)
        last_growth = np.abs(seq.values[-1] - seq.values[-2])
        report = {
            'note': EQUIVALENCE_NOTE,
            'mask': seq.mask.name,
            'function': seq.source,
            'levels': J,
            'window': [seq.grid.lo, seq.grid.hi],
            'resolution': seq.grid.resolution,
            'cauchy_tail': {'j0': j0, 'tail_tol': tail_tol, 'measure': float(cauchy.mean())},
            'S_J': {'max': float(S_J.max()), 'mean': float(S_J.mean())},
            'f_star': {'max': float(fstar_J.max()), 'mean': float(fstar_J.mean())},
            'increments': {
                'l2_norms': [float(v) for v in norms],
                'decay_bits_per_level': self.decay_rate(norms, first=min(J // 3, max(J - 2, 0))),
                'growth_peak_x': float(points[int(np.argmax(last_growth))]),
            },
            'nesting_gaps': [float(v) for v in seq.consistency],
            'gramian': gramian.to_dict(),
            'riesz_bounds': list(riesz),
            'thresholds': [],
        }
        for M in thresholds:
            s_set = S_J <= M
            f_set = fstar_J <= M
            differences = {
                'tail_vs_S': float(np.mean(cauchy ^ s_set)),
                'tail_vs_fstar': float(np.mean(cauchy ^ f_set)),
                'S_vs_fstar': float(np.mean(s_set ^ f_set)),
            }
            report['thresholds'].append({
                'M': M,
                'measure_tail': float(cauchy.mean()),
                'measure_S': float(s_set.mean()),
                'measure_fstar': float(f_set.mean()),
                'symmetric_differences': differences,
                'verdict': 'consistent with' if max(differences.values()) <= slack else 'tension with',
            })
        report['slack'] = slack
        return report

    # Test functions

    def parse_function(self, expr):
        """Parse jump:c | tent:c | sin:k | poly:a0,a1,...

        Raises:
            InvalidExpression: anything outside the grammar
        """
        match = _EXPR_RE.match(expr or '')
        if not match:
            raise InvalidExpression(f"cannot parse function {expr!r}", expr=expr)
        kind, body = match.group(1), match.group(2)
        try:
            if kind == 'sin':
                params = (int(body),)
            elif kind == 'poly':
                params = tuple(float(part) for part in body.split(','))
            else:
                params = (float(body),)
        except ValueError:
            raise InvalidExpression(f"bad parameters in {expr!r}", expr=expr)
        if not all(math.isfinite(p) for p in params):
            raise InvalidExpression(f"parameters must be finite in {expr!r}", expr=expr)
        return TestFunction(kind=kind, params=params, expr=expr.strip())


# Global expansion service instance
expansion_service = ExpansionService()
