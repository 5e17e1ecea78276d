"""
Marcinkiewicz-Zygmund constants: the upper constant B, the lower constant
C(E) over a grid set and the uniform C_delta over all sets of measure delta.
"""
import itertools
import logging
import math

import numpy as np
from scipy.optimize import linprog

from config import get_config
from models import GridSet, MzEntry, MzReport
from services.eval_service import eval_service
from services.worker_pool import worker_pool
from utils.decorators import log_duration
from utils.errors import EmptySet, InvalidDelta

logger = logging.getLogger(__name__)

NORMALIZATIONS = ('l1', 'l2')

LP_MAX_N = 5
SWEEP_MAX_N = 4
SWEEP_CHUNK = 256

# HiGHS optimality tolerance; LP values are certified only up to it
LP_TOLERANCE = 1e-7


def _norms(a, normalization):
    if normalization == 'l1':
        return np.abs(a).sum(axis=-1)
    return np.linalg.norm(a, axis=-1)


def _statistic(values, k):
    """max (k None) or k-th smallest entry along the last axis, with its index"""
    if k is None:
        index = np.argmax(values, axis=-1)
    else:
        index = np.argpartition(values, k - 1, axis=-1)[..., k - 1]
    return np.take_along_axis(values, np.expand_dims(index, -1), -1)[..., 0], index


class MzService:
    """Service for M-Z constant estimates"""

    def __init__(self):
        self.settings = None
        self._initialized = False

    def _setup(self):
        if self._initialized:
            return
        self.settings = get_config()
        self._initialized = True

    @staticmethod
    def _check_normalization(normalization):
        if normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}, got {normalization!r}")

    def cell_matrix(self, pair, resolution):
        """Rows Phi(x) at the midpoints of the 2^resolution cells"""
        return eval_service.phi_grid(pair, resolution + 1, as_float=True)[1::2]

    def sup_constant(self, pair, resolution=None):
        """B = max over grid x and k of |phi(x+k)|"""
        self._setup()
        resolution = self.settings.DEFAULT_RESOLUTION if resolution is None else resolution
        grid = eval_service.phi_grid(pair, resolution, as_float=True)
        return float(np.max(np.abs(grid)))

    # Objective and optimizers

    def _value(self, M, a, k, normalization):
        """sup (or k-th smallest) of |M a| divided by ||a||"""
        values, _ = _statistic(np.abs(M @ a), k)
        return float(values) / float(_norms(a, normalization))

    def _starts(self, N, multistarts, seed):
        """Fixed start list: unit vectors, the all-ones and alternating vectors, then seeded draws"""
        fixed = list(np.eye(N)) + [np.ones(N), np.array([(-1.0) ** i for i in range(N)])]
        rng = np.random.default_rng(seed)
        drawn = rng.standard_normal((max(multistarts - len(fixed), 0), N))
        return (fixed + list(drawn))[:max(multistarts, 1)]

    def _descend(self, M, start, k, normalization, max_iter):
        """Projected subgradient descent on the norm sphere from one start"""
        a = start / _norms(start, normalization)
        best_value, best_a = self._value(M, a, k, normalization), a
        step0 = 0.25 * float(np.linalg.norm(a))
        for it in range(max_iter):
            products = M @ a
            _, i = _statistic(np.abs(products), k)
            g = np.sign(products[i]) * M[i]
            g_norm = float(np.linalg.norm(g))
            if g_norm == 0.0:
                break
            a = a - (step0 / math.sqrt(it + 1)) * g / g_norm
            norm = float(_norms(a, normalization))
            if norm == 0.0:
                break
            a = a / norm
            value = self._value(M, a, k, normalization)
            if value < best_value:
                best_value, best_a = value, a
        return best_value, best_a

    def _multistart(self, M, k, normalization, multistarts, seed, max_iter, candidates=()):
        starts = self._starts(M.shape[1], multistarts, seed)
        results = worker_pool.map(
            lambda start: self._descend(M, start, k, normalization, max_iter), starts)
        results += [(self._value(M, a, k, normalization), a / _norms(a, normalization))
                    for a in candidates]
        # first minimum in list order, independent of completion order
        index = min(range(len(results)), key=lambda i: results[i][0])
        return results[index]

    def _lp_l1(self, M):
        """Exact min over the l1 sphere of max |M a|: one LP per sign orthant"""
        N = M.shape[1]
        rows = M.shape[0]
        best_value, best_a = math.inf, None
        A_ub = np.block([[M, -np.ones((rows, 1))], [-M, -np.ones((rows, 1))]])
        b_ub = np.zeros(2 * rows)
        cost = np.zeros(N + 1)
        cost[-1] = 1.0
        for tail in itertools.product((1.0, -1.0), repeat=N - 1):
            signs = np.array((1.0,) + tail)
            A_eq = np.append(signs, 0.0).reshape(1, -1)
            bounds = [(0, None) if s > 0 else (None, 0) for s in signs] + [(0, None)]
            result = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                             bounds=bounds, method='highs')
            if result.success and result.fun < best_value:
                best_value, best_a = float(result.fun), result.x[:N]
        return best_value, best_a

    def sweep_bound(self, pair, E=None, normalization='l1', points=None, delta=None,
                    resolution=None):
        """Deterministic sweep over the surface of the l-infinity cube (N <= 4)

        Every direction is a positive multiple of a point on a face {a_i = 1}
        of the cube, and each face is covered by a square grid of spacing h.
        With L the largest row norm of Phi, a grid point g bounds every a
        within its cell: value(a) >= (F(g) - L rho) / (||g|| + rho_norm).

        Returns:
            tuple: (smallest sampled value, certified lower bound, its argmin)
        """
        self._setup()
        self._check_normalization(normalization)
        M, k = self._objective_rows(pair, E, delta, resolution)
        return self._sweep(M, k, normalization, points)

    def _sweep(self, M, k, normalization, points=None):
        N = M.shape[1]
        points = self.settings.MZ_SWEEP_POINTS if points is None else points
        side = max(2, int(round((points / N) ** (1.0 / max(N - 1, 1)))))
        h = 2.0 / (side - 1)
        axis = np.linspace(-1.0, 1.0, side)
        faces = []
        for i in range(N):
            free = np.array(list(itertools.product(axis, repeat=N - 1))).reshape(-1, N - 1)
            face = np.insert(free, i, 1.0, axis=1)
            faces.append(face)
        G = np.concatenate(faces)

        rho_l2 = (h / 2.0) * math.sqrt(N - 1)
        rho_norm = rho_l2 if normalization == 'l2' else (h / 2.0) * (N - 1)
        lipschitz = float(np.max(np.linalg.norm(M, axis=1)))

        def evaluate(bounds):
            start, stop = bounds
            values, _ = _statistic(np.abs(G[start:stop] @ M.T), k)
            return values

        chunks = worker_pool.chunks(G.shape[0], max(1, G.shape[0] // SWEEP_CHUNK))
        F = np.concatenate(worker_pool.map(evaluate, chunks))
        norms = _norms(G, normalization)
        ratios = F / norms
        best = int(np.argmin(ratios))
        lower = float(np.min((F - lipschitz * rho_l2) / (norms + rho_norm)))
        return float(ratios[best]), max(lower, 0.0), G[best] / norms[best]

    def _objective_rows(self, pair, E, delta, resolution):
        if E is not None:
            if E.is_empty:
                raise EmptySet("C(E) needs a set of positive measure")
            return self.cell_matrix(pair, E.resolution)[E.cells], None
        resolution = self.settings.DEFAULT_RESOLUTION if resolution is None else resolution
        size = 1 << resolution
        return self.cell_matrix(pair, resolution), max(1, math.ceil(delta * size - 1e-9))

    # Constants

    def _estimate(self, pair, M, k, normalization, multistarts, seed, max_iter, candidates=()):
        value, argmin = self._multistart(M, k, normalization, multistarts, seed, max_iter, candidates)
        lower = None
        if pair.N <= SWEEP_MAX_N:
            sweep_value, sweep_lower, sweep_a = self._sweep(M, k, normalization)
            lower = sweep_lower
            if sweep_value < value:
                value, argmin = sweep_value, sweep_a
        if k is None and normalization == 'l1' and pair.N <= LP_MAX_N:
            lp_value, lp_a = self._lp_l1(M)
            if lp_a is not None and lp_value < value:
                value, argmin = lp_value, lp_a
            if lp_a is not None:
                lower = max(lower or 0.0, lp_value - LP_TOLERANCE)
        return value, argmin, lower

    @log_duration
    def c_of_E(self, pair, E, normalization='l1', multistarts=None, seed=None, max_iter=None):
        """Estimate C(E) = inf over ||a|| = 1 of max over grid x in E of |a . Phi(x)|

        The value is an upper bound on the infimum (the optimizer may miss it);
        for l1 and N <= 5 it is exact on the grid (one LP per sign orthant).

        Returns:
            tuple: (C, argmin a, certified lower bound or None)
        """
        self._setup()
        self._check_normalization(normalization)
        M, k = self._objective_rows(pair, E, None, None)
        return self._estimate(
            pair, M, k, normalization,
            self.settings.MZ_MULTISTARTS if multistarts is None else multistarts,
            self.settings.DEFAULT_SEED if seed is None else seed,
            self.settings.MZ_MAX_ITER if max_iter is None else max_iter)

    def quantile(self, pair, a, delta, resolution=None):
        """delta-quantile of |a . Phi| over the cells: the k-th smallest, k = ceil(delta 2^r)"""
        self._setup()
        M, k = self._objective_rows(pair, None, delta, resolution)
        values, _ = _statistic(np.abs(M @ np.asarray(a, dtype=float)), k)
        return float(values)

    def worst_set(self, pair, a, delta, resolution=None):
        """The sublevel set of |a . Phi| with ceil(delta 2^r) cells: the E of measure delta
        with the smallest sup"""
        self._setup()
        M, k = self._objective_rows(pair, None, delta, resolution)
        order = np.argsort(np.abs(M @ np.asarray(a, dtype=float)), kind='stable')
        cells = np.zeros(M.shape[0], dtype=bool)
        cells[order[:k]] = True
        return GridSet(int(math.log2(M.shape[0])), cells)

    @log_duration
    def c_of_delta(self, pair, delta, normalization='l1', resolution=None, multistarts=None,
                   seed=None, max_iter=None, candidates=()):
        """Estimate C_delta = inf over ||a|| = 1 of the delta-quantile of |a . Phi|

        For fixed a the worst set of measure delta is the sublevel set of
        |a . Phi|, so the sup over it is the quantile.

        Returns:
            tuple: (C_delta, argmin a, certified lower bound or None)
        """
        self._setup()
        self._check_normalization(normalization)
        if not 0 < delta <= 1:
            raise InvalidDelta(f"delta must lie in (0, 1], got {delta}", delta=delta)
        M, k = self._objective_rows(pair, None, delta, resolution)
        return self._estimate(
            pair, M, k, normalization,
            self.settings.MZ_MULTISTARTS if multistarts is None else multistarts,
            self.settings.DEFAULT_SEED if seed is None else seed,
            self.settings.MZ_MAX_ITER if max_iter is None else max_iter,
            candidates)

    @log_duration
    def mz_report(self, pair, deltas, normalization='l1', resolution=None, multistarts=None,
                  seed=None):
        """B and C_delta for every delta

        Deltas are processed from the largest down and every minimizer found
        is offered as a candidate to the smaller ones, so the C column is
        nondecreasing in delta. normalization 'both' adds the l1/l2 bridge.
        """
        self._setup()
        resolution = self.settings.DEFAULT_RESOLUTION if resolution is None else resolution
        multistarts = self.settings.MZ_MULTISTARTS if multistarts is None else multistarts
        seed = self.settings.DEFAULT_SEED if seed is None else seed
        primary = 'l1' if normalization == 'both' else normalization
        self._check_normalization(primary)
        for delta in deltas:
            if not 0 < delta <= 1:
                raise InvalidDelta(f"delta must lie in (0, 1], got {delta}", delta=delta)

        B = self.sup_constant(pair, resolution)
        report = MzReport(mask=pair.mask.name, normalization=normalization, B=B,
                          resolution=resolution, multistarts=multistarts, seed=seed)
        norms = [primary] + (['l2'] if normalization == 'both' else [])
        found = {}
        for norm in norms:
            candidates = []
            rows = {}
            for delta in sorted(set(deltas), reverse=True):
                C, argmin, lower = self.c_of_delta(pair, delta, norm, resolution, multistarts,
                                                   seed, candidates=tuple(candidates))
                candidates.append(argmin)
                rows[delta] = (C, argmin, lower)
            found[norm] = rows
        for delta in sorted(set(deltas)):
            C, argmin, lower = found[primary][delta]
            report.entries.append(MzEntry(label=f'delta={delta!r}', C=C, argmin=tuple(argmin),
                                          B=B, lower_bound=lower, delta=delta))
            if normalization == 'both':
                C2 = found['l2'][delta][0]
                report.bridge.append({'delta': delta, 'C_l1': C, 'C_l2': C2, 'ratio': C2 / C})
        logger.info(f"✅ M-Z report for {pair.mask.name}: B={B:.6g}, {len(report.entries)} deltas")
        return report


# Global mz service instance
mz_service = MzService()
