"""
Independence of translates over sets of positive measure: zero sets K_c,
annihilating digit words, never-zero certificates and density pushforwards.

Digit words act on coefficient vectors in the order they are read:
the word (e1, ..., ej) maps c to P_{ej} ... P_{e1} c, and
c . Phi(x) = (P_{ej} ... P_{e1} c) . Phi(T^j x) for x in the cell of the word.
"""
import logging
from fractions import Fraction

import numpy as np
from scipy.linalg import eigvalsh

from config import get_config
from models import Certificate, CoefVector, GridSet, SearchResult
from services.eval_service import eval_service
from services.worker_pool import worker_pool
from utils.decorators import log_duration
from utils.errors import (
    AnnihilatedVector, DimensionMismatch, EmptySet, IntervalNotFound,
    SearchBudgetExceeded, ZeroVector
)
from utils.helpers import exact_sqrt, word_to_string

logger = logging.getLogger(__name__)


def _word_of(value, length):
    return tuple((int(value) >> (length - 1 - i)) & 1 for i in range(length))


class IndependenceService:
    """Service for the annihilation/never-zero dichotomy and zero-set measures"""

    def __init__(self):
        self.settings = None
        self._initialized = False

    def _setup(self):
        if self._initialized:
            return
        self.settings = get_config()
        self._initialized = True

    def _check(self, pair, c):
        if c.N != pair.N:
            raise DimensionMismatch(f"coefficient vector has {c.N} entries, expected {pair.N}",
                                    expected=pair.N, actual=c.N)
        if c.is_zero:
            raise ZeroVector("independence queries need c != 0")

    # Zero sets

    def combination_on_cells(self, pair, c, resolution):
        """c . Phi at the midpoints of the 2^resolution cells of [0, 1]"""
        grid = eval_service.phi_grid(pair, resolution + 1, as_float=True)
        return grid[1::2] @ np.asarray(c.to_list(), dtype=float)

    def zero_set(self, pair, c, resolution=None, tol=1e-9):
        """Cells of K_c = {x : c . Phi(x) = 0}: those whose midpoint has |c . Phi| <= tol"""
        self._setup()
        self._check(pair, c)
        resolution = self.settings.DEFAULT_RESOLUTION if resolution is None else resolution
        values = self.combination_on_cells(pair, c, resolution)
        return GridSet(resolution, np.abs(values) <= tol)

    def restricted_gram(self, pair, E):
        """Midpoint approximation of the integral over E of Phi Phi^T

        Returns:
            tuple: (N x N matrix, smallest eigenvalue). The eigenvalue is
            positive exactly when the translates are independent over E at
            E's resolution.
        """
        if E.is_empty:
            raise EmptySet("restricted Gram matrix needs a nonempty set")
        grid = eval_service.phi_grid(pair, E.resolution + 1, as_float=True)
        rows = grid[1::2][E.cells]
        gram = rows.T @ rows / E.size
        return gram, float(eigvalsh(gram)[0])

    # Word searches

    def _direction_keys(self, frontier, exact):
        """Hashable keys of the projective directions of the rows"""
        if exact:
            keys = []
            for row in frontier:
                lead = next(v for v in row if v != 0)
                keys.append(tuple(v / lead for v in row))
            return keys
        norms = np.linalg.norm(frontier, axis=1)
        unit = np.round(frontier / norms[:, None], self.settings.DEDUP_DECIMALS) + 0.0
        first = np.argmax(unit != 0, axis=1)
        signs = np.sign(unit[np.arange(unit.shape[0]), first])
        signs[signs == 0] = 1.0
        unit = unit * signs[:, None] + 0.0
        return [row.tobytes() for row in unit]

    @staticmethod
    def _squared_norms(frontier, exact):
        if exact:
            return [sum((v * v for v in row), Fraction(0)) for row in frontier]
        return np.einsum('ij,ij->i', frontier, frontier)

    def _explore(self, pair, c, depth, minimize):
        """Breadth-first walk over digit words up to ``depth``

        Children are laid out [w0, w1] per parent, so every level stays in
        lexicographic order and the first hit of a level is the
        lexicographically first shortest word. With ``minimize`` False the
        walk stops at the first annihilated vector and prunes any repeated
        direction; with ``minimize`` True it tracks the smallest norm and only
        prunes a direction already reached with a norm no larger.
        """
        self._setup()
        self._check(pair, c)
        exact = pair.exact and c.exact
        if exact:
            P0t, P1t = pair.P0.T, pair.P1.T
            frontier = c.as_array().reshape(1, -1)
        else:
            P0t = np.asarray(pair.P0, dtype=float).T
            P1t = np.asarray(pair.P1, dtype=float).T
            frontier = np.asarray(c.to_list(), dtype=float).reshape(1, -1)
        words = np.zeros(1, dtype=np.int64 if depth < 63 else object)

        c_sq = self._squared_norms(frontier, exact)[0]
        zero_sq = Fraction(0) if exact else (self.settings.ANNIHILATION_RTOL ** 2) * c_sq
        best_sq, best_word = c_sq, ()
        seen = {}
        for key in self._direction_keys(frontier, exact):
            seen[key] = c_sq
        states = 1

        for level in range(1, depth + 1):
            size = frontier.shape[0]
            if 2 * size > self.settings.SEARCH_MAX_FRONTIER:
                raise SearchBudgetExceeded(
                    f"frontier of {2 * size} states at depth {level} exceeds the budget",
                    depth=level, frontier=2 * size, budget=self.settings.SEARCH_MAX_FRONTIER)
            children = np.empty((2 * size, pair.N), dtype=frontier.dtype)
            children[0::2] = frontier.dot(P0t)
            children[1::2] = frontier.dot(P1t)
            child_words = np.empty(2 * size, dtype=words.dtype)
            child_words[0::2] = words * 2
            child_words[1::2] = words * 2 + 1
            states += 2 * size

            sq = self._squared_norms(children, exact)
            if exact:
                zeros = [i for i in range(2 * size) if sq[i] <= zero_sq]
            else:
                zeros = np.flatnonzero(sq <= zero_sq)
            if len(zeros):
                word = _word_of(child_words[zeros[0]], level)
                return word, sq[zeros[0]], word, level, states
            level_min = int(np.argmin(sq)) if not exact else min(range(2 * size), key=lambda i: sq[i])
            if sq[level_min] < best_sq:
                best_sq, best_word = sq[level_min], _word_of(child_words[level_min], level)

            keep = []
            for i, key in enumerate(self._direction_keys(children, exact)):
                previous = seen.get(key)
                if previous is None or (minimize and sq[i] < previous):
                    seen[key] = sq[i]
                    keep.append(i)
            frontier, words = children[keep], child_words[keep]
            if not keep:
                break
        return None, best_sq, best_word, depth, states

    @log_duration
    def annihilation_search(self, pair, c, max_depth):
        """First word w (shortest, then lexicographic) with P_w c = 0

        Exact zero in rational mode; norm <= ANNIHILATION_RTOL * ||c|| in float mode.
        """
        word, best_sq, best_word, depth, states = self._explore(pair, c, max_depth, minimize=False)
        exact = pair.exact and c.exact
        result = SearchResult(
            found=word is not None,
            word=word or (),
            min_norm=exact_sqrt(best_sq) if exact else float(np.sqrt(best_sq)),
            min_word=best_word,
            depth=depth,
            states_explored=states,
            exact=exact,
        )
        if result.found:
            logger.info(f"🔎 {pair.mask.name}: c annihilated by word {word_to_string(word)!r}")
        return result

    @log_duration
    def never_zero_certificate(self, pair, c, depth):
        """Minimum of ||P_w c||_2 over all words of length <= depth (the empty word included)

        Positive when the minimum is > 0 (exact) or > CERTIFICATE_THRESHOLD * ||c|| (float).
        """
        word, best_sq, best_word, reached, states = self._explore(pair, c, depth, minimize=True)
        exact = pair.exact and c.exact
        threshold = 0.0 if exact else self.settings.CERTIFICATE_THRESHOLD * float(c.l2)
        if word is not None:
            min_norm = Fraction(0) if exact else float(np.sqrt(best_sq))
            arg_word = word
        else:
            min_norm = exact_sqrt(best_sq) if exact else float(np.sqrt(best_sq))
            arg_word = best_word
        return Certificate(
            positive=min_norm > threshold,
            min_norm=min_norm,
            arg_word=arg_word,
            depth=depth,
            threshold=threshold,
            states_explored=states,
            exact=exact,
        )

    def certify_many(self, pair, vectors, depth):
        """Certificates for several vectors, computed in parallel, in input order"""
        return worker_pool.map(lambda c: self.never_zero_certificate(pair, c, depth), vectors)

    def classify(self, pair, c, depth):
        """Case of c at finite depth: 'annihilated', 'certified' or 'inconclusive'

        Inconclusive only in float mode, when the smallest norm lies between the
        annihilation and certificate thresholds.

        Returns:
            tuple: (case, SearchResult, Certificate or None)
        """
        search = self.annihilation_search(pair, c, depth)
        if search.found:
            return 'annihilated', search, None
        certificate = self.never_zero_certificate(pair, c, depth)
        return ('certified' if certificate.positive else 'inconclusive'), search, certificate

    # Density intervals and pushforwards

    def density_interval(self, K, eta, max_depth=None):
        """Shortest dyadic cell (ties: smallest word) where K has density > 1 - eta

        Raises:
            IntervalNotFound: no cell down to max_depth (default K's resolution) qualifies
        """
        if not 0 < eta < 1:
            raise ValueError(f"eta must lie in (0, 1), got {eta}")
        limit = K.resolution if max_depth is None else min(max_depth, K.resolution)
        if not K.is_empty:
            for depth in range(limit + 1):
                hits = np.flatnonzero(K.densities(depth) > 1 - eta)
                if hits.size:
                    return _word_of(hits[0], depth)
        raise IntervalNotFound(f"no dyadic cell of depth <= {limit} has density > {1 - eta}",
                               eta=eta, max_depth=limit, resolution=K.resolution)

    def pushforward_raw(self, pair, c, word):
        """P_{ej} ... P_{e1} c without normalization"""
        if c.N != pair.N:
            raise DimensionMismatch(f"coefficient vector has {c.N} entries, expected {pair.N}",
                                    expected=pair.N, actual=c.N)
        exact = pair.exact and c.exact
        vector = c.as_array() if exact else np.asarray(c.to_list(), dtype=float)
        for digit in word:
            matrix = pair.matrix(digit) if exact else np.asarray(pair.matrix(digit), dtype=float)
            vector = matrix.dot(vector)
        return CoefVector(tuple(vector) if exact else tuple(float(v) for v in vector))

    def push_forward(self, pair, c, word):
        """b / ||b||_2 with b = P_{ej} ... P_{e1} c (exact when the norm is rational)

        Raises:
            AnnihilatedVector: b = 0, so the word witnesses annihilation instead
        """
        self._setup()
        b = self.pushforward_raw(pair, c, word)
        if b.is_zero or (not b.exact and b.l2 <= self.settings.ANNIHILATION_RTOL * float(c.l2)):
            raise AnnihilatedVector(f"word {word_to_string(word)!r} annihilates c",
                                    word=word_to_string(word))
        return b.normalized()

    def amplify(self, pair, c, resolution, tol, eta=None, word=None):
        """Density pushforward: from a dense cell of K_c to the large set K_b

        On the cell of ``word`` (found by density_interval when not given),
        c . Phi(x) = b . Phi(T^j x), so the zero set of the normalized b at
        resolution r - j with tolerance tol / ||b|| has measure equal to the
        density of K_c on that cell.
        """
        K = self.zero_set(pair, c, resolution, tol)
        if word is None:
            word = self.density_interval(K, eta)
        word = tuple(word)
        b = self.pushforward_raw(pair, c, word)
        normalized = self.push_forward(pair, c, word)
        scaled_tol = tol / float(b.l2)
        K_b = self.zero_set(pair, normalized, resolution - len(word), scaled_tol)
        return {
            'word': word_to_string(word),
            'density': K.density(word),
            'pushforward': normalized.to_list(),
            'pushforward_norm': float(b.l2),
            'measure_before': K.measure,
            'measure_after': K_b.measure,
            'resolution_after': resolution - len(word),
            'tol_after': scaled_tol,
        }

    # Reports

    def independence_report(self, pair, c, depth, resolutions=(), tol=1e-9):
        """Case, witness or certificate, and K_c measures by resolution"""
        case, search, certificate = self.classify(pair, c, depth)
        report = {
            'mask': pair.mask.name,
            'c': c.to_list(),
            'case': case,
            'depth': depth,
            'exact': search.exact,
            'thresholds': {
                'annihilation_rtol': self.settings.ANNIHILATION_RTOL,
                'certificate_threshold': self.settings.CERTIFICATE_THRESHOLD,
                'relative_to': 'l2 norm of c',
            },
        }
        if case == 'annihilated':
            report.update({'word': word_to_string(search.word), 'min_norm': 0.0,
                           'states_explored': search.states_explored})
        else:
            report.update({'word': word_to_string(certificate.arg_word),
                           'min_norm': float(certificate.min_norm),
                           'states_explored': certificate.states_explored})
        report['zero_set'] = [
            {'resolution': r, 'tol': tol, 'measure': self.zero_set(pair, c, r, tol).measure}
            for r in resolutions
        ]
        logger.info(f"✅ {pair.mask.name}: case {case} at depth {depth}")
        return report


# Global independence service instance
independence_service = IndependenceService()
