"""
Mask service: validation, the built-in catalog, mask files and the
two-scale matrices P0, P1 with their shared block P.
"""
import json
import logging
import math
import re
from fractions import Fraction
from functools import lru_cache

import numpy as np

from config import get_config
from models import Mask, TwoScalePair
from utils.errors import (
    DegenerateN, MaskFileError, MaskValidationError, NumericError, UnsupportedOrder
)
from utils.helpers import dumps_deterministic, format_scalar, is_exact, parse_scalar

logger = logging.getLogger(__name__)

_BUILTIN_RE = re.compile(r'^builtin:(hat|bspline(\d+)|daubechies(\d+))$')

DAUBECHIES_ORDERS = range(1, 6)

# Minimum-phase spectral factors, sum p = 2, 40 significant digits.
# Written by scripts/pin_daubechies.py; rerun it with --check after edits.
DAUBECHIES_TABLE = {
    2: (
        '0.6830127018922193233818615853764680917357',
        '1.183012701892219323381861585376468091736',
        '0.3169872981077806766181384146235319082643',
        '-0.1830127018922193233818615853764680917357',
    ),
    3: (
        '0.4704672077841636807533291075711704583018',
        '1.141116915831443625760125629659421558190',
        '0.6503650005262325285069348290341612831737',
        '-0.1909344155683273615066582151423409166036',
        '-0.1208322083103962092602639366053317414754',
        '0.04981749973688373574653258548291935841317',
    ),
    4: (
        '0.3258034280512983482745201730704003435581',
        '1.010945715091828862882733347713248130182',
        '0.8922001382467596231716695053011898071168',
        '-0.03957502623564464309536266817396302367145',
        '-0.2645071673690397360516848289067995867384',
        '0.04361630047417725265773999411496271496513',
        '0.04650360107098176460549515053520943606350',
        '-0.01498698933036147244511067365424782147610',
    ),
    5: (
        '0.2264189825835583576483946073902392440865',
        '0.8539435427050283324470191357252304873449',
        '1.024326944259197073234454437092857386367',
        '0.1957669613478093480572738658154924007378',
        '-0.3426567153829348864475960273049351787895',
        '-0.04560113188354729748480179510304274140588',
        '0.1097026586421336470442496905298311022226',
        '-0.008826800108358254544295173381823788689804',
        '-0.01779187010195419147950270770799255388683',
        '0.004717427939067871524803966944143642013050',
    ),
}


class MaskService:
    """Service for masks and two-scale matrices"""

    def __init__(self):
        self.settings = None
        self._initialized = False

    def _setup(self):
        if self._initialized:
            return
        self.settings = get_config()
        self._initialized = True

    # Validation

    def check_mask(self, name, coeffs, exact=None):
        """Validate raw coefficients without raising

        Args:
            name (str): mask name
            coeffs (list): numbers or coefficient strings
            exact (bool): force exact/float mode; None decides from the input

        Returns:
            tuple: (Mask or None, list of diagnostic dicts). Warnings appear in
            the diagnostics with "severity": "warning" and do not block the mask.
        """
        self._setup()
        diagnostics = []
        if not coeffs:
            return None, [{'code': 'EmptyMask', 'severity': 'error',
                           'message': 'coefficient list is empty'}]

        values = [parse_scalar(c, exact) if isinstance(c, str) else c for c in coeffs]
        if exact is None:
            exact = all(is_exact(v) for v in values)
        values = [Fraction(v) if exact else float(v) for v in values]

        total = sum(values, Fraction(0) if exact else 0.0)
        if (total != 2) if exact else abs(total - 2.0) > self.settings.SUM_TOLERANCE:
            diagnostics.append({'code': 'SumNotTwo', 'severity': 'error', 'actual': float(total),
                                'message': f'coefficients sum to {total}, expected 2'})
        for index in sorted({0, len(values) - 1}):
            if values[index] == 0:
                diagnostics.append({'code': 'ZeroEndpoint', 'severity': 'error', 'index': index,
                                    'message': f'endpoint coefficient p_{index} is zero'})
        if any(d['severity'] == 'error' for d in diagnostics):
            return None, diagnostics

        warnings = []
        even, odd = sum(values[0::2]), sum(values[1::2])
        if exact:
            rule_ok = even == 1 and odd == 1
        else:
            tol = self.settings.SUM_TOLERANCE
            rule_ok = abs(even - 1.0) <= tol and abs(odd - 1.0) <= tol
        if not rule_ok:
            warnings.append('SumRuleViolated')
            diagnostics.append({'code': 'SumRuleViolated', 'severity': 'warning',
                                'even_sum': float(even), 'odd_sum': float(odd),
                                'message': 'sum rule fails; partition of unity does not hold'})
        if len(values) - 1 < 2:
            warnings.append('ContinuityNotGuaranteed')
            diagnostics.append({'code': 'ContinuityNotGuaranteed', 'severity': 'warning',
                                'message': 'continuity not guaranteed (support shorter than 2)'})
        for warning in warnings:
            logger.warning(f"Mask {name!r} accepted with warning {warning}")
        return Mask(name, tuple(values), tuple(warnings)), diagnostics

    def validate_mask(self, name, coeffs, exact=None):
        """Validate raw coefficients, raising MaskValidationError with every violation"""
        mask, diagnostics = self.check_mask(name, coeffs, exact)
        if mask is None:
            raise MaskValidationError(diagnostics, name=name)
        return mask

    # Catalog

    @lru_cache(maxsize=None)
    def builtin_mask(self, family, order):
        """Catalog mask

        Args:
            family (str): 'bspline' or 'daubechies'
            order (int): spline order n >= 1 (support [0, n]) or the number
                of vanishing moments M in 1..5

        Returns:
            Mask: exact for B-splines, float from the pinned table for Daubechies
            (Haar is exact)
        """
        if family == 'bspline':
            if order < 1:
                raise UnsupportedOrder(f"bspline order must be >= 1, got {order}", order=order)
            coeffs = [Fraction(math.comb(order, k), 2 ** (order - 1)) for k in range(order + 1)]
            return self.validate_mask(f'bspline{order}', coeffs)
        if family == 'daubechies':
            if order not in DAUBECHIES_ORDERS:
                raise UnsupportedOrder(f"daubechies order must lie in 1..5, got {order}", order=order)
            if order == 1:
                return self.validate_mask('daubechies1', [Fraction(1), Fraction(1)])
            return self.validate_mask(f'daubechies{order}', [float(c) for c in DAUBECHIES_TABLE[order]],
                                      exact=False)
        raise UnsupportedOrder(f"unknown mask family {family!r}", family=family)

    def catalog(self):
        """Continuous catalog masks (Haar excluded)"""
        return [self.builtin_mask('bspline', n) for n in range(2, 6)] + \
               [self.builtin_mask('daubechies', m) for m in range(2, 6)]

    def resolve_mask(self, source):
        """Mask from "builtin:<family><order>", "builtin:hat" or a mask file path"""
        match = _BUILTIN_RE.match(source.strip())
        if match:
            if match.group(1) == 'hat':
                return self.builtin_mask('bspline', 2)
            if match.group(2):
                return self.builtin_mask('bspline', int(match.group(2)))
            return self.builtin_mask('daubechies', int(match.group(3)))
        if source.startswith('builtin:'):
            raise UnsupportedOrder(f"unknown builtin mask {source!r}", source=source)
        return self.load_mask(source)

    # Mask files

    def load_mask(self, path):
        """Read a JSON mask file with fields name, N, coeffs (and optional exact)"""
        try:
            with open(path, encoding='utf-8') as handle:
                data = json.load(handle)
        except (OSError, json.JSONDecodeError) as e:
            raise MaskFileError(f"Cannot read mask file {path}: {e}", path=str(path))
        if not isinstance(data, dict) or 'coeffs' not in data:
            raise MaskFileError(f"Mask file {path} needs a 'coeffs' array", path=str(path))
        coeffs = [str(c) for c in data['coeffs']]
        if 'N' in data and int(data['N']) != len(coeffs) - 1:
            raise MaskFileError(f"Mask file {path}: N={data['N']} but {len(coeffs)} coefficients",
                                path=str(path))
        exact = data.get('exact')
        if exact is None and not all(re.match(r'^\s*[+-]?\d+\s*(/\s*\d+\s*)?$', c) for c in coeffs):
            exact = False
        try:
            return self.validate_mask(data.get('name', str(path)), coeffs, exact)
        except ValueError as e:
            raise MaskFileError(f"Mask file {path}: {e}", path=str(path))

    def dump_mask(self, mask, path):
        data = {'name': mask.name, 'N': mask.N, 'coeffs': [format_scalar(c) for c in mask.coeffs],
                'exact': mask.exact}
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write(dumps_deterministic(data))

    def integrate_mask(self, mask):
        """Mask of phi * 1_[0,1]: coefficients of (1+z)/2 p(z), support [0, N+1]"""
        half = Fraction(1, 2) if mask.exact else 0.5
        coeffs = [half * (mask.coefficient(k) + mask.coefficient(k - 1)) for k in range(mask.N + 2)]
        return self.validate_mask(f'{mask.name}-integrated', coeffs, mask.exact)

    # Two-scale matrices

    def two_scale_from_entries(self, mask):
        """(P0)[m, k] = p_{2k-m}, (P1)[m, k] = p_{2k-m+1}"""
        N = mask.N
        dtype = object if mask.exact else float
        P0 = np.empty((N, N), dtype=dtype)
        P1 = np.empty((N, N), dtype=dtype)
        for m in range(N):
            for k in range(N):
                P0[m, k] = mask.coefficient(2 * k - m)
                P1[m, k] = mask.coefficient(2 * k - m + 1)
        return P0, P1

    def two_scale_from_recipe(self, mask):
        """Block recipe: P from odd/even rows and cyclic shifts, then p_t and p_b"""
        N = mask.N
        n = N - 1
        zero = mask.zero
        p = mask.coeffs

        def pad(values):
            return (list(values) + [zero] * n)[:n]

        rows = []
        if n >= 1:
            rows.append(pad(p[1::2]))
        if n >= 2:
            rows.append(pad(p[0::2]))
        while len(rows) < n:
            previous = rows[len(rows) - 2]
            rows.append([previous[-1]] + previous[:-1])

        p_t = pad(p[2::2])
        tail = [p[k] for k in range(N - 2, -1, -2)][::-1]
        p_b = [zero] * (n - len(tail)) + tail

        top = [[p[0]] + p_t] + [[zero] + row for row in rows]
        bottom = [row + [zero] for row in rows] + [p_b + [p[N]]]
        dtype = object if mask.exact else float
        P0 = np.empty((N, N), dtype=dtype)
        P1 = np.empty((N, N), dtype=dtype)
        P0[:, :] = top
        P1[:, :] = bottom
        return P0, P1

    @lru_cache(maxsize=None)
    def build_two_scale(self, mask):
        """Build the two-scale pair by both constructions and require agreement

        Raises:
            DegenerateN: for N < 2
            NumericError: when the two constructions disagree
        """
        if mask.N < 2:
            raise DegenerateN(f"two-scale matrices need N >= 2, got N={mask.N}", N=mask.N)
        P0, P1 = self.two_scale_from_entries(mask)
        R0, R1 = self.two_scale_from_recipe(mask)
        if not (np.array_equal(P0, R0) and np.array_equal(P1, R1)):
            raise NumericError(f"two-scale constructions disagree for {mask.name}", mask=mask.name)
        P_inner = P0[1:, 1:].copy()
        logger.debug(f"Built two-scale pair for {mask.name} (N={mask.N})")
        return TwoScalePair(mask=mask, P0=P0, P1=P1, P_inner=P_inner)


# Global mask service instance
mask_service = MaskService()
