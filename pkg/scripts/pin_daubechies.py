#!/usr/bin/env python3
"""
Spectral factorization of the Daubechies masks in mpmath arithmetic.

    python -m scripts.pin_daubechies          print the DAUBECHIES_TABLE block
    python -m scripts.pin_daubechies --check  compare it with services/mask_service.py
"""
import sys
from pathlib import Path

import mpmath

BASE_DIR = Path(__file__).parent.parent
sys.path.insert(0, str(BASE_DIR))

DIGITS = 50
PINNED_DIGITS = 40
CHECK_TOLERANCE = mpmath.mpf('1e-35')


def reference_coefficients(M):
    """Minimum-phase factor of the half-band polynomial, normalized to sum 2

    P(y) = sum_{k<M} binom(M-1+k, k) y^k with y = (2 - z - 1/z) / 4; each root
    y gives a pair z, 1/z and the one inside the unit circle goes into the
    factor, times (1+z)^M.
    """
    with mpmath.workdps(DIGITS):
        ascending = [mpmath.binomial(M - 1 + k, k) for k in range(M)]
        inside = []
        if M > 1:
            for y in mpmath.polyroots(ascending[::-1], maxsteps=200, extraprec=2 * DIGITS):
                b = 2 - 4 * y
                disc = mpmath.sqrt(b * b - 4)
                z1, z2 = (b + disc) / 2, (b - disc) / 2
                inside.append(z1 if abs(z1) < 1 else z2)
        q = [mpmath.mpc(1)]
        for root in inside:
            q = [a - root * b for a, b in zip(q + [0], [0] + q)]
        h = [mpmath.mpf(0)] * (M + len(q))
        for i in range(M + 1):
            for j, value in enumerate(q):
                h[i + j] += mpmath.binomial(M, i) * value
        h = [mpmath.re(v) for v in h]
        total = sum(h)
        return [2 * v / total for v in h]


def table_block(orders):
    lines = ['DAUBECHIES_TABLE = {']
    for M in orders:
        lines.append(f'    {M}: (')
        for value in reference_coefficients(M):
            lines.append(f"        '{mpmath.nstr(value, PINNED_DIGITS, strip_zeros=False)}',")
        lines.append('    ),')
    lines.append('}')
    return '\n'.join(lines)


def check(table):
    """Largest deviation of the pinned literals from a fresh factorization"""
    worst = mpmath.mpf(0)
    for M, pinned in sorted(table.items()):
        reference = reference_coefficients(M)
        if len(pinned) != len(reference):
            print(f"daubechies{M}: {len(pinned)} literals, expected {len(reference)}")
            return None
        with mpmath.workdps(DIGITS):
            deviation = max(abs(mpmath.mpf(c) - r) for c, r in zip(pinned, reference))
        worst = max(worst, deviation)
        print(f"daubechies{M}: N={len(pinned) - 1}, max deviation {mpmath.nstr(deviation, 3)}")
    return worst


def main():
    from services.mask_service import DAUBECHIES_ORDERS, DAUBECHIES_TABLE

    orders = [M for M in DAUBECHIES_ORDERS if M > 1]
    if '--check' not in sys.argv[1:]:
        print(table_block(orders))
        return

    worst = check(DAUBECHIES_TABLE)
    if worst is None or worst > CHECK_TOLERANCE or sorted(DAUBECHIES_TABLE) != orders:
        print("Pinned table is out of date; paste the output of this script without --check")
        sys.exit(1)
    print(f"\nWorst deviation {mpmath.nstr(worst, 3)}")


if __name__ == '__main__':
    main()
