import json
import math
import re
from fractions import Fraction

import numpy as np
import sympy

_RATIONAL_RE = re.compile(r'^\s*[+-]?\d+\s*(/\s*\d+\s*)?$')


def parse_scalar(text, exact=None):
    """Parse a coefficient string

    Args:
        text (str): "a/b", an integer or a decimal string
        exact (bool): force exact (True) or float (False); None decides from
            the syntax (rational and integer strings are exact)

    Returns:
        Fraction or float
    """
    if isinstance(text, (Fraction, int)) and not isinstance(text, bool):
        return Fraction(text) if exact is not False else float(text)
    if isinstance(text, float):
        return Fraction(text) if exact else text
    text = str(text).strip()
    if not text:
        raise ValueError("empty coefficient")
    if exact is None:
        exact = bool(_RATIONAL_RE.match(text))
    if exact:
        return Fraction(text.replace(' ', ''))
    return float(Fraction(text)) if '/' in text else float(text)


def format_scalar(value):
    """Format a scalar for mask files: "a/b" for rationals, repr for floats"""
    if isinstance(value, Fraction):
        return str(value)
    return repr(float(value))


def is_exact(value):
    return isinstance(value, (Fraction, int)) and not isinstance(value, bool)


def exact_sqrt(value):
    """Square root of a non-negative Fraction, exact when it is a rational square"""
    value = Fraction(value)
    num, den = value.numerator, value.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return math.sqrt(value)


def dyadic_exponent(value):
    """Return m when value = k / 2**m in lowest terms, otherwise None"""
    den = Fraction(value).denominator
    if den & (den - 1):
        return None
    return den.bit_length() - 1


def json_default(value):
    """json.dumps default hook for numpy scalars, arrays and Fractions"""
    if isinstance(value, Fraction):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps_deterministic(data):
    """Serialize to JSON with sorted keys so identical input gives identical bytes"""
    return json.dumps(data, default=json_default, sort_keys=True, indent=2) + '\n'


def word_to_string(word):
    return ''.join(str(d) for d in word)


def unit_multiplicity(matrix):
    """Algebraic multiplicity of the eigenvalue 1 of a rational sympy matrix"""
    lam = sympy.Symbol('lam')
    poly = sympy.Poly(matrix.charpoly(lam).as_expr(), lam)
    divisor = sympy.Poly(lam - 1, lam)
    count = 0
    while not poly.is_zero and poly.eval(1) == 0:
        poly = poly.quo(divisor)
        count += 1
    return count
