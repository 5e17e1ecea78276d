from dataclasses import dataclass
from fractions import Fraction

from utils.helpers import dyadic_exponent


@dataclass(frozen=True)
class DyadicPoint:
    """A point of [0, 1] given by its binary digits

    x = sum_k digits[k-1] 2^-k in the terminating form; x = 1 is the
    distinguished token ONE (the all-ones sequence, fixed by the shift).
    """
    digits: tuple = ()
    is_one: bool = False

    def __post_init__(self):
        if any(d not in (0, 1) for d in self.digits):
            raise ValueError(f"binary digits must be 0 or 1: {self.digits}")
        if self.is_one and self.digits:
            raise ValueError("ONE carries no digits")

    @classmethod
    def from_value(cls, x, max_digits=None):
        """Exact conversion of a dyadic rational in [0, 1]

        Returns None when x is not dyadic or needs more than max_digits digits.
        """
        q = Fraction(x)
        if q < 0 or q > 1:
            raise ValueError(f"point must lie in [0, 1]: {x}")
        if q == 1:
            return ONE
        m = dyadic_exponent(q)
        if m is None or (max_digits is not None and m > max_digits):
            return None
        return cls.from_index(q.numerator, m)

    @classmethod
    def from_index(cls, k, m):
        """The point k / 2^m for 0 <= k <= 2^m"""
        if k == 1 << m:
            return ONE
        if not 0 <= k < 1 << m:
            raise ValueError(f"index {k} out of range for depth {m}")
        return cls(tuple((k >> (m - 1 - i)) & 1 for i in range(m)))

    @classmethod
    def bracket(cls, x, m):
        """Dyadic endpoints of the cell of width 2^-m containing x"""
        q = Fraction(x)
        k = min(int(q * (1 << m)), (1 << m) - 1)
        return cls.from_index(k, m), cls.from_index(k + 1, m)

    @property
    def value(self):
        if self.is_one:
            return Fraction(1)
        return sum((Fraction(d, 1 << (i + 1)) for i, d in enumerate(self.digits)), Fraction(0))

    @property
    def depth(self):
        return len(self.digits)

    def shift(self):
        """Drop the first digit (the doubling map); ONE stays ONE"""
        if self.is_one:
            return self
        return DyadicPoint(self.digits[1:])

    def trimmed(self):
        """Canonical form without trailing zeros"""
        digits = self.digits
        while digits and digits[-1] == 0:
            digits = digits[:-1]
        return DyadicPoint(digits, self.is_one)

    def all_ones_tail(self):
        """Prefix of the second binary representation, continued by all ones

        0.e1...e_{m-1}1 equals 0.e1...e_{m-1}0111...; returns (e1, ..., e_{m-1}, 0)
        or None when the point has no second representation (0 and ONE).
        """
        point = self.trimmed()
        if point.is_one or not point.digits:
            return None
        return point.digits[:-1] + (0,)

    def __str__(self):
        if self.is_one:
            return 'ONE'
        return '0.' + (''.join(str(d) for d in self.digits) or '0')


ONE = DyadicPoint(is_one=True)
