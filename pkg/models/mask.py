from dataclasses import dataclass, field
from fractions import Fraction

from utils.helpers import format_scalar, is_exact


@dataclass(frozen=True)
class Mask:
    """Dilation mask p_0..p_N of a scale function

    Stored convention: phi(x) = sum_k p_k phi(2x - k), the same equation as
    phi(x/2) = sum_k p_k phi(x - k). Coefficients are all Fractions (exact
    mode) or all floats (float mode).
    """
    name: str
    coeffs: tuple
    warnings: tuple = field(default=())

    @property
    def N(self):
        return len(self.coeffs) - 1

    @property
    def exact(self):
        return all(is_exact(c) for c in self.coeffs)

    @property
    def zero(self):
        return Fraction(0) if self.exact else 0.0

    @property
    def one(self):
        return Fraction(1) if self.exact else 1.0

    def coefficient(self, j):
        """p_j, with p_j = 0 outside 0..N"""
        if 0 <= j <= self.N:
            return self.coeffs[j]
        return self.zero

    @property
    def even_sum(self):
        return sum(self.coeffs[0::2], self.zero)

    @property
    def odd_sum(self):
        return sum(self.coeffs[1::2], self.zero)

    @property
    def satisfies_sum_rule(self):
        return 'SumRuleViolated' not in self.warnings

    @property
    def continuity_capable(self):
        return not self.warnings

    def as_float(self):
        """Float-mode copy of this mask"""
        return Mask(self.name, tuple(float(c) for c in self.coeffs), self.warnings)

    def to_dict(self):
        return {
            'name': self.name,
            'N': self.N,
            'coeffs': [format_scalar(c) for c in self.coeffs],
            'exact': self.exact,
            'warnings': list(self.warnings),
        }

    def __repr__(self):
        mode = 'exact' if self.exact else 'float'
        return f'<Mask {self.name}: N={self.N} ({mode})>'
