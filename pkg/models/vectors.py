import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from utils.helpers import exact_sqrt, is_exact, parse_scalar


@dataclass(frozen=True)
class CoefVector:
    """Coefficients c_0..c_{N-1} of a combination of translates"""
    components: tuple

    @classmethod
    def of(cls, values, exact=None):
        """Build from numbers or strings; exact mode when every entry is rational"""
        parsed = [parse_scalar(v, exact) if isinstance(v, str) else v for v in values]
        if exact is None:
            exact = all(is_exact(v) for v in parsed)
        if exact:
            return cls(tuple(Fraction(v) for v in parsed))
        return cls(tuple(float(v) for v in parsed))

    @classmethod
    def parse(cls, text, exact=None):
        """Parse "1,-1,0" style input"""
        return cls.of([part for part in text.split(',') if part.strip()], exact)

    @property
    def N(self):
        return len(self.components)

    @property
    def exact(self):
        return all(is_exact(v) for v in self.components)

    @cached_property
    def l1(self):
        return sum((abs(v) for v in self.components), Fraction(0) if self.exact else 0.0)

    @cached_property
    def l2_squared(self):
        return sum((v * v for v in self.components), Fraction(0) if self.exact else 0.0)

    @cached_property
    def l2(self):
        if self.exact:
            return exact_sqrt(self.l2_squared)
        return math.sqrt(self.l2_squared)

    @property
    def is_zero(self):
        return all(v == 0 for v in self.components)

    def as_array(self):
        if self.exact:
            arr = np.empty(self.N, dtype=object)
            arr[:] = list(self.components)
            return arr
        return np.asarray(self.components, dtype=float)

    def normalized(self):
        """c / ||c||_2; stays exact when the norm is rational"""
        norm = self.l2
        if isinstance(norm, Fraction):
            return CoefVector(tuple(v / norm for v in self.components))
        return CoefVector(tuple(float(v) / norm for v in self.components))

    def fitted_to(self, N):
        """Drop zero entries past index N - 1; phi(x + n) vanishes on [0, 1] for n >= N"""
        components = self.components
        while len(components) > N and components[-1] == 0:
            components = components[:-1]
        return CoefVector(components)

    def to_list(self):
        return [float(v) for v in self.components]

    def __repr__(self):
        return f'<CoefVector {self.to_list()}>'


@dataclass(frozen=True)
class PhiVector:
    """Phi(x) = (phi(x), phi(x+1), ..., phi(x+N-1)) at a point of [0, 1]

    radius is the uncertainty radius: 0 for dyadic points evaluated exactly,
    half the componentwise endpoint spread for enclosures.
    """
    values: tuple
    x: object
    radius: float = 0.0
    depth: int = 0

    @property
    def N(self):
        return len(self.values)

    @property
    def exact(self):
        return self.radius == 0 and all(is_exact(v) for v in self.values)

    def total(self):
        return sum(self.values, Fraction(0) if self.exact else 0.0)

    def as_array(self):
        return np.asarray([float(v) for v in self.values], dtype=float)

    def to_dict(self):
        return {
            'x': float(self.x),
            'phi': [float(v) for v in self.values],
            'uncertainty_radius': float(self.radius),
        }
