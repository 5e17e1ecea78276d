from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import toeplitz


@dataclass(frozen=True, eq=False)
class Gramian:
    """g_k = integral of phi(x) phi(x+k) for |k| <= N-1

    values[i] holds g_{i-(N-1)}, so the array is symmetric about its middle.
    """
    mask: object
    values: tuple

    @property
    def half_width(self):
        return (len(self.values) - 1) // 2

    def g(self, k):
        k = abs(k)
        if k > self.half_width:
            return 0.0 * self.values[0]
        return self.values[self.half_width + k]

    def as_array(self):
        return np.asarray([float(v) for v in self.values], dtype=float)

    def section(self, size=None):
        """Toeplitz section of the Gram matrix"""
        size = size or len(self.values)
        column = np.zeros(size)
        width = min(size, self.half_width + 1)
        column[:width] = [float(self.g(k)) for k in range(width)]
        return toeplitz(column)

    def to_dict(self):
        return {
            'mask': self.mask.name,
            'g': {str(k): float(self.g(k)) for k in range(-self.half_width, self.half_width + 1)},
        }


@dataclass(frozen=True, eq=False)
class Projection:
    """Coefficients of P_j f in the basis 2^{j/2} phi(2^j x - k), k = k_min.."""
    level: int
    k_min: int
    coefficients: np.ndarray

    @property
    def k_max(self):
        return self.k_min + len(self.coefficients) - 1

    def coefficient(self, k):
        i = k - self.k_min
        if 0 <= i < len(self.coefficients):
            return float(self.coefficients[i])
        return 0.0


@dataclass(frozen=True)
class SamplingGrid:
    """Midpoints of the 2^-resolution cells of a window [lo, hi] with integer ends"""
    lo: int
    hi: int
    resolution: int

    @property
    def step(self):
        return 2.0 ** -self.resolution

    @property
    def size(self):
        return (self.hi - self.lo) << self.resolution

    def points(self):
        return self.lo + (np.arange(self.size) + 0.5) * self.step

    def to_dict(self):
        return {'window': [self.lo, self.hi], 'resolution': self.resolution}


@dataclass(eq=False)
class ExpansionSequence:
    """Levels f_0..f_J of a multiresolution expansion sampled on one grid

    values[j] holds f_j at the grid midpoints; projections[j] holds a_{j,k}.
    """
    mask: object
    grid: SamplingGrid
    projections: list
    values: np.ndarray
    source: str = ''
    consistency: list = field(default_factory=list)

    @property
    def levels(self):
        return len(self.projections) - 1

    def increments(self):
        """f_{j+1} - f_j for j = 0..J-1"""
        return np.diff(self.values, axis=0)


@dataclass(frozen=True, eq=False)
class SquareFunction:
    """Running square function S_j and maximal function f*_j, j = 0..J"""
    S: np.ndarray
    fstar: np.ndarray

    @property
    def S_final(self):
        return self.S[-1]

    @property
    def fstar_final(self):
        return self.fstar[-1]


@dataclass(frozen=True)
class TestFunction:
    """A function from the jump:c | tent:c | sin:k | poly:a0,a1,... grammar

    jump:c is the indicator of [0, c), tent:c the hat max(0, 1 - |x - c|),
    sin:k is sin(2 pi k x) on [0, 1] and zero elsewhere, poly:a0,a1,... is
    a0 + a1 x + ... everywhere.
    """
    __test__ = False

    kind: str
    params: tuple
    expr: str = ''

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == 'jump':
            return ((x >= 0.0) & (x < self.params[0])).astype(float)
        if self.kind == 'tent':
            return np.maximum(0.0, 1.0 - np.abs(x - self.params[0]))
        if self.kind == 'sin':
            inside = (x >= 0.0) & (x <= 1.0)
            return np.where(inside, np.sin(2.0 * np.pi * self.params[0] * x), 0.0)
        return np.polynomial.polynomial.polyval(x, self.params)

    def support(self):
        """Bounds outside which the function vanishes (None for polynomials)"""
        if self.kind == 'jump':
            return (0.0, self.params[0])
        if self.kind == 'tent':
            return (self.params[0] - 1.0, self.params[0] + 1.0)
        if self.kind == 'sin':
            return (0.0, 1.0)
        return None

    def default_window(self):
        """Integer window holding the support with one unit of margin"""
        support = self.support()
        if support is None:
            return (0, 1)
        return (int(np.floor(support[0])) - 1, int(np.ceil(support[1])) + 1)
