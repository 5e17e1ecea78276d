from dataclasses import dataclass

import numpy as np

from utils.helpers import format_scalar


@dataclass(frozen=True, eq=False)
class TwoScalePair:
    """The N x N matrices P0, P1 and their shared (N-1) x (N-1) block P

    (P0)[m, k] = p_{2k-m} and (P1)[m, k] = p_{2k-m+1}. Arrays hold Fractions
    (dtype object) for exact masks and float64 otherwise; they are read-only.
    """
    mask: object
    P0: np.ndarray
    P1: np.ndarray
    P_inner: np.ndarray

    def __post_init__(self):
        for arr in (self.P0, self.P1, self.P_inner):
            arr.flags.writeable = False

    @property
    def N(self):
        return self.P0.shape[0]

    @property
    def exact(self):
        return self.P0.dtype == object

    @property
    def p_t(self):
        """First row of P0 without p_0: even coefficients from p_2"""
        return self.P0[0, 1:]

    @property
    def p_b(self):
        """Last row of P1 without p_N: ends with p_{N-2}"""
        return self.P1[-1, :-1]

    def matrix(self, digit):
        return self.P1 if digit else self.P0

    def transposed(self, digit):
        return self.matrix(digit).T

    def as_float(self):
        return TwoScalePair(
            mask=self.mask.as_float(),
            P0=self.P0.astype(float),
            P1=self.P1.astype(float),
            P_inner=self.P_inner.astype(float),
        )

    def to_dict(self):
        def rows(arr):
            return [[format_scalar(v) for v in row] for row in arr]
        return {
            'mask': self.mask.name,
            'N': self.N,
            'P0': rows(self.P0),
            'P1': rows(self.P1),
            'P_inner': rows(self.P_inner),
        }

    def __repr__(self):
        return f'<TwoScalePair {self.mask.name}: N={self.N}>'
