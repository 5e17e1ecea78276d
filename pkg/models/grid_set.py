from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class GridSet:
    """A subset of [0, 1] approximated by the 2^r dyadic cells of resolution r

    cells[i] marks the cell [i 2^-r, (i+1) 2^-r); the measure is
    popcount * 2^-r. The set is only meaningful at its own resolution.
    """
    resolution: int
    cells: np.ndarray

    def __post_init__(self):
        cells = np.array(self.cells, dtype=bool)
        if cells.shape != (1 << self.resolution,):
            raise ValueError(f"expected {1 << self.resolution} cells, got {cells.shape}")
        cells.flags.writeable = False
        object.__setattr__(self, 'cells', cells)

    @classmethod
    def full(cls, resolution):
        return cls(resolution, np.ones(1 << resolution, dtype=bool))

    @classmethod
    def empty(cls, resolution):
        return cls(resolution, np.zeros(1 << resolution, dtype=bool))

    @classmethod
    def from_interval(cls, lo, hi, resolution):
        """Cells whose midpoint lies in [lo, hi)"""
        mids = cls.midpoints_for(resolution)
        return cls(resolution, (mids >= lo) & (mids < hi))

    @classmethod
    def from_mask(cls, mask, resolution=None):
        """Set from a boolean cell array; the resolution is inferred from its length"""
        mask = np.asarray(mask, dtype=bool)
        if resolution is None:
            resolution = int(mask.size).bit_length() - 1
        return cls(resolution, mask)

    @classmethod
    def alternating(cls, resolution, start=0):
        cells = np.zeros(1 << resolution, dtype=bool)
        cells[start::2] = True
        return cls(resolution, cells)

    @classmethod
    def random(cls, resolution, measure, rng):
        """Uniformly random set with exactly round(measure 2^r) cells"""
        size = 1 << resolution
        count = int(round(measure * size))
        cells = np.zeros(size, dtype=bool)
        cells[rng.permutation(size)[:count]] = True
        return cls(resolution, cells)

    @staticmethod
    def midpoints_for(resolution):
        size = 1 << resolution
        return (np.arange(size) + 0.5) / size

    @property
    def size(self):
        return self.cells.size

    @property
    def count(self):
        return int(np.count_nonzero(self.cells))

    @property
    def measure(self):
        return self.count / self.size

    @property
    def is_empty(self):
        return self.count == 0

    def midpoints(self):
        """Midpoints of the member cells"""
        return self.midpoints_for(self.resolution)[self.cells]

    def indices(self):
        return np.flatnonzero(self.cells)

    def densities(self, depth):
        """Relative measure of the set in each of the 2^depth cells of that depth"""
        if not 0 <= depth <= self.resolution:
            raise ValueError(f"depth must lie in 0..{self.resolution}")
        return self.cells.reshape(1 << depth, -1).mean(axis=1)

    def density(self, word):
        """m(K cap I_word) / |I_word|"""
        depth = len(word)
        index = int(''.join(str(d) for d in word) or '0', 2)
        return float(self.densities(depth)[index])

    def _check(self, other):
        if other.resolution != self.resolution:
            raise ValueError("grid sets must share a resolution")

    def union(self, other):
        self._check(other)
        return GridSet(self.resolution, self.cells | other.cells)

    def intersection(self, other):
        self._check(other)
        return GridSet(self.resolution, self.cells & other.cells)

    def symmetric_difference(self, other):
        self._check(other)
        return GridSet(self.resolution, self.cells ^ other.cells)

    def issubset(self, other):
        self._check(other)
        return not np.any(self.cells & ~other.cells)

    def to_dict(self):
        return {'resolution': self.resolution, 'measure': self.measure, 'cells': self.count}

    def __repr__(self):
        return f'<GridSet r={self.resolution} measure={self.measure:.6g}>'
