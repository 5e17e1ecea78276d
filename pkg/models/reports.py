from dataclasses import dataclass, field

from utils.helpers import word_to_string


@dataclass(frozen=True)
class SearchResult:
    """Outcome of an annihilation search over digit words"""
    found: bool
    word: tuple
    min_norm: float
    min_word: tuple
    depth: int
    states_explored: int
    exact: bool

    def to_dict(self):
        return {
            'found': self.found,
            'word': word_to_string(self.word) if self.found else None,
            'min_norm': float(self.min_norm),
            'min_word': word_to_string(self.min_word),
            'depth': self.depth,
            'states_explored': self.states_explored,
            'exact': self.exact,
        }


@dataclass(frozen=True)
class Certificate:
    """Finite-depth never-zero certificate: min over words of ||P_w c||_2"""
    positive: bool
    min_norm: float
    arg_word: tuple
    depth: int
    threshold: float
    states_explored: int
    exact: bool

    def to_dict(self):
        return {
            'positive': self.positive,
            'min_norm': float(self.min_norm),
            'arg_word': word_to_string(self.arg_word),
            'depth': self.depth,
            'threshold': self.threshold,
            'states_explored': self.states_explored,
            'exact': self.exact,
        }


@dataclass(frozen=True)
class MzEntry:
    """One row of an M-Z report: a set E (or a measure delta) and its constants"""
    label: str
    C: float
    argmin: tuple
    B: float
    lower_bound: float = None
    delta: float = None

    def to_dict(self):
        return {
            'label': self.label,
            'delta': self.delta,
            'C': float(self.C),
            'C_kind': 'upper bound on the infimum',
            'argmin': [float(v) for v in self.argmin],
            'B': float(self.B),
            'certified_lower_bound': None if self.lower_bound is None else float(self.lower_bound),
        }


@dataclass
class MzReport:
    mask: str
    normalization: str
    B: float
    resolution: int
    multistarts: int
    seed: int
    entries: list = field(default_factory=list)
    bridge: list = field(default_factory=list)

    def C_values(self):
        return [entry.C for entry in self.entries]

    def to_dict(self):
        return {
            'mask': self.mask,
            'normalization': self.normalization,
            'B': float(self.B),
            'resolution': self.resolution,
            'optimizer': {'multistarts': self.multistarts, 'seed': self.seed},
            'entries': [entry.to_dict() for entry in self.entries],
            'bridge': self.bridge,
        }
