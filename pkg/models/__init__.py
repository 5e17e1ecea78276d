from .mask import Mask
from .two_scale import TwoScalePair
from .dyadic import DyadicPoint, ONE
from .vectors import CoefVector, PhiVector
from .grid_set import GridSet
from .reports import SearchResult, Certificate, MzEntry, MzReport
from .expansion import (
    Gramian, Projection, SamplingGrid, ExpansionSequence, SquareFunction, TestFunction
)

__all__ = [
    'Mask',
    'TwoScalePair',
    'DyadicPoint',
    'ONE',
    'CoefVector',
    'PhiVector',
    'GridSet',
    'SearchResult',
    'Certificate',
    'MzEntry',
    'MzReport',
    'Gramian',
    'Projection',
    'SamplingGrid',
    'ExpansionSequence',
    'SquareFunction',
    'TestFunction'
]
