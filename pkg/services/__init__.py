from .worker_pool import worker_pool
from .mask_service import mask_service
from .eval_service import eval_service
from .independence_service import independence_service
from .mz_service import mz_service
from .expansion_service import expansion_service

__all__ = [
    'worker_pool',
    'mask_service',
    'eval_service',
    'independence_service',
    'mz_service',
    'expansion_service'
]
