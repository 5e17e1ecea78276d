import logging
import sys
import time
from functools import wraps

import click

from .errors import RefineKitError
from .helpers import dumps_deterministic

logger = logging.getLogger(__name__)


def handle_exceptions(f):
    """Decorator to map library errors in CLI commands to exit codes

    ValidationError exits with 2, NumericError with 3. The diagnostic is
    written to stderr as one JSON document.
    """
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except RefineKitError as e:
            logger.error(f"{f.__name__} failed: {e.code}: {e.message}")
            click.echo(dumps_deterministic({'error': e.to_dict()}), err=True, nl=False)
            sys.exit(e.exit_code)
        except (ValueError, OSError) as e:
            logger.error(f"{f.__name__} failed: {e}")
            click.echo(dumps_deterministic({'error': {'code': type(e).__name__, 'message': str(e)}}),
                       err=True, nl=False)
            sys.exit(2)
    return decorated_function


def log_duration(f):
    """Decorator to log the elapsed time of a service operation"""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        start = time.perf_counter()
        result = f(*args, **kwargs)
        elapsed = time.perf_counter() - start
        logging.getLogger(f.__module__).debug(f"{f.__qualname__} finished in {elapsed:.3f}s")
        return result
    return decorated_function
