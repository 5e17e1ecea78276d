from .helpers import (
    parse_scalar, format_scalar, is_exact, exact_sqrt, dyadic_exponent,
    json_default, dumps_deterministic, word_to_string, unit_multiplicity
)

from .decorators import handle_exceptions, log_duration

__all__ = [
    # Helpers
    'parse_scalar', 'format_scalar', 'is_exact', 'exact_sqrt', 'dyadic_exponent',
    'json_default', 'dumps_deterministic', 'word_to_string', 'unit_multiplicity',

    # Decorators
    'handle_exceptions', 'log_duration'
]
