"""Error types shared by every service.

Validation errors map to CLI exit code 2, numeric failures to exit code 3.
Each error carries a machine-readable ``code`` and a ``details`` dict.
"""


class RefineKitError(Exception):
    """Base error with a machine-readable code"""
    code = 'RefineKitError'
    exit_code = 1

    def __init__(self, message='', **details):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.details = details

    def to_dict(self):
        return {'code': self.code, 'message': self.message, **self.details}


class ValidationError(RefineKitError):
    exit_code = 2


class NumericError(RefineKitError):
    exit_code = 3


# Validation failures

class EmptyMask(ValidationError):
    code = 'EmptyMask'


class SumNotTwo(ValidationError):
    code = 'SumNotTwo'


class ZeroEndpoint(ValidationError):
    code = 'ZeroEndpoint'


class MaskValidationError(ValidationError):
    """Raised with every violated invariant of a raw mask"""
    code = 'MaskValidationError'

    def __init__(self, diagnostics, name=None):
        codes = ', '.join(d['code'] for d in diagnostics)
        super().__init__(f"Invalid mask {name!r}: {codes}", name=name)
        self.diagnostics = diagnostics

    def to_dict(self):
        data = super().to_dict()
        data['diagnostics'] = self.diagnostics
        return data


class UnsupportedOrder(ValidationError):
    code = 'UnsupportedOrder'


class DegenerateN(ValidationError):
    code = 'DegenerateN'


class DimensionMismatch(ValidationError):
    code = 'DimensionMismatch'


class ZeroVector(ValidationError):
    code = 'ZeroVector'


class InvalidDelta(ValidationError):
    code = 'InvalidDelta'


class EmptySet(ValidationError):
    code = 'EmptySet'


class ResolutionTooCoarse(ValidationError):
    code = 'ResolutionTooCoarse'


class InvalidExpression(ValidationError):
    code = 'InvalidExpression'


class MaskFileError(ValidationError):
    code = 'MaskFileError'


# Numeric failures

class NonSimpleEigenvalue(NumericError):
    code = 'NonSimpleEigenvalue'


class NoUnitEigenvalue(NumericError):
    code = 'NoUnitEigenvalue'


class SumRuleRequired(NumericError):
    code = 'SumRuleRequired'


class ToleranceNotReached(NumericError):
    code = 'ToleranceNotReached'


class AnnihilatedVector(NumericError):
    code = 'AnnihilatedVector'


class SearchBudgetExceeded(NumericError):
    code = 'SearchBudgetExceeded'


class SingularGramian(NumericError):
    code = 'SingularGramian'


class IntervalNotFound(NumericError):
    code = 'NotFound'


class InconsistentSequence(NumericError):
    code = 'InconsistentSequence'
