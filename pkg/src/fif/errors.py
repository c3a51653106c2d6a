"""Exception hierarchy.

Every error raised by the library derives from :class:`FIFError`; most are
also ``ValueError`` so generic callers can catch them the usual way.
"""


class FIFError(Exception):
    pass


class _Value(FIFError, ValueError):
    pass


# construction / validation
class NonIncreasingNodes(_Value): pass
class ScalingOutOfRange(_Value): pass
class LengthMismatch(_Value): pass
class NotContractive(_Value): pass
class NotInvertibleInY(_Value): pass
class BranchOutOfRange(_Value, IndexError): pass
class OutsideValidityStrip(_Value): pass
class NotMonotone(_Value): pass
class DerivativeVanishes(_Value): pass
class ConditionUnattainable(_Value): pass
class DegenerateInterval(_Value): pass

# attractor
class GridMismatch(_Value): pass
class OutOfDomain(_Value): pass
class EmptyCloud(_Value): pass

# continuation
class AddressSyntaxError(FIFError, SyntaxError, ValueError): pass
class SymbolOutOfRange(_Value): pass
class EmptyPeriodParens(AddressSyntaxError): pass
class OutOfDomainAtCap(_Value): pass
class NonAffineUnsupported(_Value): pass
class EnsembleTooLarge(_Value): pass
class UnsupportedBranchCount(_Value): pass

# analysis
class DoublePoint(_Value): pass
class HypothesisViolated(_Value): pass
class ConditionViolated(_Value): pass
class TooFewPoints(_Value): pass
class TooFewScales(_Value): pass
class AttractorsDiffer(_Value): pass

# registry
class UnknownExample(_Value, KeyError): pass
class ParamOutOfRange(_Value): pass
class NoOracle(_Value): pass
class OutOfOracleDomain(_Value): pass

# rendering / io
class WindowDegenerate(_Value): pass
class ConfigError(_Value): pass
class InterpolationConditions(_Value): pass
class AddressTooShort(_Value): pass
class IoError(FIFError, OSError): pass
