"""Semantic exception hierarchy.

Every failure mode of the library raises a subclass of :class:`MbhdError`,
so callers (and the CLI) can convert any library error into a structured
report without string matching.
"""


class MbhdError(Exception):
    """Base class for all library errors."""

    code = "error"

    def payload(self) -> dict:
        return {"error": self.code, "message": str(self)}


class DimensionTooLarge(MbhdError):
    code = "dimension-too-large"


class NotNormalized(MbhdError):
    code = "not-normalized"


class NegativeProbability(MbhdError):
    code = "negative-probability"


class DegenerateMarginal(MbhdError):
    code = "degenerate-marginal"


class InvalidCorrelation(MbhdError):
    code = "invalid-correlation"


class OutOfFGMRange(MbhdError):
    code = "out-of-fgm-range"


class ZeroMarginal(MbhdError):
    code = "zero-marginal"


class NotFullSupport(MbhdError):
    code = "not-full-support"


class CollapsedSupport(MbhdError):
    code = "collapsed-support"


class IllConditioned(MbhdError):
    code = "ill-conditioned"


class ZeroNorm(MbhdError):
    code = "zero-norm"


class ZeroVariance(MbhdError):
    code = "zero-variance"


class UnidentifiableCoefficient(MbhdError):
    code = "unidentifiable-coefficient"


class OffSupportSample(MbhdError):
    code = "off-support-sample"


class InsufficientSamples(MbhdError):
    code = "insufficient-samples"


class EpsOutOfRange(MbhdError):
    code = "eps-out-of-range"


class ArityMismatch(MbhdError):
    code = "arity-mismatch"


class MissingColumn(MbhdError):
    code = "missing-column"


class NonBinaryPredicateResult(MbhdError):
    code = "non-binary-predicate-result"


class DatasetMissing(MbhdError):
    code = "dataset-missing"
