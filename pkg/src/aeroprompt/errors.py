"""Exception hierarchy shared across the package."""


class AeropromptError(Exception):
    """Base class for all package errors."""


# --- geometry ---

class EmptyMesh(AeropromptError):
    """No valid face remains after mesh validation."""


class ZeroProjection(AeropromptError):
    """Projected bounding rectangle has zero area."""


class DegenerateBaseline(AeropromptError):
    """Baseline set has zero drag span or zero frontal-area variance."""


# --- lexicon ---

class ParseError(AeropromptError):
    """Taxonomy or vocabulary document is malformed."""


class CycleDetected(ParseError):
    """A taxonomy node's parent chain never reaches the root."""


class MissingRoot(ParseError):
    """Taxonomy does not have exactly one root node."""


class UnknownWord(AeropromptError):
    """Word not present in the taxonomy lemma index."""


# --- optimizer ---

class BadConfig(AeropromptError):
    """Optimizer configuration violates its invariants."""


class WrongPopulationSize(AeropromptError):
    """tell() received a population inconsistent with the strategy mode."""


class CovarianceDegenerate(AeropromptError):
    """Covariance matrix lost positive-definiteness or finiteness."""


# --- backends ---

class GenerationFailed(AeropromptError):
    """Shape generator returned an error, timed out, or produced unreadable geometry."""


class EvaluationFailed(AeropromptError):
    """Performance evaluator diverged, timed out, or returned an error."""


# --- cli / config ---

class ConfigError(AeropromptError):
    """Run configuration file is missing, malformed, or fails schema validation."""
