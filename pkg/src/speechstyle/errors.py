"""Exception types shared across the package."""


class SpeechStyleError(Exception):
    """Base class for every error raised by this package."""


class UnsupportedRate(SpeechStyleError):
    """Sample rate is not one of the supported rates."""


class RateMismatch(SpeechStyleError):
    """Corpus mixes audio files with different sample rates."""


class ClipTooShort(SpeechStyleError):
    """Clip has fewer samples than a single analysis window."""


class DimensionMismatch(SpeechStyleError):
    """Two feature tracks disagree on coefficients per frame."""


class ConfigMismatch(SpeechStyleError):
    """Feature bundles were extracted with different frame configs."""


class EmptyCell(SpeechStyleError):
    """A (prompt, group) cell contains no utterances."""


class MissingCell(SpeechStyleError):
    """The corpus has no utterances for a required (prompt, group) cell."""


class MissingLabel(SpeechStyleError):
    """A manifest row lacks the group label required by the operation."""


class EmptyResults(SpeechStyleError):
    """Speaker aggregation was asked to vote over zero utterance results."""


class UnknownPrompt(SpeechStyleError):
    """Prompt index is not covered by the reference set."""


class ParseError(SpeechStyleError):
    """A manifest, label file, or model file is malformed."""


class RankOutOfRange(SpeechStyleError):
    """A prompt index or group rank lies outside the declared range."""


class SubjectMismatch(SpeechStyleError):
    """Two label vectors do not cover the same subject ids."""


class CellTooSmall(SpeechStyleError):
    """A (prompt, group) cell has too few speakers to split."""
