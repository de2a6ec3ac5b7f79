"""Exception types raised across the package."""


class VoxlateError(Exception):
    """Base class for all package errors."""


# audio / files
class FileMissing(VoxlateError, FileNotFoundError):
    pass


class UnsupportedEncoding(VoxlateError, ValueError):
    pass


class CorruptHeader(VoxlateError, ValueError):
    pass


class DuplicateClipId(VoxlateError, ValueError):
    pass


class MalformedRow(VoxlateError, ValueError):
    pass


class InvalidParams(VoxlateError, ValueError):
    pass


# sentiment
class EmptyLexicon(VoxlateError, ValueError):
    pass


class OutOfRange(VoxlateError, ValueError):
    pass


class TranscriptMissing(VoxlateError, LookupError):
    pass


# behavior
class LengthMismatch(VoxlateError, ValueError):
    pass


class ZeroVariance(VoxlateError, ValueError):
    pass


class EmptyCohort(VoxlateError, ValueError):
    pass


# corpus
class LineCountMismatch(VoxlateError, ValueError):
    def __init__(self, n_src, n_tgt):
        super().__init__(f"source has {n_src} lines, target has {n_tgt}")
        self.n_src = n_src
        self.n_tgt = n_tgt


class EmptyInput(VoxlateError, ValueError):
    pass


class SequenceTooLong(VoxlateError, ValueError):
    pass


class InvalidRatio(VoxlateError, ValueError):
    pass


# neural / models
class ShapeMismatch(VoxlateError, ValueError):
    pass


class IndexOutOfRange(VoxlateError, IndexError):
    pass


class NonFiniteError(VoxlateError, FloatingPointError):
    pass


class NonFiniteLoss(NonFiniteError):
    def __init__(self, epoch, batch, value):
        super().__init__(f"non-finite loss {value!r} at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


class InvalidSpec(VoxlateError, ValueError):
    pass


class InvalidConfig(VoxlateError, ValueError):
    pass


class VersionMismatch(VoxlateError, ValueError):
    pass


class CheckpointIOError(VoxlateError, OSError):
    pass


# evaluation
class EmptyHypothesis(VoxlateError, ValueError):
    pass


class EmptyReference(VoxlateError, ValueError):
    pass


class MismatchedTestSets(VoxlateError, ValueError):
    pass
