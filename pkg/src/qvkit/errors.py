"""Domain error types shared across the package."""


class QvkitError(Exception):
    """Base class for all domain errors raised by qvkit."""


class NonPositiveStake(QvkitError):
    def __init__(self, voter_id, stake):
        self.voter_id = voter_id
        self.stake = stake
        super().__init__(f"stake for voter {voter_id!r} must be > 0, got {stake}")


class DuplicateVoter(QvkitError):
    def __init__(self, voter_id):
        self.voter_id = voter_id
        super().__init__(f"duplicate voter id {voter_id!r}")


class InvalidSpec(QvkitError):
    pass


class GammaOutOfRange(QvkitError):
    def __init__(self, gamma, lo=0.0, hi=1.0):
        self.gamma = gamma
        super().__init__(f"gamma must be in ({lo}, {hi}], got {gamma}")


class LengthMismatch(QvkitError):
    def __init__(self, expected, actual, what="vector"):
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what} length mismatch: expected {expected}, got {actual}")


class NonPositiveCount(QvkitError):
    def __init__(self, index, count):
        self.index = index
        self.count = count
        super().__init__(f"count at index {index} must be >= 1, got {count}")


class Unsorted(QvkitError):
    pass


class AllZero(QvkitError):
    pass


class ThresholdOutOfRange(QvkitError):
    def __init__(self, a):
        self.a = a
        super().__init__(f"threshold must be in (0, 1), got {a}")


class KOutOfRange(QvkitError):
    def __init__(self, k, n):
        self.k = k
        self.n = n
        super().__init__(f"k must be in [1, {n}], got {k}")


class TargetBelowFloor(QvkitError):
    def __init__(self, alpha, floor):
        self.alpha = alpha
        self.floor = floor
        super().__init__(
            f"target share {alpha} is unreachable: the gamma -> 0 limit is {floor}"
        )


class NoConvergence(QvkitError):
    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)


class CreditMismatch(QvkitError):
    def __init__(self, expected, actual):
        self.expected = expected
        self.actual = actual
        super().__init__(f"credit mismatch: expected {expected}, got {actual}")


class IllegalEntry(QvkitError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"illegal ballot entry at index {index}: {value}")


class NegativeUnderYesAbstain(QvkitError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(
            f"negative allocation {value} at index {index} under yes-abstain polarity"
        )


class UnknownVoter(QvkitError):
    def __init__(self, voter_id):
        self.voter_id = voter_id
        super().__init__(f"ballot from unknown voter {voter_id!r}")


class InvalidBallot(QvkitError):
    def __init__(self, voter_id, cause):
        self.voter_id = voter_id
        self.cause = cause
        super().__init__(f"invalid ballot from {voter_id!r}: {cause}")


class AlignedExceedsTotal(QvkitError):
    def __init__(self, index, aligned, total):
        self.index = index
        super().__init__(
            f"aligned mass {aligned} exceeds total mass {total} at index {index}"
        )


class DegenerateDenominator(QvkitError):
    def __init__(self, index=None):
        self.index = index
        where = "" if index is None else f" at index {index}"
        super().__init__(f"success probability undefined (s_r = b_r = 0){where}")


class DimensionTooLarge(QvkitError):
    def __init__(self, m, limit):
        self.m = m
        super().__init__(f"oracle supports at most {limit} proposals, got {m}")


class InfeasibleSolution(QvkitError):
    pass


class ParseError(QvkitError):
    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")
