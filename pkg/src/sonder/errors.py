"""Exception hierarchy shared across sonder modules."""


class SonderError(Exception):
    """Base class for all sonder errors."""


class InvalidInput(SonderError):
    pass


class DimensionMismatch(SonderError):
    pass


class DegenerateVector(SonderError):
    pass


class ProviderUnavailable(SonderError):
    pass


class EmptyCorpus(SonderError):
    pass


class DegenerateWeights(SonderError):
    pass


class InvalidLambda(SonderError):
    pass


class ParseError(SonderError):
    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class DuplicateRank(SonderError):
    def __init__(self, message, rank=None):
        super().__init__(message)
        self.rank = rank


class NotFound(SonderError):
    pass


class CorruptStore(SonderError):
    pass


class NoConvergence(SonderError):
    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class EmptyInput(SonderError):
    pass


class RankDeficient(SonderError):
    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class InvalidResponse(SonderError):
    pass


class DegenerateDistribution(SonderError):
    pass


class EmptyArm(SonderError):
    pass


class InvalidConfig(SonderError):
    pass
