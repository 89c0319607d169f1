"""Exception types raised across the package."""


class RmtError(Exception):
    """Base class for all package errors."""


class DomainError(RmtError, ValueError):
    pass


class QuadratureFailure(RmtError):
    pass


class InfeasibleMoments(RmtError, ValueError):
    pass


class RootNotBracketed(RmtError):
    pass


class SinkhornDivergence(RmtError):
    pass


class SupportTooWide(RmtError, ValueError):
    pass


class EigFailure(RmtError):
    pass


class BranchAmbiguous(RmtError):
    pass


class NonConvergence(RmtError):
    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class NoContraction(RmtError):
    pass


class NotOrthogonal(RmtError, ValueError):
    pass


class EmptyWindow(RmtError, ValueError):
    pass


class StatisticUnknown(RmtError, KeyError):
    pass


class InsufficientGaps(RmtError):
    pass


class ConfigInvalid(RmtError, ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class WindowNotInBulk(RmtError, ValueError):
    pass
