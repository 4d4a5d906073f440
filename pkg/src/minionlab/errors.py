class MinionLabError(Exception):
    """Base class for all errors raised by the library."""


class SignatureMismatch(MinionLabError, ValueError):
    pass


class SizeCapExceeded(MinionLabError, ValueError):
    pass


class NotAGraph(MinionLabError, ValueError):
    pass


class ArityMismatch(MinionLabError, ValueError):
    pass


class MembershipError(MinionLabError, ValueError):
    """An element does not satisfy its minion's membership predicate."""


class MalformedInput(MinionLabError, ValueError):
    pass


class VerificationFailure(MinionLabError, ValueError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
