"""Exception hierarchy shared across the package."""


class LrlabError(Exception):
    """Base class for all package errors."""


class PreconditionError(LrlabError, ValueError):
    """An input violates a documented precondition."""


class FactorizationError(LrlabError):
    """Integer factorization exceeded its work cap."""


class PrecisionError(LrlabError):
    """A p-adic computation ran out of working precision."""


class NotClassifiedError(LrlabError):
    """No local-condition rule covers the requested place."""


class LemmaInapplicable(LrlabError):
    """A dimension-change rule was asked for outside its hypotheses."""


class LemmaViolation(LrlabError, AssertionError):
    """A dimension-change rule produced an outcome it forbids."""


class ConsistencyError(LrlabError):
    """Two independent computations of the same quantity disagree."""


class OfflineMiss(LrlabError):
    """Offline mode is on and the request is not cached."""


class RemoteError(LrlabError):
    """The remote database failed after all retries."""


class SchemaDrift(LrlabError):
    """A remote record does not have the fields this parser expects."""


class NotSteinbergRational(LrlabError):
    """A sign was requested where the U_p eigenvalue is not +1 or -1."""
