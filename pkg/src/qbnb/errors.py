"""Exception types raised by the solver, the rules and the expression engine."""


class QBnBError(Exception):
    """Base class for all package errors."""


class MissingConstant(QBnBError, ValueError):
    def __init__(self, name):
        super().__init__(f"problem has no Lipschitz constant {name}")
        self.name = name


class MissingOracle(QBnBError, ValueError):
    def __init__(self, name):
        super().__init__(f"problem has no {name} oracle")
        self.name = name


class ConstraintViolation(QBnBError, ValueError):
    """A rule that is only valid for unconstrained problems was used on one
    not flagged as unconstrained."""


class DomainError(QBnBError, ArithmeticError):
    """Interval evaluation hit a division by an interval containing zero or a
    square root of an interval reaching below zero."""


class ParseError(QBnBError, ValueError):
    pass
