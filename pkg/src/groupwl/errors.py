"""Exception types shared across the package."""


class GroupWLError(Exception):
    """Base class for all library errors."""


class NotAGroup(GroupWLError):
    pass


class NotLatinSquare(NotAGroup):
    def __init__(self, message: str, where: tuple[str, int] | None = None):
        super().__init__(message)
        self.where = where


class NoIdentity(NotAGroup):
    pass


class NotAssociative(NotAGroup):
    def __init__(self, witness: tuple[int, int, int]):
        a, b, c = witness
        super().__init__(f"(ab)c != a(bc) for a={a}, b={b}, c={c}")
        self.witness = witness


class NotASubgroup(GroupWLError):
    pass


class CapExceeded(GroupWLError):
    pass


class TooLarge(CapExceeded):
    pass


class BudgetExceeded(GroupWLError):
    pass


class InvalidAction(GroupWLError):
    pass


class BadScalarOrder(InvalidAction):
    pass


class BadPrime(GroupWLError):
    pass


class GraphError(GroupWLError):
    pass


class Disconnected(GraphError):
    pass


class DegreeTooLow(GraphError):
    pass


class NotGenerated(GroupWLError):
    pass


class NotAbelian(GroupWLError):
    pass


class IllegalMove(GroupWLError):
    pass


class StrategyStuck(GroupWLError):
    pass


class FormatError(GroupWLError):
    pass
