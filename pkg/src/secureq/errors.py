"""Exception hierarchy shared by the solver modules."""


class SolverError(Exception):
    """Base class for every error raised by secureq."""


class ArenaError(SolverError):
    pass


class DeadEndState(ArenaError):
    def __init__(self, state):
        super().__init__(f"state {state!r} has no successor")
        self.state = state


class UnknownOwner(ArenaError):
    def __init__(self, state):
        super().__init__(f"state {state!r} has no owner")
        self.state = state


class DanglingEdge(ArenaError):
    def __init__(self, source, target):
        super().__init__(f"edge ({source!r}, {target!r}) leaves the state set")
        self.source = source
        self.target = target


class DuplicateState(ArenaError):
    def __init__(self, state):
        super().__init__(f"state {state!r} declared twice")
        self.state = state


class PlayerOutOfRange(ArenaError):
    def __init__(self, player, n=None):
        bound = f" (players are 1..{n})" if n is not None else ""
        super().__init__(f"player {player!r} out of range{bound}")
        self.player = player


class UnknownState(ArenaError, KeyError):
    def __init__(self, state):
        super().__init__(f"unknown state {state!r}")
        self.state = state

    def __str__(self):
        return self.args[0]


class InvalidLasso(ArenaError):
    pass


class ObjectiveError(SolverError):
    pass


class ForeignState(ObjectiveError):
    def __init__(self, state):
        super().__init__(f"objective mentions state {state!r} outside the arena")
        self.state = state


class ShapeMismatch(ObjectiveError):
    pass


class FormulaSyntaxError(ObjectiveError):
    pass


class MemoryBudgetExceeded(SolverError):
    pass


class BudgetExceeded(SolverError):
    pass


class NoWitness(SolverError):
    pass


class ParseError(SolverError):
    """Malformed input file; ``line`` is 1-based, or None when unknown."""

    def __init__(self, line, reason, path=None):
        where = f"{path}:" if path else ""
        where += f"{line}: " if line is not None else (" " if path else "")
        super().__init__(f"{where}{reason}")
        self.line = line
        self.reason = reason
        self.path = path
