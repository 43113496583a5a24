"""Exception hierarchy shared by every module of the package."""


class DiscStreamError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""


class InputError(DiscStreamError):
    """Invalid user input (exit code 2)."""


class ParseError(InputError):
    pass


class SelfLoop(InputError):
    def __init__(self, u):
        super().__init__(f"self-loop at vertex {u}")
        self.u = u


class DuplicateEdge(InputError):
    def __init__(self, u, v):
        super().__init__(f"duplicate edge {u}-{v}")
        self.edge = (u, v)


class DegreeBoundViolated(InputError):
    def __init__(self, v, degree=None, bound=None):
        msg = f"vertex {v} exceeds degree bound"
        if degree is not None:
            msg += f" ({degree} > {bound})"
        super().__init__(msg)
        self.v = v


class VertexOutOfRange(InputError):
    def __init__(self, v, n=None):
        super().__init__(f"vertex {v} out of range" + (f" [0, {n})" if n is not None else ""))
        self.v = v


class InvalidModelParams(InputError):
    pass


class InvalidParams(InputError):
    pass


class EmptyGraph(InputError):
    pass


class DuplicateRoot(InputError):
    pass


class SampleTooLarge(InputError):
    pass


class MismatchedRadius(InputError):
    pass


class RadiusTooSmall(InputError):
    pass


class TooManyEdges(InputError):
    def __init__(self, edges, cap):
        super().__init__(f"{edges} edges exceeds enumeration cap of {cap}")
        self.edges = edges
        self.cap = cap


class CatalogTooLarge(InputError):
    pass


class InvariantError(DiscStreamError):
    """Internal invariant breach (exit code 3)."""


class DiscInvariantViolated(InvariantError):
    pass


class UnknownType(InvariantError):
    pass


class SingularLambda(InvariantError):
    pass


class RealizabilityViolation(InvariantError):
    pass
