"""Exception taxonomy shared by all kolwave modules."""

from __future__ import annotations


class KolwaveError(Exception):
    """Base class for all toolkit errors."""


class PreconditionError(KolwaveError):
    """An operation was called outside its documented domain."""


class UnsupportedError(KolwaveError):
    """Requested variant is deliberately not implemented."""


class DivergenceError(KolwaveError):
    """Integration blew up (step-size underflow or runaway state)."""

    def __init__(self, message: str, time: float | None = None, state=None):
        super().__init__(message)
        self.time = time
        self.state = state


class FieldEvaluationError(KolwaveError):
    """Right-hand side returned NaN/inf."""


class BracketError(KolwaveError):
    """Root bracket does not change sign."""


class QuadratureError(KolwaveError):
    """Adaptive quadrature failed to converge within its budget."""


class SubcriticalSpeedError(PreconditionError):
    """Wave speed below the linear-spreading threshold 2*sqrt(G(0))."""


class MomentError(KolwaveError):
    """A required exponential moment of the kernel diverges."""


class InvarianceBreachError(KolwaveError):
    """Iterate escaped the upper/lower solution sandwich."""


class StiffShootingError(KolwaveError):
    """Fast-scale instability defeated the slow-manifold shooting."""


class NoWindowError(KolwaveError):
    """No parameter window satisfies the requested predicate."""
