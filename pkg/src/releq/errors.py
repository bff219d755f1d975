"""Exception hierarchy shared by all releq modules."""


class ReleqError(Exception):
    """Base class for every error raised by releq."""


class ZeroMomentum(ReleqError, ValueError):
    """An operation needing a non-zero momentum got the origin."""


class DegenerateModel(ReleqError, ValueError):
    """Quadratic coefficients are not strictly ordered a > b > c."""


class DegenerateInertia(ReleqError, ValueError):
    """Inertia data cannot be mapped onto a non-degenerate quadratic model."""


class PoleHit(ReleqError, ValueError):
    """A Lagrange multiplier sits on a pole 2a, 2b or 2c with non-zero numerator."""


class WrongStratum(ReleqError, ValueError):
    """The unfolding parameter lies in the wrong discriminant stratum."""


class NoConvergence(ReleqError, RuntimeError):
    """An iterative solver did not reach its tolerance."""


class SingularHessian(ReleqError, RuntimeError):
    """The shape Hessian is numerically singular."""


class AtBifurcation(ReleqError, RuntimeError):
    """The projected Hessian is degenerate: the point is a bifurcation candidate."""
