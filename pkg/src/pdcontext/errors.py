"""Exception hierarchy.

Validation problems (bad parameters, malformed inputs) derive from
:class:`ValidationError`; failures of a numerical procedure derive from
:class:`NumericalError`. The CLI maps the two families to exit codes 2 and 3.
"""


class PdContextError(Exception):
    pass


class ValidationError(PdContextError, ValueError):
    pass


class NumericalError(PdContextError, ArithmeticError):
    pass


class OrderingViolation(ValidationError):
    """Prisoner's dilemma payoffs do not satisfy t > r > p > s >= 0."""


class BetaOutOfRange(ValidationError):
    """Survival probability outside [0, 1)."""


class MalformedTransition(ValidationError):
    """A transition triple is not a probability distribution."""


class IllegalAction(ValidationError):
    """An automaton chose an action that is not available in the current state."""


class DimensionMismatch(ValidationError):
    pass


class NotInRegionVI(ValidationError):
    """Census requested where the polymorphic point is not a stable interior equilibrium."""


class CycleNotFound(NumericalError):
    """The joint play never revisited a state; the automata or transitions are not deterministic."""


class StepExplosion(NumericalError):
    """Integration produced non-finite values or left the simplex by more than the clip tolerance."""


class DegenerateDenominator(NumericalError, RuntimeWarning):
    """The polymorphic fixed point escapes to infinity (1 + 2*beta*z - 5*beta == 0).

    Also used as a warning category when the remaining fixed points are still reported.
    """


class UnknownSignature(NumericalError, LookupError):
    pass


class SingularTransform(NumericalError):
    """The (k, l) substitution is undefined on the x1 = 0 face."""


class OnSeparatrix(NumericalError):
    """The invariant is evaluated where a + b*k or l vanishes."""


class DegenerateExponent(OnSeparatrix):
    """a == 0 or b == 0, so the partial-fraction form of the invariant does not exist."""
