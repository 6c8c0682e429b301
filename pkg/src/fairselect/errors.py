"""Exception hierarchy shared by every fairselect module."""


class FairSelectError(Exception):
    """Base class for all library errors."""


class ValidationError(FairSelectError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid instance: {lines}")


class InvalidSelection(FairSelectError, ValueError):
    """A selection that is not a member of the instance's feasible family."""


class FamilyTooLarge(FairSelectError):
    def __init__(self, size, cap):
        self.size = size
        self.cap = cap
        super().__init__(f"feasible family has {size} members, exceeding the cap of {cap}")


class OracleNotApplicable(FairSelectError):
    """The oracle's declared guarantee does not cover the requested query."""


class InfeasibleFairness(FairSelectError):
    """The fairness system admits no distribution (detected via an unbounded dual)."""


class RestrictedLPInfeasible(FairSelectError):
    """The restricted primal over the collected sets stayed infeasible after relaxation."""


class NumericalBreakdown(FairSelectError):
    """A numerical routine lost the invariants it relies on."""
