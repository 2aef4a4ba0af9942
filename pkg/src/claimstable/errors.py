"""Exception hierarchy shared by all modules."""


class ClaimsError(ValueError):
    """Malformed input: negative or zero claim, endowment above total claims, bad ids."""


class SizeGuardError(ValueError):
    """An exhaustive search was requested on an instance above its enumeration guard."""


class RegimeError(ValueError):
    """A rule or algorithm was applied in the wrong demand/supply regime."""


class PreconditionError(ValueError):
    """A documented precondition of an operation does not hold."""


class ContractViolation(RuntimeError):
    """A user-supplied object broke the contract it declared (monotonicity, RM, consistency)."""
