"""Exception hierarchy.

Every error carries a stable ``code`` (the class name by default) so the CLI
and the tests can match on it without string parsing.  ``UserError``
subclasses map to exit status 1, ``InternalError`` subclasses to 2.
"""


class QlamError(Exception):
    code = "QlamError"

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if "code" not in cls.__dict__:
            cls.code = cls.__name__


class UserError(QlamError):
    pass


class InternalError(QlamError):
    pass


# syntax


class ParseError(UserError):
    code = "SyntaxError"

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class DuplicateBitLabel(UserError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"bit label {label} used more than once")


class GenerationExhausted(UserError):
    pass


# typing


class UnboundVariable(UserError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unbound variable {name}")


class VariableUsedTwice(UserError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"variable {name} used twice")


class VariableUnused(UserError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"variable {name} is never used")


class TypeMismatch(UserError):
    def __init__(self, expected, found):
        self.expected = expected
        self.found = found
        super().__init__(f"type mismatch: expected {expected}, found {found}")


class NonFunctionApplied(UserError):
    def __init__(self, found):
        self.found = found
        super().__init__(f"term of type {found} applied as a function")


class PairPatternOnNonTensor(UserError):
    def __init__(self, found):
        self.found = found
        super().__init__(f"pair pattern matched against non-tensor type {found}")


class UnknownGate(UserError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown gate {name}")


class GateShadowing(UserError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"variable {name} shadows a gate name")


# quantum


class WireOutOfRange(UserError):
    pass


class DuplicateWire(UserError):
    pass


class ArityMismatch(UserError):
    pass


class SizeMismatch(UserError):
    pass


class MalformedAmplitude(UserError):
    pass


class NotNormalized(UserError):
    def __init__(self, norm):
        self.norm = norm
        super().__init__(f"register norm is {norm:.9g}, expected 1")


class InconsistentBitWidth(UserError):
    pass


class NonUnitaryMatrix(UserError):
    def __init__(self, name, deviation):
        self.name = name
        self.deviation = deviation
        super().__init__(f"gate {name} is not unitary (max deviation {deviation:.3g})")


class BadDimension(UserError):
    pass


class NameClash(UserError):
    pass


class MalformedGateLibrary(UserError):
    pass


# machine


class OpenTerm(UserError):
    pass


class InputArityMismatch(UserError):
    def __init__(self, expected, found):
        self.expected = expected
        self.found = found
        super().__init__(f"program expects {expected} input qubit(s), got {found}")


class StepBudgetExceeded(InternalError):
    def __init__(self, bound):
        self.bound = bound
        super().__init__(f"token machine exceeded its step budget of {bound}")


class Deadlock(InternalError):
    pass


# equational


class IllTypedRedex(InternalError):
    pass


class StepLimitExceeded(InternalError):
    def __init__(self, bound):
        self.bound = bound
        super().__init__(f"normalization did not finish within {bound} steps")


class NotGroundNormalForm(UserError):
    pass


# mll


class CorrespondenceViolation(InternalError):
    def __init__(self, step, detail=""):
        self.step = step
        msg = f"machine step {step} has no corresponding MLL reduction"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class InvalidProof(InternalError):
    pass
