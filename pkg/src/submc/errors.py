"""Exception hierarchy shared by the whole package."""


class SubmcError(Exception):
    """Base class for every error raised by submc."""


class ModelError(SubmcError, ValueError):
    """A model document or model value violates the iCGS contract."""


class SchemaError(ModelError):
    """Missing, malformed or duplicated fields in a model document."""


class ProtocolError(ModelError):
    """Empty protocol entry, or a protocol that is not uniform on a class."""


class TransitionError(ModelError):
    """Transition function not total on enabled joint actions, or defined
    for a disabled one."""


class UnknownNameError(ModelError, KeyError):
    """Reference to a state, agent, action or atom that does not exist."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class FormulaError(SubmcError, ValueError):
    """Base class for formula syntax errors."""


class ParseError(FormulaError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ArityError(FormulaError):
    """Malformed coalition list."""


class ScopeError(FormulaError):
    """Temporal operator outside any strategic or path quantifier."""


class UnsupportedFormula(SubmcError):
    """The strategic checker cannot decide this path formula exactly."""


class InitialStateRemoved(SubmcError):
    """A sub-model core must contain the initial state."""


class ImperfectInformationError(SubmcError):
    """Perfect-information checking requested on a model where some
    coalition agent still confuses distinct states."""


class InternalSoundnessError(SubmcError):
    """Both the universal and the existential check fired on one candidate."""


class SearchSpaceTooLarge(SubmcError):
    """Brute-force oracle refused an instance above its size limit."""
