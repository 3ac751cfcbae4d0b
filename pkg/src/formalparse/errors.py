"""Exception hierarchy shared by all modules."""


class FormalParseError(Exception):
    """Base class for every error raised by this package."""


# s-expressions
class SexprError(FormalParseError):
    pass


class UnbalancedParens(SexprError):
    pass


class EmptyExpression(SexprError):
    pass


class StrayToken(SexprError):
    pass


class EmptyChildren(SexprError):
    pass


# types and terms
class UnificationError(FormalParseError):
    pass


class Mismatch(UnificationError):
    pass


class OccursCheck(UnificationError):
    pass


class UnknownSymbol(FormalParseError):
    pass


class TermTypeError(FormalParseError):
    """Application argument does not fit the function domain."""


class SignatureError(FormalParseError):
    pass


class NoRepair(FormalParseError):
    pass


class AmbiguousRepair(FormalParseError):
    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


# treebanks and grammars
class ArityError(FormalParseError):
    pass


class ValidationError(FormalParseError):
    def __init__(self, message, entry_id=None, line_errors=()):
        super().__init__(message)
        self.entry_id = entry_id
        self.line_errors = list(line_errors)


class MalformedIntermediate(FormalParseError):
    pass


class EmptyTreebank(FormalParseError):
    pass


class LabelClash(FormalParseError):
    pass


class GrammarFormatError(FormalParseError):
    pass


# parsing
class EmptyInput(FormalParseError):
    pass


class InvalidK(FormalParseError):
    pass


# experiment / baselines / cli
class MissingGoldTerm(FormalParseError):
    pass


class TooSmall(FormalParseError):
    pass


class EmptyCorpus(FormalParseError):
    pass


class ConfigError(FormalParseError):
    pass
