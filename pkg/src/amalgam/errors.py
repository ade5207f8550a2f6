"""Exception hierarchy.

Every error raised on purpose by the package derives from ``AmalgamError`` so
callers (and the CLI) can tell input problems apart from bugs.
"""


class AmalgamError(Exception):
    pass


# structures

class StructureError(AmalgamError):
    pass


class ForeignElement(StructureError):
    pass


class MissingFunctionRow(StructureError):
    pass


class ConstantInEmptyDomain(StructureError):
    pass


class DuplicateTuple(StructureError):
    pass


class SignatureMismatch(StructureError):
    pass


class UnknownSymbol(AmalgamError):
    pass


class ArityMismatch(AmalgamError):
    pass


class NotClosedUnderFunctions(StructureError):
    pass


class ConstantOutsideSubset(StructureError):
    pass


class EmptyDomain(StructureError):
    pass


class IntersectionMismatch(StructureError):
    pass


class NotSubstructure(StructureError):
    pass


class EmptyCWithConstants(StructureError):
    pass


# theory DSL

class DslSyntaxError(AmalgamError):
    def __init__(self, message, line, col):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


# constructions

class NotBinary(AmalgamError):
    pass


class IneligibleTheory(AmalgamError):
    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


class PostVerificationFailed(AmalgamError):
    """A construction produced a structure that does not check out."""

    def __init__(self, axiom, witness=None):
        super().__init__(f"post-verification failed on {axiom} (witness {witness})")
        self.axiom = axiom
        self.witness = witness


class NotPartialOrder(AmalgamError):
    pass


class PreconditionViolated(AmalgamError):
    def __init__(self, symbol, detail=""):
        super().__init__(f"{symbol}: {detail}" if detail else str(symbol))
        self.symbol = symbol


class OverlappingSignatures(AmalgamError):
    pass


class PartFailed(AmalgamError):
    def __init__(self, part, cause):
        super().__init__(f"part {part} failed: {cause}")
        self.part = part
        self.cause = cause


class SharedNotTransitive(AmalgamError):
    pass


class SharedTablesDiffer(AmalgamError):
    pass


class OverlapNotSingleton(AmalgamError):
    pass


class NotUnionDomain(AmalgamError):
    pass


class ConstantsPresent(AmalgamError):
    pass


class NotDisjoint(AmalgamError):
    pass


# linear varieties

class NonLinearEquation(AmalgamError):
    pass


class ClashReport(AmalgamError):
    """Two derivations force different values for the same table entry."""

    def __init__(self, entry, derivation1, derivation2):
        super().__init__(f"clash on {entry}: {derivation1} vs {derivation2}")
        self.entry = entry
        self.derivation1 = derivation1
        self.derivation2 = derivation2


# algebraization

class NotAPoset(AmalgamError):
    pass


class NotAnOrderAlgebra(AmalgamError):
    pass


class DiagonalConditionViolated(AmalgamError):
    def __init__(self, relation, element):
        super().__init__(f"{relation} fails on the diagonal at {element!r}")
        self.relation = relation
        self.element = element


class InconsistentTable(AmalgamError):
    pass


# search

class BudgetExceeded(AmalgamError):
    def __init__(self, max_candidates):
        super().__init__(f"candidate budget of {max_candidates} exhausted")
        self.max_candidates = max_candidates


class AmalgamationFailed(AmalgamError):
    def __init__(self, round_no, detail=""):
        super().__init__(f"round {round_no}: {detail}")
        self.round = round_no


class CorpusFileMissing(AmalgamError):
    pass
