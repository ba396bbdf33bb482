"""Exception types shared across the package."""


class RcsurfError(Exception):
    """Base class for all errors raised by this package."""


# --- expression layer ---------------------------------------------------

class ExprError(RcsurfError):
    pass


class ExprSyntaxError(ExprError):
    """Parse failure. Carries the byte offset, 1-based line/column and the
    set of token descriptions that would have been accepted there."""

    def __init__(self, text, offset, expected):
        self.offset = offset
        self.expected = frozenset(expected)
        self.line = text.count("\n", 0, offset) + 1
        last_nl = text.rfind("\n", 0, offset)
        self.column = offset - (last_nl + 1) + 1
        want = ", ".join(sorted(self.expected))
        super().__init__(
            f"syntax error at line {self.line}, column {self.column} "
            f"(offset {offset}): expected {want}"
        )


class UnknownVariable(ExprError):
    def __init__(self, name, offset=None):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown variable {name!r}")


class UnknownFunction(ExprError):
    def __init__(self, name, offset=None):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown function {name!r}")


class EvalDomainError(ExprError):
    """Raised instead of silently producing NaN (log of a non-positive
    number, sqrt of a negative number, division by zero, ...)."""

    def __init__(self, function, argument):
        self.function = function
        self.argument = argument
        super().__init__(f"{function} evaluated outside its domain (argument {argument!r})")


# --- linear algebra / kit ------------------------------------------------

class NonUnitAxis(RcsurfError):
    pass


class SingularMetric(RcsurfError):
    pass


# --- ambient manifold -----------------------------------------------------

class SingularFrame(RcsurfError):
    pass


class OutsideChart(RcsurfError):
    pass


class DegeneratePlane(RcsurfError):
    pass


class IncompatibleConnection(RcsurfError):
    """Connection coefficients fail metric compatibility beyond tolerance."""


# --- surface --------------------------------------------------------------

class DegenerateParameterization(RcsurfError):
    pass


class StencilOutsideDomain(RcsurfError):
    pass


class NotIsothermal(RcsurfError):
    def __init__(self, E, F, G):
        self.E, self.F, self.G = E, F, G
        super().__init__(f"chart is not isothermal: E={E!r} F={F!r} G={G!r}")


# --- Gauss map ------------------------------------------------------------

class NotWeitzenboeck(RcsurfError):
    """Operation needs a frame-defined (Weitzenboeck) ambient manifold."""


class NotClosed(RcsurfError):
    pass


class AxisNotNormal(RcsurfError):
    pass


# --- scenes / IO ----------------------------------------------------------

class SceneFormatError(RcsurfError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class UnknownScene(RcsurfError):
    pass


class UndefinedField(RcsurfError):
    pass


class IoError(RcsurfError):
    pass
