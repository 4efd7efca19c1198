"""Exception hierarchy shared by every layer of the package."""

from __future__ import annotations


class ArchError(Exception):
    """Base class for all errors raised by archsubst."""


class WellFormednessError(ArchError):
    """A configuration declaration breaks a totality, partiality or reference rule."""

    def __init__(self, rule: str, ids=(), message: str = ""):
        self.rule = rule
        self.ids = tuple(ids)
        text = message or rule
        if self.ids:
            text = f"{text} [{', '.join(map(str, self.ids))}]"
        super().__init__(text)


class ApplyError(ArchError):
    """A reconfiguration could not be applied."""


class GuardFailed(ApplyError):
    def __init__(self, op: str):
        self.op = op
        super().__init__(f"guard of {op!r} does not hold")


class EditFailed(ApplyError):
    def __init__(self, edit, reason: str):
        self.edit = edit
        self.reason = reason
        super().__init__(f"{edit}: {reason}")


class InconsistentResult(ApplyError):
    def __init__(self, op: str, report):
        self.op = op
        self.report = report
        ids = ", ".join(v.id for v in report.violations)
        super().__init__(f"applying {op!r} yields an inconsistent configuration ({ids})")


class UnknownOperation(ArchError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown reconfiguration {name!r}")


class BoundExceeded(ArchError):
    def __init__(self, count: int):
        self.count = count
        super().__init__(f"state bound exceeded: more than {count} distinct configurations")


class StrategyError(ArchError):
    """Raised by pick-up strategies."""


class EmptyChoiceSet(StrategyError):
    def __init__(self):
        super().__init__("no reconfiguration to choose from")


class ScriptMismatch(StrategyError):
    def __init__(self, available, name: str):
        self.available = tuple(sorted(available))
        self.name = name
        super().__init__(
            f"scripted operation {name!r} is not enabled; enabled: {', '.join(self.available) or '(none)'}"
        )


class ScriptExhausted(StrategyError):
    def __init__(self):
        super().__init__("scenario script is exhausted")


class SubstMapError(ArchError):
    def __init__(self, invariant: str, ids=(), message: str = ""):
        self.invariant = invariant
        self.ids = tuple(ids)
        text = message or f"substitution map violates {invariant}"
        if self.ids:
            text = f"{text} [{', '.join(map(str, self.ids))}]"
        super().__init__(text)


class PreconditionFailed(ArchError):
    """check_subst was called on an inconsistent configuration."""

    def __init__(self, side: str, report):
        self.side = side
        self.report = report
        super().__init__(f"{side} configuration is not consistent")


class SharedOpMismatch(ArchError):
    def __init__(self, names):
        self.names = tuple(names)
        super().__init__(
            "shared reconfigurations differ between levels (modulo substitution): "
            + ", ".join(self.names)
        )


class ParseError(ArchError):
    def __init__(self, message: str, line: int = 0, col: int = 0, path: str = "<string>"):
        self.message = message
        self.line = line
        self.col = col
        self.path = path
        super().__init__(f"{path}:{line}:{col}: {message}")
