"""Text front end: ``.arch`` models, ``.subst`` maps and ``.scn`` scenario scripts.

The concrete grammar is documented in ``docs/grammar.md``.  ``serialize_model``
prints the canonical form; ``parse_model(serialize_model(m))`` rebuilds ``m``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .consistency import check_consistency
from .engine import (
    TRUE,
    AddChild,
    And,
    Bind,
    Bound,
    Compare,
    ComponentDecl,
    Const,
    Delegate,
    Destroy,
    InconsistentModel,
    InState,
    Instantiate,
    Literal,
    ModelSpec,
    Not,
    Offset,
    Or,
    Present,
    ReconfigurationDef,
    RemoveChild,
    SetValue,
    Start,
    Stop,
    Unbind,
    Undelegate,
)
from .errors import ParseError, SubstMapError, WellFormednessError
from .model import (
    MANDATORY,
    OPTIONAL,
    STARTED,
    STOPPED,
    Configuration,
    ConfigurationDeclaration,
    PType,
    format_value,
    new_configuration,
)
from .substitution import SubstMap, validate_subst_map


@dataclass(frozen=True)
class SourceText:
    text: str
    path: str = "<string>"

    @classmethod
    def load(cls, path) -> "SourceText":
        return cls(Path(path).read_text(encoding="utf-8"), str(path))


Source = Union[str, SourceText]


def _source(src: Source) -> SourceText:
    return src if isinstance(src, SourceText) else SourceText(src)


# --------------------------------------------------------------------------
# Tokens
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>(?:\#|//)[^\n]*)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|:=|\.\.|==|!=|<=|>=|[{}()\[\];:,.<>=+\-])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # name, int, op, eof
    text: str
    line: int
    col: int


def tokenize(src: SourceText) -> list[Token]:
    tokens = []
    text = src.text
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, src.path)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, src: SourceText):
        self.src = src
        self.tokens = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col, self.src.path)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "name") and self.tok.text == text

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            tok = self.tok
            self.i += 1
            return tok
        return None

    def expect(self, text: str) -> Token:
        tok = self.accept(text)
        if tok is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return tok

    def name(self, what: str = "name") -> Token:
        tok = self.tok
        if tok.kind != "name":
            raise self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok

    def integer(self) -> int:
        neg = self.accept("-") is not None
        tok = self.tok
        if tok.kind != "int":
            raise self.error(f"expected integer, found {tok.text or 'end of input'!r}")
        self.i += 1
        return -int(tok.text) if neg else int(tok.text)

    def value(self):
        if self.at("-") or self.tok.kind == "int":
            return self.integer()
        tok = self.name("value")
        if tok.text == "true":
            return True
        if tok.text == "false":
            return False
        return tok.text


# --------------------------------------------------------------------------
# Model syntax tree (positions kept for diagnostics)
# --------------------------------------------------------------------------


@dataclass
class _Ref:
    component: str | None
    interface: str
    tok: Token

    def text(self) -> str:
        return f"{self.component}.{self.interface}" if self.component else self.interface


@dataclass
class _Component:
    decl: ComponentDecl
    tok: Token
    positions: dict = field(default_factory=dict)


@dataclass
class _Doc:
    itypes: dict = field(default_factory=dict)  # name -> token
    ptypes: dict = field(default_factory=dict)  # name -> (PType, token)
    components: list = field(default_factory=list)
    binds: list = field(default_factory=list)  # (_Ref, _Ref)
    delegates: list = field(default_factory=list)
    reconfigurations: list = field(default_factory=list)  # (ReconfigurationDef, token)


def _anonymous_ptype_name(dom: PType) -> str:
    if dom.kind == "int":
        fmt = lambda v: f"m{-v}" if v < 0 else str(v)  # noqa: E731
        return f"range_{fmt(dom.lo)}_{fmt(dom.hi)}"
    if dom.kind == "enum":
        return "enum_" + "_".join(dom.literals)
    return "bool"


class _ModelParser(_Parser):
    def __init__(self, src: SourceText):
        super().__init__(src)
        self.doc = _Doc()

    def parse(self) -> _Doc:
        while self.tok.kind != "eof":
            tok = self.tok
            if self.accept("itype"):
                while True:
                    t = self.name("interface type")
                    self.doc.itypes.setdefault(t.text, t)
                    if not self.accept(","):
                        break
                self.expect(";")
            elif self.accept("ptype"):
                t = self.name("parameter type")
                self.register_ptype(t, self.domain())
                self.expect(";")
            elif self.accept("component"):
                self.doc.components.append(self.component_block())
            elif self.accept("bind"):
                a = self.ref()
                self.expect("->")
                b = self.ref()
                self.expect(";")
                self.doc.binds.append((a, b))
            elif self.accept("delegate"):
                a = self.ref()
                self.expect("->")
                b = self.ref()
                self.expect(";")
                self.doc.delegates.append((a, b))
            elif self.accept("reconfiguration"):
                self.doc.reconfigurations.append(self.reconfiguration(tok))
            else:
                raise self.error(f"unexpected {tok.text!r} at top level")
        return self.doc

    def register_ptype(self, tok: Token, ptype: PType):
        known = self.doc.ptypes.get(tok.text)
        if known is not None and known[0] != ptype:
            raise self.error(f"parameter type {tok.text} redeclared as {ptype} (was {known[0]})", tok)
        if known is None:
            self.doc.ptypes[tok.text] = (ptype, tok)

    def domain(self) -> PType:
        if self.accept("["):
            lo = self.integer()
            self.expect("..")
            hi = self.integer()
            self.expect("]")
            try:
                return PType.int_range(lo, hi)
            except ValueError as exc:
                raise self.error(str(exc)) from None
        if self.accept("bool"):
            return PType.boolean()
        if self.accept("{"):
            lits = [self.name("enum literal").text]
            while self.accept(","):
                lits.append(self.name("enum literal").text)
            self.expect("}")
            try:
                return PType.enum(*lits)
            except ValueError as exc:
                raise self.error(str(exc)) from None
        raise self.error("expected a parameter domain: [lo..hi], bool or {literals}")

    def ref(self) -> _Ref:
        first = self.name("interface")
        if self.accept("."):
            second = self.name("interface")
            return _Ref(first.text, second.text, second)
        return _Ref(None, first.text, first)

    def component_block(self) -> _Component:
        name = self.name("component name")
        self.expect("{")
        provides, requires, params, children = [], [], [], []
        state = STOPPED
        positions = {name.text: name}
        while not self.accept("}"):
            if self.accept("provides"):
                i = self.name("interface")
                self.expect(":")
                t = self.name("interface type")
                self.doc.itypes.setdefault(t.text, t)
                provides.append((i.text, t.text))
                positions[i.text] = i
            elif self.accept("requires"):
                i = self.name("interface")
                self.expect(":")
                t = self.name("interface type")
                self.doc.itypes.setdefault(t.text, t)
                cont = MANDATORY
                if self.accept(OPTIONAL):
                    cont = OPTIONAL
                elif self.accept(MANDATORY):
                    cont = MANDATORY
                requires.append((i.text, t.text, cont))
                positions[i.text] = i
            elif self.accept("param"):
                p = self.name("parameter")
                self.expect(":")
                if self.at("[") or self.at("{"):
                    # anonymous domain: named after its shape
                    anchor = self.tok
                    dom = self.domain()
                    t = Token("name", _anonymous_ptype_name(dom), anchor.line, anchor.col)
                    self.register_ptype(t, dom)
                else:
                    t = self.name("parameter type")
                    if not self.at("="):
                        self.register_ptype(t, self.domain())
                    elif t.text == "bool" and t.text not in self.doc.ptypes:
                        self.register_ptype(t, PType.boolean())
                self.expect("=")
                v = self.value()
                params.append((p.text, t.text, v))
                positions[p.text] = p
            elif self.accept("child"):
                children.append(self.name("component").text)
            elif self.accept("state"):
                s = self.name("state")
                if s.text not in (STARTED, STOPPED):
                    raise self.error("state must be started or stopped", s)
                state = s.text
            else:
                raise self.error(f"unexpected {self.tok.text!r} in component {name.text}")
            self.expect(";")
        decl = ComponentDecl(name.text, tuple(provides), tuple(requires), tuple(params), tuple(children), state)
        return _Component(decl, name, positions)

    # guards --------------------------------------------------------------

    def guard(self):
        items = [self.conjunction()]
        while self.accept("or"):
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conjunction(self):
        items = [self.unary()]
        while self.accept("and"):
            items.append(self.unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def unary(self):
        if self.accept("not"):
            return Not(self.unary())
        if self.accept("("):
            g = self.guard()
            self.expect(")")
            return g
        tok = self.tok
        if tok.kind == "name" and self.peek().text == "(" and tok.text in ("present", "bound", STARTED, STOPPED):
            self.i += 2
            if tok.text == "bound":
                arg = self.ref().interface
            else:
                arg = self.name("component").text
            self.expect(")")
            if tok.text == "present":
                return Present(arg)
            if tok.text == "bound":
                return Bound(arg)
            return InState(arg, tok.text)
        if tok.kind == "name" and tok.text in ("true", "false"):
            self.i += 1
            return Const(tok.text == "true")
        param = self.name("guard atom")
        op = self.tok
        if op.text not in ("==", "!=", "<", "<=", ">", ">="):
            raise self.error(f"expected comparison operator after {param.text!r}")
        self.i += 1
        return Compare(param.text, op.text, self.value())

    # reconfigurations ----------------------------------------------------

    def reconfiguration(self, start: Token):
        name = self.name("reconfiguration name")
        guard = TRUE
        if self.accept("when"):
            guard = self.guard()
        self.expect("{")
        body = []
        while not self.accept("}"):
            body.append(self.edit())
        if not body:
            raise self.error(f"reconfiguration {name.text} has an empty body", name)
        return ReconfigurationDef(name.text, guard, tuple(body)), name

    def edit(self):
        tok = self.tok
        if self.accept("instantiate"):
            comp = self.component_block()
            self.accept(";")
            return Instantiate(comp.decl)
        if self.accept("destroy"):
            e = Destroy(self.name("component").text)
        elif self.accept("add"):
            child = self.name("component").text
            self.expect("to")
            e = AddChild(child, self.name("component").text)
        elif self.accept("remove"):
            child = self.name("component").text
            self.expect("from")
            e = RemoveChild(child, self.name("component").text)
        elif self.accept("bind"):
            a = self.ref()
            self.expect("->")
            b = self.ref()
            e = Bind(a.component, a.interface, b.component, b.interface)
        elif self.accept("unbind"):
            a = self.ref()
            e = Unbind(a.component, a.interface)
        elif self.accept("delegate"):
            a = self.ref()
            self.expect("->")
            b = self.ref()
            e = Delegate(a.component, a.interface, b.component, b.interface)
        elif self.accept("undelegate"):
            a = self.ref()
            e = Undelegate(a.component, a.interface)
        elif self.accept("start"):
            e = Start(self.name("component").text)
        elif self.accept("stop"):
            e = Stop(self.name("component").text)
        elif self.accept("set"):
            p = self.name("parameter").text
            self.expect(":=")
            if self.tok.kind == "name" and self.peek().text in ("+", "-"):
                base = self.name().text
                sign = -1 if self.tok.text == "-" else 1
                self.i += 1
                delta = self.integer()
                e = SetValue(p, Offset(base, sign * delta))
            else:
                e = SetValue(p, Literal(self.value()))
        else:
            raise self.error(f"unknown edit {tok.text!r}")
        self.expect(";")
        return e


def _collect_types(doc: _Doc):
    """Interface and parameter types used anywhere, including reconfiguration bodies."""
    itypes = set(doc.itypes)
    for op, _ in doc.reconfigurations:
        for e in op.body:
            if isinstance(e, Instantiate):
                itypes.update(t for _, t in e.decl.provides)
                itypes.update(t for _, t, _ in e.decl.requires)
    return itypes


def _build(doc: _Doc, src: SourceText) -> tuple[Configuration, dict]:
    positions: dict[str, Token] = {}
    decl = ConfigurationDeclaration()
    comp_names = {}
    for comp in doc.components:
        if comp.decl.name in comp_names:
            raise ParseError(f"component {comp.decl.name} declared twice", comp.tok.line, comp.tok.col, src.path)
        comp_names[comp.decl.name] = comp
        positions.update(comp.positions)
    ptypes = {name: pt for name, (pt, _) in doc.ptypes.items()}
    for name, (_, tok) in doc.ptypes.items():
        positions.setdefault(name, tok)
    for name, tok in doc.itypes.items():
        positions.setdefault(name, tok)
    decl.ptypes = ptypes
    decl.itypes = sorted(_collect_types(doc))
    container, ctype, contingency, value, state, parent = [], [], [], [], [], []
    for comp in doc.components:
        d = comp.decl
        decl.components.append(d.name)
        state.append((d.name, d.state))
        for i, t in d.provides:
            decl.prov_interfaces.append(i)
            container.append((i, d.name))
            ctype.append((i, t))
        for i, t, k in d.requires:
            decl.req_interfaces.append(i)
            container.append((i, d.name))
            ctype.append((i, t))
            contingency.append((i, k))
        for p, t, v in d.params:
            if t not in ptypes:
                tok = comp.positions[p]
                raise ParseError(f"unknown parameter type {t}", tok.line, tok.col, src.path)
            decl.parameters.append(p)
            container.append((p, d.name))
            ctype.append((p, t))
            value.append((p, v))
        for ch in d.children:
            if ch not in comp_names:
                raise ParseError(f"child {ch} of {d.name} is not declared", comp.tok.line, comp.tok.col, src.path)
            parent.append((ch, d.name))
    owner = dict(container)

    def resolve(ref: _Ref, kinds: tuple[str, ...]) -> str:
        where = (ref.tok.line, ref.tok.col, src.path)
        if ref.component is not None and ref.component not in comp_names:
            raise ParseError(f"unknown component {ref.component}", *where)
        if ref.interface not in owner or ref.interface in decl.parameters:
            raise ParseError(f"unknown interface {ref.text()}", *where)
        if ref.component is not None and owner[ref.interface] != ref.component:
            raise ParseError(f"{ref.interface} is not supplied by {ref.component}", *where)
        kind = "provided" if ref.interface in decl.prov_interfaces else "required"
        if kind not in kinds:
            raise ParseError(f"{ref.text()} is a {kind} interface", *where)
        return ref.interface

    binding = [(resolve(a, ("provided",)), resolve(b, ("required",))) for a, b in doc.binds]
    delegate = [(resolve(a, ("provided", "required")), resolve(b, ("provided", "required")))
                for a, b in doc.delegates]
    decl.container, decl.container_type, decl.contingency = container, ctype, contingency
    decl.value, decl.state, decl.parent = value, state, parent
    decl.binding, decl.delegate = binding, delegate
    try:
        return new_configuration(decl), positions
    except WellFormednessError as exc:
        tok = next((positions[i] for i in exc.ids if i in positions), None)
        line, col = (tok.line, tok.col) if tok else (1, 1)
        raise ParseError(f"ill-formed configuration: {exc}", line, col, src.path) from exc


class ModelConsistencyError(ParseError):
    """The initial configuration of a parsed model violates consistency constraints."""

    def __init__(self, report, line, col, path):
        self.report = report
        super().__init__("initial configuration is not consistent: " + ", ".join(report.ids()), line, col, path)


def parse_model(src: Source, check: bool = True) -> ModelSpec:
    """Parse a ``.arch`` model.

    With ``check`` the initial configuration must be consistent
    (ModelConsistencyError otherwise, located at the first witness).
    """
    src = _source(src)
    doc = _ModelParser(src).parse()
    initial, positions = _build(doc, src)
    names = {}
    for op, tok in doc.reconfigurations:
        if op.name in names:
            raise ParseError(f"reconfiguration {op.name} declared twice", tok.line, tok.col, src.path)
        names[op.name] = op
    if check:
        report = check_consistency(initial)
        if not report.consistent:
            first = report.violations[0]
            tok = next((positions[w.name] for w in first.witness if w.name in positions), None)
            line, col = (tok.line, tok.col) if tok else (1, 1)
            raise ModelConsistencyError(report, line, col, src.path)
    try:
        return ModelSpec(initial, [op for op, _ in doc.reconfigurations], check=False)
    except InconsistentModel as exc:  # pragma: no cover - guarded above
        raise ParseError(str(exc)) from exc


def load_model(path, check: bool = True) -> ModelSpec:
    return parse_model(SourceText.load(path), check=check)


# --------------------------------------------------------------------------
# Canonical serialization
# --------------------------------------------------------------------------


def _component_lines(c: Configuration, comp: str, indent: str) -> list[str]:
    lines = []
    for i in c.provided_of(comp):
        lines.append(f"{indent}provides {i} : {c.container_type[i]};")
    for i in c.required_of(comp):
        lines.append(f"{indent}requires {i} : {c.container_type[i]} {c.contingency[i]};")
    for p in c.params_of(comp):
        lines.append(f"{indent}param {p} : {c.container_type[p]} = {format_value(c.value[p])};")
    for ch in sorted(c.children_of(comp)):
        lines.append(f"{indent}child {ch};")
    lines.append(f"{indent}state {c.state[comp]};")
    return lines


def _decl_lines(d: ComponentDecl, indent: str) -> list[str]:
    lines = [f"{indent}provides {i} : {t};" for i, t in d.provides]
    lines += [f"{indent}requires {i} : {t} {k};" for i, t, k in d.requires]
    lines += [f"{indent}param {p} : {t} = {format_value(v)};" for p, t, v in d.params]
    lines += [f"{indent}child {ch};" for ch in d.children]
    lines.append(f"{indent}state {d.state};")
    return lines


def serialize_configuration(c: Configuration) -> str:
    lines = []
    for t in sorted(c.itypes):
        lines.append(f"itype {t};")
    for t in sorted(c.ptypes):
        lines.append(f"ptype {t} {c.ptypes[t]};")
    for comp in sorted(c.components):
        lines.append("")
        lines.append(f"component {comp} {{")
        lines.extend(_component_lines(c, comp, "  "))
        lines.append("}")
    if c.binding or c.delegate:
        lines.append("")
    for ip, ir in sorted(c.binding.items()):
        lines.append(f"bind {c.container[ip]}.{ip} -> {c.container[ir]}.{ir};")
    for i, o in sorted(c.delegate.items()):
        lines.append(f"delegate {c.container[i]}.{i} -> {c.container[o]}.{o};")
    return "\n".join(lines).lstrip("\n") + "\n"


def _edit_lines(e, indent: str) -> list[str]:
    if isinstance(e, Instantiate):
        return ([f"{indent}instantiate {e.decl.name} {{"] + _decl_lines(e.decl, indent + "  ")
                + [f"{indent}}}"])
    return [f"{indent}{e};"]


def serialize_reconfiguration(op: ReconfigurationDef) -> str:
    head = f"reconfiguration {op.name}"
    if op.guard != TRUE:
        head += f" when {op.guard}"
    lines = [head + " {"]
    for e in op.body:
        lines.extend(_edit_lines(e, "  "))
    lines.append("}")
    return "\n".join(lines) + "\n"


def serialize_model(spec: ModelSpec) -> str:
    parts = [serialize_configuration(spec.initial)]
    for op in spec.reconfigurations.values():
        parts.append(serialize_reconfiguration(op))
    return "\n".join(parts)


# --------------------------------------------------------------------------
# Substitution maps and scenario scripts
# --------------------------------------------------------------------------


def parse_substitution(src: Source, pre: ModelSpec | None = None, post: ModelSpec | None = None) -> SubstMap:
    """Parse ``substitute Old -> New;`` lines and validate them against both models."""
    src = _source(src)
    p = _Parser(src)
    pairs: dict[str, str] = {}
    where: dict[str, Token] = {}
    while p.tok.kind != "eof":
        p.expect("substitute")
        old = p.name("component")
        p.expect("->")
        new = p.name("component")
        p.expect(";")
        if old.text in pairs:
            raise p.error(f"{old.text} is substituted twice", old)
        pairs[old.text] = new.text
        where[old.text] = old
        where[new.text] = new
    try:
        subst = SubstMap(pairs)
        if pre is not None and post is not None:
            validate_subst_map(subst, pre.component_universe(), post.component_universe())
    except SubstMapError as exc:
        tok = next((where[i] for i in exc.ids if i in where), None)
        exc.path = src.path
        exc.line, exc.col = (tok.line, tok.col) if tok else (1, 1)
        exc.args = (f"{src.path}:{exc.line}:{exc.col}: {exc}",)
        raise
    return subst


def serialize_substitution(subst: SubstMap) -> str:
    return "".join(f"substitute {a} -> {b};\n" for a, b in subst.items())


@dataclass(frozen=True)
class ScenarioScript:
    ops: tuple
    expect: tuple | None = None  # e.g. ("bot", "structural") or ("top_p",)

    def __post_init__(self):
        if not self.ops:
            raise ValueError("scenario script is empty")


_EXPECT_KINDS = ("top_p", "bot", "budget_exhausted")


def parse_scenario(src: Source) -> ScenarioScript:
    """Operation names separated by whitespace, newlines or ``;``; optional ``expect <final> [reason]``."""
    src = _source(src)
    ops, expect = [], None
    for lineno, raw in enumerate(src.text.splitlines(), 1):
        line = re.split(r"#|//", raw, maxsplit=1)[0].strip()
        if not line:
            continue
        if line.startswith("expect"):
            words = line.split()[1:]
            if not words or words[0] not in _EXPECT_KINDS or len(words) > 2:
                raise ParseError("expected 'expect top_p|bot|budget_exhausted [reason]'", lineno, 1, src.path)
            expect = tuple(words)
            continue
        for word in re.split(r"[\s;]+", line):
            if not word:
                continue
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", word):
                raise ParseError(f"invalid operation name {word!r}", lineno, raw.find(word) + 1, src.path)
            ops.append(word)
    if not ops:
        raise ParseError("scenario script lists no operations", 1, 1, src.path)
    return ScenarioScript(tuple(ops), expect)
