"""Primitive edits, guarded reconfigurations and the transition system they induce."""

from __future__ import annotations

import random as _random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .consistency import check_consistency, is_consistent
from .errors import (
    ArchError,
    BoundExceeded,
    EditFailed,
    EmptyChoiceSet,
    GuardFailed,
    InconsistentResult,
    ScriptExhausted,
    ScriptMismatch,
    StrategyError,
    UnknownOperation,
    WellFormednessError,
)
from .model import (
    MANDATORY,
    STARTED,
    STOPPED,
    Configuration,
    ConfigurationDeclaration,
    ParamValue,
    format_value,
    is_name,
    new_configuration,
    value_tag,
)

# --------------------------------------------------------------------------
# Guards
# --------------------------------------------------------------------------

COMPARATORS = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


class Guard:
    """Quantifier-free condition on the current configuration."""

    precedence = 3

    def holds(self, c: Configuration) -> bool:
        raise NotImplementedError

    def rename(self, mapping: dict) -> "Guard":
        return self

    def _wrap(self, child: "Guard") -> str:
        # nested and/or are always parenthesised so printing and parsing agree on structure
        text = str(child)
        return f"({text})" if child.precedence < self.precedence or child.precedence < 2 else text


@dataclass(frozen=True)
class Const(Guard):
    value: bool

    def holds(self, c):
        return self.value

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Present(Guard):
    component: str

    def holds(self, c):
        return self.component in c.components

    def rename(self, mapping):
        return Present(mapping.get(self.component, self.component))

    def __str__(self):
        return f"present({self.component})"


@dataclass(frozen=True)
class Bound(Guard):
    """True when the interface takes part in a binding, on either side."""

    interface: str

    def holds(self, c):
        return self.interface in c.binding or self.interface in c.binding.values()

    def __str__(self):
        return f"bound({self.interface})"


@dataclass(frozen=True)
class InState(Guard):
    component: str
    state: str

    def holds(self, c):
        return c.state.get(self.component) == self.state

    def rename(self, mapping):
        return InState(mapping.get(self.component, self.component), self.state)

    def __str__(self):
        return f"{self.state}({self.component})"


@dataclass(frozen=True)
class Compare(Guard):
    """Parameter comparison against a constant; false when the parameter is absent."""

    param: str
    op: str
    value: ParamValue

    def holds(self, c):
        if self.param not in c.value:
            return False
        current = c.value[self.param]
        if self.op in ("==", "!="):
            return COMPARATORS[self.op](value_tag(current), value_tag(self.value))
        if isinstance(current, bool) or not isinstance(current, int):
            return False
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            return False
        return COMPARATORS[self.op](current, self.value)

    def __str__(self):
        return f"{self.param} {self.op} {format_value(self.value)}"


@dataclass(frozen=True)
class Not(Guard):
    operand: Guard
    precedence = 2

    def holds(self, c):
        return not self.operand.holds(c)

    def rename(self, mapping):
        return Not(self.operand.rename(mapping))

    def __str__(self):
        return "not " + self._wrap(self.operand)


@dataclass(frozen=True)
class And(Guard):
    operands: tuple
    precedence = 1

    def holds(self, c):
        return all(g.holds(c) for g in self.operands)

    def rename(self, mapping):
        return And(tuple(g.rename(mapping) for g in self.operands))

    def __str__(self):
        return " and ".join(self._wrap(g) for g in self.operands)


@dataclass(frozen=True)
class Or(Guard):
    operands: tuple
    precedence = 0

    def holds(self, c):
        return any(g.holds(c) for g in self.operands)

    def rename(self, mapping):
        return Or(tuple(g.rename(mapping) for g in self.operands))

    def __str__(self):
        return " or ".join(self._wrap(g) for g in self.operands)


TRUE = Const(True)

# --------------------------------------------------------------------------
# Primitive edits
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ComponentDecl:
    """Declaration of one component with the elements it contains."""

    name: str
    provides: tuple = ()  # (interface, itype)
    requires: tuple = ()  # (interface, itype, contingency)
    params: tuple = ()  # (parameter, ptype, value)
    children: tuple = ()
    state: str = STOPPED

    def rename(self, mapping: dict) -> "ComponentDecl":
        return ComponentDecl(
            mapping.get(self.name, self.name),
            self.provides,
            self.requires,
            self.params,
            tuple(mapping.get(ch, ch) for ch in self.children),
            self.state,
        )


class _Draft:
    """Mutable working copy of a configuration while a reconfiguration body runs."""

    def __init__(self, c: Configuration):
        self.components = set(c.components)
        self.req = set(c.req_interfaces)
        self.prov = set(c.prov_interfaces)
        self.params = set(c.parameters)
        self.itypes = set(c.itypes)
        self.ptypes = dict(c.ptypes)
        self.container = dict(c.container)
        self.ctype = dict(c.container_type)
        self.parent = set(c.parent)
        self.binding = dict(c.binding)
        self.delegate = dict(c.delegate)
        self.state = dict(c.state)
        self.contingency = dict(c.contingency)
        self.value = dict(c.value)

    def names(self) -> set:
        return self.components | self.req | self.prov | self.params | self.itypes | set(self.ptypes)

    def declaration(self) -> ConfigurationDeclaration:
        return ConfigurationDeclaration(
            components=list(self.components),
            req_interfaces=list(self.req),
            prov_interfaces=list(self.prov),
            parameters=list(self.params),
            itypes=list(self.itypes),
            ptypes=self.ptypes,
            container=self.container,
            container_type=self.ctype,
            parent=list(self.parent),
            binding=self.binding,
            delegate=self.delegate,
            state=self.state,
            contingency=self.contingency,
            value=self.value,
        )


def _qualified(comp, iface) -> str:
    return f"{comp}.{iface}" if comp else iface


class Edit:
    """A primitive architectural edit.  ``__str__`` is the one-line DSL form."""

    def apply_to(self, d: _Draft) -> None:
        raise NotImplementedError

    def rename(self, mapping: dict) -> "Edit":
        return self

    def fail(self, reason: str):
        raise EditFailed(str(self), reason)

    def _need_component(self, d: _Draft, comp: str):
        if comp not in d.components:
            self.fail(f"no component {comp}")

    def _need_interface(self, d: _Draft, comp, iface, kinds: tuple):
        if not any(iface in k for k in kinds):
            self.fail(f"no such interface {iface}")
        if comp is not None and d.container.get(iface) != comp:
            self.fail(f"{iface} is not supplied by {comp}")


@dataclass(frozen=True)
class Instantiate(Edit):
    decl: ComponentDecl

    def apply_to(self, d):
        decl = self.decl
        taken = d.names()
        new_names = [decl.name] + [p[0] for p in decl.provides] + [r[0] for r in decl.requires] + [
            p[0] for p in decl.params
        ]
        if len(set(new_names)) != len(new_names):
            self.fail("duplicate names in declaration")
        for n in new_names:
            if n in taken:
                self.fail(f"{n} already exists")
        d.components.add(decl.name)
        d.state[decl.name] = decl.state
        for iface, itype in decl.provides:
            if itype in d.ptypes:
                self.fail(f"{itype} is a parameter type")
            d.itypes.add(itype)
            d.prov.add(iface)
            d.container[iface] = decl.name
            d.ctype[iface] = itype
        for iface, itype, cont in decl.requires:
            if itype in d.ptypes:
                self.fail(f"{itype} is a parameter type")
            d.itypes.add(itype)
            d.req.add(iface)
            d.container[iface] = decl.name
            d.ctype[iface] = itype
            d.contingency[iface] = cont
        for pname, ptype, v in decl.params:
            if ptype not in d.ptypes:
                self.fail(f"unknown parameter type {ptype}")
            if not d.ptypes[ptype].contains(v):
                self.fail(f"{pname} = {format_value(v)} outside {d.ptypes[ptype]}")
            d.params.add(pname)
            d.container[pname] = decl.name
            d.ctype[pname] = ptype
            d.value[pname] = v
        for ch in decl.children:
            if ch not in d.components:
                self.fail(f"no component {ch}")
            d.parent.add((ch, decl.name))

    def rename(self, mapping):
        return Instantiate(self.decl.rename(mapping))

    def __str__(self):
        return f"instantiate {self.decl.name} {{ ... }}"


@dataclass(frozen=True)
class Destroy(Edit):
    component: str

    def apply_to(self, d):
        comp = self.component
        self._need_component(d, comp)
        if d.state[comp] != STOPPED:
            self.fail(f"{comp} must be stopped")
        if any(comp in pair for pair in d.parent):
            self.fail(f"{comp} still has parent/child links")
        owned = [x for x, c in d.container.items() if c == comp]
        linked = set(d.binding) | set(d.binding.values()) | set(d.delegate) | set(d.delegate.values())
        busy = sorted(x for x in owned if x in linked)
        if busy:
            self.fail(f"interfaces still connected: {', '.join(busy)}")
        for x in owned:
            del d.container[x]
            del d.ctype[x]
            d.req.discard(x)
            d.prov.discard(x)
            d.params.discard(x)
            d.contingency.pop(x, None)
            d.value.pop(x, None)
        d.components.discard(comp)
        del d.state[comp]

    def rename(self, mapping):
        return Destroy(mapping.get(self.component, self.component))

    def __str__(self):
        return f"destroy {self.component}"


@dataclass(frozen=True)
class AddChild(Edit):
    child: str
    parent: str

    def apply_to(self, d):
        self._need_component(d, self.child)
        self._need_component(d, self.parent)
        if (self.child, self.parent) in d.parent:
            self.fail("already a child")
        d.parent.add((self.child, self.parent))

    def rename(self, mapping):
        return AddChild(mapping.get(self.child, self.child), mapping.get(self.parent, self.parent))

    def __str__(self):
        return f"add {self.child} to {self.parent}"


@dataclass(frozen=True)
class RemoveChild(Edit):
    child: str
    parent: str

    def apply_to(self, d):
        if (self.child, self.parent) not in d.parent:
            self.fail(f"{self.child} is not a child of {self.parent}")
        d.parent.discard((self.child, self.parent))

    def rename(self, mapping):
        return RemoveChild(mapping.get(self.child, self.child), mapping.get(self.parent, self.parent))

    def __str__(self):
        return f"remove {self.child} from {self.parent}"


@dataclass(frozen=True)
class Bind(Edit):
    prov_component: str | None
    prov: str
    req_component: str | None
    req: str

    def apply_to(self, d):
        self._need_interface(d, self.prov_component, self.prov, (d.prov,))
        self._need_interface(d, self.req_component, self.req, (d.req,))
        if self.prov in d.binding:
            self.fail(f"{self.prov} is already bound")
        d.binding[self.prov] = self.req

    def rename(self, mapping):
        return Bind(mapping.get(self.prov_component, self.prov_component), self.prov,
                    mapping.get(self.req_component, self.req_component), self.req)

    def __str__(self):
        return f"bind {_qualified(self.prov_component, self.prov)} -> {_qualified(self.req_component, self.req)}"


@dataclass(frozen=True)
class Unbind(Edit):
    prov_component: str | None
    prov: str

    def apply_to(self, d):
        self._need_interface(d, self.prov_component, self.prov, (d.prov,))
        if self.prov not in d.binding:
            self.fail(f"{self.prov} is not bound")
        del d.binding[self.prov]

    def rename(self, mapping):
        return Unbind(mapping.get(self.prov_component, self.prov_component), self.prov)

    def __str__(self):
        return f"unbind {_qualified(self.prov_component, self.prov)}"


@dataclass(frozen=True)
class Delegate(Edit):
    inner_component: str | None
    inner: str
    outer_component: str | None
    outer: str

    def apply_to(self, d):
        self._need_interface(d, self.inner_component, self.inner, (d.prov, d.req))
        self._need_interface(d, self.outer_component, self.outer, (d.prov, d.req))
        if self.inner in d.delegate:
            self.fail(f"{self.inner} is already delegated")
        d.delegate[self.inner] = self.outer

    def rename(self, mapping):
        return Delegate(mapping.get(self.inner_component, self.inner_component), self.inner,
                        mapping.get(self.outer_component, self.outer_component), self.outer)

    def __str__(self):
        return (f"delegate {_qualified(self.inner_component, self.inner)}"
                f" -> {_qualified(self.outer_component, self.outer)}")


@dataclass(frozen=True)
class Undelegate(Edit):
    inner_component: str | None
    inner: str

    def apply_to(self, d):
        self._need_interface(d, self.inner_component, self.inner, (d.prov, d.req))
        if self.inner not in d.delegate:
            self.fail(f"{self.inner} is not delegated")
        del d.delegate[self.inner]

    def rename(self, mapping):
        return Undelegate(mapping.get(self.inner_component, self.inner_component), self.inner)

    def __str__(self):
        return f"undelegate {_qualified(self.inner_component, self.inner)}"


@dataclass(frozen=True)
class Start(Edit):
    component: str

    def apply_to(self, d):
        self._need_component(d, self.component)
        d.state[self.component] = STARTED

    def rename(self, mapping):
        return Start(mapping.get(self.component, self.component))

    def __str__(self):
        return f"start {self.component}"


@dataclass(frozen=True)
class Stop(Edit):
    component: str

    def apply_to(self, d):
        self._need_component(d, self.component)
        d.state[self.component] = STOPPED

    def rename(self, mapping):
        return Stop(mapping.get(self.component, self.component))

    def __str__(self):
        return f"stop {self.component}"


@dataclass(frozen=True)
class Literal:
    value: ParamValue

    def evaluate(self, d: _Draft, edit: Edit) -> ParamValue:
        return self.value

    def __str__(self):
        return format_value(self.value)


@dataclass(frozen=True)
class Offset:
    """``param + delta`` (delta may be negative)."""

    param: str
    delta: int

    def evaluate(self, d: _Draft, edit: Edit) -> ParamValue:
        if self.param not in d.value:
            edit.fail(f"no parameter {self.param}")
        base = d.value[self.param]
        if isinstance(base, bool) or not isinstance(base, int):
            edit.fail(f"{self.param} is not an integer")
        return base + self.delta

    def __str__(self):
        sign = "+" if self.delta >= 0 else "-"
        return f"{self.param} {sign} {abs(self.delta)}"


@dataclass(frozen=True)
class SetValue(Edit):
    param: str
    expr: Literal | Offset

    def apply_to(self, d):
        if self.param not in d.params:
            self.fail(f"no parameter {self.param}")
        v = self.expr.evaluate(d, self)
        ptype = d.ptypes[d.ctype[self.param]]
        if not ptype.contains(v):
            self.fail(f"{format_value(v)} outside {ptype}")
        d.value[self.param] = v

    def __str__(self):
        return f"set {self.param} := {self.expr}"


# --------------------------------------------------------------------------
# Reconfigurations and models
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ReconfigurationDef:
    name: str
    guard: Guard
    body: tuple

    def __post_init__(self):
        if not is_name(self.name):
            raise ValueError(f"invalid reconfiguration name {self.name!r}")
        if not self.body:
            raise ValueError(f"reconfiguration {self.name} has an empty body")

    def rename(self, mapping: dict) -> "ReconfigurationDef":
        """Copy with component names substituted (used to compare levels)."""
        return ReconfigurationDef(self.name, self.guard.rename(mapping), tuple(e.rename(mapping) for e in self.body))


def apply(c: Configuration, ope: ReconfigurationDef) -> Configuration:
    """Run ``ope`` atomically on ``c``.

    Raises GuardFailed, EditFailed or InconsistentResult; nothing is partially applied.
    """
    if not ope.guard.holds(c):
        raise GuardFailed(ope.name)
    draft = _Draft(c)
    for edit in ope.body:
        edit.apply_to(draft)
    try:
        target = new_configuration(draft.declaration())
    except WellFormednessError as exc:
        raise EditFailed(ope.name, str(exc)) from exc
    if not is_consistent(target):
        raise InconsistentResult(ope.name, check_consistency(target))
    return target


class InconsistentModel(ArchError):
    def __init__(self, report):
        self.report = report
        super().__init__("initial configuration is not consistent: " + ", ".join(report.ids()))


class ModelSpec:
    """Initial configuration plus a catalogue of named reconfigurations (one level)."""

    def __init__(self, initial: Configuration, reconfigurations: Iterable[ReconfigurationDef] = (),
                 check: bool = True):
        self.initial = initial
        self.reconfigurations: dict[str, ReconfigurationDef] = {}
        for op in reconfigurations:
            if op.name in self.reconfigurations:
                raise ValueError(f"duplicate reconfiguration {op.name}")
            self.reconfigurations[op.name] = op
        if check:
            report = check_consistency(initial)
            if not report.consistent:
                raise InconsistentModel(report)
        self._cache: dict = {}

    @property
    def names(self) -> list[str]:
        return sorted(self.reconfigurations)

    def op(self, name: str) -> ReconfigurationDef:
        try:
            return self.reconfigurations[name]
        except KeyError:
            raise UnknownOperation(name) from None

    def apply(self, c: Configuration, name: str) -> Configuration:
        key = (c, name)
        hit = self._cache.get(key)
        if hit is None:
            try:
                hit = apply(c, self.op(name))
            except (GuardFailed, EditFailed, InconsistentResult) as exc:
                hit = exc
            self._cache[key] = hit
        if isinstance(hit, Exception):
            raise hit
        return hit

    def enabled(self, c: Configuration, names: Iterable[str] | None = None) -> list[str]:
        names = self.names if names is None else sorted(set(names))
        out = []
        for n in names:
            self.op(n)
            try:
                self.apply(c, n)
            except (GuardFailed, EditFailed, InconsistentResult):
                continue
            out.append(n)
        return out

    def successors(self, c: Configuration) -> list[tuple[str, Configuration]]:
        return [(n, self.apply(c, n)) for n in self.enabled(c)]

    def component_universe(self) -> set:
        """Every component name the model can ever mention."""
        names = set(self.initial.components)
        for op in self.reconfigurations.values():
            for e in op.body:
                if isinstance(e, Instantiate):
                    names.add(e.decl.name)
        return names


def enabled(spec: ModelSpec, c: Configuration, names: Iterable[str] | None = None) -> list[str]:
    """Names (sorted) whose guard holds on ``c`` and whose application yields a consistent configuration."""
    return spec.enabled(c, names)


# --------------------------------------------------------------------------
# Pick-up strategies
# --------------------------------------------------------------------------


class Strategy:
    def choose(self, options: list[str]) -> str:
        raise NotImplementedError


class Scripted(Strategy):
    """Consume a fixed list of operation names in order."""

    def __init__(self, names: Sequence[str]):
        self.names = list(names)
        self.position = 0

    def choose(self, options):
        if self.position >= len(self.names):
            raise ScriptExhausted()
        name = self.names[self.position]
        if name not in options:
            raise ScriptMismatch(options, name)
        self.position += 1
        return name

    @property
    def remaining(self) -> int:
        return len(self.names) - self.position


class Random(Strategy):
    """Seeded uniform choice; reproducible for a given seed."""

    def __init__(self, seed: int):
        self.seed = seed
        self._rng = _random.Random(seed)

    def choose(self, options):
        return self._rng.choice(sorted(options))


class Interactive(Strategy):
    """Delegate the choice to a callable (e.g. a prompt) given the sorted options."""

    def __init__(self, channel: Callable[[list[str]], str]):
        self.channel = channel

    def choose(self, options):
        return self.channel(list(options))


def pick_up(options: Iterable[str], strategy: Strategy) -> str:
    options = sorted(set(options))
    if not options:
        raise EmptyChoiceSet()
    choice = strategy.choose(options)
    if choice not in options:
        raise StrategyError(f"strategy chose {choice!r}, which is not enabled")
    return choice


# --------------------------------------------------------------------------
# Paths and the reachable graph
# --------------------------------------------------------------------------


@dataclass
class Path:
    """Evolution path; entry 0 is the initial configuration with no label."""

    steps: list = field(default_factory=list)

    @property
    def configurations(self) -> list[Configuration]:
        return [c for c, _ in self.steps]

    @property
    def labels(self) -> list[str]:
        return [op for _, op in self.steps[1:]]

    def __len__(self):
        return len(self.steps)


def run_path(spec: ModelSpec, strategy: Strategy, max_steps: int) -> Path:
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    c = spec.initial
    path = Path([(c, None)])
    for _ in range(max_steps):
        options = spec.enabled(c)
        if not options:
            break
        ope = pick_up(options, strategy)
        c = spec.apply(c, ope)
        path.steps.append((c, ope))
    return path


@dataclass
class Graph:
    nodes: list
    edges: list  # (source index, op name, target index)
    index: dict

    @property
    def initial(self) -> int:
        return 0

    def successors(self, i: int) -> list[tuple[str, int]]:
        return self._succ[i]

    def __post_init__(self):
        self._succ: list[list] = [[] for _ in self.nodes]
        for s, op, t in self.edges:
            self._succ[s].append((op, t))

    def is_terminal(self, i: int) -> bool:
        return not self._succ[i]

    def to_dot(self, name: str = "reachable") -> str:
        lines = [f"digraph {name} {{"]
        for i, c in enumerate(self.nodes):
            shape = ', shape="doublecircle"' if i == 0 else ""
            lines.append(f'  n{i} [label="{c.digest}"{shape}];')
        for s, op, t in self.edges:
            lines.append(f'  n{s} -> n{t} [label="{op}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def reachable_graph(spec: ModelSpec, state_bound: int) -> Graph:
    """Breadth-first closure of ``apply`` from the initial configuration.

    Nodes are numbered in discovery order, operations are tried in sorted
    name order, so the result never depends on a pick-up strategy.
    """
    if state_bound < 1:
        raise ValueError("state_bound must be >= 1")
    nodes = [spec.initial]
    index = {spec.initial: 0}
    edges = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for op, target in spec.successors(nodes[i]):
            j = index.get(target)
            if j is None:
                if len(nodes) >= state_bound:
                    raise BoundExceeded(state_bound)
                j = len(nodes)
                nodes.append(target)
                index[target] = j
                queue.append(j)
            edges.append((i, op, j))
    return Graph(nodes, edges, index)


__all__ = [
    "Guard", "Const", "Present", "Bound", "InState", "Compare", "Not", "And", "Or", "TRUE",
    "ComponentDecl", "Edit", "Instantiate", "Destroy", "AddChild", "RemoveChild", "Bind", "Unbind",
    "Delegate", "Undelegate", "Start", "Stop", "SetValue", "Literal", "Offset",
    "ReconfigurationDef", "ModelSpec", "InconsistentModel", "apply", "enabled",
    "Strategy", "Scripted", "Random", "Interactive", "pick_up",
    "Path", "run_path", "Graph", "reachable_graph", "MANDATORY",
]
