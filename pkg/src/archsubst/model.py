"""Configuration data model: architectural elements and the relations over them.

A :class:`Configuration` is an immutable snapshot ``<Elem, Rel>``.  Element ids
are bare names inside one configuration; the pre/post/shared namespace of an
:class:`Identifier` only becomes meaningful when two levels are compared.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Union

from .errors import WellFormednessError

STARTED = "started"
STOPPED = "stopped"
MANDATORY = "mandatory"
OPTIONAL = "optional"
NAMESPACES = ("pre", "post", "shared")

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

ParamValue = Union[bool, int, str]


def is_name(text: str) -> bool:
    return isinstance(text, str) and _NAME_RE.match(text) is not None


@dataclass(frozen=True, order=True)
class Identifier:
    """A level-qualified element name, used in violation witnesses."""

    namespace: str
    name: str

    def __post_init__(self):
        if not is_name(self.name):
            raise ValueError(f"invalid identifier {self.name!r}")
        if self.namespace not in NAMESPACES:
            raise ValueError(f"invalid namespace {self.namespace!r}")

    @classmethod
    def of(cls, name: str, namespace: str = "shared") -> "Identifier":
        return cls(namespace, name)

    def __str__(self):
        if self.namespace == "shared":
            return self.name
        return f"{self.namespace}:{self.name}"


@dataclass(frozen=True)
class PType:
    """Finite parameter domain: bounded integers, booleans or an enumeration."""

    kind: str
    lo: int | None = None
    hi: int | None = None
    literals: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind == "int":
            if self.lo is None or self.hi is None or self.lo > self.hi:
                raise ValueError(f"bad integer range [{self.lo}..{self.hi}]")
        elif self.kind == "enum":
            if not self.literals or len(set(self.literals)) != len(self.literals):
                raise ValueError("enum type needs distinct literals")
            for lit in self.literals:
                if not is_name(lit) or lit in ("true", "false"):
                    raise ValueError(f"invalid enum literal {lit!r}")
        elif self.kind != "bool":
            raise ValueError(f"unknown parameter type kind {self.kind!r}")

    @classmethod
    def int_range(cls, lo: int, hi: int) -> "PType":
        return cls("int", lo, hi)

    @classmethod
    def boolean(cls) -> "PType":
        return cls("bool")

    @classmethod
    def enum(cls, *literals: str) -> "PType":
        return cls("enum", literals=tuple(literals))

    def contains(self, v) -> bool:
        if self.kind == "bool":
            return isinstance(v, bool)
        if self.kind == "int":
            return isinstance(v, int) and not isinstance(v, bool) and self.lo <= v <= self.hi
        return isinstance(v, str) and v in self.literals

    def values(self) -> list:
        if self.kind == "bool":
            return [False, True]
        if self.kind == "int":
            return list(range(self.lo, self.hi + 1))
        return list(self.literals)

    def __str__(self):
        if self.kind == "bool":
            return "bool"
        if self.kind == "int":
            return f"[{self.lo}..{self.hi}]"
        return "{" + ", ".join(self.literals) + "}"


def value_tag(v: ParamValue) -> tuple:
    # bool is an int subclass; tag values so True and 1 never compare equal
    if isinstance(v, bool):
        return ("b", v)
    if isinstance(v, int):
        return ("i", v)
    return ("e", v)


def format_value(v: ParamValue) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


Pairs = Union[Mapping[str, object], Iterable[tuple]]


def _pairs(table: Pairs) -> list[tuple]:
    if isinstance(table, Mapping):
        return list(table.items())
    return [tuple(p) for p in table]


@dataclass
class ConfigurationDeclaration:
    """Raw element sets and relation tables, before validation.

    Relation tables may be given as mappings or as lists of pairs; lists are
    allowed to contain duplicate sources so partial-function violations can
    be reported instead of silently overwritten.
    """

    components: list = field(default_factory=list)
    req_interfaces: list = field(default_factory=list)
    prov_interfaces: list = field(default_factory=list)
    parameters: list = field(default_factory=list)
    itypes: list = field(default_factory=list)
    ptypes: dict = field(default_factory=dict)
    container: Pairs = field(default_factory=list)
    container_type: Pairs = field(default_factory=list)
    parent: list = field(default_factory=list)
    binding: Pairs = field(default_factory=list)
    delegate: Pairs = field(default_factory=list)
    state: Pairs = field(default_factory=list)
    contingency: Pairs = field(default_factory=list)
    value: Pairs = field(default_factory=list)


def _function(name: str, table: Pairs, domain, codomain=None, total=False) -> dict:
    result: dict = {}
    for src, dst in _pairs(table):
        if src in result:
            raise WellFormednessError(
                f"{name} is not a function", [src], f"{name} maps {src} to more than one image"
            )
        if src not in domain:
            raise WellFormednessError(
                f"{name} references undeclared id", [src], f"{name}: {src} is not in its domain"
            )
        if codomain is not None and dst not in codomain:
            raise WellFormednessError(
                f"{name} references undeclared id", [src, dst], f"{name}: {dst} is not in its codomain"
            )
        result[src] = dst
    if total:
        missing = sorted(set(domain) - set(result))
        if missing:
            raise WellFormednessError(f"{name} is not total", missing, f"{name} undefined on")
    return result


def _unique_set(name: str, items) -> frozenset:
    items = list(items)
    seen = set()
    for it in items:
        if not is_name(it):
            raise WellFormednessError("invalid name", [it], f"{name}: invalid identifier {it!r}")
        if it in seen:
            raise WellFormednessError("duplicate id", [it], f"{name}: duplicate")
        seen.add(it)
    return frozenset(items)


def new_configuration(decl: ConfigurationDeclaration) -> "Configuration":
    """Validate a declaration and build an immutable configuration.

    Only well-formedness is checked here; consistency constraints are the
    business of :mod:`archsubst.consistency`.
    """
    comps = _unique_set("components", decl.components)
    if not comps:
        raise WellFormednessError("components must be non-empty")
    req = _unique_set("req_interfaces", decl.req_interfaces)
    prov = _unique_set("prov_interfaces", decl.prov_interfaces)
    params = _unique_set("parameters", decl.parameters)
    itypes = _unique_set("itypes", decl.itypes)
    ptypes = dict(decl.ptypes)
    _unique_set("ptypes", ptypes)

    # Elem is a disjoint union
    groups = [("components", comps), ("req_interfaces", req), ("prov_interfaces", prov),
              ("parameters", params), ("itypes", itypes), ("ptypes", frozenset(ptypes))]
    owner: dict[str, str] = {}
    for gname, ids in groups:
        for i in ids:
            if i in owner:
                raise WellFormednessError(
                    "element sets are not disjoint", [i], f"{i} is both in {owner[i]} and {gname}"
                )
            owner[i] = gname

    ifaces = req | prov
    holders = ifaces | params
    container = _function("container", decl.container, holders, comps, total=True)
    ctype = _function("container_type", decl.container_type, holders, itypes | frozenset(ptypes), total=True)
    for i in ifaces:
        if ctype[i] not in itypes:
            raise WellFormednessError("container_type maps an interface outside itypes", [i, ctype[i]])
    for p in params:
        if ctype[p] not in ptypes:
            raise WellFormednessError("container_type maps a parameter outside ptypes", [p, ctype[p]])

    parent = set()
    for pair in decl.parent:
        child, par = pair
        for x in (child, par):
            if x not in comps:
                raise WellFormednessError("parent references undeclared id", [child, par])
        parent.add((child, par))

    binding = _function("binding", decl.binding, prov, req)
    delegate = _function("delegate", decl.delegate, ifaces, ifaces)
    state = _function("state", decl.state, comps, total=True)
    for c, s in state.items():
        if s not in (STARTED, STOPPED):
            raise WellFormednessError("invalid state", [c], f"state of {c} must be started or stopped, not {s!r}")
    contingency = _function("contingency", decl.contingency, req, total=True)
    for i, k in contingency.items():
        if k not in (MANDATORY, OPTIONAL):
            raise WellFormednessError("invalid contingency", [i])
    value = _function("value", decl.value, params, total=True)
    for p, v in value.items():
        if not ptypes[ctype[p]].contains(v):
            raise WellFormednessError(
                "value outside its parameter type", [p], f"{p} = {v!r} not in {ptypes[ctype[p]]}"
            )

    return Configuration(
        components=comps,
        req_interfaces=req,
        prov_interfaces=prov,
        parameters=params,
        itypes=itypes,
        ptypes=MappingProxyType(ptypes),
        container=MappingProxyType(container),
        container_type=MappingProxyType(ctype),
        parent=frozenset(parent),
        binding=MappingProxyType(binding),
        delegate=MappingProxyType(delegate),
        state=MappingProxyType(state),
        contingency=MappingProxyType(contingency),
        value=MappingProxyType(value),
    )


def _sorted_items(m: Mapping) -> tuple:
    return tuple(sorted(m.items()))


@dataclass(frozen=True, eq=False)
class Configuration:
    """An immutable, well-formed configuration.  Build it with :func:`new_configuration`."""

    components: frozenset
    req_interfaces: frozenset
    prov_interfaces: frozenset
    parameters: frozenset
    itypes: frozenset
    ptypes: Mapping[str, PType]
    container: Mapping[str, str]
    container_type: Mapping[str, str]
    parent: frozenset
    binding: Mapping[str, str]
    delegate: Mapping[str, str]
    state: Mapping[str, str]
    contingency: Mapping[str, str]
    value: Mapping[str, ParamValue]

    @cached_property
    def key(self) -> tuple:
        """Canonical, order-insensitive representation used for equality and hashing."""
        return (
            tuple(sorted(self.components)),
            tuple(sorted(self.req_interfaces)),
            tuple(sorted(self.prov_interfaces)),
            tuple(sorted(self.parameters)),
            tuple(sorted(self.itypes)),
            tuple(sorted((n, t.kind, t.lo, t.hi, t.literals) for n, t in self.ptypes.items())),
            _sorted_items(self.container),
            _sorted_items(self.container_type),
            tuple(sorted(self.parent)),
            _sorted_items(self.binding),
            _sorted_items(self.delegate),
            _sorted_items(self.state),
            _sorted_items(self.contingency),
            tuple(sorted((p, value_tag(v)) for p, v in self.value.items())),
        )

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @cached_property
    def digest(self) -> str:
        """Stable short hash of the canonical form (independent of PYTHONHASHSEED)."""
        return hashlib.sha1(repr(self.key).encode()).hexdigest()[:12]

    @property
    def interfaces(self) -> frozenset:
        return self.req_interfaces | self.prov_interfaces

    @cached_property
    def _contents(self) -> dict:
        out: dict[str, list] = {c: [] for c in self.components}
        for x, c in self.container.items():
            out[c].append(x)
        return {c: sorted(xs) for c, xs in out.items()}

    def interfaces_of(self, comp: str) -> list[str]:
        return [x for x in self._contents.get(comp, ()) if x in self.req_interfaces or x in self.prov_interfaces]

    def provided_of(self, comp: str) -> list[str]:
        return [x for x in self._contents.get(comp, ()) if x in self.prov_interfaces]

    def required_of(self, comp: str) -> list[str]:
        return [x for x in self._contents.get(comp, ()) if x in self.req_interfaces]

    def params_of(self, comp: str) -> list[str]:
        return [x for x in self._contents.get(comp, ()) if x in self.parameters]

    def parents_of(self, comp: str) -> frozenset:
        return frozenset(p for c, p in self.parent if c == comp)

    def children_of(self, comp: str) -> frozenset:
        return frozenset(c for c, p in self.parent if p == comp)

    def descendants_of(self, comp: str) -> set:
        out: set = set()
        todo = [comp]
        while todo:
            for ch in self.children_of(todo.pop()):
                if ch not in out:
                    out.add(ch)
                    todo.append(ch)
        return out

    def is_composite(self, comp: str) -> bool:
        return any(p == comp for _, p in self.parent)

    def kind_of(self, iface: str) -> str:
        return "prov" if iface in self.prov_interfaces else "req"

    def bound_interfaces(self) -> set:
        return set(self.binding) | set(self.binding.values())

    def to_declaration(self) -> ConfigurationDeclaration:
        """Mutable copy of this configuration's tables (plain dicts and lists)."""
        return ConfigurationDeclaration(
            components=sorted(self.components),
            req_interfaces=sorted(self.req_interfaces),
            prov_interfaces=sorted(self.prov_interfaces),
            parameters=sorted(self.parameters),
            itypes=sorted(self.itypes),
            ptypes=dict(self.ptypes),
            container=dict(self.container),
            container_type=dict(self.container_type),
            parent=sorted(self.parent),
            binding=dict(self.binding),
            delegate=dict(self.delegate),
            state=dict(self.state),
            contingency=dict(self.contingency),
            value=dict(self.value),
        )


def config_equal(a: Configuration, b: Configuration) -> bool:
    return a.key == b.key
