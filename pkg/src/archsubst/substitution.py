"""Substitute reconfiguration maps and the substitutability constraints S1..S12."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Union

from .consistency import Violation, check_consistency
from .errors import PreconditionFailed, SubstMapError
from .model import Configuration, Identifier, is_name, value_tag

CONSTRAINT_IDS = tuple(f"S{i}" for i in range(1, 13))

DESCRIPTIONS = {
    "S1": "old parameters and their types are unchanged",
    "S2": "elements of surviving old components stay in them",
    "S3": "old interfaces and their types are unchanged",
    "S4": "old connections are kept",
    "S5": "a disappearing old component has a substitute",
    "S6": "a substitute keeps the state and the (possibly substituted) parent of the replaced component",
    "S7": "interfaces of replaced components are supplied by their substitutes",
    "S8": "parameters of replaced components live on the substitute or its sub-components",
    "S9": "new components that are not substitutes have a new parent",
    "S10": "new interfaces belong to new components",
    "S11": "new parameters belong to new components",
    "S12": "new connections involve new components",
}


@dataclass(frozen=True)
class SubstMap:
    """Partial injective map from pre-level components to their post-level substitutes."""

    mapping: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        m = dict(self.mapping)
        for k, v in m.items():
            if not (is_name(k) and is_name(v)):
                raise SubstMapError("names", [k, v], f"invalid component name in {k} -> {v}")
        seen: dict[str, str] = {}
        for k, v in sorted(m.items()):
            if v in seen:
                raise SubstMapError("injectivity", [seen[v], k, v], f"{seen[v]} and {k} are both substituted by {v}")
            seen[v] = k
        object.__setattr__(self, "mapping", MappingProxyType(m))

    @classmethod
    def of(cls, pairs: Union[Mapping[str, str], Iterable[tuple]] = ()) -> "SubstMap":
        return cls(dict(pairs))

    def __eq__(self, other):
        return isinstance(other, SubstMap) and dict(self.mapping) == dict(other.mapping)

    def __hash__(self):
        return hash(tuple(sorted(self.mapping.items())))

    def __len__(self):
        return len(self.mapping)

    def get(self, name: str, default=None):
        return self.mapping.get(name, default)

    @property
    def domain(self) -> frozenset:
        return frozenset(self.mapping)

    @property
    def range(self) -> frozenset:
        return frozenset(self.mapping.values())

    def items(self):
        return sorted(self.mapping.items())


def _components(x) -> set:
    return set(x.components) if isinstance(x, Configuration) else set(x)


def validate_subst_map(subst: SubstMap, c_A, c_R) -> None:
    """Check domain, range and injectivity against concrete component sets.

    ``c_A``/``c_R`` may be configurations or plain collections of component
    names (e.g. every component a whole model can mention).
    """
    comps_a, comps_r = _components(c_A), _components(c_R)
    bad = sorted(subst.domain - comps_a)
    if bad:
        raise SubstMapError("domain", bad, "substituted components are not pre-level components")
    bad = sorted(subst.range - comps_r)
    if bad:
        raise SubstMapError("range", bad, "substitutes are not post-level components")
    bad = sorted(subst.range & comps_a)
    if bad:
        raise SubstMapError("range", bad, "substitutes must be new components")


@dataclass(frozen=True)
class SubstReport:
    violations: tuple = ()

    @property
    def holds(self) -> bool:
        return not self.violations

    def ids(self) -> list[str]:
        return sorted({v.id for v in self.violations}, key=lambda s: int(s[1:]))

    def to_json(self) -> dict:
        return {"holds": self.holds, "violations": [v.to_json() for v in self.violations]}


class _Pair:
    """Precomputed views over (c_R, c_A, subst) shared by the constraint checks."""

    def __init__(self, c_R: Configuration, c_A: Configuration, subst: SubstMap):
        self.R, self.A, self.sub = c_R, c_A, subst.mapping
        self.old = c_A.components & c_R.components
        self.gone = c_A.components - c_R.components
        self.new = c_R.components - c_A.components
        self.substitutes = set(self.sub.values())

        def names(c):
            return c.components | c.interfaces | c.parameters | c.itypes | set(c.ptypes)

        self._names_a, self._names_r = names(c_A), names(c_R)

    def ids(self, *names: str) -> tuple:
        out = []
        for n in names:
            in_a, in_r = n in self._names_a, n in self._names_r
            if in_a and in_r:
                ns = "shared"
            elif in_a or (not in_r and n in self.sub):
                ns = "pre"
            else:
                ns = "post"
            out.append(Identifier(ns, n))
        return tuple(out)

    def v(self, cid: str, names, message: str) -> Violation:
        return Violation(cid, self.ids(*names), message)

    def replaced(self):
        """(old component, substitute) pairs where both are present."""
        for c, s in sorted(self.sub.items()):
            if c in self.A.components and s in self.R.components:
                yield c, s


def _s1(p: _Pair):
    A, R = p.A, p.R
    for t in sorted(A.ptypes):
        if t in R.ptypes and R.ptypes[t] != A.ptypes[t]:
            yield p.v("S1", [t], f"parameter type {t} changed from {A.ptypes[t]} to {R.ptypes[t]}")
    for x in sorted(A.parameters):
        if x not in R.parameters:
            yield p.v("S1", [x], f"parameter {x} disappeared")
        elif R.container_type[x] != A.container_type[x]:
            yield p.v("S1", [x], f"type of {x} changed from {A.container_type[x]} to {R.container_type[x]}")
        elif value_tag(R.value[x]) != value_tag(A.value[x]):
            yield p.v("S1", [x], f"value of {x} changed from {A.value[x]!r} to {R.value[x]!r}")


def _s2(p: _Pair):
    A, R = p.A, p.R
    for c in sorted(p.old):
        for x in A.interfaces_of(c) + A.params_of(c):
            if x in R.container and R.container[x] != c:
                yield p.v("S2", [c, x], f"{x} moved from {c} to {R.container[x]}")
            elif x not in R.container:
                yield p.v("S2", [c, x], f"{x} no longer contained in {c}")


def _s3(p: _Pair):
    A, R = p.A, p.R
    for i in sorted(A.interfaces):
        if i not in R.interfaces:
            yield p.v("S3", [i], f"interface {i} disappeared")
        elif R.kind_of(i) != A.kind_of(i):
            yield p.v("S3", [i], f"interface {i} changed kind")
        elif R.container_type[i] != A.container_type[i]:
            yield p.v("S3", [i], f"type of {i} changed from {A.container_type[i]} to {R.container_type[i]}")
        elif i in A.req_interfaces and R.contingency[i] != A.contingency[i]:
            yield p.v("S3", [i], f"contingency of {i} changed")


def _s4(p: _Pair):
    A, R = p.A, p.R
    for ip, ir in sorted(A.binding.items()):
        if R.binding.get(ip) != ir:
            yield p.v("S4", [ip, ir], f"binding {ip} -> {ir} lost")
    for i, o in sorted(A.delegate.items()):
        if R.delegate.get(i) != o:
            yield p.v("S4", [i, o], f"delegation {i} -> {o} lost")


def _s5(p: _Pair):
    for c in sorted(p.gone):
        s = p.sub.get(c)
        if s is None:
            yield p.v("S5", [c], f"{c} disappeared without a substitute")
        elif s not in p.new:
            yield p.v("S5", [c, s], f"{c} disappeared but its substitute {s} is not a new component")


def _s6(p: _Pair):
    A, R = p.A, p.R
    for c, s in p.replaced():
        if A.state[c] != R.state[s]:
            yield p.v("S6", [c, s], f"{s} is {R.state[s]} but {c} was {A.state[c]}")
        expected = {p.sub.get(q, q) for q in A.parents_of(c)}
        actual = set(R.parents_of(s))
        if expected != actual:
            yield p.v(
                "S6", [c, s],
                f"parents of {s} are {sorted(actual)}, expected {sorted(expected)}",
            )


def _s7(p: _Pair):
    A, R = p.A, p.R
    for c, s in p.replaced():
        for i in A.interfaces_of(c):
            if R.container.get(i) != s:
                yield p.v("S7", [c, i], f"{i} of replaced {c} is not supplied by {s}")


def _s8(p: _Pair):
    A, R = p.A, p.R
    for c, s in p.replaced():
        allowed = {s} | R.descendants_of(s)
        for x in A.params_of(c):
            if R.container.get(x) not in allowed:
                yield p.v("S8", [c, x], f"parameter {x} of replaced {c} is not on {s} or its sub-components")


def _s9(p: _Pair):
    R = p.R
    for n in sorted(p.new):
        if n in p.substitutes:
            continue
        if not (R.parents_of(n) & p.new):
            yield p.v("S9", [n], f"new component {n} has no new parent")
            continue
        # parents must eventually bottom out at a substitute
        seen, todo = {n}, [n]
        reached = False
        while todo and not reached:
            for q in R.parents_of(todo.pop()):
                if q in p.substitutes:
                    reached = True
                    break
                if q not in seen:
                    seen.add(q)
                    todo.append(q)
        if not reached:
            yield p.v("S9", [n], f"new component {n} is not nested in any substitute")


def _s10(p: _Pair):
    A, R = p.A, p.R
    for i in sorted(R.interfaces - A.interfaces):
        if R.container[i] not in p.new:
            yield p.v("S10", [i, R.container[i]], f"new interface {i} is on old component {R.container[i]}")


def _s11(p: _Pair):
    A, R = p.A, p.R
    for x in sorted(R.parameters - A.parameters):
        if R.container[x] not in p.new:
            yield p.v("S11", [x, R.container[x]], f"new parameter {x} is on old component {R.container[x]}")


def _s12(p: _Pair):
    A, R = p.A, p.R
    links = [("binding", a, b, A.binding.get(a) == b) for a, b in R.binding.items()]
    links += [("delegation", a, b, A.delegate.get(a) == b) for a, b in R.delegate.items()]
    for kind, a, b, old in sorted(links):
        if old:
            continue
        if R.container[a] not in p.new and R.container[b] not in p.new:
            yield p.v("S12", [a, b], f"new {kind} {a} -> {b} connects only old components")


_CHECKS = (_s1, _s2, _s3, _s4, _s5, _s6, _s7, _s8, _s9, _s10, _s11, _s12)


def check_subst(c_R: Configuration, c_A: Configuration, subst: SubstMap,
                check_pre: bool = True) -> SubstReport:
    """Structural substitutability of ``c_R`` to ``c_A`` under ``subst``.

    Both sides must be consistent (PreconditionFailed otherwise); the S1..S12
    catalogue is then evaluated exhaustively.
    """
    if check_pre:
        for side, c in (("pre", c_A), ("post", c_R)):
            report = check_consistency(c, side)
            if not report.consistent:
                raise PreconditionFailed(side, report)
    clash = sorted(subst.range & c_A.components)
    if clash:
        raise SubstMapError("range", clash, "substitutes must be new components")
    pair = _Pair(c_R, c_A, subst)
    violations = []
    for check in _CHECKS:
        violations.extend(check(pair))
    return SubstReport(tuple(violations))


def subst_holds(c_R: Configuration, c_A: Configuration, subst: SubstMap) -> bool:
    """Short-circuiting form of :func:`check_subst` for already-consistent configurations."""
    if subst.range & c_A.components:
        return False
    pair = _Pair(c_R, c_A, subst)
    for check in _CHECKS:
        for _ in check(pair):
            return False
    return True
