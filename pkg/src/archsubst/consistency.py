"""Architectural consistency constraints CC1..CC7 with violation witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from .model import MANDATORY, STARTED, Configuration, Identifier

CONSTRAINT_IDS = ("CC1", "CC2", "CC3", "CC4", "CC5", "CC6", "CC7")

DESCRIPTIONS = {
    "CC1": "every component supplies at least one provided interface",
    "CC2": "composite components have no parameters",
    "CC3": "the parent relation is acyclic",
    "CC4": "bound interfaces share a type, have distinct containers and a common enclosing composite",
    "CC5": "delegated interfaces are not bound",
    "CC6": "delegation links a sub-component interface to one same-kind, same-type interface of its parent",
    "CC7": "started components have their mandatory required interfaces bound or delegated",
}


@dataclass(frozen=True)
class Violation:
    id: str
    witness: tuple[Identifier, ...]
    message: str

    def to_json(self) -> dict:
        return {"id": self.id, "witness": [str(w) for w in self.witness], "message": self.message}


@dataclass(frozen=True)
class ConsistencyReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def consistent(self) -> bool:
        return not self.violations

    def ids(self) -> list[str]:
        return sorted({v.id for v in self.violations})

    def to_json(self) -> dict:
        return {"consistent": self.consistent, "violations": [v.to_json() for v in self.violations]}


def _w(*names: str, ns: str = "shared") -> tuple[Identifier, ...]:
    return tuple(Identifier(ns, n) for n in names)


def _cc1(c: Configuration, ns):
    for comp in sorted(c.components):
        if not c.provided_of(comp):
            yield Violation("CC1", _w(comp, ns=ns), f"{comp} supplies no provided interface")


def _cc2(c: Configuration, ns):
    for comp in sorted(c.components):
        params = c.params_of(comp)
        if params and c.is_composite(comp):
            yield Violation("CC2", _w(comp, *params, ns=ns), f"composite {comp} has parameters {', '.join(params)}")


def _cc3(c: Configuration, ns):
    if not c.parent:
        return
    g = nx.DiGraph()
    g.add_nodes_from(c.components)
    g.add_edges_from(c.parent)
    cyclic = []
    for scc in nx.strongly_connected_components(g):
        node = next(iter(scc))
        if len(scc) > 1 or g.has_edge(node, node):
            cyclic.append(sorted(scc))
    for nodes in sorted(cyclic):
        yield Violation("CC3", _w(*nodes, ns=ns), f"parent cycle through {', '.join(nodes)}")


def _cc4(c: Configuration, ns):
    for ip, ir in sorted(c.binding.items()):
        cp, cr = c.container[ip], c.container[ir]
        problems = []
        if c.container_type[ip] != c.container_type[ir]:
            problems.append(f"types differ ({c.container_type[ip]} vs {c.container_type[ir]})")
        if cp == cr:
            problems.append(f"both supplied by {cp}")
        pp, pr = c.parents_of(cp), c.parents_of(cr)
        # top-level components are children of an implicit root
        if not ((not pp and not pr) or (pp & pr)):
            problems.append(f"{cp} and {cr} are not sub-components of a common composite")
        if problems:
            yield Violation("CC4", _w(ip, ir, ns=ns), f"binding {ip} -> {ir}: " + "; ".join(problems))


def _cc5(c: Configuration, ns):
    bound = c.bound_interfaces()
    for i in sorted(c.delegate):
        if i in bound:
            yield Violation("CC5", _w(i, ns=ns), f"{i} is both delegated and bound")


def _cc6(c: Configuration, ns):
    for inner, outer in sorted(c.delegate.items()):
        problems = []
        if c.kind_of(inner) != c.kind_of(outer):
            problems.append("provided/required kinds differ")
        if c.container_type[inner] != c.container_type[outer]:
            problems.append(f"types differ ({c.container_type[inner]} vs {c.container_type[outer]})")
        ci, co = c.container[inner], c.container[outer]
        if (ci, co) not in c.parent:
            problems.append(f"{co} is not a parent of {ci}")
        if problems:
            yield Violation("CC6", _w(inner, outer, ns=ns), f"delegation {inner} -> {outer}: " + "; ".join(problems))


def _cc7(c: Configuration, ns):
    satisfied = set(c.binding.values()) | set(c.delegate)
    for comp in sorted(c.components):
        if c.state[comp] != STARTED:
            continue
        missing = [r for r in c.required_of(comp) if c.contingency[r] == MANDATORY and r not in satisfied]
        if missing:
            yield Violation(
                "CC7", _w(comp, *missing, ns=ns),
                f"{comp} is started but mandatory {', '.join(missing)} neither bound nor delegated",
            )


_CHECKS = (_cc1, _cc2, _cc3, _cc4, _cc5, _cc6, _cc7)


def check_consistency(c: Configuration, namespace: str = "shared") -> ConsistencyReport:
    """Evaluate the whole catalogue, in CC1..CC7 order, without stopping early."""
    violations = []
    for check in _CHECKS:
        violations.extend(check(c, namespace))
    return ConsistencyReport(tuple(violations))


def is_consistent(c: Configuration) -> bool:
    for check in _CHECKS:
        for _ in check(c, "shared"):
            return False
    return True
