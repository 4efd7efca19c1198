"""On-the-fly substitutability checking and its exhaustive finite-state oracle."""

from __future__ import annotations

import enum
import json
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import networkx as nx
import numpy as np

from . import fixpoint
from .engine import Graph, ModelSpec, Random, Strategy, pick_up, reachable_graph
from .errors import BoundExceeded, SharedOpMismatch
from .model import Configuration
from .substitution import SubstMap, SubstReport, check_subst, validate_subst_map

log = logging.getLogger(__name__)


class B4(enum.IntEnum):
    """Four-valued verdicts, ordered BOT < BOT_P < TOP_P < TOP."""

    BOT = 0
    BOT_P = 1
    TOP_P = 2
    TOP = 3

    @property
    def label(self) -> str:
        return self.name.lower()


STRUCTURAL = "structural"
DEADLOCK_INTRODUCED = "deadlock-introduced"
STRICT_BROKEN = "strict-simulation-broken"


@dataclass(frozen=True)
class Step:
    index: int
    op: str | None
    op_class: str  # "shared", "new" or "none"
    verdict: B4
    diagnostics: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        return {"step": self.index, "op": self.op, "class": self.op_class, "verdict": self.verdict.label}


@dataclass(frozen=True)
class Final:
    """Outcome of a run: ``top_p``, ``bot`` (with a reason) or ``budget_exhausted``."""

    kind: str
    step: int
    reason: str | None = None
    witness: tuple = ()
    last: B4 | None = None

    def to_json(self) -> dict:
        out: dict = {"final": self.kind, "step": self.step}
        if self.kind == "bot":
            out["reason"] = self.reason
            out["witness"] = [w.to_json() if hasattr(w, "to_json") else w for w in self.witness]
        elif self.kind == "budget_exhausted":
            out["last"] = self.last.label if self.last is not None else None
        return out


@dataclass
class VerdictTrace:
    steps: list
    final: Final

    def verdicts(self) -> list[B4]:
        return [s.verdict for s in self.steps]

    def to_jsonl(self) -> str:
        lines = [json.dumps(s.to_json(), sort_keys=False) for s in self.steps]
        lines.append(json.dumps(self.final.to_json(), sort_keys=False))
        return "\n".join(lines) + "\n"

    def check(self) -> None:
        """Assert the trace grammar (BOT only last, verdict fixed by op class)."""
        for i, s in enumerate(self.steps):
            if s.verdict is B4.BOT:
                assert i == len(self.steps) - 1, "BOT must be the last verdict"
                assert self.final.kind == "bot"
            elif s.op_class == "new":
                assert s.verdict is B4.BOT_P
            elif s.op_class == "shared":
                assert s.verdict is B4.TOP_P
            assert s.verdict is not B4.TOP, "the semi-algorithm never concludes TOP"
        if self.final.kind == "bot":
            assert self.steps and self.steps[-1].verdict is B4.BOT


class PairedSystem:
    """Pre-substitution model, post-substitution model and the substitution linking them.

    Shared reconfigurations are matched by name.  Their bodies are expected to
    agree once pre-level component names are renamed through ``subst``; any
    disagreement is logged and kept in :attr:`mismatches`, or raised as
    SharedOpMismatch when ``strict`` is set.
    """

    def __init__(self, pre: ModelSpec, post: ModelSpec, subst: SubstMap, strict: bool = False):
        validate_subst_map(subst, pre.component_universe(), post.component_universe())
        self.pre = pre
        self.post = post
        self.subst = subst
        pre_names, post_names = set(pre.names), set(post.names)
        self.shared_ops = sorted(post_names & pre_names)
        self.new_ops = sorted(post_names - pre_names)
        self._new = frozenset(self.new_ops)
        mapping = dict(subst.mapping)
        self.mismatches = [
            n for n in self.shared_ops if post.op(n) != pre.op(n).rename(mapping)
        ]
        if self.mismatches:
            if strict:
                raise SharedOpMismatch(self.mismatches)
            log.warning("shared reconfigurations differ between levels: %s", ", ".join(self.mismatches))
        self._subst_cache: dict = {}

    def is_new(self, op: str) -> bool:
        return op in self._new

    def subst_report(self, c_R: Configuration, c_A: Configuration) -> SubstReport:
        key = (c_R, c_A)
        report = self._subst_cache.get(key)
        if report is None:
            report = check_subst(c_R, c_A, self.subst, check_pre=False)
            self._subst_cache[key] = report
        return report


# --------------------------------------------------------------------------
# Semi-algorithm
# --------------------------------------------------------------------------


def run_semi_algorithm(ps: PairedSystem, strategy: Strategy, max_steps: int) -> VerdictTrace:
    """Walk both levels in lockstep, emitting BOT_P for new ops and TOP_P for matched shared ops.

    Ends with ``top_p`` when both levels deadlock together, ``bot`` on a
    structural, deadlock or strict-simulation failure, and
    ``budget_exhausted`` once ``max_steps`` operations have been applied.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    c_R, c_A = ps.post.initial, ps.pre.initial
    steps: list[Step] = []
    applied = 0
    last: B4 | None = None
    while True:
        report = ps.subst_report(c_R, c_A)
        if not report.holds:
            steps.append(Step(applied, None, "none", B4.BOT, {"subst": report.to_json()}))
            return VerdictTrace(steps, Final("bot", applied, STRUCTURAL, report.violations))
        enabled_r = ps.post.enabled(c_R)
        enabled_a = ps.pre.enabled(c_A)
        diag = {"enabled_post": enabled_r, "enabled_pre": enabled_a}
        if not enabled_r:
            if not enabled_a:
                return VerdictTrace(steps, Final("top_p", applied, last=B4.TOP_P))
            steps.append(Step(applied, None, "none", B4.BOT, diag))
            return VerdictTrace(steps, Final("bot", applied, DEADLOCK_INTRODUCED, tuple(enabled_a)))
        if applied >= max_steps:
            return VerdictTrace(steps, Final("budget_exhausted", applied, last=last))
        ope = pick_up(enabled_r, strategy)
        c_R = ps.post.apply(c_R, ope)
        if ps.is_new(ope):
            last = B4.BOT_P
            steps.append(Step(applied, ope, "new", last, diag))
        elif ope in enabled_a:
            c_A = ps.pre.apply(c_A, ope)
            last = B4.TOP_P
            steps.append(Step(applied, ope, "shared", last, diag))
        else:
            steps.append(Step(applied, ope, "shared", B4.BOT, diag))
            return VerdictTrace(steps, Final("bot", applied, STRICT_BROKEN, (ope,)))
        applied += 1


@dataclass
class SweepResult:
    """Structural check over the lockstep product; ``path`` leads to the first failing pair."""

    report: SubstReport
    path: list
    pairs_checked: int

    def to_json(self) -> dict:
        out = self.report.to_json()
        out["path"] = self.path
        out["pairs_checked"] = self.pairs_checked
        return out


def structural_sweep(ps: PairedSystem, state_bound: int) -> SweepResult:
    """Check subst on every pair reachable in lockstep (shared ops on both levels, new ops post only).

    Breadth-first in sorted op order, so a failing pair is reported with a
    shortest path.  Raises BoundExceeded past ``state_bound`` pairs.
    """
    start = (ps.post.initial, ps.pre.initial)
    parents: dict = {start: None}
    queue = deque([start])
    checked = 0
    while queue:
        pair = queue.popleft()
        checked += 1
        report = ps.subst_report(*pair)
        if not report.holds:
            path = []
            while parents[pair] is not None:
                pair, op = parents[pair]
                path.append(op)
            return SweepResult(report, path[::-1], checked)
        c_R, c_A = pair
        enabled_a = set(ps.pre.enabled(c_A))
        for op in ps.post.enabled(c_R):
            if ps.is_new(op):
                nxt = (ps.post.apply(c_R, op), c_A)
            elif op in enabled_a:
                nxt = (ps.post.apply(c_R, op), ps.pre.apply(c_A, op))
            else:
                continue
            if nxt not in parents:
                if len(parents) >= state_bound:
                    raise BoundExceeded(state_bound)
                parents[nxt] = (pair, op)
                queue.append(nxt)
    return SweepResult(SubstReport([]), [], checked)


# --------------------------------------------------------------------------
# Exhaustive oracle
# --------------------------------------------------------------------------


def divergent_nodes(graph: Graph, new_ops: Iterable[str]) -> set[int]:
    """Nodes from which an infinite run of new operations alone is possible."""
    new_ops = set(new_ops)
    g = nx.DiGraph()
    g.add_nodes_from(range(len(graph.nodes)))
    g.add_edges_from((s, t) for s, op, t in graph.edges if op in new_ops)
    on_cycle = set()
    for scc in nx.strongly_connected_components(g):
        node = next(iter(scc))
        if len(scc) > 1 or g.has_edge(node, node):
            on_cycle |= scc
    out = set(on_cycle)
    for n in on_cycle:
        out |= nx.ancestors(g, n)
    return out


def _new_op_lasso(graph: Graph, start: int, new_ops: set) -> list[str]:
    """Labels of one new-op-only run from ``start`` into a cycle (diagnostics)."""
    path, seen = [], {start: 0}
    node = start
    bad = divergent_nodes(graph, new_ops)
    while True:
        for op, t in graph.successors(node):
            if op in new_ops and t in bad:
                path.append(op)
                if t in seen:
                    return path
                seen[t] = len(path)
                node = t
                break
        else:
            return path


@dataclass
class OracleResult:
    simulated: bool
    clause: str | None
    witness: list
    chain: list
    states_post: int
    states_pre: int
    pairs_explored: int
    removals: int
    backend: str
    relation: set = field(repr=False, default_factory=set)
    reasons: dict = field(repr=False, default_factory=dict)

    def to_json(self) -> dict:
        return {
            "simulated": self.simulated,
            "clause": self.clause,
            "witness": self.witness,
            "chain": self.chain,
            "states_post": self.states_post,
            "states_pre": self.states_pre,
            "pairs_explored": self.pairs_explored,
            "removals": self.removals,
        }


def oracle_check(ps: PairedSystem, state_bound: int, scope: str = "reachable",
                 backend: str | None = None) -> OracleResult:
    """Greatest substitutability-based simulation on the finite reachable graphs.

    Seeds the relation with the pairs passing the structural check, the
    deadlock clause and the divergence clause, then removes pairs breaking
    strict or stuttering simulation until stable.  ``scope="reachable"``
    only materialises pairs reachable from the initial pair through the
    simulation obligations; ``scope="full"`` seeds every pair of states.
    """
    g_r = reachable_graph(ps.post, state_bound)
    g_a = reachable_graph(ps.pre, state_bound)
    n_r, n_a = len(g_r.nodes), len(g_a.nodes)
    labels = sorted(set(ps.post.names) | set(ps.pre.names))
    lid = {name: i for i, name in enumerate(labels)}
    is_new = [ps.is_new(name) for name in labels]
    a_succ = [dict(g_a.successors(a)) for a in range(n_a)]
    divergent = divergent_nodes(g_r, ps.new_ops)

    def classify(r: int, a: int) -> int:
        if not ps.subst_report(g_r.nodes[r], g_a.nodes[a]).holds:
            return fixpoint.STRUCTURAL
        if g_r.is_terminal(r) and not g_a.is_terminal(a):
            return fixpoint.DEADLOCK
        if r in divergent:
            return fixpoint.DIVERGENCE
        return fixpoint.KEPT

    seed = np.full(n_r * n_a, fixpoint.UNEXPLORED, dtype=np.int8)
    explored = 0
    if scope == "full":
        for r in range(n_r):
            for a in range(n_a):
                seed[r * n_a + a] = classify(r, a)
        explored = n_r * n_a
    elif scope == "reachable":
        queue = deque([(0, 0)])
        seen = {(0, 0)}
        while queue:
            r, a = queue.popleft()
            code = classify(r, a)
            seed[r * n_a + a] = code
            explored += 1
            if code != fixpoint.KEPT:
                continue
            for op, r2 in g_r.successors(r):
                if ps.is_new(op):
                    nxt = (r2, a)
                elif op in a_succ[a]:
                    nxt = (r2, a_succ[a][op])
                else:
                    continue
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    else:
        raise ValueError(f"unknown scope {scope!r}")

    r_edges = [(s, lid[op], t) for s, op, t in g_r.edges]
    a_edges = [(s, lid[op], t) for s, op, t in g_a.edges]
    backend = backend or fixpoint.BACKEND
    rel, reason, cause, removals = fixpoint.refine(n_r, n_a, r_edges, a_edges, is_new, seed, backend)

    simulated = bool(rel[0])
    clause, witness, chain = None, [], []
    if not simulated:
        clause = fixpoint.REASON_NAMES[int(reason[0])]
        chain = _explain(ps, g_r, g_a, a_succ, labels, reason, cause, n_a)
        witness = chain[-1]["witness"] if chain else []
    relation = {(int(i) // n_a, int(i) % n_a) for i in np.flatnonzero(rel)}
    reasons = {(int(i) // n_a, int(i) % n_a): fixpoint.REASON_NAMES[int(reason[i])]
               for i in np.flatnonzero(reason != fixpoint.KEPT) if reason[i] != fixpoint.UNEXPLORED}
    return OracleResult(simulated, clause, witness, chain, n_r, n_a, explored, removals, backend,
                        relation, reasons)


def _explain(ps, g_r, g_a, a_succ, labels, reason, cause, n_a) -> list[dict]:
    """Follow removal causes from the initial pair down to a clause that failed locally."""
    chain = []
    r, a = 0, 0
    for _ in range(len(reason)):
        code = int(reason[r * n_a + a])
        entry = {"post_state": r, "pre_state": a, "clause": fixpoint.REASON_NAMES[code]}
        chain.append(entry)
        if code == fixpoint.STRUCTURAL:
            report = ps.subst_report(g_r.nodes[r], g_a.nodes[a])
            entry["witness"] = [v.to_json() for v in report.violations]
            break
        if code == fixpoint.DEADLOCK:
            entry["witness"] = [op for op, _ in g_a.successors(a)]
            break
        if code == fixpoint.DIVERGENCE:
            entry["witness"] = _new_op_lasso(g_r, r, set(ps.new_ops))
            break
        op = labels[int(cause[r * n_a + a])]
        entry["op"] = op
        entry["witness"] = [op]
        r2 = dict(g_r.successors(r))[op]
        if code == fixpoint.STUTTERING:
            r = r2
        elif op in a_succ[a]:
            r, a = r2, a_succ[a][op]
        else:
            break
    return chain


# --------------------------------------------------------------------------
# Self-check harness
# --------------------------------------------------------------------------


@dataclass
class ValidationReport:
    oracle: OracleResult
    runs: list  # (seed, VerdictTrace)
    contradictions: list

    @property
    def ok(self) -> bool:
        return not self.contradictions

    def to_json(self) -> dict:
        return {
            "simulated": self.oracle.simulated,
            "clause": self.oracle.clause,
            "runs": [{"seed": s, **t.final.to_json()} for s, t in self.runs],
            "contradictions": self.contradictions,
        }


def cross_validate(ps: PairedSystem, seeds: Iterable[int], max_steps: int, state_bound: int) -> ValidationReport:
    """Check that every BOT returned by the semi-algorithm is confirmed by the oracle."""
    oracle = oracle_check(ps, state_bound)
    runs, contradictions = [], []
    for seed in seeds:
        trace = run_semi_algorithm(ps, Random(seed), max_steps)
        runs.append((seed, trace))
        if trace.final.kind == "bot" and oracle.simulated:
            contradictions.append(
                f"seed {seed}: semi-algorithm returned bot ({trace.final.reason}) but the oracle says simulated"
            )
    return ValidationReport(oracle, runs, contradictions)
