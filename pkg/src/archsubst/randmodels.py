"""Random paired systems for cross-checking the semi-algorithm against the oracle.

A generated system is a hub ``H`` with a client and up to two optional
satellites, plus bounded integer parameters on the hub.  The post level
substitutes the hub (either a new version or a composite with a ``Core`` and
an ``Aux`` child) and possibly a satellite, adds new operations, and may carry
injected faults that break one clause of the simulation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .dsl import parse_model, parse_substitution
from .engine import reachable_graph
from .errors import BoundExceeded
from .simulation import PairedSystem

FAULTS = ("drop_instantiate", "weaker_guard", "blocked_op", "dropped_op", "wrong_value", "stutter", "livelock")


@dataclass
class GeneratedSystem:
    seed: int
    pre_text: str
    post_text: str
    subst_text: str
    faults: list = field(default_factory=list)

    def build(self) -> PairedSystem:
        pre = parse_model(self.pre_text)
        post = parse_model(self.post_text)
        return PairedSystem(pre, post, parse_substitution(self.subst_text, pre, post))


@dataclass
class _Shape:
    sats: int
    params: list  # (name, hi, initial)
    present: list  # satellite initially present
    stoppable: list
    composite: bool
    sub_sat: bool
    extra: dict  # op name -> extra guard atom (pre level)
    faults: list
    aux_guarded: bool


def _sat(shape: _Shape, i: int, post: bool) -> str:
    return f"S{i}_R" if post and shape.sub_sat and i == 1 else f"S{i}"


def _hub(post: bool) -> str:
    return "H_R" if post else "H"


def _atoms(shape: _Shape) -> list[str]:
    atoms = []
    for i in range(1, shape.sats + 1):
        atoms += [f"present(S{i})", f"not present(S{i})"]
    for name, hi, _ in shape.params:
        atoms.append(f"{name} < {hi}")
        atoms.append(f"{name} == 0")
    return atoms


def _ops(shape: _Shape, post: bool) -> list[tuple[str, str, list]]:
    """(name, guard, body lines) for the shared operations, written at one level."""
    hub = _hub(post)
    ops = []
    for i in range(1, shape.sats + 1):
        s = _sat(shape, i, post)
        ops.append((f"Add{i}", f"not present({s})", [
            f"instantiate {s} {{", f"  provides sp{i} : IS;", "  state stopped;", "}",
            f"bind {s}.sp{i} -> {hub}.hs{i};", f"start {s};",
        ]))
        ops.append((f"Rem{i}", f"present({s})", [f"stop {s};", f"unbind {s}.sp{i};", f"destroy {s};"]))
        if shape.stoppable[i - 1]:
            ops.append((f"Stop{i}", f"started({s})", [f"stop {s};"]))
            ops.append((f"Start{i}", f"stopped({s})", [f"start {s};"]))
    for name, hi, _ in shape.params:
        ops.append((f"Inc_{name}", f"{name} < {hi}", [f"set {name} := {name} + 1;"]))
        ops.append((f"Dec_{name}", f"{name} > 0", [f"set {name} := {name} - 1;"]))
    return ops


def _rename_atom(atom: str, shape: _Shape, post: bool) -> str:
    if post and shape.sub_sat:
        return atom.replace("(S1)", "(S1_R)")
    return atom


def _render(shape: _Shape, post: bool) -> str:
    hub = _hub(post)
    lines = ["itype IH, IS, IC, IAux;"]
    for name, hi, _ in shape.params:
        lines.append(f"ptype D_{name} [0..{hi}];")
    lines += ["", "component Client {", "  provides out : IC;", "  requires need : IH mandatory;",
              "  state started;", "}", ""]
    slots = [f"  requires hs{i} : IS optional;" for i in range(1, shape.sats + 1)]
    params = [f"  param {n} : D_{n} = {v};" for n, _, v in shape.params]
    binds = [f"bind {hub}.h -> Client.need;"]
    delegates = []
    if post and shape.composite:
        lines += [f"component {hub} {{", "  provides h : IH;", *slots, "  child Core;", "  child Aux;",
                  "  state started;", "}", ""]
        lines += ["component Core {", "  provides core_h : IH;",
                  *[f"  requires core_s{i} : IS optional;" for i in range(1, shape.sats + 1)],
                  "  requires core_aux : IAux optional;", *params, "  state started;", "}", ""]
        lines += ["component Aux {", "  provides aux : IAux;", "  state started;", "}", ""]
        binds.append("bind Aux.aux -> Core.core_aux;")
        delegates.append(f"delegate Core.core_h -> {hub}.h;")
        delegates += [f"delegate Core.core_s{i} -> {hub}.hs{i};" for i in range(1, shape.sats + 1)]
    else:
        lines += [f"component {hub} {{", "  provides h : IH;", *slots, *params, "  state started;", "}", ""]
    for i in range(1, shape.sats + 1):
        if shape.present[i - 1]:
            s = _sat(shape, i, post)
            lines += [f"component {s} {{", f"  provides sp{i} : IS;", "  state started;", "}", ""]
            binds.append(f"bind {s}.sp{i} -> {hub}.hs{i};")
    lines += binds + delegates + [""]

    faults = set(shape.faults) if post else set()
    for name, guard, body in _ops(shape, post):
        extra = shape.extra.get(name)
        if extra and not (post and "weaker_guard" in faults and name == shape.extra.get("_weak")):
            guard = f"{guard} and {_rename_atom(extra, shape, post)}"
        if post and "blocked_op" in faults and name == shape.extra.get("_blocked"):
            guard = f"{guard} and false"
        if post and "dropped_op" in faults and name == shape.extra.get("_dropped"):
            continue
        if post and "drop_instantiate" in faults and name == shape.extra.get("_noinst"):
            body = [f"start {hub};"]
        if post and "wrong_value" in faults and name == shape.extra.get("_wrong"):
            body = [f"set {name[4:]} := 0;"]
        lines.append(f"reconfiguration {name} when {guard} {{")
        lines += [f"  {b}" for b in body]
        lines += ["}", ""]

    if post:
        if shape.composite:
            if "livelock" in faults or not shape.aux_guarded:
                add_guard, rem_guard = "not present(Aux)", "present(Aux)"
            else:
                anchor = _sat(shape, 1, True)
                add_guard = f"not present(Aux) and not present({anchor})"
                rem_guard = f"present(Aux) and present({anchor})"
            lines += [f"reconfiguration AddAux when {add_guard} {{",
                      "  instantiate Aux {", "    provides aux : IAux;", "    state stopped;", "  }",
                      f"  add Aux to {hub};", "  bind Aux.aux -> Core.core_aux;", "  start Aux;", "}", ""]
            lines += [f"reconfiguration RemAux when {rem_guard} {{", "  stop Aux;", "  unbind Aux.aux;",
                      f"  remove Aux from {hub};", "  destroy Aux;", "}", ""]
        elif "livelock" in faults:
            lines += [f"reconfiguration Spin when started({hub}) {{", f"  start {hub};", "}", ""]
        if "stutter" in faults and shape.params:
            name = shape.params[0][0]
            lines += [f"reconfiguration Reset_{name} when {name} > 0 {{", f"  set {name} := 0;", "}", ""]
    return "\n".join(lines)


def _shape(rng: random.Random) -> _Shape:
    sats = rng.randint(1, 2)
    params = [(f"v{j}", rng.randint(1, 2), 0) for j in range(1, rng.randint(0, 2) + 1)]
    params = [(n, hi, rng.randint(0, hi)) for n, hi, _ in params]
    shape = _Shape(
        sats=sats,
        params=params,
        present=[rng.random() < 0.6 for _ in range(sats)],
        stoppable=[rng.random() < 0.4 for _ in range(sats)],
        composite=rng.random() < 0.6,
        sub_sat=rng.random() < 0.3,
        extra={},
        faults=[],
        aux_guarded=rng.random() < 0.7,
    )
    names = [name for name, _, _ in _ops(shape, False)]
    atoms = _atoms(shape)
    for name in names:
        if rng.random() < 0.35:
            shape.extra[name] = rng.choice(atoms)
    for fault in FAULTS:
        if rng.random() < 0.12:
            shape.faults.append(fault)
    if "weaker_guard" in shape.faults:
        guarded = sorted(n for n in shape.extra if not n.startswith("_"))
        if guarded:
            shape.extra["_weak"] = rng.choice(guarded)
        else:
            shape.faults.remove("weaker_guard")
    if "wrong_value" in shape.faults:
        decs = [n for n in names if n.startswith("Dec_")]
        if decs:
            shape.extra["_wrong"] = rng.choice(decs)
        else:
            shape.faults.remove("wrong_value")
    if "stutter" in shape.faults and not shape.params:
        shape.faults.remove("stutter")
    for fault, key in (("blocked_op", "_blocked"), ("dropped_op", "_dropped")):
        if fault in shape.faults:
            shape.extra[key] = rng.choice(names)
    if "drop_instantiate" in shape.faults:
        shape.extra["_noinst"] = f"Add{rng.randint(1, sats)}"
    return shape


def random_paired_system(seed: int, max_states: int = 200) -> GeneratedSystem:
    """Deterministic in ``seed``; both levels have at most ``max_states`` reachable configurations."""
    rng = random.Random(seed)
    subst_lines = ["substitute H -> H_R;"]
    for _ in range(100):
        shape = _shape(rng)
        subst = list(subst_lines)
        post_text = _render(shape, True)
        if shape.sub_sat and ("component S1_R" in post_text or "instantiate S1_R" in post_text):
            subst.append("substitute S1 -> S1_R;")
        system = GeneratedSystem(seed, _render(shape, False), post_text, "\n".join(subst) + "\n",
                                 list(shape.faults))
        ps = system.build()
        try:
            reachable_graph(ps.pre, max_states)
            reachable_graph(ps.post, max_states)
        except BoundExceeded:
            continue
        return system
    raise RuntimeError(f"no system within {max_states} states for seed {seed}")
