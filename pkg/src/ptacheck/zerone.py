"""Corner-point abstraction of a one-parametric-clock PTA.

Pipeline: a normalized automaton A gains a fresh clock z tracking the
fractional part of the parametric clock (A'), then the reachable part of
L x Reg x Cp over the remaining clocks becomes a parametric 0/1-timed
automaton with the single clock xhat.  Delays in the result are explicit
0-delay and 1-delay transitions; action guards on the parametric clock
are rewritten according to the corner classification (LESS/MORE/EXACT).

Runs in which z exceeds 1 are effective deadlocks (every action of A'
carries z<1 or z=1), so such regions are never expanded; this keeps the
0/1-delay edges deterministic and exclusive everywhere.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .model import (
    PTA,
    TAU,
    Guard,
    ModelError,
    ParamValuation,
    SimpleConstraint,
    Transition,
    check_valuation,
    guard_str,
    max_constant,
    parametric_clocks,
)
from .regions import (
    ABOVE,
    CornerPoint,
    Iota,
    Region,
    corners_of,
    f_offset,
    initial_region,
    iota,
    region_of,
    region_satisfies,
    render_region,
    reset_cp,
    reset_region,
    succ_cp,
    succ_region,
)
from .semantics import StepError, TimedRun, _advance_delay, constraint_satisfied


def fresh_fractional_name(clocks: Sequence[str]) -> str:
    """``z`` when free, else z with primes."""
    name = "z"
    while name in clocks:
        name += "′"
    return name


@dataclass(frozen=True)
class FractionalClockResult:
    automaton: PTA
    parametric_clock: str
    fractional_clock: str


def add_fractional_clock(a: PTA) -> FractionalClockResult:
    """A -> A': add a clock tracking the fractional part of the parametric clock.

    Every transition gains the conjunct z<1 (and resets z whenever it
    resets the parametric clock); every location gains a z=1 self-loop
    resetting z.  Preserves per-valuation language (non)emptiness.
    Requires a normalized automaton with exactly one parametric clock.
    """
    if any(a.invariants[loc] for loc in a.locations):
        raise ModelError("add_fractional_clock expects a normalized (invariant-free) automaton")
    pclocks = parametric_clocks(a)
    if len(pclocks) != 1:
        raise ModelError(
            f"expected exactly one parametric clock, found {sorted(pclocks) or 'none'}"
        )
    (xp,) = pclocks
    z = fresh_fractional_name(a.clocks)
    z_low = SimpleConstraint(z, "<", 1)
    z_wrap = (SimpleConstraint(z, "==", 1),)
    transitions = [
        Transition(
            t.source,
            t.guard + (z_low,),
            t.action,
            t.resets | {z} if xp in t.resets else t.resets,
            t.target,
        )
        for t in a.transitions
    ]
    transitions += [
        Transition(loc, z_wrap, TAU, frozenset({z}), loc) for loc in a.locations
    ]
    aprime = PTA.make(
        name=a.name,
        clocks=a.clocks + (z,),
        parameters=a.parameters,
        locations=a.locations,
        initial=a.initial,
        accepting=a.accepting,
        transitions=transitions,
        alphabet=a.alphabet,
    )
    return FractionalClockResult(aprime, xp, z)


def rewrite_guard(c: SimpleConstraint, mode: Iota, xhat: str) -> SimpleConstraint:
    """Adjust a parametric-clock constraint for the corner classification.

    LESS: < becomes <=, >= becomes >.  MORE: <= becomes <, > becomes >=.
    Equality is only legal under EXACT (the construction filters it out).
    """
    if mode is not Iota.EXACT and c.rel == "==":
        raise ModelError(f"equality constraint {c} cannot be rewritten under {mode.value}")
    rel = c.rel
    if mode is Iota.LESS:
        rel = {"<": "<=", ">=": ">"}.get(rel, rel)
    elif mode is Iota.MORE:
        rel = {"<=": "<", ">": ">="}.get(rel, rel)
    return SimpleConstraint(xhat, rel, c.bound)


@dataclass(frozen=True)
class Triple:
    """A location of the 0/1-automaton: (source location, region, corner)."""

    location: str
    region: Region
    corner: CornerPoint

    def __str__(self) -> str:
        return f"({self.location}; {render_region(self.region)}; {self.corner})"


@dataclass(frozen=True)
class ZOAction:
    source: int
    target: int
    guard: tuple[SimpleConstraint, ...]  # on the single clock xhat
    reset: bool
    origin: int  # index of the originating transition of A'


@dataclass
class ZeroOneTA:
    """The reachable parametric 0/1-timed automaton over one clock."""

    source: PTA  # A'
    parametric_clock: str
    fractional_clock: str
    hat_clocks: tuple[str, ...]
    bound: int
    clock: str  # xhat
    parameters: tuple[str, ...]
    locations: tuple[Triple, ...]
    initial: int
    accepting: frozenset[int]
    zero_delay: dict[int, int]
    unit_delay: dict[int, int]
    actions: tuple[ZOAction, ...]

    def index(self, triple: Triple) -> int:
        return self._index[triple]

    def __post_init__(self):
        self._index = {t: i for i, t in enumerate(self.locations)}
        self._actions_by_source: dict[int, list[int]] = {}
        for i, act in enumerate(self.actions):
            self._actions_by_source.setdefault(act.source, []).append(i)

    def actions_from(self, idx: int) -> list[int]:
        return self._actions_by_source.get(idx, [])

    def to_json_dict(self) -> dict:
        return {
            "clock": self.clock,
            "parameters": list(self.parameters),
            "hat_clocks": list(self.hat_clocks),
            "bound": self.bound,
            "initial": self.initial,
            "accepting": sorted(self.accepting),
            "locations": [
                {
                    "location": t.location,
                    "region": render_region(t.region),
                    "corner": dict(zip(t.corner.clocks, t.corner.values)),
                }
                for t in self.locations
            ],
            "zero_delays": sorted(self.zero_delay.items()),
            "unit_delays": sorted(self.unit_delay.items()),
            "actions": [
                {
                    "source": a.source,
                    "target": a.target,
                    "guard": guard_str(a.guard),
                    "reset": a.reset,
                    "origin": a.origin,
                }
                for a in self.actions
            ],
        }

    def to_dot(self) -> str:
        lines = ["digraph zerone {", "  rankdir=LR;"]
        for i, t in enumerate(self.locations):
            shape = "doublecircle" if i in self.accepting else "ellipse"
            label = f"{t.location}\\n{render_region(t.region)}\\n{t.corner}"
            lines.append(f'  n{i} [shape={shape} label="{label}"];')
        for s, d in sorted(self.zero_delay.items()):
            lines.append(f'  n{s} -> n{d} [label="0" color=red];')
        for s, d in sorted(self.unit_delay.items()):
            lines.append(f'  n{s} -> n{d} [label="1" color=blue];')
        for a in self.actions:
            label = guard_str(a.guard) + ("; reset" if a.reset else "")
            lines.append(f'  n{a.source} -> n{a.target} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _z_exceeded(r: Region, z: str) -> bool:
    """True when the region lies beyond z = 1 (an effective deadlock of A')."""
    i = r.index(z)
    ip = r.integral[i]
    if ip is ABOVE:
        return True
    if ip == 0:
        return False
    return ip >= 2 or i not in r.blocks[0]


def _is_wrap_loop(t: Transition, z: str) -> bool:
    """The z=1 self-loops added by add_fractional_clock."""
    return (
        t.source == t.target
        and t.resets == frozenset({z})
        and t.guard == (SimpleConstraint(z, "==", 1),)
    )


def _confined(r: Region, transitions: Sequence[Transition], xp: str, z: str) -> bool:
    """The location can never be left from region ``r``.

    A non-wrap transition is gone for good once an upper conjunct on a
    clock other than z is entirely violated: delays only worsen it and
    the wrap self-loops reset nothing but z.  When that holds for every
    non-wrap transition, the whole delay/wrap future stays here.
    """
    for t in transitions:
        if _is_wrap_loop(t, z):
            continue
        for c in t.guard:
            if c.clock in (xp, z) or isinstance(c.bound, str):
                continue
            if c.rel == "<" and region_satisfies(r, SimpleConstraint(c.clock, ">=", c.bound)):
                break
            if c.rel in ("<=", "==") and region_satisfies(
                r, SimpleConstraint(c.clock, ">", c.bound)
            ):
                break
        else:
            return False
    return True


def build_01(
    aprime: PTA,
    parametric_clock: str | None = None,
    fractional_clock: str | None = None,
    prune: str = "dead",
) -> ZeroOneTA:
    """Construct the reachable 0/1-automaton of A' by corner-point abstraction.

    Regions and corners range over all clocks except the parametric one,
    with M the largest constant on those clocks.

    ``prune`` controls which reached triples are expanded further:

    - ``"none"``: the full construction.
    - ``"z"``: regions beyond z=1 are dead ends of A' (every action
      carries z<1 or z=1) and are not expanded.
    - ``"dead"`` (default): additionally, triples whose location can
      provably never be left again are not expanded; sound for emptiness
      and necessary at case-study scale.
    """
    if prune not in ("none", "z", "dead"):
        raise ModelError(f"unknown prune mode {prune!r}")
    if parametric_clock is None:
        pclocks = parametric_clocks(aprime)
        if len(pclocks) != 1:
            raise ModelError("build_01 needs exactly one parametric clock")
        (parametric_clock,) = pclocks
    xp = parametric_clock
    if fractional_clock is None:
        fractional_clock = _infer_fractional_clock(aprime, xp)
    z = fractional_clock
    if xp not in aprime.clocks or z not in aprime.clocks:
        raise ModelError("parametric or fractional clock missing from the automaton")

    exp = _Expander(aprime, xp, z, prune)
    queue: deque[Triple] = deque([exp.init])
    while queue:
        cur = queue.popleft()
        fresh = exp.expand(cur)
        queue.extend(fresh)
    return exp.finish()


class _Expander:
    """Shared successor machinery for the eager and the valuation-directed
    constructions; interns triples and accumulates the edge families."""

    def __init__(self, aprime: PTA, xp: str, z: str, prune: str):
        self.aprime = aprime
        self.xp, self.z, self.prune = xp, z, prune
        self.hat = tuple(x for x in aprime.clocks if x != xp)
        self.bound = max_constant(aprime, self.hat)
        self.xhat = xp + "_hat"
        self.outgoing: dict[str, list[tuple[int, Transition]]] = {
            loc: [] for loc in aprime.locations
        }
        for i, t in enumerate(aprime.transitions):
            self.outgoing[t.source].append((i, t))
        self.init = Triple(
            aprime.initial, initial_region(self.hat, self.bound),
            CornerPoint(self.hat, (0,) * len(self.hat)),
        )
        self.triples: list[Triple] = [self.init]
        self.index: dict[Triple, int] = {self.init: 0}
        self.zero_delay: dict[int, int] = {}
        self.unit_delay: dict[int, int] = {}
        self.actions: list[ZOAction] = []
        self.actions_from: dict[int, list[int]] = {}
        self._expanded: set[int] = set()
        self._confined: dict[tuple[str, Region], bool] = {}

    def intern(self, t: Triple, fresh: list[Triple]) -> int:
        idx = self.index.get(t)
        if idx is None:
            idx = self.index[t] = len(self.triples)
            self.triples.append(t)
            fresh.append(t)
        return idx

    def skip(self, cur: Triple) -> bool:
        if self.prune == "none":
            return False
        if _z_exceeded(cur.region, self.z):
            return True
        if self.prune == "z":
            return False
        key = (cur.location, cur.region)
        if key not in self._confined:
            self._confined[key] = _confined(
                cur.region, [t for _i, t in self.outgoing[cur.location]], self.xp, self.z
            )
        return self._confined[key]

    def expand(self, cur: Triple) -> list[Triple]:
        """Compute cur's outgoing edges once; returns newly interned triples."""
        ci = self.index[cur]
        if ci in self._expanded:
            return []
        self._expanded.add(ci)
        self.actions_from[ci] = []
        if self.skip(cur):
            return []
        fresh: list[Triple] = []
        r, alpha = cur.region, cur.corner
        rsucc = succ_region(r)
        if rsucc != r and alpha in corners_of(rsucc):
            self.zero_delay[ci] = self.intern(Triple(cur.location, rsucc, alpha), fresh)
        asucc = succ_cp(alpha, self.bound)
        if asucc != alpha and asucc in corners_of(r):
            self.unit_delay[ci] = self.intern(Triple(cur.location, r, asucc), fresh)
        mode = iota(r, alpha, self.z)
        for origin, t in self.outgoing[cur.location]:
            g_parts = [c for c in t.guard if c.clock != self.xp]
            h_parts = [c for c in t.guard if c.clock == self.xp]
            if not all(region_satisfies(r, c) for c in g_parts):
                continue
            if mode is not Iota.EXACT and any(c.rel == "==" for c in h_parts):
                continue
            resets = frozenset(t.resets - {self.xp})
            target = Triple(
                t.target, reset_region(r, resets), reset_cp(alpha, resets)
            )
            self.actions_from[ci].append(len(self.actions))
            self.actions.append(
                ZOAction(
                    source=ci,
                    target=self.intern(target, fresh),
                    guard=tuple(rewrite_guard(c, mode, self.xhat) for c in h_parts),
                    reset=self.xp in t.resets,
                    origin=origin,
                )
            )
        return fresh

    def finish(self) -> ZeroOneTA:
        return ZeroOneTA(
            source=self.aprime,
            parametric_clock=self.xp,
            fractional_clock=self.z,
            hat_clocks=self.hat,
            bound=self.bound,
            clock=self.xhat,
            parameters=self.aprime.parameters,
            locations=tuple(self.triples),
            initial=0,
            accepting=frozenset(
                i for i, t in enumerate(self.triples) if t.location in self.aprime.accepting
            ),
            zero_delay=self.zero_delay,
            unit_delay=self.unit_delay,
            actions=tuple(self.actions),
        )


def _infer_fractional_clock(aprime: PTA, xp: str) -> str:
    """The clock reset by a z=1 self-loop on every location."""
    candidates = None
    for loc in aprime.locations:
        here = set()
        for t in aprime.transitions:
            if t.source == loc and t.target == loc and len(t.resets) == 1:
                (x,) = t.resets
                if x != xp and t.guard == (SimpleConstraint(x, "==", 1),):
                    here.add(x)
        candidates = here if candidates is None else candidates & here
    if not candidates:
        raise ModelError("cannot identify the fractional clock; pass it explicitly")
    return sorted(candidates)[0]


# --- 0/1 semantics for a fixed parameter valuation ----------------------

#: One step of a 0/1-run: ("0",), ("1",) or ("act", action index).
ZOStep = tuple


@dataclass
class ZOResult:
    empty: bool
    run: tuple[ZOStep, ...] | None
    states_explored: int


def _t_satisfies(t: int, cap: int, c: SimpleConstraint, gamma: ParamValuation) -> bool:
    """Clock-value comparison under saturation: t == cap means "above cap-1"."""
    bound = gamma[c.bound] if isinstance(c.bound, str) else c.bound
    if t >= cap:
        return c.rel in (">", ">=")
    return {
        "<": t < bound,
        "<=": t <= bound,
        "==": t == bound,
        ">=": t >= bound,
        ">": t > bound,
    }[c.rel]


def saturation_cap(zot: ZeroOneTA, gamma: ParamValuation) -> int:
    """t saturates at Mp+1 with Mp = max(guard constants on xhat, gamma values)."""
    mp = 0
    for a in zot.actions:
        for c in a.guard:
            if isinstance(c.bound, int):
                mp = max(mp, c.bound)
    for p in zot.parameters:
        mp = max(mp, gamma[p])
    return mp + 1


def zo_empty(zot: ZeroOneTA, gamma: ParamValuation) -> ZOResult:
    """Accepting-location reachability in the finite 0/1 graph under gamma."""
    check_valuation(zot.source, gamma)
    cap = saturation_cap(zot, gamma)
    start = (zot.initial, 0)
    if zot.initial in zot.accepting:
        return ZOResult(False, (), 1)
    parents: dict[tuple[int, int], tuple[tuple[int, int], ZOStep] | None] = {start: None}
    queue = deque([start])
    explored = 0

    def reconstruct(state) -> tuple[ZOStep, ...]:
        steps = []
        while parents[state] is not None:
            prev, step = parents[state]
            steps.append(step)
            state = prev
        steps.reverse()
        return tuple(steps)

    while queue:
        loc, t = queue.popleft()
        explored += 1
        succs: list[tuple[tuple[int, int], ZOStep]] = []
        if loc in zot.zero_delay:
            succs.append(((zot.zero_delay[loc], t), ("0",)))
        if loc in zot.unit_delay:
            succs.append(((zot.unit_delay[loc], min(t + 1, cap)), ("1",)))
        for ai in zot.actions_from(loc):
            act = zot.actions[ai]
            if all(_t_satisfies(t, cap, c, gamma) for c in act.guard):
                succs.append(((act.target, 0 if act.reset else t), ("act", ai)))
        for state, step in succs:
            if state in parents:
                continue
            parents[state] = ((loc, t), step)
            if state[0] in zot.accepting:
                return ZOResult(False, reconstruct(state), explored)
            queue.append(state)
    return ZOResult(True, None, explored)


def zo_reach(
    aprime: PTA,
    parametric_clock: str,
    fractional_clock: str,
    gamma: ParamValuation,
    prune: str = "dead",
) -> tuple[ZeroOneTA, ZOResult]:
    """Valuation-directed 0/1 reachability: build only what gamma can reach.

    Semantically this is ``zo_empty(build_01(aprime), gamma)`` with the
    two phases fused: triples are expanded on demand, so the exponential
    gamma-independent part of the abstraction is never materialized.
    Returns the explored fragment (sufficient to replay the run) and the
    verdict.
    """
    check_valuation(aprime, gamma)
    exp = _Expander(aprime, parametric_clock, fractional_clock, prune)

    # Mp must account for every xhat guard the search might meet; guards
    # come from A' constraints on the parametric clock, unchanged bounds.
    mp = 0
    for c in aprime.all_constraints():
        if c.clock == parametric_clock and isinstance(c.bound, int):
            mp = max(mp, c.bound)
    for p in aprime.parameters:
        mp = max(mp, gamma[p])
    cap = mp + 1

    start = (0, 0)
    if exp.init.location in aprime.accepting:
        return exp.finish(), ZOResult(False, (), 1)
    parents: dict[tuple[int, int], tuple[tuple[int, int], ZOStep] | None] = {start: None}
    queue: deque[tuple[int, int]] = deque([start])
    explored = 0

    def reconstruct(state) -> tuple[ZOStep, ...]:
        steps = []
        while parents[state] is not None:
            prev, step = parents[state]
            steps.append(step)
            state = prev
        steps.reverse()
        return tuple(steps)

    while queue:
        ci, t = queue.popleft()
        explored += 1
        exp.expand(exp.triples[ci])
        succs: list[tuple[tuple[int, int], ZOStep]] = []
        if ci in exp.zero_delay:
            succs.append(((exp.zero_delay[ci], t), ("0",)))
        if ci in exp.unit_delay:
            succs.append(((exp.unit_delay[ci], min(t + 1, cap)), ("1",)))
        for ai in exp.actions_from.get(ci, []):
            act = exp.actions[ai]
            if all(_t_satisfies(t, cap, c, gamma) for c in act.guard):
                succs.append(((act.target, 0 if act.reset else t), ("act", ai)))
        for state, step in succs:
            if state in parents:
                continue
            parents[state] = ((ci, t), step)
            if exp.triples[state[0]].location in aprime.accepting:
                return exp.finish(), ZOResult(False, reconstruct(state), explored)
            queue.append(state)
    return exp.finish(), ZOResult(True, None, explored)


# --- correspondence and concretization ----------------------------------


def corresponds(
    nu: Mapping[str, Fraction],
    r: Region,
    alpha: CornerPoint,
    t: int,
    xp: str,
    z: str,
) -> bool:
    """The Appendix-style relation between a continuous configuration of A'
    and a discrete configuration (r, alpha, t) of the 0/1-automaton:
    restriction lies in r, floor(nu(xp)) + f(r,alpha) = t, and nu(xp) is
    an integer iff the corner is EXACT."""
    restricted = {x: nu[x] for x in r.clocks}
    if region_of(restricted, r.clocks, r.bound) != r:
        return False
    v = Fraction(nu[xp])
    if int(v) + f_offset(r, alpha, z) != t:
        return False
    return (v.denominator == 1) == (iota(r, alpha, z) is Iota.EXACT)


def concretize_run(
    zot: ZeroOneTA, run: Sequence[ZOStep], gamma: ParamValuation, validate: bool = True
) -> TimedRun:
    """Turn an accepting 0/1-run into a timed run of A' (Lemmas 4-5 made
    constructive): 1-delay steps map to d'=0, 0-delay steps to a rational
    delay entering the successor region, action steps to the originating
    transition.  With ``validate`` the correspondence relation is checked
    after every step."""
    aprime = zot.source
    xp, z = zot.parametric_clock, zot.fractional_clock
    nu = {x: Fraction(0) for x in aprime.clocks}
    cur = zot.initial
    t_true = 0
    pending = Fraction(0)
    steps: list[tuple[Fraction, int]] = []

    def check(where: str):
        tri = zot.locations[cur]
        if validate and not corresponds(nu, tri.region, tri.corner, t_true, xp, z):
            raise StepError(f"correspondence broken after {where} at {tri}")

    check("start")
    for step in run:
        if step[0] == "1":
            if cur not in zot.unit_delay:
                raise StepError(f"no 1-delay out of {zot.locations[cur]}")
            cur = zot.unit_delay[cur]
            t_true += 1
        elif step[0] == "0":
            if cur not in zot.zero_delay:
                raise StepError(f"no 0-delay out of {zot.locations[cur]}")
            d = _advance_delay(nu, zot.hat_clocks, zot.bound)
            nu = {x: v + d for x, v in nu.items()}
            pending += d
            cur = zot.zero_delay[cur]
        else:
            act = zot.actions[step[1]]
            if act.source != cur:
                raise StepError(f"action {step[1]} does not leave {zot.locations[cur]}")
            tr = aprime.transitions[act.origin]
            bad = next(
                (c for c in tr.guard if not constraint_satisfied(c, nu, gamma)), None
            )
            if bad is not None:
                raise StepError(f"concretized action violates {bad} of {tr}")
            nu = {x: Fraction(0) if x in tr.resets else v for x, v in nu.items()}
            if act.reset:
                t_true = 0
            steps.append((pending, act.origin))
            pending = Fraction(0)
            cur = act.target
        check(f"step {step}")
    return tuple(steps)


def project_run(run: TimedRun, n_original: int) -> TimedRun:
    """Project an A'-run onto the automaton it was built from.

    Self-loop firings (indices >= ``n_original``) only reset the
    fractional clock, so they dissolve into plain delays.
    """
    out: list[tuple[Fraction, int]] = []
    pending = Fraction(0)
    for d, i in run:
        pending += d
        if i < n_original:
            out.append((pending, i))
            pending = Fraction(0)
    return tuple(out)
