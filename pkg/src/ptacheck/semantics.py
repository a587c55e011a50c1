"""Exact continuous-time semantics for a fixed parameter valuation.

Configurations pair a location with an exact rational clock valuation;
runs alternate delays and transition firings.  Emptiness is decided on
the region graph over all clocks (bound = largest constant after
parameter substitution) and nonempty verdicts come with a concrete
witness run that replays under exact arithmetic.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .model import (
    PTA,
    Guard,
    ModelError,
    ParamValuation,
    SimpleConstraint,
    check_valuation,
    max_constant,
    normalize,
    substitute_params,
)
from .regions import (
    Region,
    initial_region,
    region_of,
    region_satisfies,
    render_region,
    reset_region,
    succ_region,
)

Valuation = dict[str, Fraction]

#: A timed run: alternating (delay, transition-index) steps from the
#: initial configuration.
TimedRun = tuple[tuple[Fraction, int], ...]


class StepError(ValueError):
    """A delay or transition step rejected by the semantics."""

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        super().__init__(message if step is None else f"step {step}: {message}")


@dataclass(frozen=True)
class Configuration:
    location: str
    valuation: Mapping[str, Fraction]

    def __str__(self) -> str:
        vals = ", ".join(f"{x}={v}" for x, v in sorted(self.valuation.items()))
        return f"({self.location}; {vals})"


def zero_valuation(clocks: Iterable[str]) -> Valuation:
    return {x: Fraction(0) for x in clocks}


def initial_configuration(a: PTA) -> Configuration:
    return Configuration(a.initial, zero_valuation(a.clocks))


def constraint_satisfied(
    c: SimpleConstraint, nu: Mapping[str, Fraction], gamma: ParamValuation
) -> bool:
    bound = gamma[c.bound] if isinstance(c.bound, str) else c.bound
    v = nu[c.clock]
    return {
        "<": v < bound,
        "<=": v <= bound,
        "==": v == bound,
        ">=": v >= bound,
        ">": v > bound,
    }[c.rel]


def guard_satisfied(g: Guard, nu: Mapping[str, Fraction], gamma: ParamValuation) -> bool:
    return all(constraint_satisfied(c, nu, gamma) for c in g)


def violated_constraint(
    g: Guard, nu: Mapping[str, Fraction], gamma: ParamValuation
) -> SimpleConstraint | None:
    for c in g:
        if not constraint_satisfied(c, nu, gamma):
            return c
    return None


def make_configuration(
    a: PTA, gamma: ParamValuation, location: str, nu: Mapping[str, Fraction]
) -> Configuration:
    """A checked configuration: the location invariant must hold."""
    if location not in a.locations:
        raise ModelError(f"undeclared location {location!r}")
    nu = {x: Fraction(nu[x]) for x in a.clocks}
    bad = violated_constraint(a.invariants[location], nu, gamma)
    if bad is not None:
        raise StepError(f"invariant violated at {location}: {bad}")
    return Configuration(location, nu)


def delay(a: PTA, gamma: ParamValuation, c: Configuration, d: Fraction | int) -> Configuration:
    """Let ``d`` time units pass; the location invariant must still hold."""
    d = Fraction(d)
    if d < 0:
        raise StepError(f"negative delay {d}")
    nu = {x: v + d for x, v in c.valuation.items()}
    bad = violated_constraint(a.invariants[c.location], nu, gamma)
    if bad is not None:
        raise StepError(f"delay {d} violates invariant of {c.location}: {bad}")
    return Configuration(c.location, nu)


def fire(a: PTA, gamma: ParamValuation, c: Configuration, index: int) -> Configuration:
    """Fire transition ``index``: guard, resets, then target invariant."""
    if not 0 <= index < len(a.transitions):
        raise StepError(f"no transition with index {index}")
    t = a.transitions[index]
    if t.source != c.location:
        raise StepError(f"transition {index} leaves {t.source}, not {c.location}")
    bad = violated_constraint(t.guard, c.valuation, gamma)
    if bad is not None:
        raise StepError(f"guard of transition {index} unsatisfied: {bad}")
    nu = {x: Fraction(0) if x in t.resets else v for x, v in c.valuation.items()}
    bad = violated_constraint(a.invariants[t.target], nu, gamma)
    if bad is not None:
        raise StepError(f"entering {t.target} violates its invariant: {bad}")
    return Configuration(t.target, nu)


def replay(
    a: PTA,
    gamma: ParamValuation,
    run: Sequence[tuple[Fraction | int, int]],
    start: Configuration | None = None,
) -> Configuration:
    """Replay alternating (delay, transition) steps; fail at the first bad step.

    ``start`` defaults to the initial configuration; golden traces may
    begin mid-automaton.
    """
    check_valuation(a, gamma)
    c = start if start is not None else initial_configuration(a)
    for i, (d, t) in enumerate(run):
        try:
            c = delay(a, gamma, c, d)
            c = fire(a, gamma, c, t)
        except StepError as e:
            raise StepError(str(e), step=i) from None
    return c


# --- emptiness via the region graph -----------------------------------


@dataclass
class EmptinessResult:
    empty: bool
    witness: TimedRun | None
    states_explored: int

    @property
    def nonempty(self) -> bool:
        return not self.empty


def initial_blocked(a: PTA, gamma: ParamValuation) -> bool:
    """True when the all-zero valuation violates the initial invariant, i.e.
    the timed transition system has no states at all.  Invariant folding
    cannot express this case (there is no incoming transition to carry
    the check), so emptiness backends test it up front."""
    zeros = zero_valuation(a.clocks)
    return violated_constraint(a.invariants[a.initial], zeros, gamma) is not None


def _prep(a: PTA, gamma: ParamValuation) -> PTA:
    """Substitute parameters, then fold invariants (exact in this order)."""
    check_valuation(a, gamma)
    return normalize(substitute_params(a, gamma))


def _permanently_disabled(r: Region, guard: Guard) -> bool:
    """No valuation in the delay-future of ``r`` can satisfy ``guard``.

    Upper-bound violations only worsen as time passes, so one entirely
    violated upper conjunct condemns the guard forever.
    """
    for c in guard:
        if c.rel == "<" and region_satisfies(r, SimpleConstraint(c.clock, ">=", c.bound)):
            return True
        if c.rel in ("<=", "==") and region_satisfies(
            r, SimpleConstraint(c.clock, ">", c.bound)
        ):
            return True
    return False


def _region_search(norm: PTA):
    """BFS over (location, region); returns (accepting state or None, parents, count).

    States where every outgoing guard is permanently disabled are not
    expanded (sound for emptiness: their whole delay-future is
    action-dead, and acceptance is registered before pruning).
    """
    bound = max_constant(norm)
    outgoing: dict[str, list[tuple[int, int, Guard, frozenset, str]]] = {
        loc: [] for loc in norm.locations
    }
    for i, t in enumerate(norm.transitions):
        outgoing[t.source].append((i, len(t.guard), t.guard, t.resets, t.target))

    start = (norm.initial, initial_region(norm.clocks, bound))
    parents: dict[tuple[str, Region], tuple[tuple[str, Region], tuple[str, int]] | None] = {
        start: None
    }
    if norm.initial in norm.accepting:
        return start, parents, 1
    queue = deque([start])
    explored = 0
    while queue:
        loc, r = queue.popleft()
        explored += 1
        succs: list[tuple[tuple[str, Region], tuple[str, int]]] = []
        alive = False
        for i, _n, guard, resets, target in outgoing[loc]:
            if _permanently_disabled(r, guard):
                continue
            alive = True
            if all(region_satisfies(r, c) for c in guard):
                succs.append(((target, reset_region(r, resets)), ("fire", i)))
        if alive:
            nxt = succ_region(r)
            if nxt != r:
                succs.append(((loc, nxt), ("delay", 0)))
        for state, step in succs:
            if state in parents:
                continue
            parents[state] = ((loc, r), step)
            if state[0] in norm.accepting:
                return state, parents, explored
            queue.append(state)
    return None, parents, explored


def _advance_delay(nu: Valuation, clocks: Sequence[str], bound: int) -> Fraction:
    """A delay taking ``nu`` (restricted to ``clocks``) into its successor region.

    Exact wrap when the highest fraction must reach the next integer,
    half the minimal gap when a zero-fraction clock opens up.
    """
    fracs = [nu[x] - int(nu[x]) for x in clocks if nu[x] <= bound]
    if not fracs:
        return Fraction(1)
    if all(f > 0 for f in fracs):
        return 1 - max(fracs)
    gap = min(1 - f for f in fracs)
    return gap / 2


def _concretize_region_path(
    norm: PTA, gamma: ParamValuation, path: list[tuple[str, int]]
) -> TimedRun:
    """Turn a region-graph path into exact delays and transition firings."""
    bound = max_constant(norm)
    nu = zero_valuation(norm.clocks)
    pending = Fraction(0)
    steps: list[tuple[Fraction, int]] = []
    for kind, arg in path:
        if kind == "delay":
            d = _advance_delay(nu, norm.clocks, bound)
            nu = {x: v + d for x, v in nu.items()}
            pending += d
        else:
            t = norm.transitions[arg]
            if not guard_satisfied(t.guard, nu, gamma):
                raise StepError(f"witness concretization hit unsatisfied guard of {t}")
            nu = {x: Fraction(0) if x in t.resets else v for x, v in nu.items()}
            steps.append((pending, arg))
            pending = Fraction(0)
    return tuple(steps)


def empty(a: PTA, gamma: ParamValuation) -> EmptinessResult:
    """Decide language emptiness of ``a`` under ``gamma``.

    Nonempty verdicts carry a witness over ``a``'s own transition indices
    (parameter substitution and invariant folding both preserve them),
    validated by replay before being returned.
    """
    check_valuation(a, gamma)
    if initial_blocked(a, gamma):
        return EmptinessResult(True, None, 0)
    norm = _prep(a, gamma)
    hit, parents, explored = _region_search(norm)
    if hit is None:
        return EmptinessResult(True, None, explored)
    path: list[tuple[str, int]] = []
    state = hit
    while parents[state] is not None:
        prev, step = parents[state]
        path.append(step)
        state = prev
    path.reverse()
    witness = _concretize_region_path(norm, gamma, path)
    final = replay(a, gamma, witness)
    if final.location not in a.accepting:
        raise StepError("internal: witness does not end in an accepting location")
    return EmptinessResult(False, witness, explored)


# --- serialization and exports -----------------------------------------


def run_to_json(a: PTA, gamma: ParamValuation, run: TimedRun) -> list[dict]:
    """The spec trace format: one record per (delay, transition) step with
    the configuration reached after the step."""
    c = initial_configuration(a)
    out = []
    for d, i in run:
        c = fire(a, gamma, delay(a, gamma, c, d), i)
        out.append(
            {
                "delay": f"{Fraction(d).numerator}/{Fraction(d).denominator}",
                "transition": i,
                "location": c.location,
                "valuation": {
                    x: f"{v.numerator}/{v.denominator}" for x, v in sorted(c.valuation.items())
                },
            }
        )
    return out


def run_from_json(records: Iterable[Mapping]) -> TimedRun:
    return tuple((Fraction(rec["delay"]), int(rec["transition"])) for rec in records)


def export_region_graph_dot(a: PTA, gamma: ParamValuation) -> str:
    """DOT rendering of the explored region graph under ``gamma``."""
    norm = _prep(a, gamma)
    _hit, parents, _count = _region_search(norm)
    states = list(parents)
    index = {s: i for i, s in enumerate(states)}
    lines = ["digraph regions {", "  rankdir=LR;"]
    for s, i in index.items():
        loc, r = s
        shape = "doublecircle" if loc in norm.accepting else "ellipse"
        label = f"{loc}\\n{render_region(r)}"
        lines.append(f'  n{i} [shape={shape} label="{label}"];')
    for s, entry in parents.items():
        if entry is None:
            continue
        prev, (kind, arg) = entry
        label = "delay" if kind == "delay" else f"t{arg}"
        lines.append(f'  n{index[prev]} -> n{index[s]} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
