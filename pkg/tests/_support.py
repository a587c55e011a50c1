"""Shared test machinery: independent oracles and random model generators.

The oracles here deliberately avoid the library's region machinery so
they can referee it: clock-valuation equivalence is written out as the
three defining conditions, and emptiness is decided by explicit-state
simulation over quantized delays.
"""

from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

from ptacheck import (
    PTA,
    SimpleConstraint,
    Transition,
    parse_network,
)
from ptacheck.model import TAU, max_constant, substitute_params

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "ptacheck" / "fixtures"


def load_firealarm():
    return parse_network(FIXTURES.joinpath("firealarm.pta").read_text())


# --- the clock-equivalence oracle ---------------------------------------


def _one_sided(n1, n2, clocks, m) -> bool:
    for x in clocks:
        a, b = n1[x], n2[x]
        if not ((a >= m and b >= m) or int(a) == int(b)):
            return False
    low = [x for x in clocks if n1[x] <= m]
    for x in low:
        fa = n1[x] - int(n1[x])
        fb = n2[x] - int(n2[x])
        if (fa == 0) != (fb == 0):
            return False
        for y in low:
            ga = n1[y] - int(n1[y])
            gb = n2[y] - int(n2[y])
            if (fa <= ga) != (fb <= gb):
                return False
    return True


def equivalent_valuations(n1, n2, clocks, m) -> bool:
    """The defining equivalence on clock valuations, written out directly:
    equal integer parts or both at/above the bound; identical fractional
    ordering; identical zero-fraction sets (symmetrized)."""
    return _one_sided(n1, n2, clocks, m) and _one_sided(n2, n1, clocks, m)


def random_valuation(rng: random.Random, clocks, m, max_den=6):
    return {
        x: Fraction(rng.randint(0, (m + 2) * den), den)
        for x in clocks
        for den in [rng.randint(1, max_den)]
    }


# --- the quantized-simulation emptiness oracle ---------------------------


def quantized_empty(a: PTA, gamma) -> bool:
    """Explicit-state search over delays in multiples of 1/(n+1) with clock
    values saturated at M+1: a known-sufficient granularity for visiting
    every region.  Uses the invariant-checking semantics directly, with no
    normalization and no region machinery."""
    sub = substitute_params(a, gamma)
    clocks = sub.clocks
    n = len(clocks)
    den = n + 1
    m = max_constant(sub)
    cap = (m + 1) * den  # numerators over the fixed denominator

    def holds(c: SimpleConstraint, vals) -> bool:
        v = vals[clocks.index(c.clock)]
        b = c.bound * den
        return {"<": v < b, "<=": v <= b, "==": v == b, ">=": v >= b, ">": v > b}[c.rel]

    def inv_ok(loc, vals) -> bool:
        return all(holds(c, vals) for c in sub.invariants[loc])

    start = (sub.initial, (0,) * n)
    if not inv_ok(*start):
        return True
    if sub.initial in sub.accepting:
        return False
    seen = {start}
    frontier = [start]
    outgoing = {loc: [t for t in sub.transitions if t.source == loc] for loc in sub.locations}
    while frontier:
        nxt = []
        for loc, vals in frontier:
            candidates = []
            delayed = tuple(min(v + 1, cap) for v in vals)
            if inv_ok(loc, delayed):
                candidates.append((loc, delayed))
            for t in outgoing[loc]:
                if all(holds(c, vals) for c in t.guard):
                    after = tuple(
                        0 if clocks[i] in t.resets else v for i, v in enumerate(vals)
                    )
                    if inv_ok(t.target, after):
                        candidates.append((t.target, after))
            for state in candidates:
                if state in seen:
                    continue
                if state[0] in sub.accepting:
                    return False
                seen.add(state)
                nxt.append(state)
        frontier = nxt
    return True


# --- random model generators ---------------------------------------------


def random_pta(
    rng: random.Random,
    *,
    single_parametric: bool = False,
    with_invariants: bool = False,
    max_locations: int = 3,
    max_nonparam_clocks: int = 2,
    max_const: int = 3,
    max_params: int = 2,
    name: str = "rand",
) -> PTA:
    """A small random PTA.

    With ``single_parametric`` the clock xp is the only one ever compared
    to a parameter.  Parametric invariant bounds stay non-strict so that
    invariant folding is exact.
    """
    n_loc = rng.randint(1, max_locations)
    locations = [f"L{i}" for i in range(n_loc)]
    params = [f"p{i}" for i in range(rng.randint(1, max_params))]
    if single_parametric:
        clocks = ["xp"] + [f"y{i}" for i in range(rng.randint(0, max_nonparam_clocks))]
    else:
        clocks = [f"c{i}" for i in range(rng.randint(1, 3))]

    def constraint(clock=None, allow_param=True) -> SimpleConstraint:
        if clock is None:
            clock = rng.choice(clocks)
        parametric = allow_param and rng.random() < 0.4
        if single_parametric and clock != "xp":
            parametric = False
        rel = rng.choice(("<", "<=", "==", ">=", ">"))
        bound = rng.choice(params) if parametric else rng.randint(0, max_const)
        return SimpleConstraint(clock, rel, bound)

    transitions = []
    for _ in range(rng.randint(1, 2 * n_loc + 1)):
        guard = tuple(constraint() for _ in range(rng.randint(0, 2)))
        resets = frozenset(x for x in clocks if rng.random() < 0.3)
        transitions.append(
            Transition(rng.choice(locations), guard, TAU, resets, rng.choice(locations))
        )
    if single_parametric:
        # ensure xp really is parametric
        if not any(
            c.clock == "xp" and isinstance(c.bound, str)
            for t in transitions
            for c in t.guard
        ):
            t = transitions[rng.randrange(len(transitions))]
            extra = SimpleConstraint("xp", rng.choice(("<", "<=", "==", ">=", ">")),
                                     rng.choice(params))
            transitions[transitions.index(t)] = Transition(
                t.source, t.guard + (extra,), t.action, t.resets, t.target
            )

    invariants = {}
    if with_invariants:
        for loc in locations:
            if rng.random() < 0.5:
                continue
            cs = []
            for _ in range(rng.randint(1, 2)):
                clock = rng.choice(clocks)
                if rng.random() < 0.3:
                    cs.append(SimpleConstraint(clock, "<=", rng.choice(params)))
                else:
                    rel = rng.choice(("<", "<="))
                    cs.append(SimpleConstraint(clock, rel, rng.randint(0, max_const)))
            invariants[loc] = tuple(cs)

    accepting = [loc for loc in locations if rng.random() < 0.4]
    if not accepting and rng.random() < 0.8:
        accepting = [rng.choice(locations)]
    return PTA.make(
        name=name,
        clocks=clocks,
        parameters=params,
        locations=locations,
        initial=locations[0],
        accepting=accepting,
        transitions=transitions,
        invariants=invariants,
    )


def all_valuations(params, limit):
    """Every valuation with each value in 0..limit."""
    params = sorted(params)
    if not params:
        return [{}]
    out = [{}]
    for p in params:
        out = [dict(g, **{p: v}) for g in out for v in range(limit + 1)]
    return out
