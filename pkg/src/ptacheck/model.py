"""Core domain types for parametric timed automata.

A PTA compares clocks against nonnegative integer constants or symbolic
integer parameters.  Guards are conjunctions of simple constraints
``clock REL bound``; invariants are guards restricted to upper bounds.
This module owns the automaton structure itself plus the purely
syntactic operations: parametric-clock detection, invariant elimination,
parameter substitution, handshake products and constant extraction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

RELATIONS = ("<", "<=", "==", ">=", ">")
UPPER_RELATIONS = ("<", "<=")

#: Action name used for internal (non-synchronizing) transitions.
TAU = "tau"


class ModelError(ValueError):
    """A structurally invalid model or an ill-formed model operation.

    Parse errors carry a 1-based source position; programmatic errors
    leave ``line``/``column`` as None.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class SimpleConstraint:
    """A constraint ``clock REL bound`` with an integer or parameter bound."""

    clock: str
    rel: str
    bound: int | str

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ModelError(f"unknown relation {self.rel!r}")
        if isinstance(self.bound, bool) or (isinstance(self.bound, int) and self.bound < 0):
            raise ModelError(f"constraint bound must be a nonnegative integer, got {self.bound!r}")

    @property
    def parametric(self) -> bool:
        return isinstance(self.bound, str)

    def __str__(self) -> str:
        return f"{self.clock} {self.rel} {self.bound}"


#: A guard is a conjunction of simple constraints; the empty tuple is true.
Guard = tuple[SimpleConstraint, ...]

TRUE_GUARD: Guard = ()


def guard_str(guard: Guard) -> str:
    return " && ".join(str(c) for c in guard) if guard else "true"


@dataclass(frozen=True)
class Transition:
    source: str
    guard: Guard
    action: str
    resets: frozenset[str]
    target: str

    def __str__(self) -> str:
        resets = "{" + ", ".join(sorted(self.resets)) + "}" if self.resets else "{}"
        return f"{self.source} -({guard_str(self.guard)}, {self.action}, {resets})-> {self.target}"


@dataclass(frozen=True)
class PTA:
    """A parametric timed automaton.

    ``clocks``, ``parameters`` and ``alphabet`` are sorted tuples;
    ``locations`` keeps declaration order.  ``invariants`` is total on
    ``locations`` and every invariant uses upper-bound relations only.
    Instances are validated on construction and never mutated.
    """

    name: str
    clocks: tuple[str, ...]
    parameters: tuple[str, ...]
    locations: tuple[str, ...]
    initial: str
    accepting: frozenset[str]
    invariants: Mapping[str, Guard]
    transitions: tuple[Transition, ...]
    alphabet: tuple[str, ...]

    def __post_init__(self):
        locs = set(self.locations)
        if len(locs) != len(self.locations):
            raise ModelError(f"duplicate location in automaton {self.name!r}")
        if self.initial not in locs:
            raise ModelError(f"initial location {self.initial!r} not declared")
        for loc in self.accepting:
            if loc not in locs:
                raise ModelError(f"accepting location {loc!r} not declared")
        if set(self.invariants) != locs:
            raise ModelError(f"invariant map of {self.name!r} must be total on its locations")
        clocks = set(self.clocks)
        params = set(self.parameters)
        for loc, inv in self.invariants.items():
            for c in inv:
                self._check_constraint(c, clocks, params, f"invariant of {loc!r}")
                if c.rel not in UPPER_RELATIONS:
                    raise ModelError(
                        f"invariant of {loc!r} uses lower-bound relation {c.rel!r} in {c}"
                    )
        for t in self.transitions:
            if t.source not in locs or t.target not in locs:
                raise ModelError(f"transition endpoint undeclared in {t}")
            if not t.resets <= clocks:
                bad = ", ".join(sorted(t.resets - clocks))
                raise ModelError(f"reset of undeclared clock(s) {bad} in {t}")
            if t.action not in self.alphabet:
                raise ModelError(f"action {t.action!r} of {t} not in alphabet")
            for c in t.guard:
                self._check_constraint(c, clocks, params, f"guard of {t}")

    @staticmethod
    def _check_constraint(c: SimpleConstraint, clocks: set[str], params: set[str], where: str):
        if c.clock not in clocks:
            raise ModelError(f"undeclared clock {c.clock!r} in {where}")
        if isinstance(c.bound, str):
            if c.bound in clocks:
                raise ModelError(f"diagonal constraint {c} in {where} (clock-vs-clock)")
            if c.bound not in params:
                raise ModelError(f"undeclared parameter {c.bound!r} in {where}")

    @classmethod
    def make(
        cls,
        name: str,
        clocks: Iterable[str],
        parameters: Iterable[str],
        locations: Sequence[str],
        initial: str,
        accepting: Iterable[str],
        transitions: Iterable[Transition],
        invariants: Mapping[str, Guard] | None = None,
        alphabet: Iterable[str] | None = None,
    ) -> "PTA":
        """Build a PTA, filling missing invariants with true and
        deriving the alphabet from the transitions when not given."""
        transitions = tuple(transitions)
        invs = {loc: TRUE_GUARD for loc in locations}
        invs.update(invariants or {})
        if alphabet is None:
            alphabet = {t.action for t in transitions} or {TAU}
        return cls(
            name=name,
            clocks=tuple(sorted(set(clocks))),
            parameters=tuple(sorted(set(parameters))),
            locations=tuple(locations),
            initial=initial,
            accepting=frozenset(accepting),
            invariants=invs,
            transitions=transitions,
            alphabet=tuple(sorted(set(alphabet))),
        )

    def outgoing(self, location: str) -> tuple[tuple[int, Transition], ...]:
        """Indexed transitions leaving ``location`` (indices into .transitions)."""
        return tuple((i, t) for i, t in enumerate(self.transitions) if t.source == location)

    def all_constraints(self) -> tuple[SimpleConstraint, ...]:
        """Every constraint of every guard and invariant, in document order."""
        out: list[SimpleConstraint] = []
        for loc in self.locations:
            out.extend(self.invariants[loc])
        for t in self.transitions:
            out.extend(t.guard)
        return tuple(out)


#: A parameter valuation: parameter name -> nonnegative integer.
ParamValuation = Mapping[str, int]


def check_valuation(a: PTA, gamma: ParamValuation) -> None:
    """Ensure gamma is total on a's parameters with nonnegative integers."""
    for p in a.parameters:
        if p not in gamma:
            raise ModelError(f"parameter valuation is missing {p!r}")
        v = gamma[p]
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise ModelError(f"parameter {p!r} must map to a nonnegative integer, got {v!r}")


def parametric_clocks(a: PTA) -> frozenset[str]:
    """Clocks compared to at least one parameter in any guard or invariant."""
    return frozenset(c.clock for c in a.all_constraints() if c.parametric)


def max_constant(a: PTA, clocks: Iterable[str] | None = None) -> int:
    """Largest integer constant constraining the given clocks (0 if none).

    Parameters do not count as constants; ``clocks`` defaults to all of
    ``a.clocks``.
    """
    subset = set(a.clocks if clocks is None else clocks)
    if not subset <= set(a.clocks):
        raise ModelError("max_constant asked about undeclared clocks")
    best = 0
    for c in a.all_constraints():
        if c.clock in subset and isinstance(c.bound, int):
            best = max(best, c.bound)
    return best


def substitute_params(a: PTA, gamma: ParamValuation) -> PTA:
    """Replace every parameter occurrence by its gamma value."""
    check_valuation(a, gamma)

    def subst(g: Guard) -> Guard:
        return tuple(
            SimpleConstraint(c.clock, c.rel, gamma[c.bound]) if c.parametric else c for c in g
        )

    return PTA(
        name=a.name,
        clocks=a.clocks,
        parameters=(),
        locations=a.locations,
        initial=a.initial,
        accepting=a.accepting,
        invariants={loc: subst(inv) for loc, inv in a.invariants.items()},
        transitions=tuple(
            Transition(t.source, subst(t.guard), t.action, t.resets, t.target)
            for t in a.transitions
        ),
        alphabet=a.alphabet,
    )


def _reset_adjusted(inv: Guard, resets: frozenset[str]) -> Guard:
    """Target invariant with constraints on reset clocks resolved at value 0.

    Upper bounds hold at 0 except strict bounds at 0 itself: ``x < 0`` is
    kept verbatim (unsatisfiable, hence exact).  A strict parametric bound
    is dropped; that is inexact only for gamma(p)=0 — callers that need
    exactness substitute parameters before normalizing.
    """
    out = []
    for c in inv:
        if c.clock not in resets:
            out.append(c)
        elif c.rel == "<" and c.bound == 0:
            out.append(c)
    return tuple(out)


def normalize(a: PTA) -> PTA:
    """Fold invariants into guards and collapse the alphabet to one action.

    Each transition l -(g,a,R)-> l' becomes
    l -(g and I(l) and I(l')[R], tau, R)-> l'; the result has true
    invariants everywhere and preserves per-valuation language emptiness
    (invariants are upper bounds, so holding at the end of a delay means
    holding throughout).
    """
    transitions = tuple(
        Transition(
            t.source,
            t.guard + a.invariants[t.source] + _reset_adjusted(a.invariants[t.target], t.resets),
            TAU,
            t.resets,
            t.target,
        )
        for t in a.transitions
    )
    accepting = a.accepting
    # An initial invariant like x < 0 rules out the all-zero valuation, so
    # the original automaton has no states at all.  The conjoined source
    # invariant already kills every exit; acceptance of the empty word is
    # the one thing guards cannot express.
    if any(
        c.rel == "<" and c.bound == 0
        for c in a.invariants[a.initial]
        if isinstance(c.bound, int)
    ):
        accepting = accepting - {a.initial}
    return PTA(
        name=a.name,
        clocks=a.clocks,
        parameters=a.parameters,
        locations=a.locations,
        initial=a.initial,
        accepting=accepting,
        invariants={loc: TRUE_GUARD for loc in a.locations},
        transitions=transitions,
        alphabet=(TAU,),
    )


def _polarity(action: str) -> tuple[str, str] | None:
    """(channel, '!' or '?') for a polarized action, None otherwise."""
    if action.endswith("!") or action.endswith("?"):
        return action[:-1], action[-1]
    return None


def product(
    components: Sequence[PTA],
    channels: Iterable[str],
    accepting_policy: str = "any",
) -> PTA:
    """Flat handshake product of a network of component automata.

    Locations are the full cartesian product (named ``a|b|c``).  A channel
    transition fires iff exactly one sender (``c!``) and one receiver
    (``c?``) from distinct components fire together: guards conjoined,
    resets unioned.  Non-channel actions interleave.  Invariants are
    conjoined pointwise.

    ``accepting_policy``: ``"any"`` marks a tuple accepting when any
    component is accepting; a component name restricts acceptance to that
    component (designated-component policy).
    """
    if not components:
        raise ModelError("product of an empty component list")
    channels = set(channels)

    seen_clocks: dict[str, str] = {}
    for comp in components:
        for x in comp.clocks:
            if x in seen_clocks:
                raise ModelError(
                    f"clock {x!r} is shared by components {seen_clocks[x]!r} and {comp.name!r}"
                )
            seen_clocks[x] = comp.name

    # Polarized actions must reference declared channels, and every used
    # channel needs a sender/receiver pair in distinct components.
    senders: dict[str, set[int]] = {c: set() for c in channels}
    receivers: dict[str, set[int]] = {c: set() for c in channels}
    for i, comp in enumerate(components):
        for t in comp.transitions:
            pol = _polarity(t.action)
            if pol is None:
                continue
            chan, mark = pol
            if chan not in channels:
                raise ModelError(f"action {t.action!r} uses undeclared channel {chan!r}")
            (senders if mark == "!" else receivers)[chan].add(i)
    for chan in sorted(channels):
        snd, rcv = senders[chan], receivers[chan]
        if not snd and not rcv:
            continue  # declared but unused
        pairs = [(i, j) for i in snd for j in rcv if i != j]
        if not pairs:
            missing = "receiver" if not rcv else ("sender" if not snd else "distinct partner")
            raise ModelError(f"channel {chan!r} has no matching {missing}")

    if accepting_policy != "any" and accepting_policy not in [c.name for c in components]:
        raise ModelError(f"unknown accepting-policy component {accepting_policy!r}")

    def tuple_name(locs: Sequence[str]) -> str:
        return "|".join(locs)

    location_tuples = list(itertools.product(*[c.locations for c in components]))
    locations = tuple(tuple_name(lt) for lt in location_tuples)
    invariants = {
        tuple_name(lt): tuple(
            c for comp, loc in zip(components, lt) for c in comp.invariants[loc]
        )
        for lt in location_tuples
    }

    accepting = set()
    for lt in location_tuples:
        for comp, loc in zip(components, lt):
            if accepting_policy != "any" and comp.name != accepting_policy:
                continue
            if loc in comp.accepting:
                accepting.add(tuple_name(lt))
                break

    transitions: list[Transition] = []
    for lt in location_tuples:
        src = tuple_name(lt)
        # interleaving of non-channel actions
        for i, comp in enumerate(components):
            for t in comp.transitions:
                if t.source != lt[i] or _polarity(t.action) is not None:
                    continue
                tgt = list(lt)
                tgt[i] = t.target
                transitions.append(
                    Transition(src, t.guard, t.action, t.resets, tuple_name(tgt))
                )
        # binary handshakes
        for chan in sorted(channels):
            for i, j in itertools.product(range(len(components)), repeat=2):
                if i == j:
                    continue
                for ts in components[i].transitions:
                    if ts.source != lt[i] or ts.action != chan + "!":
                        continue
                    for tr in components[j].transitions:
                        if tr.source != lt[j] or tr.action != chan + "?":
                            continue
                        tgt = list(lt)
                        tgt[i] = ts.target
                        tgt[j] = tr.target
                        transitions.append(
                            Transition(
                                src,
                                ts.guard + tr.guard,
                                chan,
                                ts.resets | tr.resets,
                                tuple_name(tgt),
                            )
                        )

    return PTA.make(
        name="|".join(c.name for c in components),
        clocks=[x for c in components for x in c.clocks],
        parameters=[p for c in components for p in c.parameters],
        locations=locations,
        initial=tuple_name([c.initial for c in components]),
        accepting=accepting,
        transitions=transitions,
        invariants=invariants,
        alphabet={TAU} | channels | {t.action for t in transitions},
    )
