"""Bounded parameter synthesis: enumerate integer valuations, decide each.

Valuations are enumerated by iterative deepening on the parameter sum
with a lexicographic tie-break on sorted parameter names, so found
valuations are minimal in a documented order.  Each valuation is decided
by the concrete region graph or, for one-parametric-clock automata, by
the 0/1-abstraction (built once and reused across valuations); BOTH runs
the two backends against each other and fails loudly on disagreement.
"""

from __future__ import annotations

import itertools
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from .model import PTA, ModelError, ParamValuation, normalize, parametric_clocks
from .semantics import EmptinessResult, TimedRun, empty, initial_blocked, replay
from .zerone import add_fractional_clock, concretize_run, project_run, zo_reach

BACKENDS = ("concrete", "zerone", "both")
MODES = ("reach", "safe")

#: Environment variable controlling parallel candidate checking.
THREADS_ENV = "PTACHECK_THREADS"


class BackendDisagreement(RuntimeError):
    """The differential-testing mode caught the two backends disagreeing."""

    def __init__(self, gamma: ParamValuation, concrete: bool, zerone: bool):
        self.gamma = dict(gamma)
        super().__init__(
            f"backends disagree under {self.gamma}: concrete says empty={concrete}, "
            f"zerone says empty={zerone}"
        )


@dataclass(frozen=True)
class SynthesisQuery:
    automaton: PTA
    mode: str  # "reach" | "safe"
    bound: int  # max parameter sum
    backend: str = "concrete"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ModelError(f"unknown mode {self.mode!r}")
        if self.backend not in BACKENDS:
            raise ModelError(f"unknown backend {self.backend!r}")
        if self.bound < 0:
            raise ModelError("bound must be nonnegative")
        if self.backend in ("zerone", "both") and len(parametric_clocks(self.automaton)) != 1:
            raise ModelError("the zerone backend needs exactly one parametric clock")


@dataclass
class SolveStats:
    valuations_tested: int = 0
    states_explored: int = 0
    wall_time_ms: float = 0.0


@dataclass
class SynthesisResult:
    found: bool
    gamma: dict[str, int] | None
    witness: TimedRun | None
    bound: int
    mode: str
    stats: SolveStats

    @property
    def verdict(self) -> str:
        return "FOUND" if self.found else "NOT_FOUND_UP_TO"


@dataclass
class CheckOutcome:
    empty: bool
    witness: TimedRun | None  # over the automaton handed to check()
    states_explored: int


class _ZeroneBackend:
    """The A' derivation is gamma-independent and shared; the 0/1-automaton
    fragment is explored per valuation (zo_reach) so the exponential
    abstraction is never materialized in full."""

    def __init__(self, a: PTA):
        self.original = a
        self.norm = normalize(a)
        frac = add_fractional_clock(self.norm)
        self.aprime = frac.automaton
        self.xp = frac.parametric_clock
        self.z = frac.fractional_clock

    def check(self, gamma: ParamValuation) -> CheckOutcome:
        if initial_blocked(self.original, gamma):
            return CheckOutcome(True, None, 0)
        zot, result = zo_reach(self.aprime, self.xp, self.z, gamma)
        if result.empty:
            return CheckOutcome(True, None, result.states_explored)
        aprime_run = concretize_run(zot, result.run, gamma)
        witness = project_run(aprime_run, len(self.original.transitions))
        final = replay(self.original, gamma, witness)
        if final.location not in self.original.accepting:
            raise RuntimeError("internal: zerone witness does not end accepting")
        return CheckOutcome(False, witness, result.states_explored)


def check(a: PTA, gamma: ParamValuation, backend: str = "concrete") -> CheckOutcome:
    """Per-valuation emptiness with a replay-validated witness when nonempty."""
    if backend not in BACKENDS:
        raise ModelError(f"unknown backend {backend!r}")
    if backend == "concrete":
        r: EmptinessResult = empty(a, gamma)
        return CheckOutcome(r.empty, r.witness, r.states_explored)
    zb = _ZeroneBackend(a)
    if backend == "zerone":
        return zb.check(gamma)
    conc = empty(a, gamma)
    zo = zb.check(gamma)
    if conc.empty != zo.empty:
        raise BackendDisagreement(gamma, conc.empty, zo.empty)
    return CheckOutcome(
        conc.empty, conc.witness, conc.states_explored + zo.states_explored
    )


def enumerate_valuations(parameters: Sequence[str], bound: int) -> Iterator[dict[str, int]]:
    """All valuations with sum <= bound, by increasing sum then lexicographic
    on the name-sorted value vector."""
    names = sorted(parameters)
    if not names:
        yield {}
        return

    def compositions(total: int, k: int) -> Iterator[tuple[int, ...]]:
        if k == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for rest in compositions(total - head, k - 1):
                yield (head,) + rest

    for s in range(bound + 1):
        for values in compositions(s, len(names)):
            yield dict(zip(names, values))


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def solve(q: SynthesisQuery) -> SynthesisResult:
    """REACH: first gamma with a nonempty language; SAFE: first with an
    empty one; NOT_FOUND_UP_TO(bound) otherwise.  The reported valuation
    is always the enumeration-order-first hit, also with parallel
    candidate checking enabled."""
    t0 = time.perf_counter()
    stats = SolveStats()
    a = q.automaton
    zb = _ZeroneBackend(a) if q.backend in ("zerone", "both") else None

    def decide(gamma: ParamValuation) -> CheckOutcome:
        if q.backend == "concrete":
            r = empty(a, gamma)
            return CheckOutcome(r.empty, r.witness, r.states_explored)
        if q.backend == "zerone":
            return zb.check(gamma)
        conc = empty(a, gamma)
        zo = zb.check(gamma)
        if conc.empty != zo.empty:
            raise BackendDisagreement(gamma, conc.empty, zo.empty)
        return CheckOutcome(conc.empty, conc.witness, conc.states_explored + zo.states_explored)

    def is_hit(out: CheckOutcome) -> bool:
        return out.empty if q.mode == "safe" else not out.empty

    def finish(gamma: dict | None, witness: TimedRun | None) -> SynthesisResult:
        stats.wall_time_ms = (time.perf_counter() - t0) * 1000
        if gamma is not None and q.mode == "safe":
            witness = None  # emptiness has no finite witness
        return SynthesisResult(gamma is not None, gamma, witness, q.bound, q.mode, stats)

    threads = _thread_count()
    candidates = enumerate_valuations(a.parameters, q.bound)
    if threads == 1:
        for gamma in candidates:
            out = decide(gamma)
            stats.valuations_tested += 1
            stats.states_explored += out.states_explored
            if is_hit(out):
                return finish(gamma, out.witness)
        return finish(None, None)

    # Parallel variant: batches preserve enumeration order; the first hit
    # of the earliest batch wins regardless of completion order.
    with ThreadPoolExecutor(max_workers=threads) as pool:
        while True:
            batch = list(itertools.islice(candidates, threads * 4))
            if not batch:
                return finish(None, None)
            outcomes = list(pool.map(decide, batch))
            for gamma, out in zip(batch, outcomes):
                stats.valuations_tested += 1
                stats.states_explored += out.states_explored
                if is_hit(out):
                    return finish(gamma, out.witness)
