import random

import pytest

from ptacheck import (
    ModelError,
    PTA,
    SimpleConstraint,
    Transition,
    max_constant,
    normalize,
    parametric_clocks,
    product,
    substitute_params,
)
from ptacheck.minsky import Halt, Inc, MinskyMachine, encode_reach
from ptacheck.model import TAU
from ptacheck.semantics import empty

from _support import all_valuations, load_firealarm, random_pta


@pytest.fixture(scope="module")
def firealarm():
    return load_firealarm()


@pytest.fixture(scope="module")
def flat(firealarm):
    return firealarm.flatten()


def test_parametric_clocks_firealarm(flat):
    assert parametric_clocks(flat) == {"x"}


def test_parametric_clocks_minsky():
    a = encode_reach(MinskyMachine((Inc(1, 2), Halt())))
    assert parametric_clocks(a) == {"x1", "x2", "z"}


def test_parametric_clocks_without_parameters():
    a = PTA.make(
        "plain", ["c"], [], ["l"], "l", [],
        [Transition("l", (SimpleConstraint("c", "<", 1),), TAU, frozenset(), "l")],
    )
    assert parametric_clocks(a) == frozenset()


def test_max_constant(firealarm):
    sensor1 = next(a for a in firealarm.automata if a.name == "Sensor1")
    controller = next(a for a in firealarm.automata if a.name == "Controller")
    assert max_constant(sensor1, {"x1"}) == 3
    assert max_constant(controller, {"y"}) == 20
    assert max_constant(controller, {"x"}) == 2  # p1/p2 are not constants
    unconstrained = PTA.make("u", ["c"], [], ["l"], "l", [], [])
    assert max_constant(unconstrained, {"c"}) == 0


def test_substitute_params_noop_without_parameters():
    a = PTA.make("plain", ["c"], [], ["l"], "l", [], [])
    assert substitute_params(a, {}) == a


def test_substitute_params_controller(firealarm):
    controller = next(a for a in firealarm.automata if a.name == "Controller")
    sub = substitute_params(controller, {"p1": 5, "p2": 9})
    eq_five = [
        c for t in sub.transitions for c in t.guard if c.rel == "==" and c.bound == 5
    ]
    assert eq_five and all(c.clock == "x" for c in eq_five)
    assert parametric_clocks(sub) == frozenset()
    assert sub.parameters == ()


def test_substitute_params_requires_total_valuation(firealarm):
    controller = next(a for a in firealarm.automata if a.name == "Controller")
    with pytest.raises(ModelError, match="p2"):
        substitute_params(controller, {"p1": 5})


def test_normalize_trivial_invariants_only_renames():
    a = PTA.make(
        "plain", ["c"], [], ["l", "m"], "l", ["m"],
        [Transition("l", (SimpleConstraint("c", ">", 1),), "go!", frozenset({"c"}), "m")],
        alphabet=["go!"],
    )
    n = normalize(a)
    assert n.alphabet == (TAU,)
    (t,) = n.transitions
    assert t.guard == a.transitions[0].guard
    assert (t.source, t.resets, t.target) == ("l", frozenset({"c"}), "m")


def test_normalize_conjoins_source_invariant(firealarm):
    controller = next(a for a in firealarm.automata if a.name == "Controller")
    n = normalize(controller)
    for t, original in zip(n.transitions, controller.transitions):
        if original.source in ("fail", "timeout"):
            continue
        assert SimpleConstraint("y", "<=", 20) in t.guard


def test_normalize_drops_reset_upper_bounds():
    inv = (SimpleConstraint("c", "<=", 2), SimpleConstraint("d", "<", 1))
    a = PTA.make(
        "inv", ["c", "d"], [], ["l", "m"], "l", ["m"],
        [Transition("l", (), TAU, frozenset({"c", "d"}), "m")],
        invariants={"m": inv},
    )
    (t,) = normalize(a).transitions
    assert t.guard == ()  # both entry constraints hold at value 0
    a2 = PTA.make(
        "inv2", ["c"], [], ["l", "m"], "l", ["m"],
        [Transition("l", (), TAU, frozenset({"c"}), "m")],
        invariants={"m": (SimpleConstraint("c", "<", 0),)},
    )
    (t2,) = normalize(a2).transitions
    assert t2.guard == (SimpleConstraint("c", "<", 0),)  # kept: unsatisfiable


def test_normalize_preserves_emptiness_randomized():
    rng = random.Random(1203)
    checked = 0
    for _ in range(100):
        a = random_pta(rng, with_invariants=True)
        for gamma in all_valuations(a.parameters, 4)[:6]:
            want = empty(a, gamma).empty
            got = empty(normalize(a), gamma).empty
            assert got == want, (a, gamma)
            checked += 1
    assert checked >= 100


def test_substitute_commutes_with_normalize_on_emptiness():
    rng = random.Random(77)
    for _ in range(60):
        a = random_pta(rng, with_invariants=True)
        for gamma in all_valuations(a.parameters, 3)[:4]:
            via_norm_first = empty(substitute_params(normalize(a), gamma), {}).empty
            via_subst_first = empty(normalize(substitute_params(a, gamma)), {}).empty
            assert via_norm_first == via_subst_first


# --- product -------------------------------------------------------------


def test_product_single_component_isomorphic():
    a = PTA.make(
        "solo", ["c"], [], ["l", "m"], "l", ["m"],
        [Transition("l", (), TAU, frozenset(), "m")],
    )
    p = product([a], set())
    assert p.locations == a.locations
    assert p.initial == a.initial
    assert p.accepting == a.accepting
    assert len(p.transitions) == len(a.transitions)


def test_product_firealarm_has_24_locations(flat):
    assert len(flat.locations) == 2 * 2 * 6
    assert flat.initial == "idle|idle|wake1"
    accepting_parts = {loc.split("|")[2] for loc in flat.accepting}
    assert accepting_parts == {"fail", "timeout"}


def test_product_missing_receiver_is_an_error():
    sender = PTA.make(
        "s", ["c"], [], ["l"], "l", [],
        [Transition("l", (), "ping!", frozenset(), "l")], alphabet=["ping!"],
    )
    other = PTA.make("o", ["d"], [], ["m"], "m", [], [])
    with pytest.raises(ModelError, match="ping"):
        product([sender, other], {"ping"})


def test_product_rejects_shared_clocks():
    a = PTA.make("a", ["c"], [], ["l"], "l", [], [])
    b = PTA.make("b", ["c"], [], ["m"], "m", [], [])
    with pytest.raises(ModelError, match="shared"):
        product([a, b], set())


def test_product_designated_component_policy(firealarm):
    flat_any = firealarm.flatten("any")
    flat_ctrl = firealarm.flatten("Controller")
    # the sensors have no accepting locations, so the two policies coincide
    assert flat_any.accepting == flat_ctrl.accepting
    with pytest.raises(ModelError, match="Watchdog"):
        firealarm.flatten("Watchdog")


def _chain_component(idx: int, send: str | None, recv: str | None) -> PTA:
    # one clock each; receives on recv, then sends on send
    clock = f"k{idx}"
    transitions = []
    locations = ["a", "b"] if recv else ["a"]
    if recv:
        transitions.append(Transition("a", (), recv + "?", frozenset({clock}), "b"))
        src = "b"
    else:
        src = "a"
    if send:
        transitions.append(
            Transition(src, (SimpleConstraint(clock, "<", 2),), send + "!", frozenset(), src)
        )
    return PTA.make(
        f"C{idx}", [clock], [], locations, "a", [locations[-1]], transitions
    )


def test_product_associative_up_to_isomorphism():
    # channels pair disjoint component groups, so both groupings are legal
    a = _chain_component(0, send="u", recv=None)
    b = _chain_component(1, send="v", recv="u")
    c = _chain_component(2, send=None, recv="v")
    flat = product([a, b, c], {"u", "v"})
    left = product([product([a, b], {"u"}), c], {"v"})
    right = product([a, product([b, c], {"v"})], {"u"})
    for candidate in (left, right):
        assert sorted(candidate.locations) == sorted(flat.locations)
        r1 = empty(candidate, {})
        r2 = empty(flat, {})
        assert r1.empty == r2.empty
        assert r1.states_explored == r2.states_explored
