import pytest

from ptacheck import ModelError, parse_network, parse_pta
from ptacheck.model import TAU
from ptacheck.parser import network_to_text
from ptacheck.semantics import empty

from _support import FIXTURES, load_firealarm

MINIMAL = """
automaton M {
  location only init accepting;
}
"""


def test_minimal_model():
    a = parse_pta(MINIMAL)
    assert a.locations == ("only",)
    assert a.transitions == ()
    # the semantics of the (parameter-free) language is well defined
    assert empty(a, {}).empty is False
    assert empty(parse_pta(MINIMAL.replace(" accepting", "")), {}).empty is True


def test_sensor1_shape():
    net = load_firealarm()
    sensor1 = next(a for a in net.automata if a.name == "Sensor1")
    assert len(sensor1.locations) == 2
    assert len(sensor1.transitions) == 3
    assert sensor1.clocks == ("x1",)
    constraints = sorted(
        (c.clock, c.rel, c.bound) for c in sensor1.all_constraints()
    )
    assert constraints == [("x1", "<", 3), ("x1", "<", 3), ("x1", ">", 2)]


def test_undeclared_clock_names_position():
    src = "clocks x;\nautomaton A {\n  location l init;\n  trans l -> l when (w < 2);\n}\n"
    with pytest.raises(ModelError) as err:
        parse_pta(src)
    assert "w" in str(err.value)
    assert err.value.line == 4
    assert err.value.column is not None


def test_diagonal_constraint_rejected():
    src = "clocks x y;\nautomaton A {\n  location l init;\n  trans l -> l when (x < y);\n}\n"
    with pytest.raises(ModelError, match="diagonal"):
        parse_pta(src)


def test_invariant_lower_bound_rejected():
    src = "clocks x;\nautomaton A {\n  location l init invariant (x >= 2);\n}\n"
    with pytest.raises(ModelError, match="upper bound"):
        parse_pta(src)


def test_undeclared_location_rejected():
    src = "automaton A {\n  location l init;\n  trans l -> moon;\n}\n"
    with pytest.raises(ModelError, match="moon"):
        parse_pta(src)


def test_syntax_error_has_position():
    with pytest.raises(ModelError) as err:
        parse_pta("automaton A { location l init  trans }")
    assert err.value.line == 1


def test_reversed_operand_order():
    a = parse_pta(
        "clocks x;\nautomaton A {\n  location l init;\n  trans l -> l when (2 < x && x < 3);\n}\n"
    )
    (t,) = a.transitions
    assert [(c.clock, c.rel, c.bound) for c in t.guard] == [("x", ">", 2), ("x", "<", 3)]


def test_internal_transition_uses_tau():
    a = parse_pta("automaton A {\n location l init;\n trans l -> l;\n}")
    assert a.transitions[0].action == TAU


def _structurally_equal(n1, n2):
    assert [a.name for a in n1.automata] == [a.name for a in n2.automata]
    for a, b in zip(n1.automata, n2.automata):
        assert a.locations == b.locations
        assert a.initial == b.initial
        assert a.accepting == b.accepting
        assert a.invariants == b.invariants
        assert a.transitions == b.transitions


def test_serializer_roundtrip_firealarm():
    net = load_firealarm()
    again = parse_network(network_to_text(net))
    _structurally_equal(net, again)


def test_serializer_roundtrip_minsky_goldens():
    for name in ("minsky_inc.pta", "minsky_dec.pta"):
        net = parse_network(FIXTURES.joinpath(name).read_text())
        _structurally_equal(net, parse_network(network_to_text(net)))


def test_no_automaton_is_an_error():
    with pytest.raises(ModelError):
        parse_network("clocks x;")
