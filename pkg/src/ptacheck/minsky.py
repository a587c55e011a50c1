"""Two-counter Minsky machines and their encodings as single-parameter PTAs.

The interpreter is the ground-truth oracle; the encoders produce the
three-parametric-clock automata of the halting (reachability) and
boundedness (safety) reductions.  Counter values live in the clocks x1
and x2 whenever the helper clock z is zero, and one increment or
test-and-decrement executes as a gadget of exact-guard transitions whose
delays are uniquely determined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .model import PTA, TAU, ModelError, SimpleConstraint, Transition


@dataclass(frozen=True)
class Inc:
    counter: int  # 1 or 2
    goto: int

    def __str__(self) -> str:
        return f"inc c{self.counter} goto {self.goto}"


@dataclass(frozen=True)
class TestDec:
    counter: int
    on_zero: int
    on_dec: int

    def __str__(self) -> str:
        return f"if c{self.counter}=0 goto {self.on_zero} else dec goto {self.on_dec}"


@dataclass(frozen=True)
class Halt:
    def __str__(self) -> str:
        return "halt"


Instruction = Union[Inc, TestDec, Halt]


@dataclass(frozen=True)
class MinskyMachine:
    """Instructions labelled 1..n; the last one is HALT."""

    instructions: tuple[Instruction, ...]

    def __post_init__(self):
        n = len(self.instructions)
        if n == 0 or not isinstance(self.instructions[-1], Halt):
            raise ModelError("a Minsky machine ends with HALT")
        for idx, ins in enumerate(self.instructions, start=1):
            targets: tuple[int, ...]
            if isinstance(ins, Inc):
                targets = (ins.goto,)
            elif isinstance(ins, TestDec):
                targets = (ins.on_zero, ins.on_dec)
            else:
                targets = ()
            if isinstance(ins, (Inc, TestDec)) and ins.counter not in (1, 2):
                raise ModelError(f"instruction {idx} uses unknown counter c{ins.counter}")
            for t in targets:
                if not 1 <= t <= n:
                    raise ModelError(f"instruction {idx} jumps to undefined label {t}")

    def __len__(self) -> int:
        return len(self.instructions)

    def __str__(self) -> str:
        return "\n".join(f"{i}: {ins}" for i, ins in enumerate(self.instructions, start=1))


@dataclass(frozen=True)
class MinskyOutcome:
    halted: bool
    steps: int
    #: max of v1+v2 over all visited configurations when halted,
    #: the step bound reached otherwise.
    max_counter_sum: int

    @property
    def running_at(self) -> int | None:
        return None if self.halted else self.steps


def interpret(m: MinskyMachine, max_steps: int) -> MinskyOutcome:
    """Deterministic simulation from (1, 0, 0)."""
    if max_steps < 0:
        raise ModelError("max_steps must be nonnegative")
    pc, v = 1, [0, 0, 0]  # v[1], v[2]
    peak = 0
    for step in range(max_steps + 1):
        ins = m.instructions[pc - 1]
        if isinstance(ins, Halt):
            return MinskyOutcome(True, step, peak)
        if step == max_steps:
            break
        if isinstance(ins, Inc):
            v[ins.counter] += 1
            pc = ins.goto
        else:
            if v[ins.counter] == 0:
                pc = ins.on_zero
            else:
                v[ins.counter] -= 1
                pc = ins.on_dec
        peak = max(peak, v[1] + v[2])
    return MinskyOutcome(False, max_steps, peak)


# --- source format -----------------------------------------------------


def parse_minsky(text: str) -> MinskyMachine:
    """Parse the labelled instruction list format::

        1: inc c1 goto 2
        2: if c1=0 goto 4 else dec goto 3
        3: halt
    """
    instructions: list[Instruction] = []
    lineno = 0
    for raw in text.splitlines():
        lineno += 1
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        label, _, body = line.partition(":")
        try:
            idx = int(label.strip())
        except ValueError:
            raise ModelError(f"expected a numeric label in {raw!r}", lineno, 1) from None
        if idx != len(instructions) + 1:
            raise ModelError(f"label {idx} out of order", lineno, 1)
        words = body.split()
        try:
            instructions.append(_parse_instruction(words))
        except (IndexError, ValueError):
            raise ModelError(f"cannot parse instruction {body.strip()!r}", lineno, 1) from None
    if not instructions:
        raise ModelError("empty Minsky program", 1, 1)
    return MinskyMachine(tuple(instructions))


def _counter(word: str) -> int:
    if word in ("c1", "c2"):
        return int(word[1])
    raise ValueError(word)


def _parse_instruction(words: list[str]) -> Instruction:
    if words == ["halt"]:
        return Halt()
    if words[0] == "inc" and words[2] == "goto" and len(words) == 4:
        return Inc(_counter(words[1]), int(words[3]))
    # if cR=0 goto K else dec goto J
    if (
        len(words) == 8
        and words[0] == "if"
        and words[1].endswith("=0")
        and words[2] == "goto"
        and words[4] == "else"
        and words[5] == "dec"
        and words[6] == "goto"
    ):
        return TestDec(_counter(words[1][:-2]), int(words[3]), int(words[7]))
    raise ValueError(" ".join(words))


def minsky_to_text(m: MinskyMachine) -> str:
    return str(m) + "\n"


# --- encodings ----------------------------------------------------------


def _eq(clock: str, bound) -> SimpleConstraint:
    return SimpleConstraint(clock, "==", bound)


def _gadget(i: int, ins: Instruction) -> tuple[list[str], list[Transition]]:
    """Internal locations and transitions of instruction i's gadget."""
    if isinstance(ins, Halt):
        return [], []
    li = f"l{i}"
    inner = [f"l{i}_{k}" for k in range(1, 7)]
    l1, l2, l3, l4, l5, l6 = inner
    a, b = ("x1", "x2") if ins.counter == 1 else ("x2", "x1")
    if isinstance(ins, Inc):
        lj = f"l{ins.goto}"
        edges = [
            Transition(li, (_eq("z", 1),), TAU, frozenset({"z"}), l1),
            Transition(l1, (_eq(a, "p"),), TAU, frozenset({a}), l2),
            Transition(l2, (_eq(b, "p"),), TAU, frozenset({b}), l3),
            Transition(l3, (_eq(b, 1),), TAU, frozenset({b}), l4),
            Transition(l4, (_eq("z", "p"),), TAU, frozenset({"z"}), lj),
            Transition(l1, (_eq(b, "p"),), TAU, frozenset({b}), l5),
            Transition(l5, (_eq(b, 1),), TAU, frozenset({b}), l6),
            Transition(l6, (_eq(a, "p"),), TAU, frozenset({a}), l4),
        ]
        return inner, edges
    lj, lk = f"l{ins.on_dec}", f"l{ins.on_zero}"
    edges = [
        Transition(li, (_eq(a, 0),), TAU, frozenset(), lk),
        Transition(li, (_eq("z", 0), SimpleConstraint(a, ">", 0)), TAU, frozenset(), l1),
        Transition(l1, (_eq(a, "p"),), TAU, frozenset({a}), l2),
        Transition(l2, (_eq(a, 1),), TAU, frozenset({a}), l3),
        Transition(l3, (_eq(b, "p"),), TAU, frozenset({b}), l4),
        Transition(l4, (_eq("z", "p"),), TAU, frozenset({"z"}), lj),
        Transition(l1, (_eq(b, "p"),), TAU, frozenset({b}), l5),
        Transition(l5, (_eq(a, "p"),), TAU, frozenset({a}), l6),
        Transition(l6, (_eq(a, 1),), TAU, frozenset({a}), l4),
    ]
    return inner, edges


def encode_reach(m: MinskyMachine) -> PTA:
    """The halting reduction: l1 initial, ln the only accepting location.

    Clocks x1, x2, z are all parametric (single parameter p); the
    automaton has no invariants and no nonparametric clocks.
    """
    locations = [f"l{i}" for i in range(1, len(m) + 1)]
    transitions: list[Transition] = []
    for i, ins in enumerate(m.instructions, start=1):
        inner, edges = _gadget(i, ins)
        locations.extend(inner)
        transitions.extend(edges)
    return PTA.make(
        name="minsky_reach",
        clocks=("x1", "x2", "z"),
        parameters=("p",),
        locations=locations,
        initial="l1",
        accepting={f"l{len(m)}"},
        transitions=transitions,
        alphabet=(TAU,),
    )


def encode_safe(m: MinskyMachine) -> PTA:
    """The boundedness reduction: the reach encoding plus, for every
    increment targeting lj, an edge lj -(z=0 and x_r=p)-> lacc; lacc is
    the only accepting location."""
    base = encode_reach(m)
    transitions = list(base.transitions)
    for ins in m.instructions:
        if isinstance(ins, Inc):
            x = "x1" if ins.counter == 1 else "x2"
            transitions.append(
                Transition(
                    f"l{ins.goto}",
                    (_eq("z", 0), _eq(x, "p")),
                    TAU,
                    frozenset(),
                    "lacc",
                )
            )
    return PTA.make(
        name="minsky_safe",
        clocks=base.clocks,
        parameters=base.parameters,
        locations=base.locations + ("lacc",),
        initial=base.initial,
        accepting={"lacc"},
        transitions=transitions,
        alphabet=(TAU,),
    )
