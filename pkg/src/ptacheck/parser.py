"""Parser and serializer for the textual model format.

A file describes one network::

    clocks x y; params p1 p2; channels wakeup1 result1;
    automaton Name {
      location L init accepting invariant (y <= 20);
      trans L -> M when (x < 2 && y <= 20) sync wakeup1! reset {x};
    }

Whitespace-insensitive; ``&&`` is the only connective; relations are
``< <= == >= >``.  Constraints may be written with the bound on either
side (``2 < x1`` means ``x1 > 2``).  ``sync`` takes ``chan!``/``chan?``
for handshakes or a bare name for an already-synchronized label;
transitions without ``sync`` are internal.  Comments run from ``//`` or
``#`` to end of line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    PTA,
    TAU,
    Guard,
    ModelError,
    SimpleConstraint,
    Transition,
    guard_str,
    product,
)

_SYMBOLS = ("&&", "->", "<=", ">=", "==", "<", ">", ";", ",", "{", "}", "(", ")", "!", "?")
_KEYWORDS = {
    "clocks",
    "params",
    "channels",
    "automaton",
    "location",
    "trans",
    "init",
    "accepting",
    "invariant",
    "when",
    "sync",
    "reset",
}


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "sym" | "eof"
    text: str
    line: int
    column: int


def _lex(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "#" or text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        matched = False
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("sym", sym, line, col))
                i += len(sym)
                col += len(sym)
                matched = True
                break
        if matched:
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ModelError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass
class Network:
    """A parsed model file: shared declarations plus component automata."""

    clocks: tuple[str, ...]
    parameters: tuple[str, ...]
    channels: tuple[str, ...]
    automata: tuple[PTA, ...]

    def flatten(self, accepting_policy: str = "any") -> PTA:
        """The single automaton of the network (handshake product if needed)."""
        if len(self.automata) == 1 and not self.channels:
            return self.automata[0]
        return product(self.automata, self.channels, accepting_policy)


class _Parser:
    def __init__(self, text: str):
        self.tokens = _lex(text)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str) -> ModelError:
        tok = self.current
        return ModelError(message, tok.line, tok.column)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        tok = self.current
        if tok.kind != kind or (text is not None and tok.text != text):
            return None
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.accept(kind, text)
        if tok is None:
            want = text if text is not None else kind
            raise self.error(f"expected {want!r}, found {self.current.text or 'end of file'!r}")
        return tok

    def accept_word(self, word: str) -> Token | None:
        tok = self.current
        if tok.kind == "ident" and tok.text == word:
            self.pos += 1
            return tok
        return None

    def expect_word(self, word: str) -> Token:
        tok = self.accept_word(word)
        if tok is None:
            raise self.error(f"expected {word!r}, found {self.current.text or 'end of file'!r}")
        return tok

    def expect_name(self, what: str) -> Token:
        tok = self.current
        if tok.kind != "ident" or tok.text in _KEYWORDS:
            raise self.error(f"expected {what} name, found {tok.text or 'end of file'!r}")
        self.pos += 1
        return tok

    # declarations -----------------------------------------------------

    def parse_network(self) -> Network:
        clocks: list[str] = []
        params: list[str] = []
        channels: list[str] = []
        decls = {"clocks": clocks, "params": params, "channels": channels}
        while self.current.kind == "ident" and self.current.text in decls:
            target = decls[self.current.text]
            self.pos += 1
            while self.current.kind == "ident" and self.current.text not in _KEYWORDS:
                name = self.expect_name("declaration").text
                if name in clocks or name in params or name in channels:
                    raise self.error(f"name {name!r} declared twice")
                target.append(name)
                self.accept("sym", ",")
            self.expect("sym", ";")

        automata: list[PTA] = []
        while self.accept_word("automaton"):
            automata.append(self.parse_automaton(clocks, params, channels))
        self.expect("eof")
        if not automata:
            raise ModelError("model declares no automaton", 1, 1)

        names = [a.name for a in automata]
        if len(set(names)) != len(names):
            raise ModelError("duplicate automaton name", 1, 1)
        return Network(tuple(clocks), tuple(params), tuple(channels), tuple(automata))

    def parse_automaton(self, clocks: list[str], params: list[str], channels: list[str]) -> PTA:
        name = self.expect_name("automaton").text
        self.expect("sym", "{")
        locations: list[str] = []
        initial: str | None = None
        accepting: list[str] = []
        invariants: dict[str, Guard] = {}
        raw_transitions: list[tuple[Token, str, str, Guard, str, frozenset[str]]] = []

        while not self.accept("sym", "}"):
            if self.accept_word("location"):
                tok = self.current
                loc = self.expect_name("location").text
                if loc in locations:
                    raise ModelError(f"location {loc!r} declared twice", tok.line, tok.column)
                locations.append(loc)
                while True:
                    if self.accept_word("init"):
                        if initial is not None:
                            raise ModelError(
                                f"second init location {loc!r}", tok.line, tok.column
                            )
                        initial = loc
                    elif self.accept_word("accepting"):
                        accepting.append(loc)
                    elif self.accept_word("invariant"):
                        inv = self.parse_guard(clocks, params)
                        for c in inv:
                            if c.rel not in ("<", "<="):
                                raise ModelError(
                                    f"invariant constraint {c} is not an upper bound",
                                    tok.line,
                                    tok.column,
                                )
                        invariants[loc] = inv
                    else:
                        break
                self.expect("sym", ";")
            elif self.accept_word("trans"):
                tok = self.current
                src = self.expect_name("location").text
                self.expect("sym", "->")
                dst = self.expect_name("location").text
                guard: Guard = ()
                action = TAU
                resets: frozenset[str] = frozenset()
                if self.accept_word("when"):
                    guard = self.parse_guard(clocks, params)
                if self.accept_word("sync"):
                    atok = self.expect_name("action")
                    if atok.text not in channels:
                        raise ModelError(
                            f"undeclared channel {atok.text!r}", atok.line, atok.column
                        )
                    if self.accept("sym", "!"):
                        action = atok.text + "!"
                    elif self.accept("sym", "?"):
                        action = atok.text + "?"
                    else:
                        action = atok.text
                if self.accept_word("reset"):
                    resets = self.parse_resets(clocks)
                self.expect("sym", ";")
                raw_transitions.append((tok, src, dst, guard, action, resets))
            else:
                raise self.error("expected 'location', 'trans' or '}'")

        if initial is None:
            raise ModelError(f"automaton {name!r} has no init location", 1, 1)
        declared = set(locations)
        for tok, src, dst, *_ in raw_transitions:
            for loc in (src, dst):
                if loc not in declared:
                    raise ModelError(f"undeclared location {loc!r}", tok.line, tok.column)

        used_clocks = {c.clock for *_, g, _a, rs in raw_transitions for c in g}
        used_clocks |= {c.clock for inv in invariants.values() for c in inv}
        used_clocks |= {x for *_, rs in raw_transitions for x in rs}
        return PTA.make(
            name=name,
            clocks=used_clocks,
            parameters=params,
            locations=locations,
            initial=initial,
            accepting=accepting,
            transitions=[
                Transition(src, g, a, rs, dst) for _tok, src, dst, g, a, rs in raw_transitions
            ],
            invariants=invariants,
        )

    # expressions ------------------------------------------------------

    def parse_guard(self, clocks: list[str], params: list[str]) -> Guard:
        self.expect("sym", "(")
        if self.accept("sym", ")"):
            return ()
        constraints = [self.parse_constraint(clocks, params)]
        while self.accept("sym", "&&"):
            constraints.append(self.parse_constraint(clocks, params))
        self.expect("sym", ")")
        return tuple(constraints)

    _FLIP = {"<": ">", "<=": ">=", "==": "==", ">=": "<=", ">": "<"}

    def parse_constraint(self, clocks: list[str], params: list[str]) -> SimpleConstraint:
        left_tok = self.current
        left = self.parse_operand(clocks, params)
        rel_tok = self.current
        if rel_tok.kind != "sym" or rel_tok.text not in self._FLIP:
            raise self.error("expected a relation (< <= == >= >)")
        self.pos += 1
        right_tok = self.current
        right = self.parse_operand(clocks, params)
        rel = rel_tok.text

        def is_clock(v) -> bool:
            return isinstance(v, str) and v in clocks

        if is_clock(left) and is_clock(right):
            raise ModelError(
                f"diagonal constraint {left} {rel} {right} is not supported",
                left_tok.line,
                left_tok.column,
            )
        if is_clock(left):
            return SimpleConstraint(left, rel, right)
        if is_clock(right):
            return SimpleConstraint(right, self._FLIP[rel], left)
        raise ModelError(
            f"constraint {left} {rel} {right} compares no clock", left_tok.line, left_tok.column
        )

    def parse_operand(self, clocks: list[str], params: list[str]) -> int | str:
        tok = self.current
        if tok.kind == "int":
            self.pos += 1
            return int(tok.text)
        if tok.kind == "ident" and tok.text not in _KEYWORDS:
            self.pos += 1
            if tok.text in clocks or tok.text in params:
                return tok.text
            raise ModelError(f"undeclared clock or parameter {tok.text!r}", tok.line, tok.column)
        raise self.error("expected a clock, parameter or integer")

    def parse_resets(self, clocks: list[str]) -> frozenset[str]:
        self.expect("sym", "{")
        resets: set[str] = set()
        while not self.accept("sym", "}"):
            tok = self.expect_name("clock")
            if tok.text not in clocks:
                raise ModelError(f"undeclared clock {tok.text!r}", tok.line, tok.column)
            resets.add(tok.text)
            self.accept("sym", ",")
        return frozenset(resets)


def parse_network(text: str) -> Network:
    """Parse a model file into its network of automata."""
    return _Parser(text).parse_network()


def parse_pta(text: str, accepting_policy: str = "any") -> PTA:
    """Parse a model file and return its flat automaton.

    Multi-automaton networks are flattened by handshake product.
    """
    return parse_network(text).flatten(accepting_policy)


# serialization --------------------------------------------------------


def _fmt_guard(guard: Guard) -> str:
    return " && ".join(f"{c.clock} {c.rel} {c.bound}" for c in guard)


def network_to_text(net: Network) -> str:
    out: list[str] = []
    if net.clocks:
        out.append("clocks " + " ".join(net.clocks) + ";")
    if net.parameters:
        out.append("params " + " ".join(net.parameters) + ";")
    if net.channels:
        out.append("channels " + " ".join(net.channels) + ";")
    if out:
        out.append("")
    for a in net.automata:
        out.append(f"automaton {a.name} {{")
        for loc in a.locations:
            line = f"  location {loc}"
            if loc == a.initial:
                line += " init"
            if loc in a.accepting:
                line += " accepting"
            if a.invariants[loc]:
                line += f" invariant ({_fmt_guard(a.invariants[loc])})"
            out.append(line + ";")
        for t in a.transitions:
            line = f"  trans {t.source} -> {t.target}"
            if t.guard:
                line += f" when ({_fmt_guard(t.guard)})"
            if t.action != TAU:
                line += f" sync {t.action}"
            if t.resets:
                line += " reset {" + ", ".join(sorted(t.resets)) + "}"
            out.append(line + ";")
        out.append("}")
    return "\n".join(out) + "\n"


def pta_to_text(a: PTA) -> str:
    """Serialize a single (flat) automaton in the model format."""
    channels = tuple(
        sorted({t.action.rstrip("!?") for t in a.transitions if t.action != TAU})
    )
    net = Network(a.clocks, a.parameters, channels, (a,))
    return network_to_text(net)
