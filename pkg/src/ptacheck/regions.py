"""Clock regions and corner points over a clock subset with bound M.

A region canonically encodes an equivalence class of clock valuations:
per clock either an integral part in 0..M or ABOVE (value > M), plus the
ordered partition of the bounded clocks by fractional part.  Corner
points are integer vectors in [0, M+1] lying in a region's topological
closure; for an unbounded region a clock above M contributes both M and
M+1 (the closure of (M, inf) meets the integers at M and every larger
point, clipped to M+1).

Everything here is exact, immutable and hashable; the functions are the
building blocks for both the concrete region graph and the corner-point
abstraction.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .model import ModelError, SimpleConstraint

#: Sentinel integral value for clocks strictly above the bound.
ABOVE = None


@dataclass(frozen=True)
class Region:
    """Canonical region encoding.

    ``integral[i]`` is the integer part of clock ``clocks[i]`` (None when
    the clock exceeds ``bound``).  ``blocks`` partitions the indices of
    the bounded clocks by fractional part: ``blocks[0]`` holds the
    zero-fraction clocks (possibly empty), later blocks have strictly
    increasing positive fractions and are nonempty.
    """

    clocks: tuple[str, ...]
    bound: int
    integral: tuple[int | None, ...]
    blocks: tuple[tuple[int, ...], ...]

    def index(self, clock: str) -> int:
        try:
            return self.clocks.index(clock)
        except ValueError:
            raise ModelError(f"clock {clock!r} not in region over {self.clocks}") from None

    def is_above(self, clock: str) -> bool:
        return self.integral[self.index(clock)] is ABOVE

    @property
    def all_above(self) -> bool:
        return all(v is ABOVE for v in self.integral)

    def __str__(self) -> str:
        return render_region(self)


@dataclass(frozen=True)
class CornerPoint:
    """An integer vector in [0, M+1] per clock; a vertex of a region closure."""

    clocks: tuple[str, ...]
    values: tuple[int, ...]

    def value(self, clock: str) -> int:
        try:
            return self.values[self.clocks.index(clock)]
        except ValueError:
            raise ModelError(f"clock {clock!r} not in corner over {self.clocks}") from None

    def __str__(self) -> str:
        return "(" + ", ".join(f"{x}:{v}" for x, v in zip(self.clocks, self.values)) + ")"


class Iota(enum.Enum):
    """Classification of a corner relative to the fractional clock."""

    LESS = "LESS"
    MORE = "MORE"
    EXACT = "EXACT"


def region_of(nu: Mapping[str, Fraction | int], clocks: Iterable[str], bound: int) -> Region:
    """The region of valuation ``nu`` over ``clocks`` with bound M.

    Two valuations map to the same region iff they agree on integer parts
    (or are both above M), on the ordering of fractional parts, and on
    which fractions are zero.
    """
    clocks = tuple(clocks)
    integral: list[int | None] = []
    fracs: dict[int, Fraction] = {}
    for i, x in enumerate(clocks):
        v = Fraction(nu[x])
        if v < 0:
            raise ModelError(f"clock {x!r} has negative value {v}")
        if v > bound:
            integral.append(ABOVE)
        else:
            ip = int(v)
            integral.append(ip)
            fracs[i] = v - ip
    zero = tuple(sorted(i for i, f in fracs.items() if f == 0))
    positive = sorted((f, i) for i, f in fracs.items() if f > 0)
    blocks: list[tuple[int, ...]] = [zero]
    for f, group in itertools.groupby(positive, key=lambda p: p[0]):
        blocks.append(tuple(sorted(i for _, i in group)))
    return Region(clocks, bound, tuple(integral), tuple(blocks))


def initial_region(clocks: Iterable[str], bound: int) -> Region:
    clocks = tuple(clocks)
    return region_of({x: Fraction(0) for x in clocks}, clocks, bound)


@lru_cache(maxsize=None)
def succ_region(r: Region) -> Region:
    """The unique time successor of ``r`` (``r`` itself when none exists).

    With zero-fraction clocks present, time opens them into the lowest
    positive fractions (those at the bound become ABOVE); otherwise the
    highest-fraction block wraps to the next integer.
    """
    if r.all_above:
        return r
    zero = r.blocks[0]
    if zero:
        integral = list(r.integral)
        staying = []
        for i in zero:
            if integral[i] == r.bound:
                integral[i] = ABOVE
            else:
                staying.append(i)
        blocks = ((),) + ((tuple(staying),) if staying else ()) + r.blocks[1:]
        return Region(r.clocks, r.bound, tuple(integral), blocks)
    top = r.blocks[-1]
    integral = list(r.integral)
    for i in top:
        integral[i] += 1  # bounded fractional clock: integer part <= M-1
    blocks = (top,) + r.blocks[1:-1]
    return Region(r.clocks, r.bound, tuple(integral), blocks)


@lru_cache(maxsize=None)
def reset_region(r: Region, resets: frozenset[str]) -> Region:
    """The region of nu[R] for any nu in r (reset respects the equivalence)."""
    idx = {r.index(x) for x in resets}
    integral = tuple(0 if i in idx else v for i, v in enumerate(r.integral))
    zero = tuple(sorted(set(r.blocks[0]) | idx))
    rest = tuple(
        blk for blk in (tuple(i for i in b if i not in idx) for b in r.blocks[1:]) if blk
    )
    return Region(r.clocks, r.bound, integral, (zero,) + rest)


def region_satisfies(r: Region, c: SimpleConstraint) -> bool:
    """True iff every valuation in ``r`` satisfies ``c`` (integer bound).

    Bounds above M are legal: a clock above M satisfies no finite upper
    bound and every lower bound whose constant is at most M.
    """
    if not isinstance(c.bound, int):
        raise ModelError(f"region satisfaction needs an integer bound, got {c}")
    i = r.index(c.clock)
    ip = r.integral[i]
    b, rel = c.bound, c.rel
    if ip is ABOVE:
        # value ranges over (M, inf)
        return rel in (">", ">=") and b <= r.bound
    if i in r.blocks[0]:
        v = ip
        return {
            "<": v < b,
            "<=": v <= b,
            "==": v == b,
            ">=": v >= b,
            ">": v > b,
        }[rel]
    # value ranges over the open interval (ip, ip+1)
    return {
        "<": ip + 1 <= b,
        "<=": ip + 1 <= b,
        "==": False,
        ">=": b <= ip,
        ">": b <= ip,
    }[rel]


def region_excludes(r: Region, c: SimpleConstraint) -> bool:
    """True iff no valuation in ``r`` satisfies ``c``."""
    negation = {"<": ">=", "<=": ">", ">=": "<", ">": "<="}
    if c.rel == "==":
        return region_satisfies(r, SimpleConstraint(c.clock, "<", c.bound)) or region_satisfies(
            r, SimpleConstraint(c.clock, ">", c.bound)
        )
    return region_satisfies(r, SimpleConstraint(c.clock, negation[c.rel], c.bound))


@lru_cache(maxsize=None)
def corners_of(r: Region) -> tuple[CornerPoint, ...]:
    """The corner points of ``r``: integer points of its topological closure.

    Bounded clocks contribute the k+1 vertices of the fractional simplex
    (corner j rounds up the j highest-fraction blocks); each ABOVE clock
    independently contributes M and M+1.
    """
    n = len(r.clocks)
    above = [i for i in range(n) if r.integral[i] is ABOVE]
    k = len(r.blocks) - 1
    base = [v if v is not ABOVE else 0 for v in r.integral]
    simplex: list[list[int]] = []
    for j in range(k + 1):
        vec = list(base)
        for blk in r.blocks[len(r.blocks) - j :]:
            for i in blk:
                vec[i] += 1
        simplex.append(vec)
    out = []
    for vec in simplex:
        for choice in itertools.product((r.bound, r.bound + 1), repeat=len(above)):
            full = list(vec)
            for i, v in zip(above, choice):
                full[i] = v
            out.append(CornerPoint(r.clocks, tuple(full)))
    return tuple(out)


def is_corner(r: Region, alpha: CornerPoint) -> bool:
    return alpha in corners_of(r)


def succ_cp(alpha: CornerPoint, bound: int) -> CornerPoint:
    """Per-clock increment, saturating at M+1."""
    return CornerPoint(
        alpha.clocks, tuple(v + 1 if v <= bound else bound + 1 for v in alpha.values)
    )


def reset_cp(alpha: CornerPoint, resets: frozenset[str]) -> CornerPoint:
    idx = {alpha.clocks.index(x) for x in resets}
    return CornerPoint(
        alpha.clocks, tuple(0 if i in idx else v for i, v in enumerate(alpha.values))
    )


def iota(r: Region, alpha: CornerPoint, z: str) -> Iota:
    """LESS / MORE / EXACT classification of corner ``alpha`` w.r.t. clock z."""
    if not is_corner(r, alpha):
        raise ModelError(f"{alpha} is not a corner of {r}")
    az = alpha.value(z)
    if az == 1 and not region_satisfies(r, SimpleConstraint(z, "==", 1)):
        return Iota.LESS
    if az == 0 and not region_satisfies(r, SimpleConstraint(z, "==", 0)):
        return Iota.MORE
    return Iota.EXACT


def f_offset(r: Region, alpha: CornerPoint, z: str) -> int:
    """The 0/1 offset used by the correspondence relation (1 iff LESS)."""
    return 1 if iota(r, alpha, z) is Iota.LESS else 0


def render_region(r: Region) -> str:
    """Debug rendering, e.g. ``x=1, 0<fr(y)<fr(w)<1, v>M``."""
    parts = []
    for i in r.blocks[0]:
        parts.append(f"{r.clocks[i]}={r.integral[i]}")
    if len(r.blocks) > 1:
        chain = " < ".join(
            " = ".join(f"fr({r.clocks[i]})" for i in blk) for blk in r.blocks[1:]
        )
        parts.append(f"0 < {chain} < 1")
        for blk in r.blocks[1:]:
            for i in blk:
                if r.integral[i]:
                    parts.append(f"{r.integral[i]}<{r.clocks[i]}<{r.integral[i] + 1}")
    for i, v in enumerate(r.integral):
        if v is ABOVE:
            parts.append(f"{r.clocks[i]}>{r.bound}")
    return ", ".join(parts) if parts else "true"
