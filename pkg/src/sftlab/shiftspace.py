"""Subshifts of finite type: alphabet, adjacency, bi-infinite points, shift, metric.

Points carry eventually periodic tails on both sides, which keeps equality,
the metric d(x, y) = 2^(-min{|n| : x_n != y_n}) and the shift action exactly
decidable.  One-sided points are the same data restricted to coordinates >= 0;
the two-sided lift glues a chosen backward itinerary to a one-sided point.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import inf, lcm
from typing import Iterator, NamedTuple, Sequence

Word = tuple[int, ...]


class ShiftSpaceError(ValueError):
    """Malformed system, word, or point."""


def _word(symbols: Sequence[int]) -> Word:
    return tuple(int(s) for s in symbols)


@dataclass(frozen=True)
class SftSystem:
    """Two-sided subshift of finite type over symbols 0..alphabet_size-1.

    ``adjacency[a][b] == 1`` means the two-letter word ``ab`` is allowed.
    Every symbol must have at least one allowed successor and predecessor,
    so every allowed finite word extends to a bi-infinite point.
    """

    alphabet_size: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        m = self.alphabet_size
        if m < 1:
            raise ShiftSpaceError("alphabet_size must be >= 1")
        adj = tuple(tuple(int(v) for v in row) for row in self.adjacency)
        if len(adj) != m or any(len(row) != m for row in adj):
            raise ShiftSpaceError("adjacency must be a %dx%d matrix" % (m, m))
        if any(v not in (0, 1) for row in adj for v in row):
            raise ShiftSpaceError("adjacency entries must be 0 or 1")
        if any(sum(row) == 0 for row in adj):
            raise ShiftSpaceError("stranded symbol: a row of adjacency is all zero")
        if any(sum(adj[a][b] for a in range(m)) == 0 for b in range(m)):
            raise ShiftSpaceError("stranded symbol: a column of adjacency is all zero")
        object.__setattr__(self, "adjacency", adj)

    def allows(self, a: int, b: int) -> bool:
        return self.adjacency[a][b] == 1

    def successors(self, a: int) -> Word:
        return tuple(b for b in range(self.alphabet_size) if self.adjacency[a][b])

    def predecessors(self, b: int) -> Word:
        return tuple(a for a in range(self.alphabet_size) if self.adjacency[a][b])

    def check_symbols(self, word: Sequence[int]) -> Word:
        w = _word(word)
        if any(s < 0 or s >= self.alphabet_size for s in w):
            raise ShiftSpaceError("symbol out of range in %r" % (w,))
        return w

    def is_allowed(self, word: Sequence[int]) -> bool:
        """True iff every adjacent pair in the word satisfies adjacency."""
        w = self.check_symbols(word)
        return all(self.adjacency[a][b] for a, b in zip(w, w[1:]))

    def allowed_words(self, length: int) -> Iterator[Word]:
        """All adjacency-allowed words of the given length, lexicographic."""
        if length < 0:
            raise ShiftSpaceError("length must be >= 0")
        if length == 0:
            yield ()
            return

        def rec(prefix: Word) -> Iterator[Word]:
            if len(prefix) == length:
                yield prefix
                return
            if prefix:
                nxt = self.successors(prefix[-1])
            else:
                nxt = tuple(range(self.alphabet_size))
            for s in nxt:
                yield from rec(prefix + (s,))

        yield from rec(())

    def canonical_right_tail(self, sym: int, successors=None) -> tuple[Word, Word]:
        """Deterministic allowed continuation after ``sym``: (transient, cycle).

        Follows the smallest allowed successor until a symbol repeats; the
        sequence sym, transient..., cycle, cycle, ... is adjacency-allowed.
        """
        succ = successors or (lambda a: self.successors(a))
        path: list[int] = []
        seen: dict[int, int] = {}
        cur = sym
        while True:
            options = succ(cur)
            if not options:
                raise ShiftSpaceError("symbol %d has no allowed successor" % cur)
            cur = min(options)
            if cur in seen:
                i = seen[cur]
                return tuple(path[:i]), tuple(path[i:])
            seen[cur] = len(path)
            path.append(cur)

    def canonical_left_tail(self, sym: int, predecessors=None) -> tuple[Word, Word]:
        """Deterministic allowed history before ``sym``: (transient, cycle).

        The sequence ..., cycle, cycle, transient..., sym is adjacency-allowed;
        transient and cycle are returned in left-to-right coordinate order.
        """
        pred = predecessors or (lambda b: self.predecessors(b))
        path: list[int] = []
        seen: dict[int, int] = {}
        cur = sym
        while True:
            options = pred(cur)
            if not options:
                raise ShiftSpaceError("symbol %d has no allowed predecessor" % cur)
            cur = min(options)
            if cur in seen:
                i = seen[cur]
                rev_transient = path[:i]
                rev_cycle = path[i:]
                return tuple(reversed(rev_transient)), tuple(reversed(rev_cycle))
            seen[cur] = len(path)
            path.append(cur)


def is_allowed(word: Sequence[int], system: SftSystem) -> bool:
    """True iff the word violates no adjacency constraint of the system."""
    return system.is_allowed(word)


@dataclass(frozen=True)
class Cylinder:
    """The set of points carrying ``word`` starting at coordinate ``start``."""

    start: int
    word: Word

    def __post_init__(self) -> None:
        object.__setattr__(self, "word", _word(self.word))
        if len(self.word) == 0:
            raise ShiftSpaceError("cylinder word must be nonempty")

    @property
    def end(self) -> int:
        return self.start + len(self.word) - 1

    def shifted(self, n: int) -> "Cylinder":
        """Image under T^n as a set: T^n C has the word starting at start - n."""
        return Cylinder(self.start - n, self.word)

    def matches(self, values: Sequence[int], at: int) -> bool:
        """Check against symbols ``values`` occupying coordinates at, at+1, ..."""
        off = self.start - at
        if off < 0 or off + len(self.word) > len(values):
            raise ShiftSpaceError("cylinder window not covered")
        return all(values[off + i] == s for i, s in enumerate(self.word))


@dataclass(frozen=True)
class Point:
    """Bi-infinite sequence with eventually periodic tails.

    The finite core is left_transient + center + right_transient; coordinate 0
    sits at index ``origin_offset`` of the core (indices may point into the
    tails).  left_period tiles every coordinate left of the core, right_period
    every coordinate right of it.
    """

    system: SftSystem
    left_period: Word
    left_transient: Word
    center: Word
    right_transient: Word
    right_period: Word
    origin_offset: int = 0

    def __post_init__(self) -> None:
        for name in ("left_period", "left_transient", "center", "right_transient", "right_period"):
            object.__setattr__(self, name, self.system.check_symbols(getattr(self, name)))
        if not self.left_period or not self.right_period:
            raise ShiftSpaceError("periodic tails must be nonempty")
        self._validate()

    def _validate(self) -> None:
        adj = self.system.adjacency
        lp, rp = self.left_period, self.right_period
        core = self.core
        # wrap-around inside each periodic tail
        for w in (lp, rp):
            for a, b in zip(w, w[1:] + (w[0],)):
                if not adj[a][b]:
                    raise ShiftSpaceError("periodic tail violates adjacency: %d%d" % (a, b))
        for a, b in zip(core, core[1:]):
            if not adj[a][b]:
                raise ShiftSpaceError("core violates adjacency: %d%d" % (a, b))
        first_right = core[0] if core else rp[0]
        if not adj[lp[-1]][first_right]:
            raise ShiftSpaceError("left tail junction violates adjacency")
        if core and not adj[core[-1]][rp[0]]:
            raise ShiftSpaceError("right tail junction violates adjacency")

    @property
    def core(self) -> Word:
        return self.left_transient + self.center + self.right_transient

    @property
    def core_start(self) -> int:
        """Coordinate of the first core symbol."""
        return -self.origin_offset

    @property
    def core_end(self) -> int:
        """Coordinate just past the last core symbol."""
        return self.core_start + len(self.core)

    def value(self, j: int) -> int:
        """Symbol at coordinate j."""
        idx = j - self.core_start
        core = self.core
        if 0 <= idx < len(core):
            return core[idx]
        if idx < 0:
            return self.left_period[idx % len(self.left_period)]
        return self.right_period[(idx - len(core)) % len(self.right_period)]

    def word_at(self, lo: int, hi: int) -> Word:
        """Symbols at coordinates lo..hi inclusive."""
        return tuple(self.value(j) for j in range(lo, hi + 1))

    def shift(self, n: int) -> "Point":
        """T^n: (T^n x)_k = x_{k+n}."""
        return replace(self, origin_offset=self.origin_offset + n)

    @classmethod
    def periodic(cls, system: SftSystem, word: Sequence[int], phase: int = 0) -> "Point":
        """The periodic point repeating ``word``, with word[phase] at coordinate 0."""
        w = system.check_symbols(word)
        w = w[phase:] + w[:phase]
        return cls(system, w, (), (), (), w)

    @classmethod
    def from_core(cls, system: SftSystem, left_period: Sequence[int], core: Sequence[int],
                  right_period: Sequence[int], core_start: int = 0) -> "Point":
        return cls(system, _word(left_period), _word(core), (), (), _word(right_period),
                   origin_offset=-core_start)


def _comparison_window(x: Point, y: Point) -> tuple[int, int]:
    # Agreement on this window plus one full lcm period beyond each core
    # forces agreement of the periodic tails everywhere.
    lo = min(x.core_start, y.core_start) - lcm(len(x.left_period), len(y.left_period))
    hi = max(x.core_end, y.core_end) + lcm(len(x.right_period), len(y.right_period))
    return lo, hi


def first_difference(x: Point, y: Point) -> int | None:
    """Least |n| with x_n != y_n (ties broken toward +n), or None if x == y."""
    if x.system.alphabet_size != y.system.alphabet_size:
        raise ShiftSpaceError("points live over different alphabets")
    lo, hi = _comparison_window(x, y)
    bound = max(abs(lo), abs(hi))
    for k in range(bound + 1):
        if x.value(k) != y.value(k):
            return k
        if k > 0 and x.value(-k) != y.value(-k):
            return -k
    return None


def same_sequence(x: Point, y: Point) -> bool:
    return first_difference(x, y) is None


def distance(x: Point, y: Point) -> float:
    """2^(-min{|n| : x_n != y_n}); exactly 0 iff the sequences coincide."""
    k = first_difference(x, y)
    if k is None:
        return 0.0
    return 2.0 ** (-abs(k))


def shift(x: Point, n: int) -> Point:
    """Apply T^n to a point."""
    return x.shift(n)


class OneSidedPoint(NamedTuple):
    """One-sided point (coordinates >= 0): transient word, then periodic tail."""

    transient: Word
    period: Word

    def value(self, j: int) -> int:
        if j < 0:
            raise ShiftSpaceError("one-sided points have coordinates >= 0 only")
        if j < len(self.transient):
            return self.transient[j]
        return self.period[(j - len(self.transient)) % len(self.period)]


def natural_extension_lift(future: OneSidedPoint, past: Sequence[int],
                           system: SftSystem, predecessors=None) -> Point:
    """Two-sided point over a one-sided point plus a chosen backward itinerary.

    Coordinates >= 0 reproduce ``future``; coordinates -len(past)..-1 carry
    ``past``; further left follows the canonical allowed periodic history.
    The coordinate-0 projection recovers ``future``.
    """
    past_w = system.check_symbols(past)
    trans = system.check_symbols(future.transient)
    per = system.check_symbols(future.period)
    if not per:
        raise ShiftSpaceError("one-sided period must be nonempty")
    anchor = past_w[0] if past_w else (trans[0] if trans else per[0])
    tail_transient, tail_cycle = system.canonical_left_tail(anchor, predecessors)
    return Point(
        system,
        left_period=tail_cycle,
        left_transient=tail_transient + past_w,
        center=trans,
        right_transient=(),
        right_period=per,
        origin_offset=len(tail_transient) + len(past_w),
    )


# --- named systems -----------------------------------------------------------

_FULL2 = ((1, 1), (1, 1))
_GOLDEN = ((1, 1), (1, 0))
_PERIOD2 = ((0, 1), (1, 0))
_PERIOD2_BRANCH = (
    (0, 0, 1, 1),
    (0, 0, 1, 1),
    (1, 1, 0, 0),
    (1, 1, 0, 0),
)

SYSTEM_PRESETS: dict[str, SftSystem] = {
    "full-2": SftSystem(2, _FULL2),
    "two-state-lazy": SftSystem(2, _FULL2),
    "golden-mean": SftSystem(2, _GOLDEN),
    "period-2": SftSystem(2, _PERIOD2),
    "period-2-branching": SftSystem(4, _PERIOD2_BRANCH),
}


def system_preset(name: str) -> SftSystem:
    try:
        return SYSTEM_PRESETS[name]
    except KeyError:
        raise ShiftSpaceError(
            "unknown system preset %r (have: %s)" % (name, ", ".join(sorted(SYSTEM_PRESETS)))
        ) from None


def system_from_spec(spec: dict) -> SftSystem:
    """Build a system from {"alphabet": N, "adjacency": [[...]]} or {"preset": name}."""
    if "preset" in spec:
        return system_preset(spec["preset"])
    try:
        alphabet = int(spec["alphabet"])
        adjacency = tuple(tuple(int(v) for v in row) for row in spec["adjacency"])
    except (KeyError, TypeError) as exc:
        raise ShiftSpaceError("system spec needs 'alphabet' and 'adjacency': %s" % exc) from None
    return SftSystem(alphabet, adjacency)
