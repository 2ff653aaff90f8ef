"""Toy Turing machines, their suspension flows and the theta = dt certificate.

The tape moves under a fixed head at cell 0: a rule with move +1 shifts the
tape by -1, so the cell to the right becomes the new cell 0. HALT
configurations are fixed points of the step map, which makes the suspension
flow defined for all time.

Machine description format (one item per line, ``#`` starts a comment)::

    states START B HALT        # optional; inferred from rules otherwise
    alphabet 0 1               # first symbol is the blank unless `blank` given
    blank 0
    start START
    halt HALT
    START 0 B 1 +1             # state read next_state write move
    START 1 B 1 -1             # move is one of -1 0 +1 (or L N R)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Mapping

__all__ = [
    "TuringMachine",
    "TMConfiguration",
    "SuspensionFlow",
    "GeodesibleCertificate",
    "tm_step",
    "tm_run",
    "suspension_flow_at",
    "geodesible_certificate",
    "halting_reachability",
    "busy_beaver_2",
    "parse_machine",
    "format_machine",
    "all_two_state_machines",
]

_MOVES = {"-1": -1, "0": 0, "+1": 1, "1": 1, "L": -1, "N": 0, "R": 1}


@dataclass(frozen=True)
class TuringMachine:
    transitions: Mapping  # (state, symbol) -> (next_state, write, move)
    alphabet: tuple = ("0", "1")
    start: str = "START"
    halt: str = "HALT"
    blank: str | None = None
    states: tuple = ()

    def __post_init__(self):
        alphabet = tuple(self.alphabet)
        if len(alphabet) < 2:
            raise ValueError("alphabet needs at least two symbols")
        blank = alphabet[0] if self.blank is None else self.blank
        if blank not in alphabet:
            raise ValueError(f"blank {blank!r} not in alphabet")
        states = set(self.states) | {self.start, self.halt}
        for (s, a), (t, w, mv) in self.transitions.items():
            states |= {s, t}
            if s == self.halt:
                raise ValueError("HALT has no outgoing transitions")
            if a not in alphabet or w not in alphabet:
                raise ValueError(f"rule ({s}, {a}) uses a symbol outside the alphabet")
            if mv not in (-1, 0, 1):
                raise ValueError(f"rule ({s}, {a}) has move {mv!r}")
        for s in states - {self.halt}:
            for a in alphabet:
                if (s, a) not in self.transitions:
                    raise ValueError(f"transition missing for ({s}, {a})")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "blank", blank)
        object.__setattr__(self, "states", tuple(sorted(states)))
        object.__setattr__(self, "transitions", dict(self.transitions))

    def initial(self, tape=None) -> "TMConfiguration":
        """START configuration; ``tape`` is a mapping cell -> symbol or a string laid out from 0."""
        if tape is None:
            cells = {}
        elif isinstance(tape, str):
            cells = {i: ch for i, ch in enumerate(tape)}
        else:
            cells = dict(tape)
        return TMConfiguration.make(self.start, cells, self.blank)


@dataclass(frozen=True)
class TMConfiguration:
    """State plus finitely supported tape, head at cell 0. Hashable."""

    state: str
    tape: tuple  # sorted ((cell, symbol), ...) without blanks
    blank: str = "0"

    @classmethod
    def make(cls, state, cells, blank):
        return cls(state, tuple(sorted((int(i), s) for i, s in cells.items() if s != blank)), blank)

    def read(self, cell=0):
        for i, s in self.tape:
            if i == cell:
                return s
        return self.blank

    def cells(self):
        return dict(self.tape)

    def count(self, symbol):
        return sum(1 for _, s in self.tape if s == symbol)


def tm_step(tm: TuringMachine, c: TMConfiguration) -> TMConfiguration:
    """One step of the machine (identity on HALT)."""
    if c.state == tm.halt:
        return c
    nxt, write, move = tm.transitions[(c.state, c.read(0))]
    cells = c.cells()
    if write == c.blank:
        cells.pop(0, None)
    else:
        cells[0] = write
    return TMConfiguration(nxt, tuple(sorted((i - move, s) for i, s in cells.items())), c.blank)


def tm_run(tm: TuringMachine, c: TMConfiguration, max_steps: int):
    """Iterate up to ``max_steps``; returns ``(config, steps_taken, halted)``."""
    for n in range(max_steps):
        if c.state == tm.halt:
            return c, n, True
        c = tm_step(tm, c)
    return c, max_steps, c.state == tm.halt


@dataclass(frozen=True)
class SuspensionFlow:
    """Suspension of a map phi on configurations: (c, 1) is glued to (phi(c), 0)."""

    base_map: Callable

    @classmethod
    def of_machine(cls, tm: TuringMachine):
        return cls(lambda c: tm_step(tm, c))


def suspension_flow_at(tm, start, t):
    """Flow the point ``(config, t0)`` for time ``t >= 0``.

    ``tm`` is a :class:`TuringMachine` or a :class:`SuspensionFlow`. Fiber
    times that are :class:`fractions.Fraction` stay exact.
    """
    config, t0 = start
    if t < 0:
        raise ValueError("t must be >= 0")
    if not 0 <= t0 < 1:
        raise ValueError("fiber time must lie in [0, 1)")
    step = tm.base_map if isinstance(tm, SuspensionFlow) else (lambda c: tm_step(tm, c))
    total = t0 + t
    n = math.floor(total)
    for _ in range(n):
        config = step(config)
    return config, total - n


@dataclass(frozen=True)
class GeodesibleCertificate:
    pairing_value: float
    lie_derivative_zero: bool
    torus_cross_check: bool | None = None


def geodesible_certificate(sf: SuspensionFlow | None = None, cross_check: bool = True) -> GeodesibleCertificate:
    """theta = dt on a suspension of Y = (0, d/dt).

    theta.Y = dt(d/dt) = 1 and L_Y theta = d(theta.Y) + i_Y d(dt) = 0 hold by
    construction for every base map. As a numerical sanity check the same
    statement is verified spectrally for the torus analogue Y = d/dx,
    theta = dx (a suspension of the identity on a circle).
    """
    ok = None
    if cross_check:
        from .adapted import check_adapted
        from .spectral import OneForm, VectorField

        ok = check_adapted(VectorField(1.0, 0.0), OneForm(1.0, 0.0)).strongly_geodesible_for_theta
    return GeodesibleCertificate(1.0, True, ok)


def halting_reachability(tm: TuringMachine, input_tape=None, halt_region=None, t_max: float = 1.0):
    """First time the suspension orbit of the input reaches ``halt_region``.

    ``halt_region`` is a predicate on configurations (default: state is HALT).
    Returns ``(reached, first_time)`` where ``first_time`` is the step count as
    a float (fiber time 0), or ``(False, None)``.
    """
    if halt_region is None:
        halt_region = lambda c: c.state == tm.halt  # noqa: E731
    c = tm.initial(input_tape) if not isinstance(input_tape, TMConfiguration) else input_tape
    horizon = math.floor(t_max)
    for n in range(horizon + 1):
        if halt_region(c):
            return True, float(n)
        if n < horizon:
            c = tm_step(tm, c)
    return False, None


def busy_beaver_2() -> TuringMachine:
    """2-state, 2-symbol busy beaver: halts after 6 steps leaving four 1s."""
    return TuringMachine(
        {
            ("START", "0"): ("B", "1", 1),
            ("START", "1"): ("B", "1", -1),
            ("B", "0"): ("START", "1", -1),
            ("B", "1"): ("HALT", "1", 1),
        }
    )


def all_two_state_machines(moves=(-1, 0, 1)):
    """Every machine with non-halting states {START, B} over {0, 1}."""
    keys = [("START", "0"), ("START", "1"), ("B", "0"), ("B", "1")]
    actions = list(product(("START", "B", "HALT"), ("0", "1"), moves))
    for choice in product(actions, repeat=4):
        yield TuringMachine(dict(zip(keys, choice)))


def parse_machine(text: str) -> TuringMachine:
    """Parse the line-based description format documented in this module."""
    header = {}
    rules = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        key = tok[0]
        if key in ("states", "alphabet"):
            header[key] = tuple(tok[1:])
        elif key in ("blank", "start", "halt"):
            if len(tok) != 2:
                raise ValueError(f"line {lineno}: `{key}` takes one value")
            header[key] = tok[1]
        elif len(tok) == 5:
            s, a, t, w, mv = tok
            if mv not in _MOVES:
                raise ValueError(f"line {lineno}: bad move {mv!r}")
            if (s, a) in rules:
                raise ValueError(f"line {lineno}: duplicate rule for ({s}, {a})")
            rules[(s, a)] = (t, w, _MOVES[mv])
        else:
            raise ValueError(f"line {lineno}: expected `state read next_state write move`")
    alphabet = header.get("alphabet")
    if alphabet is None:
        syms = []
        for (s, a), (t, w, mv) in rules.items():
            for x in (a, w):
                if x not in syms:
                    syms.append(x)
        alphabet = tuple(sorted(syms))
    return TuringMachine(
        rules,
        alphabet=alphabet,
        start=header.get("start", "START"),
        halt=header.get("halt", "HALT"),
        blank=header.get("blank"),
        states=header.get("states", ()),
    )


def format_machine(tm: TuringMachine) -> str:
    mv = {-1: "-1", 0: "0", 1: "+1"}
    lines = [
        "states " + " ".join(tm.states),
        "alphabet " + " ".join(tm.alphabet),
        f"blank {tm.blank}",
        f"start {tm.start}",
        f"halt {tm.halt}",
    ]
    for (s, a), (t, w, m) in sorted(tm.transitions.items()):
        lines.append(f"{s} {a} {t} {w} {mv[m]}")
    return "\n".join(lines) + "\n"
