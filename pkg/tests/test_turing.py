from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homwell.turing import (
    SuspensionFlow,
    TMConfiguration,
    TuringMachine,
    all_two_state_machines,
    busy_beaver_2,
    format_machine,
    geodesible_certificate,
    halting_reachability,
    parse_machine,
    suspension_flow_at,
    tm_run,
    tm_step,
)


def naive_run(transitions, t_max, halt="HALT", start="START"):
    """Reference simulator: moving head over a dict tape. Returns first halting step or None."""
    tape, head, state = {}, 0, start
    for n in range(t_max + 1):
        if state == halt:
            return n
        if n == t_max:
            return None
        nxt, write, move = transitions[(state, tape.get(head, "0"))]
        tape[head] = write
        head += move
        state = nxt


def naive_config(transitions, steps, tape_in=""):
    tape = {i: s for i, s in enumerate(tape_in)}
    head, state = 0, "START"
    for _ in range(steps):
        if state == "HALT":
            break
        nxt, write, move = transitions[(state, tape.get(head, "0"))]
        tape[head] = write
        head += move
        state = nxt
    return state, {i - head: s for i, s in tape.items() if s != "0"}


def test_exhaustive_two_state_oracle():
    count = mismatches = halting = 0
    for tm in all_two_state_machines():
        count += 1
        reached, first = halting_reachability(tm, None, None, 50)
        expect = naive_run(tm.transitions, 50)
        if expect is None:
            ok = not reached and first is None
        else:
            halting += 1
            ok = reached and first == float(expect)
        mismatches += not ok
    assert count == 18**4
    assert mismatches == 0
    assert 0 < halting < count


def test_busy_beaver():
    tm = busy_beaver_2()
    assert halting_reachability(tm, None, None, 50) == (True, 6.0)
    c, steps, halted = tm_run(tm, tm.initial(), 100)
    assert halted and steps == 6 and c.count("1") == 4


def test_reachability_horizon_too_short():
    assert halting_reachability(busy_beaver_2(), None, None, 5) == (False, None)
    assert halting_reachability(busy_beaver_2(), None, None, 6.9) == (True, 6.0)


def test_custom_region():
    tm = busy_beaver_2()
    reached, first = halting_reachability(tm, None, lambda c: c.count("1") >= 3, 50)
    assert reached and first == 4.0


@given(st.integers(0, 18**4 - 1), st.text("01", max_size=6), st.integers(0, 30))
@settings(max_examples=200, deadline=None)
def test_tape_shift_matches_head_motion(index, tape_in, steps):
    tm = _machine_at(index)
    c, _, _ = tm_run(tm, tm.initial(tape_in), steps)
    state, cells = naive_config(tm.transitions, steps, tape_in)
    assert c.state == state and c.cells() == cells


def _machine_at(index):
    from itertools import product

    keys = [("START", "0"), ("START", "1"), ("B", "0"), ("B", "1")]
    actions = list(product(("START", "B", "HALT"), ("0", "1"), (-1, 0, 1)))
    digits = []
    for _ in range(4):
        index, d = divmod(index, 18)
        digits.append(actions[d])
    return TuringMachine(dict(zip(keys, digits)))


def test_halt_is_fixed_point():
    tm = busy_beaver_2()
    c = TMConfiguration.make("HALT", {0: "1"}, "0")
    assert tm_step(tm, c) == c


# -- suspension flow ---------------------------------------------------------------------


def test_suspension_integer_times_are_steps():
    tm = busy_beaver_2()
    c0 = tm.initial()
    c, tau = suspension_flow_at(tm, (c0, 0), 3)
    assert tau == 0 and c == tm_run(tm, c0, 3)[0]


@given(
    st.fractions(min_value=0, max_value=Fraction(99, 100)),
    st.fractions(min_value=0, max_value=8),
    st.fractions(min_value=0, max_value=8),
)
@settings(max_examples=100, deadline=None)
def test_suspension_is_a_flow(t0, s, t):
    tm = busy_beaver_2()
    p = (tm.initial(), t0)
    once = suspension_flow_at(tm, p, s + t)
    twice = suspension_flow_at(tm, suspension_flow_at(tm, p, s), t)
    assert once == twice
    assert 0 <= once[1] < 1 and isinstance(once[1], Fraction)


def test_suspension_of_generic_map():
    sf = SuspensionFlow(lambda n: (n + 1) % 5)
    assert suspension_flow_at(sf, (0, 0.25), 7.5) == (2, 0.75)


def test_suspension_rejects_bad_times():
    tm = busy_beaver_2()
    with pytest.raises(ValueError):
        suspension_flow_at(tm, (tm.initial(), 0), -1)
    with pytest.raises(ValueError):
        suspension_flow_at(tm, (tm.initial(), 1), 0)


def test_geodesible_certificate_constant():
    c = geodesible_certificate()
    assert (c.pairing_value, c.lie_derivative_zero) == (1.0, True)
    assert c.torus_cross_check is True
    assert geodesible_certificate(SuspensionFlow(lambda n: n), cross_check=False).pairing_value == 1.0


# -- machine files -----------------------------------------------------------------------


def test_format_parse_round_trip():
    tm = busy_beaver_2()
    back = parse_machine(format_machine(tm))
    assert back.transitions == tm.transitions
    assert (back.start, back.halt, back.blank, back.alphabet) == (tm.start, tm.halt, tm.blank, tm.alphabet)


def test_parse_with_comments_and_letters():
    text = """
    # three symbols
    alphabet _ a b
    A _ A a R
    A a B b N
    A b HALT b L
    B _ HALT _ N
    B a HALT a N
    B b HALT b N
    start A
    """
    tm = parse_machine(text)
    assert tm.blank == "_" and tm.start == "A"
    c, steps, halted = tm_run(tm, tm.initial("ab"), 20)
    assert halted


@pytest.mark.parametrize(
    "text, match",
    [
        ("START 0 B 1 +2\n", "bad move"),
        ("START 0 B 1 +1\nSTART 0 B 1 -1\n", "duplicate"),
        ("START 0 B\n", "expected"),
        ("START 0 HALT 1 +1\n", "missing"),
        ("blank\n", "one value"),
    ],
)
def test_parse_errors(text, match):
    with pytest.raises(ValueError, match=match):
        parse_machine(text)


def test_machine_validation():
    with pytest.raises(ValueError, match="HALT"):
        TuringMachine({("HALT", "0"): ("HALT", "0", 0)}, states=("START",))
    with pytest.raises(ValueError, match="alphabet"):
        TuringMachine({}, alphabet=("0",))
