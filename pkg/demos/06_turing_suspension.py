"""
Turing machines as flows
========================

The suspension of the step map of a machine is a flow whose orbits are
geodesible for theta = dt. Halting becomes reaching a region of phase space.
"""

from fractions import Fraction

from homwell.turing import (
    busy_beaver_2,
    format_machine,
    geodesible_certificate,
    halting_reachability,
    suspension_flow_at,
    tm_run,
)

tm = busy_beaver_2()
print(format_machine(tm))

c, steps, halted = tm_run(tm, tm.initial(), 100)
print(f"halted: {halted} after {steps} steps, ones on tape: {c.count('1')}")
print("first entry into HALT:", halting_reachability(tm, None, None, 50))

start = (tm.initial(), Fraction(1, 3))
for t in (Fraction(1, 2), Fraction(5, 3), Fraction(17, 3)):
    conf, tau = suspension_flow_at(tm, start, t)
    print(f"t = {t}: state {conf.state}, fiber time {tau}, tape {conf.cells()}")

print(geodesible_certificate())
