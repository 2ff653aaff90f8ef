"""
Strongly adapted 1-forms for a shear flow on the torus
======================================================

The flow X = f(y) d/dx with f(y) = sin(2 pi y) + 2 moves every horizontal
circle at its own constant speed. A 1-form theta is strongly adapted when
theta.X > 0 everywhere and L_X theta is exact.
"""

import numpy as np

from homwell.adapted import check_adapted, search_adapted, sin_plus_two
from homwell.spectral import OneForm, ScalarField, VectorField

M = 32
f = sin_plus_two(M)
X = VectorField.product_flow(f)

# three candidates: 1, f and 1/f (the last one needs a projection)
inv_f, resid = ScalarField.from_function(lambda x, y: 1.0 / (np.sin(2 * np.pi * y) + 2), M, return_residual=True)
print(f"projection residual of 1/f at max_mode={M}: {resid:.2e}")

for name, t1 in [("1", ScalarField.constant(1.0)), ("f", f), ("1/f", inv_f)]:
    rep = check_adapted(X, OneForm(t1, 0.0))
    print(f"theta = {name:>3} dx   strongly adapted: {rep.strongly_adapted}   "
          f"min theta.X = {rep.pairing_min:.4f}   geodesible for theta: {rep.geodesible_for_theta}")

# (1/f) dx has theta.X = 1 but i_X d theta = -(f'/f) dy is not zero,
# so it is adapted without making the orbits unit-speed geodesics
rep = check_adapted(X, OneForm(inv_f, 0.0))
print(f"1/f dx: |theta.X - 1| = {rep.unit_pairing_residual:.1e}, |L_X theta| = {rep.lie_residual:.2f}")

# dx makes X geodesible; X / f = d/dx is strongly geodesible for dx
rep = check_adapted(VectorField(1.0, 0.0), OneForm(1.0, 0.0))
print("d/dx with dx strongly geodesible:", rep.strongly_geodesible_for_theta)

# flipping the sign breaks positivity
print("-dx strongly adapted:", check_adapted(X, OneForm(-1.0, 0.0)).strongly_adapted)

# the same question posed as a linear feasibility problem
res = search_adapted(VectorField.product_flow(sin_plus_two(4)), max_mode=4)
print("search status:", res.status, " equality residual:", f"{res.equality_residual:.1e}")
print("recovered theta_1 mean:", res.theta.comp_dx.mean(), " min theta.X:", round(res.pairing_min, 6))
