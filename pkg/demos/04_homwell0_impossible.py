"""
No embedding into a degree-0 homogeneous well
=============================================

At k = 0 the necessary condition becomes theta.X = XX(R^2/2). Over a closed
orbit the right side integrates to zero (it is a derivative along the flow)
while the left side is positive.
"""

import numpy as np

from homwell.adapted import check_homwell0_impossible, orbit_integral, sin_plus_two
from homwell.spectral import OneForm, ScalarField, VectorField, directional_derivative, pair

f = sin_plus_two(8)
X = VectorField.product_flow(f)
theta = OneForm(1.0, 0.0)

cert = check_homwell0_impossible(X, theta, y0=0.25)
print(f"{cert.kind}: loop integral of theta.X = {cert.lower_bound:.12f}")
print(cert.explanation)

rng = np.random.default_rng(3)
worst = 0.0
for _ in range(20):
    g = ScalarField.random(6, rng)
    XXg = directional_derivative(X, directional_derivative(X, g))
    worst = max(worst, abs(orbit_integral(X, XXg, float(rng.uniform()))))
print(f"largest |loop integral of XX g| over 20 random g: {worst:.2e}")

for y0 in (0.0, 0.25, 0.6):
    print(f"y0 = {y0}: loop integral of theta.X = {orbit_integral(X, pair(theta, X), y0):.12f}")
