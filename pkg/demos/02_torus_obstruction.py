"""
Why the shear flow cannot live in a degree-2 homogeneous well
=============================================================

Embedding into a homogeneous well of degree 2 needs theta and r with
L_X theta = d(XX r). Integrating the dy-part over x kills every derivative in
x and leaves f'(y) times the x-average of theta_1. Since theta_1 > 0, the
equation fails wherever f' is nonzero. The identity itself holds for every
theta and r, which we check on random draws.
"""

import numpy as np

from homwell.adapted import obstruction_residual, search_adapted, sin_plus_two
from homwell.spectral import OneForm, ScalarField, VectorField

rng = np.random.default_rng(7)
f = sin_plus_two(1)

worst = 0.0
for _ in range(100):
    M = int(rng.integers(1, 17))
    theta = OneForm(ScalarField.random(M, rng), ScalarField.random(M, rng))
    r = ScalarField.random(M, rng)
    worst = max(worst, obstruction_residual(f, theta, r).difference)
print(f"identity gap over 100 random (theta, r): {worst:.2e}")

res = search_adapted(VectorField.product_flow(f), max_mode=4, constraints={"homwell2_joint"})
cert = res.certificate
print("search status:", res.status)
print(f"certificate: kind={cert.kind}  y_witness={cert.y_witness:.4f}  lower_bound={cert.lower_bound:.6f}")
print(cert.explanation)
