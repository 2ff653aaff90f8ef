"""
Spherical embeddings into HomWell_k for k other than 0 and 2
============================================================

With r = 1 the condition reduces to 2k L_X theta = (k - 2) d(theta.X).
For the shear flow, theta_1 = f^((k+2)/(k-2)) solves it. Whether the
condition is ever an obstruction for these k is left open, and the report
carries that flag.
"""

import numpy as np

from homwell.adapted import check_homwell_condition, sin_plus_two
from homwell.spectral import OneForm, ScalarField, VectorField

M = 64
X = VectorField.product_flow(sin_plus_two(M))
R = ScalarField.constant(1.0)

for k in (1, 3, 4, -2):
    p = (k + 2) / (k - 2)
    t1 = ScalarField.from_function(lambda x, y, p=p: (np.sin(2 * np.pi * y) + 2) ** p, M)
    rep = check_homwell_condition(X, OneForm(t1, 0.0), R, k, "spherical", tol=1e-8)
    print(f"k = {k:>2}  exponent {p:+.3f}  residual {rep.residual_inf_norm:.2e}  "
          f"satisfied {rep.satisfied}  open question flagged {rep.open_question}")

# theta = dx does not work for k = 2 with R = 1: the residual is 4 sup|f'| = 8 pi
rep = check_homwell_condition(X, OneForm(1.0, 0.0), R, 2, "homwell2")
print(f"homwell2 with theta = dx: residual {rep.residual_inf_norm:.6f} (8 pi = {8 * np.pi:.6f})")
