"""
Reducing the six-dimensional equation
=====================================

Apply the full Dirac operator to the ansatz, then compare with the sum of
the reduced terms.  Flipping the wedge-order sign breaks the agreement.
"""

import numpy as np

from kkdirac.geometry import assemble_kk, flat_spacetime, random_polynomial_potential, sphere_model
from kkdirac.reduction import dirac_6d, random_ansatz, reduce_equations

st = flat_spacetime()
geom = assemble_kk(st, sphere_model(), random_polynomial_potential(st.chart, 42))
pts = geom.sample(30, 7)
ans = random_ansatz(geom, 7)

full = dirac_6d(ans, geom, 1, pts)          # (N, 8): upper and lower halves
red = reduce_equations(ans, geom, 1, pts)

for t in (1, 2):
    print(f"eta^{t} terms:", ", ".join(f"{tag}(psi_{j})" for tag, j in red.tags(t)))
    diff = np.abs(red.residual(t) - full[:, 4 * (t - 1):4 * t]).max()
    print(f"  reduced vs full: {diff:.1e}")

# wrong ordering sign for the sphere-first terms
wrong = {"M^S": 1, "S^M": 1}
print("with S^M sign +1:", f"{np.abs(red.residual(1, wrong) - full[:, :4]).max():.1e}")
