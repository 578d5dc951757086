"""
Free limit and mass spectrum
============================

With A = 0 and the sphere spinors taken as eigenspinors, the reduced
equations only contain the three-dimensional Dirac operator, M and m.
"""

from kkdirac.geometry import assemble_kk, flat_spacetime, sphere_model, zero_potential
from kkdirac.reduction import (derived_mass_matrix, dirac_s3, free_limit_check,
                               mass_spectrum, random_ansatz, reduce_equations,
                               specialize_eigenstate)

st, sp = flat_spacetime(), sphere_model()
geom = assemble_kk(st, sp, zero_potential(st.chart))
pts = geom.sample(20, 3)
m = dirac_s3(sp.G.matrix[:, 0], geom, pts).m_exact

ans = random_ansatz(geom, 3)
red = specialize_eigenstate(reduce_equations(ans, geom, 1, pts), m, ans, geom)
for c in free_limit_check(red):
    print(c.line())

# the mass matrix [[M, i m], [-i m, M]] for exact inputs
spec = mass_spectrum("5/2", "1/3")
print("eigenvalues:", *spec.eigenvalues)
print("eigenvectors:", [[str(x) for x in v] for v in spec.eigenvectors])
# (1, -+i) are the eigenvectors; 1/2 (psi_1 +- psi_2) only work for m = 0
for c in spec.checks:
    print(c.line())

# what the reduced equations themselves give
print(derived_mass_matrix(1, m))
