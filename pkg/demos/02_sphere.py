"""
The S^3 coframe and its Dirac operator
======================================

The coframe comes from dG G^-1 on SU(2).  Its Cartan-Maurer constant is
measured rather than assumed, then the S^3 Dirac operator is applied to the
columns of G.
"""

from kkdirac.geometry import assemble_kk, flat_spacetime, sphere_model, zero_potential
from kkdirac.reduction import dirac_s3

sp = sphere_model()                 # right-invariant frame
print("lambda =", sp.lam_exact, "spread", sp.lam_spread)

geom = assemble_kk(flat_spacetime(), sp, zero_potential(flat_spacetime().chart))
pts = geom.sample(30, 0)

# columns of G are eigenspinors: one constant eigenvalue over all points
for j in (0, 1):
    r = dirac_s3(sp.G.matrix[:, j], geom, pts)
    print(f"column {j + 1}: m = {r.m_exact}, spread {r.spread:.1e}")

# a constant spinor is an eigenspinor too, with the opposite sign
r = dirac_s3([1, 0], geom, pts)
print("constant spinor: m =", r.m_exact)
