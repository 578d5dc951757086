"""
Gauge covariance
================

The minimally coupled isodoublet equation transforms covariantly when the
potential picks up the inhomogeneous term.  Checked for a few random SU(2)
gauge fields.
"""

from kkdirac.geometry import assemble_kk, flat_spacetime, random_polynomial_potential, sphere_model
from kkdirac.reduction import gauge_covariance_check, random_gauge_element, random_spinor3

st = flat_spacetime()
geom = assemble_kk(st, sphere_model(), random_polynomial_potential(st.chart, 42))
psi = {i: random_spinor3(st.chart, 100 + i) for i in (1, 2)}
Gt = random_gauge_element(st.chart, 9)
pts = st.chart.sample(30, 5)

for s in range(5):
    U = random_gauge_element(st.chart, s, quadratic=bool(s % 2))
    print(gauge_covariance_check(U, psi, Gt, geom, 2, pts, name=str(s)).line())
