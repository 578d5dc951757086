"""
Gamma matrices on M^{1+2} x S^3
===============================

Build the three-dimensional representations, lift them to six dimensions
and check everything exactly (no floating point anywhere).
"""

from kkdirac.clifford import (build_gamma_0_3, build_gamma_1_2, lift_to_6d,
                              lorentz_generators, matrix_strings,
                              verify_clifford_relation, verify_generator_blocks,
                              verify_lorentz_closure)

g3 = build_gamma_1_2()   # signature (-,+,+), labels 0,1,2
gS = build_gamma_0_3()   # signature (+,+,+), labels 5,6,7
g6 = lift_to_6d(g3, gS)  # 8x8 matrices

print("gamma^0 =", matrix_strings(g3[0]))
print("Gamma^5 is", g6.dim, "x", g6.dim)

# {Gamma^A, Gamma^B} = 2 eta^AB, for all three representations
for rep, name in ((g3, "Clif(1,2)"), (gS, "Clif(0,3)"), (g6, "Clif(1,5)")):
    checks = verify_clifford_relation(rep, name)
    print(name, sum(c.passed for c in checks), "/", len(checks))

# Sigma^AB split into spacetime, sphere and mixed blocks
sig = lorentz_generators(g6)
blocks = verify_generator_blocks(sig, g3, gS)
closure = verify_lorentz_closure(sig)
print("generator blocks ok:", all(c.passed for c in blocks), "(", len(blocks), "pairs )")
print("so(1,5) closure ok:", all(c.passed for c in closure))
