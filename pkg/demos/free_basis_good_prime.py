"""
Free bases at a good prime
==========================

At a prime ell not dividing disc f, every Z_ell-lattice with an operator
killed by f is free over Z_ell[x]/(f).  We hide a free module behind a
random change of basis and recover a basis in which the operator is the
block companion matrix again.
"""

import random

from tatelattice import exact
from tatelattice.instances import random_unimodular_mod
from tatelattice.local import LocalModule, conjugates_to_model, decompose, free_basis, global_basis
from tatelattice.padic import PadicContext, PadicMatrix, inverse_mod, mat_mul_mod

rng = random.Random(0)
f = (1, 0, 1)          # x^2 + 1, split at 5
h = 2
ctx = PadicContext(5, 12)
m = ctx.modulus

ref = exact.block_companion([(f, h)])
Q = random_unimodular_mod(len(ref), ctx, rng)
U = mat_mul_mod(mat_mul_mod(Q, ref, m), inverse_mod(Q, m), m)
T = LocalModule(ctx, PadicMatrix.from_rows(ctx, U))
print("disc f =", exact.poly_disc(f))

# Idempotents of Z_5[x]/(x^2 + 1) split T into two components, each free
# over Z_5 of rank h.
for comp in decompose(T, f):
    print("factor", comp.factor.f_lambda, "rank", comp.local_rank,
          "generators", len(free_basis(comp)))

B = global_basis(T, [(f, h)])
print("B^-1 U B equals the block companion model:", conjugates_to_model(B, U, ref, ctx))
