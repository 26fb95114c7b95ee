"""
No stable Q-lattice for a quaternion action
===========================================

B = (-1, -1) is a division algebra (ramified at 2 and infinity), so it
cannot act on Q^2.  Over Q(sqrt m) it splits, and R = {(a, b)} acts on
pairs of vectors.  Every candidate Q-structure we sample fails to be
R-stable, and each failure comes with a witness checked by exact
arithmetic.
"""

from tatelattice import exact
from tatelattice.padic import mat_mul_mod
from tatelattice.quaternion import (
    QuaternionAlgebra,
    check_R_stability,
    demo_counterexample,
    is_division,
    make_model,
    verify_witness,
)

print("(-1, -1) division, ramified at:", is_division(QuaternionAlgebra(-1, -1)))

model = make_model(B=(-1, -1), p=2, S=(3, 5), N=24)
for ell, sp in model.splittings.items():
    i_img, j_img = sp.local_images()
    mod = sp.ctx.modulus
    minus_one = [[mod - 1, 0], [0, mod - 1]]
    print(f"ell = {ell}: split over Q(sqrt {sp.m});",
          "i^2 = j^2 = -1 mod ell^24:",
          mat_mul_mod(i_img, i_img, mod) == minus_one == mat_mul_mod(j_img, j_img, mod))

rep = check_R_stability(exact.identity(4), model)
print("standard candidate stable:", rep.stable, "witness:", rep.witness)
print("witness re-verified:", verify_witness(exact.identity(4), model, rep.witness))

report = demo_counterexample(seed=0, trials=100)
print(report["summary"])
print("dim W distribution:", report["dim_W_counts"])
