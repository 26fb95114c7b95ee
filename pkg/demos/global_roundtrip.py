"""
From local data to a global lattice
===================================

A hidden u-stable lattice is observed only through its operator at a few
primes, each in a random local basis.  ``solve`` builds a global lattice
with the same localizations and returns a certificate (A, {P_ell}) that is
checked by matrix multiplication alone.
"""

import random

from tatelattice import schema
from tatelattice.engine import Block, solve, verify_certificate
from tatelattice.instances import hidden_instance

rng = random.Random(2)
# x^2 + 4 has discriminant -16, so 2 is a bad prime; 3 and 7 are good.
blocks = (Block(1, (4, 0, 1)), Block(1, (-2, 0, 1)))
inst, hidden = hidden_instance(rng, blocks, (2, 3, 7), p=5)
print("hidden lattice basis:", hidden.basis)
print("hidden operator:", hidden.operator)

cert = solve(inst, seed=0)
print("A =", cert.A)
print("basis of the constructed lattice:", cert.basis)
print("verification:", verify_certificate(inst, cert))

# A tampered certificate is rejected.
cert.A[0][0] += 1
print("after tampering:", verify_certificate(inst, cert))

# Instances and certificates serialize to JSON losslessly.
data = schema.instance_to_dict(inst)
back = schema.instance_from_dict(data)
print("instance JSON round-trips:", schema.instance_to_dict(back) == data)
