"""
Locally similar, globally different
===================================

Two integer matrices with characteristic polynomial x^2 + 5.  One is
multiplication by sqrt(-5) on Z[sqrt(-5)], the other on the ideal
(3, 1 + sqrt(-5)).  They are similar over Z_ell for every ell, but not
over Z, because the ideal is not principal.
"""

from math import gcd

from tatelattice import exact
from tatelattice.padic import PadicContext, PadicMatrix, is_conjugator, similarity

f = (5, 0, 1)
A = exact.companion(f)
U = [[-1, -2], [3, 1]]
print("A =", A, " U =", U)
print("charpolys:", exact.charpoly(A), exact.charpoly(U))

# U is the matrix of sqrt(-5) on the basis (3, 1 + sqrt(-5)) of the ideal:
# B^-1 A B with B the HNF basis of the ideal inside Z[sqrt(-5)].
B = [[3, 1], [0, 1]]
print("B^-1 A B =", exact.to_int(exact.mat_mul(exact.mat_mul(exact.inverse(B), A), B)))

# Local similarity, certified by an explicit conjugator at each prime.
for ell in (2, 3, 7, 11):
    ctx = PadicContext(ell, 24)
    res = similarity(A, PadicMatrix.from_rows(ctx, U), f)
    P = res.conjugator.rows
    print(f"ell = {ell:2d}: {res.status}, P A P^-1 = U mod {ell}^24:",
          is_conjugator(P, A, U, ctx))


# Global obstruction.  A 2x2 matrix [[a, b], [c, d]] gives the binary form
# c x^2 + (d - a) x y - b y^2; conjugating by GL2(Z) changes the form by an
# equivalence, so reduced forms separate Z-similarity classes.
def reduce_form(a, b, c):
    while True:
        if c < a:
            a, b, c = c, -b, a
        if b > a or b <= -a:
            k = (a - b) // (2 * a)
            a, b, c = a, b + 2 * a * k, a * k * k + b * k + c
            continue
        return a, abs(b), c


def matrix_form(M):
    (a, b), (c, d) = M
    return reduce_form(c, d - a, -b)


print("form of A:", matrix_form(A), " form of U:", matrix_form(U))

# Reduced forms of discriminant -20 enumerate the ideal classes.
D = -20
classes = sorted({reduce_form(a, b, (b * b - D) // (4 * a))
                  for a in range(1, 4) for b in range(-a + 1, a + 1)
                  if (b * b - D) % (4 * a) == 0 and (b * b - D) // (4 * a) >= a
                  and gcd(gcd(a, abs(b)), (b * b - D) // (4 * a)) == 1})
print("reduced forms of disc -20:", classes, "-> class number", len(classes))

# No element of Z[sqrt(-5)] has norm 3, so (3, 1 + sqrt(-5)) is not principal.
print("x^2 + 5 y^2 = 3 solvable:",
      any(x * x + 5 * y * y == 3 for x in range(-2, 3) for y in range(-1, 2)))
