"""Random and sample problem instances built from hidden global lattices."""

from __future__ import annotations

import random
from typing import Iterable, Optional, Sequence, Tuple

from . import exact
from .engine import Block, GlobalLattice, ProblemInstance, operator_span
from .padic import PadicContext, PadicMatrix, det_valuation, inverse_mod, mat_mul_mod


def random_unimodular(n: int, rng: random.Random, steps: int = 12, bound: int = 3) -> list:
    """Integer matrix of determinant +-1: a product of elementary operations."""
    M = exact.identity(n)
    if n == 1:
        return [[rng.choice((1, -1))]]
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        c = rng.randint(-bound, bound)
        for row in M:
            row[i] += c * row[j]
    return M


def random_unimodular_mod(n: int, ctx: PadicContext, rng: random.Random) -> list:
    while True:
        P = [[rng.randrange(ctx.modulus) for _ in range(n)] for _ in range(n)]
        if det_valuation(P, ctx) == 0:
            return P


def random_monic(rng: random.Random, degree: int, bound: int = 9) -> tuple:
    return tuple(rng.randint(-bound, bound) for _ in range(degree)) + (1,)


def random_squarefree(rng: random.Random, degree: int, bound: int = 9) -> tuple:
    while True:
        f = random_monic(rng, degree, bound)
        if exact.poly_disc(f) != 0:
            return f


def hidden_lattice(rng: random.Random, reference, d: int, bound: int = 2) -> GlobalLattice:
    """Z[u]-span of random integer vectors: a u-stable lattice of full rank."""
    n = len(reference)
    while True:
        gens = [[rng.randint(-bound, bound) for _ in range(n)] for _ in range(n)]
        if exact.det(gens) != 0:
            break
    return operator_span(GlobalLattice.from_basis(gens, reference), d)


def local_operators(operator, primes: Iterable[int], N: int, rng: Optional[random.Random],
                    ) -> dict:
    """The operator at each ell, rebased by a random unimodular matrix when rng is given."""
    out = {}
    n = len(operator)
    for ell in primes:
        ctx = PadicContext(ell, N)
        U = [[int(x) for x in row] for row in operator]
        if rng is not None:
            Q = random_unimodular_mod(n, ctx, rng)
            U = mat_mul_mod(mat_mul_mod(Q, U, ctx.modulus), inverse_mod(Q, ctx.modulus), ctx.modulus)
        out[ell] = PadicMatrix.from_rows(ctx, U)
    return out


def hidden_instance(rng: random.Random, blocks: Sequence[Block], S: Sequence[int], p: int = 0,
                    N: int = 24, rebase: bool = True) -> Tuple[ProblemInstance, GlobalLattice]:
    """Instance whose local operators come from one hidden u-stable lattice."""
    ref = exact.block_companion([(b.f, b.multiplicity) for b in blocks])
    d = sum(len(b.f) - 1 for b in blocks)
    M = hidden_lattice(rng, ref, d)
    n = len(ref)
    locs = local_operators(M.operator, S, N, rng if rebase else None)
    g = n // 2 if n % 2 == 0 else None
    inst = ProblemInstance(n, p, tuple(blocks), tuple(sorted(S)), N, locs, g=g)
    return inst, M


def disc20_instance(N: int = 24) -> ProblemInstance:
    """u = sqrt(-5) acting on the ideal (3, 1 + sqrt(-5)) locally at 3."""
    ctx = PadicContext(3, N)
    U = PadicMatrix.from_rows(ctx, [[-1, -2], [3, 1]])
    return ProblemInstance(2, 0, (Block(1, (5, 0, 1)),), (3,), N, {3: U}, g=1)


ROUNDTRIP_PRIMES = (2, 3, 5, 7, 11)


def roundtrip_instance(rng: random.Random, two_blocks: bool = False, bad_prime: bool = False,
                       N: int = 24) -> Tuple[ProblemInstance, GlobalLattice]:
    """Random instance with p in {0, 2, 3} and S inside {2, 3, 5, 7, 11} minus p.

    With ``bad_prime`` exactly one prime of S divides the discriminant of
    the product of the block polynomials; otherwise all primes of S are good.
    """
    p = rng.choice((0, 2, 3))
    primes = [q for q in ROUNDTRIP_PRIMES if q != p]
    while True:
        if two_blocks:
            f1 = random_squarefree(rng, 2, 6)
            f2 = random_squarefree(rng, rng.choice((1, 2)), 6)
            blocks = (Block(1, f1), Block(1, f2))
        else:
            f = random_squarefree(rng, rng.choice((2, 2, 3)), 6)
            blocks = (Block(1, f, rng.randint(1, 2)),)
        D = exact.poly_disc(exact.poly_prod([b.f for b in blocks]))
        if D == 0:
            continue
        good = [q for q in primes if D % q]
        bad = [q for q in primes if D % q == 0]
        if bad_prime:
            if not bad:
                continue
            S = [rng.choice(bad)] + rng.sample(good, min(len(good), rng.randint(0, 2)))
        else:
            if not good:
                continue
            S = rng.sample(good, rng.randint(1, min(3, len(good))))
        return hidden_instance(rng, blocks, sorted(S), p=p, N=N)
