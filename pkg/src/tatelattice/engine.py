"""Global u-stable lattices with prescribed localizations, and certificates.

The pipeline: split the instance into field blocks, build a reference
lattice on which u acts by a block companion matrix, glue in the local
lattices prescribed at the primes of S, saturate under Z[u], and read off
an integer matrix A together with l-adic conjugators proving that A
realizes the given local operators.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import factorint, isprime

from . import exact
from .local import LocalModule, global_basis, reference_model
from .orders import make_order
from .padic import (
    BadPrimeError,
    PadicContext,
    PadicMatrix,
    VERIFIED,
    det_valuation,
    idempotents,
    intertwiners,
    inverse_mod,
    is_conjugator,
    mat_mod,
    mat_mul_mod,
    padic_hnf,
    padic_smith,
    pf_gcd,
    pm_reduce,
    rational_matrix_mod,
    search_unit_intertwiner,
)

ENGINE_VERSION = "tatelattice-0.1.0"


class InvalidInstanceError(ValueError):
    pass


class SolveUnknown(RuntimeError):
    """The engine could not decide the local structure at some prime."""

    def __init__(self, ell: int, reason: str):
        super().__init__(f"unknown at {ell}: {reason}")
        self.ell = ell
        self.reason = reason


@dataclass(frozen=True)
class Block:
    """r copies of a rank-h free module over Z[x]/(f)."""

    r: int
    f: tuple
    h: int = 1

    @property
    def multiplicity(self) -> int:
        return self.r * self.h

    @property
    def rank(self) -> int:
        return self.multiplicity * (len(self.f) - 1)


@dataclass
class ProblemInstance:
    n: int
    p: int
    blocks: Tuple[Block, ...]
    S: Tuple[int, ...]
    precision: int
    locals: Dict[int, PadicMatrix]
    g: Optional[int] = None

    @property
    def ref_blocks(self) -> List[Tuple[tuple, int]]:
        return [(b.f, b.multiplicity) for b in self.blocks]

    @property
    def reference(self) -> list:
        return reference_model(self.ref_blocks)

    @property
    def annihilator(self) -> tuple:
        return exact.poly_prod([b.f for b in self.blocks])

    @property
    def charpoly(self) -> tuple:
        return exact.poly_prod([exact.poly_pow(b.f, b.multiplicity) for b in self.blocks])

    def context(self, ell: int) -> PadicContext:
        return PadicContext(ell, self.precision)

    def validate(self) -> None:
        if self.g is not None and self.n != 2 * self.g:
            raise InvalidInstanceError(f"n = {self.n} but 2g = {2 * self.g}")
        if self.p and not isprime(self.p):
            raise InvalidInstanceError(f"p = {self.p} is neither 0 nor prime")
        if not self.blocks:
            raise InvalidInstanceError("no blocks")
        for b in self.blocks:
            if b.r < 1 or b.h < 1:
                raise InvalidInstanceError("block counts must be positive")
            try:
                make_order(b.f)
            except ValueError as exc:
                raise InvalidInstanceError(str(exc)) from exc
        if sum(b.rank for b in self.blocks) != self.n:
            raise InvalidInstanceError(
                f"block ranks sum to {sum(b.rank for b in self.blocks)}, expected {self.n}")
        try:
            make_order(self.annihilator)
        except ValueError as exc:
            raise InvalidInstanceError("block polynomials are not pairwise coprime") from exc
        if self.precision < 1:
            raise InvalidInstanceError("precision must be positive")
        for ell in self.S:
            if not isprime(ell):
                raise InvalidInstanceError(f"{ell} in S is not prime")
            if ell == self.p:
                raise InvalidInstanceError(f"{ell} in S equals the excluded characteristic p")
        if sorted(self.locals) != sorted(self.S):
            raise InvalidInstanceError("local operators must be given exactly at the primes of S")
        cp = self.charpoly
        for ell, U in self.locals.items():
            if U.ctx != self.context(ell) or U.n != self.n:
                raise InvalidInstanceError(f"local operator at {ell} has wrong size or precision")
            m = U.ctx.modulus
            if U.charpoly() != pm_reduce(cp, m):
                raise InvalidInstanceError(f"charpoly mismatch at {ell}")
            if any(any(r) for r in exact.mat_poly_eval(self.annihilator, U.rows, m)):
                raise InvalidInstanceError(
                    f"local operator at {ell} is not annihilated by the product of the block polynomials")


@dataclass
class GlobalLattice:
    """Lattice spanned by the columns of ``basis``; u acts by ``operator`` on that basis."""

    basis: list
    operator: list

    @property
    def is_stable(self) -> bool:
        return exact.is_integral(self.operator)

    @property
    def ambient_operator(self) -> list:
        return exact.mat_mul(exact.mat_mul(self.basis, self.operator), exact.inverse(self.basis))

    @classmethod
    def from_basis(cls, basis, ambient_operator) -> "GlobalLattice":
        op = exact.mat_mul(exact.mat_mul(exact.inverse(basis), ambient_operator), basis)
        return cls(_normalize(basis), _normalize(op))


def _normalize(M):
    return [[int(x) if Fraction(x).denominator == 1 else Fraction(x) for x in row] for row in M]


@dataclass
class Certificate:
    A: list
    conjugators: Dict[int, PadicMatrix]
    precision: int
    basis: list
    status: str = "unverified"
    version: str = ENGINE_VERSION


@dataclass(frozen=True)
class LocalTarget:
    """The lattice ell^-scale * (column span of ``basis``) over Z_ell."""

    ctx: PadicContext
    basis: list
    scale: int = 0


# --------------------------------------------------------------- lattices

def glue_lattice(M0: GlobalLattice, targets: Dict[int, LocalTarget]) -> GlobalLattice:
    """Lattice agreeing with ``targets`` at their primes and with M0 elsewhere.

    Targets are given in M0-coordinates.  Each target T contains
    ell^e Z^n for e its largest elementary-divisor valuation, so
    N_ell = T + ell^e Z^n is a global lattice equal to T at ell and to Z^n
    elsewhere; the sum of the N_ell scaled by the other primes' ell^e is the
    intersection of all of them.
    """
    n = len(M0.basis)
    if not targets:
        return GlobalLattice(exact.copy_matrix(M0.basis), exact.copy_matrix(M0.operator))
    exps = {}
    for ell, t in targets.items():
        vals, _, _ = padic_smith(t.basis, t.ctx)
        e = max(vals)
        if e >= t.ctx.N:
            raise ValueError(f"target at {ell} is not of full rank at precision {t.ctx.N}")
        exps[ell] = e
    gens = []
    for ell, t in targets.items():
        c = 1
        for other, e in exps.items():
            if other != ell:
                c *= other ** e
        local_gens = exact.hstack(mat_mod(t.basis, t.ctx.modulus),
                                  exact.mat_scale(ell ** exps[ell], exact.identity(n)))
        gens.append(exact.mat_scale(c, local_gens))
    Mint = exact.lattice_basis(exact.hstack(*gens))
    for ell, t in targets.items():
        pe = ell ** exps[ell]
        lhs = exact.lattice_basis(exact.hstack(Mint, exact.mat_scale(pe, exact.identity(n))))
        rhs = exact.lattice_basis(exact.hstack(mat_mod(t.basis, t.ctx.modulus),
                                               exact.mat_scale(pe, exact.identity(n))))
        if lhs != rhs:
            raise AssertionError(f"glued lattice does not localize to the target at {ell}")
    K = 1
    for ell, t in targets.items():
        K *= ell ** t.scale
    coords = exact.mat_scale(Fraction(1, K), Mint) if K != 1 else Mint
    basis = exact.mat_mul(M0.basis, coords)
    return GlobalLattice.from_basis(basis, M0.ambient_operator)


def operator_span(M: GlobalLattice, d: int) -> GlobalLattice:
    """HNF basis of M + uM + ... + u^(d-1) M, the Z[u]-module generated by M."""
    R = M.ambient_operator
    gens = [M.basis]
    for _ in range(d - 1):
        gens.append(exact.mat_mul(R, gens[-1]))
    basis = exact.lattice_basis(exact.hstack(*gens))
    return GlobalLattice.from_basis(basis, R)


def intersect_with_integral_structure(M: GlobalLattice, p: int) -> GlobalLattice:
    """A Z-lattice with the same Z[1/p]-span as M.

    Only the Z[1/p]-lattice is determined by the localizations away from p;
    this picks the basis b_i / p^(i mod 2), which need not be u-stable at p
    and is repaired by :func:`operator_span`.
    """
    if not p:
        return M
    cols = exact.transpose(M.basis)
    cols = [[Fraction(x, p ** (i % 2)) for x in c] for i, c in enumerate(cols)]
    return GlobalLattice.from_basis(exact.transpose(cols), M.ambient_operator)


# ------------------------------------------------------------ instances

def reduce_blocks(inst: ProblemInstance):
    """Split an instance into one sub-instance per block.

    Returns ``(subs, recipe)``; ``recipe[ell]`` is the basis change taking
    the direct sum of the block components back to the standard basis at ell.
    Raises BadPrimeError when two block polynomials share a factor mod some
    ell in S, since the components then do not separate.
    """
    if len(inst.blocks) == 1:
        return [inst], {ell: exact.identity(inst.n) for ell in inst.S}
    polys = [b.f for b in inst.blocks]
    comps_by_block: List[Dict[int, list]] = [dict() for _ in polys]
    recipe = {}
    for ell in inst.S:
        ctx = inst.context(ell)
        m = ctx.modulus
        for i in range(len(polys)):
            for j in range(i + 1, len(polys)):
                if pf_gcd(polys[i], polys[j], ell) != (1,):
                    raise BadPrimeError(f"blocks {i} and {j} are not coprime mod {ell}")
        U = inst.locals[ell].rows
        cols = []
        sizes = []
        for e in idempotents(polys, ctx):
            H, _, piv = padic_hnf(exact.mat_poly_eval(e, U, m), ctx)
            cols += [[row[j] for row in H] for j in range(len(piv))]
            sizes.append(len(piv))
        C = exact.transpose(cols)
        Cinv = inverse_mod(C, m)
        W = mat_mul_mod(mat_mul_mod(Cinv, U, m), C, m)
        k = 0
        for i, size in enumerate(sizes):
            comps_by_block[i][ell] = [row[k:k + size] for row in W[k:k + size]]
            k += size
        recipe[ell] = C
    subs = []
    for b, comps in zip(inst.blocks, comps_by_block):
        locs = {ell: PadicMatrix.from_rows(inst.context(ell), comps[ell]) for ell in inst.S}
        subs.append(ProblemInstance(b.rank, inst.p, (b,), inst.S, inst.precision, locs))
    for s in subs:
        s.validate()
    return subs, recipe


def recombine(certs: Sequence[Certificate], recipe: Dict[int, list], precision: int) -> Certificate:
    """Direct sum of block certificates, conjugators composed with the recipe."""
    A = exact.block_diag(*[c.A for c in certs])
    basis = exact.block_diag(*[c.basis for c in certs])
    conj = {}
    for ell, C in recipe.items():
        ctx = PadicContext(ell, precision)
        P = exact.block_diag(*[c.conjugators[ell].rows for c in certs])
        conj[ell] = PadicMatrix.from_rows(ctx, mat_mul_mod(C, P, ctx.modulus))
    return Certificate(A, conj, precision, _normalize(basis))


def _best_intertwiner(R, U, ctx: PadicContext, budget: int, rng: random.Random):
    """An intertwiner X (X R = U X) of smallest determinant valuation found."""
    import itertools
    basis = intertwiners(R, U, ctx)
    m = ctx.modulus
    K = len(basis)
    if K == 0:
        return None, ctx.N
    if ctx.ell ** K <= budget:
        cands = (c for c in itertools.product(range(ctx.ell), repeat=K) if any(c))
    else:
        cands = ([rng.randrange(ctx.ell ** 2) for _ in range(K)] for _ in range(budget))
    best, best_v = None, ctx.N + 1
    for coeffs in cands:
        X = [[sum(c * B[i][j] for c, B in zip(coeffs, basis)) % m for j in range(len(R))]
             for i in range(len(R))]
        v = det_valuation(X, ctx)
        if v < best_v:
            best, best_v = X, v
            if v == 0:
                break
    return best, best_v


def _solve_direct(inst: ProblemInstance, seed: int = 0, budget: int = 512) -> Certificate:
    rng = random.Random(seed)
    R = inst.reference
    n = inst.n
    f = inst.annihilator
    order = make_order(f)
    ref = GlobalLattice(exact.identity(n), R)
    local_data = {}
    targets = {}
    for ell in sorted(inst.S):
        ctx = inst.context(ell)
        U = inst.locals[ell]
        if order.is_good(ell):
            B_U = global_basis(LocalModule(ctx, U), inst.ref_blocks)
            local_data[ell] = ("free", B_U)
            continue
        X, v = _best_intertwiner(R, U.rows, ctx, budget, rng)
        if X is None or v >= ctx.N:
            raise SolveUnknown(ell, "no intertwiner of full rank found")
        if v == 0:
            local_data[ell] = ("free", X)
            continue
        vals, _, T = padic_smith(X, ctx)
        a = max(vals)
        if 2 * a > ctx.N:
            raise SolveUnknown(ell, f"intertwiner valuation {a} exceeds half the precision")
        tb = [[T[i][j] * ell ** (a - vals[j]) for j in range(n)] for i in range(n)]
        targets[ell] = LocalTarget(ctx, tb)
        local_data[ell] = ("target", X, a)
    M = glue_lattice(ref, targets)
    M = intersect_with_integral_structure(M, inst.p)
    M = operator_span(M, len(f) - 1)
    if not M.is_stable:
        raise AssertionError("Z[u]-span is not u-stable")
    A = exact.to_int(M.operator)
    B = M.basis
    conj = {}
    for ell in sorted(inst.S):
        ctx = inst.context(ell)
        mod = ctx.modulus
        U = inst.locals[ell].rows
        Bl = rational_matrix_mod(B, mod)
        data = local_data[ell]
        if data[0] == "free":
            P = mat_mul_mod(data[1], Bl, mod)
        else:
            X, a = data[1], data[2]
            XB = mat_mul_mod(X, Bl, mod)
            hint = [[(x // ell ** a) % ell for x in row] for row in XB]
            res = search_unit_intertwiner(A, U, ctx, hint=hint, budget=4096, seed=seed)
            if res.status != VERIFIED:
                raise SolveUnknown(ell, res.reason or "no local conjugator found")
            P = res.conjugator.rows
        if not is_conjugator(P, A, U, ctx):
            raise AssertionError(f"conjugator at {ell} fails")
        conj[ell] = PadicMatrix.from_rows(ctx, P)
    return Certificate(A, conj, inst.precision, B)


def solve(inst: ProblemInstance, seed: int = 0) -> Certificate:
    """Integer matrix A plus conjugators P_ell with P_ell A P_ell^-1 = U_ell.

    Raises InvalidInstanceError for inconsistent input and SolveUnknown when
    a bad prime's local structure could not be matched.
    """
    inst.validate()
    try:
        subs, recipe = reduce_blocks(inst)
    except BadPrimeError:
        subs, recipe = None, None
    if subs is None or len(subs) == 1:
        cert = _solve_direct(inst, seed=seed)
    else:
        cert = recombine([_solve_direct(s, seed=seed) for s in subs], recipe, inst.precision)
    result = verify_certificate(inst, cert)
    if not result.ok:
        raise AssertionError(f"self-verification failed: {result.reason}")
    cert.status = "verified"
    return cert


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""

    def __bool__(self):
        return self.ok


def verify_certificate(inst: ProblemInstance, cert: Certificate) -> Verdict:
    """Check a certificate by multiplication alone."""
    n = inst.n
    A = cert.A
    if len(A) != n or any(len(row) != n for row in A):
        return Verdict(False, "A has the wrong shape")
    if not exact.is_integral(A):
        return Verdict(False, "A is not integral")
    A = exact.to_int(A)
    if exact.charpoly(A) != inst.charpoly:
        return Verdict(False, "charpoly of A differs from the instance")
    B = cert.basis
    try:
        Binv = exact.inverse(B)
    except (ZeroDivisionError, ValueError, TypeError):
        return Verdict(False, "basis is singular")
    if exact.mat_mul(exact.mat_mul(Binv, inst.reference), B) != A:
        return Verdict(False, "A is not the operator on the stated basis")
    allowed = set(inst.S) | ({inst.p} if inst.p else set())
    d = Fraction(exact.det(B))
    support = set(factorint(abs(d.numerator))) | set(factorint(d.denominator))
    support |= set(factorint(exact.common_denominator(B)))
    support.discard(1)
    stray = sorted(support - allowed)
    if stray:
        return Verdict(False, f"basis is not unimodular at primes {stray} outside S")
    if cert.precision < inst.precision:
        return Verdict(False, f"insufficient precision: {cert.precision} < {inst.precision}")
    for ell in sorted(inst.S):
        P = cert.conjugators.get(ell)
        if P is None:
            return Verdict(False, f"missing conjugator at {ell}")
        if P.ctx.ell != ell or P.ctx.N < inst.precision:
            return Verdict(False, f"insufficient precision for the conjugator at {ell}")
        ctx = inst.context(ell)
        Pr = mat_mod(P.rows, ctx.modulus)
        if det_valuation(Pr, ctx) != 0:
            return Verdict(False, f"conjugator at {ell} is not unimodular")
        if not is_conjugator(Pr, A, inst.locals[ell].rows, ctx):
            return Verdict(False, f"conjugacy fails at {ell}")
    return Verdict(True)
