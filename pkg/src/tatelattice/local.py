"""Local lattices with an operator: lambda-decomposition and free bases.

At a prime ell not dividing disc f, a rank-n Z_ell-lattice stable under an
operator U with f(U) = 0 splits along the idempotents of Z_ell[x]/(f) into
components over the unramified discrete valuation rings O_lambda, and each
component is free.  The routines here construct those bases explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from . import exact
from .orders import LocalOrderFactor, Order, make_order, splitting
from .padic import (
    BadPrimeError,
    PadicContext,
    PadicMatrix,
    det_valuation,
    idempotents,
    mat_mod,
    padic_hnf,
    pm_rem,
    rank_mod_prime,
)


class InconsistentModuleError(ValueError):
    pass


@dataclass(frozen=True)
class LocalModule:
    """Z_ell^n with the operator U (given mod ell^N) acting on column vectors."""

    ctx: PadicContext
    U: PadicMatrix
    provenance: str = "input"

    @property
    def n(self) -> int:
        return self.U.n

    def apply(self, v: Sequence[int]) -> List[int]:
        m = self.ctx.modulus
        return [sum(a * b for a, b in zip(row, v)) % m for row in self.U.entries]

    def orbit(self, v: Sequence[int], k: int) -> List[List[int]]:
        """v, Uv, ..., U^(k-1) v."""
        out = [list(v)]
        for _ in range(k - 1):
            out.append(self.apply(out[-1]))
        return out


@dataclass(frozen=True)
class LambdaComponent:
    parent: LocalModule
    factor: LocalOrderFactor
    basis: Tuple[Tuple[int, ...], ...]  # columns spanning the component

    @property
    def local_rank(self) -> int:
        return len(self.basis)


def _as_order(order) -> Order:
    return order if isinstance(order, Order) else make_order(order)


def decompose(T: LocalModule, order) -> List[LambdaComponent]:
    """Split T into the images of the idempotents e_lambda(U)."""
    order = _as_order(order)
    ctx = T.ctx
    if order.disc % ctx.ell == 0:
        raise BadPrimeError(f"{ctx.ell} divides disc = {order.disc}")
    m = ctx.modulus
    factors = splitting(order, ctx)
    comps = []
    for fac, e in zip(factors, idempotents([F.f_lambda for F in factors], ctx)):
        E = exact.mat_poly_eval(e, T.U.rows, m)
        H, _, pivots = padic_hnf(E, ctx)
        if any(v for _, v in pivots):
            raise InconsistentModuleError(
                "idempotent image is not a direct summand; is f(U) = 0 mod ell^N?")
        cols = tuple(tuple(row[j] for row in H) for j in range(len(pivots)))
        comps.append(LambdaComponent(T, fac, cols))
    if sum(c.local_rank for c in comps) != T.n:
        raise InconsistentModuleError("component ranks do not add up to n")
    full = exact.transpose([list(c) for comp in comps for c in comp.basis])
    if det_valuation(full, ctx) != 0:
        raise InconsistentModuleError("components do not form a direct sum")
    return comps


def free_basis(component: LambdaComponent) -> List[List[int]]:
    """Generators v_1..v_h of the component as a free O_lambda-module.

    Greedy Nakayama lift: scan the component's HNF basis in order and keep
    a vector when its U-orbit of length deg f_lambda is independent mod ell
    of the orbits already kept.
    """
    T = component.parent
    ell = T.ctx.ell
    k = component.factor.residue_degree
    r = component.local_rank
    if r % k:
        raise InconsistentModuleError(
            f"component rank {r} is not a multiple of the residue degree {k}")
    h = r // k
    chosen: List[List[int]] = []
    span: List[List[int]] = []
    for v in component.basis:
        orb = T.orbit(v, k)
        if rank_mod_prime(span + orb, ell) == len(span) + k:
            chosen.append(list(v))
            span += orb
            if len(chosen) == h:
                return chosen
    raise InconsistentModuleError("could not find a residue basis; bad prime?")


def lambda_basis(T: LocalModule, f) -> Tuple[list, Tuple[int, ...]]:
    """Basis adapted to the lambda-decomposition, plus the rank h_lambda of each part.

    In this basis U is block diagonal, with h_lambda copies of
    companion(f_lambda) for each lambda in splitting order.
    """
    comps = decompose(T, f)
    cols = []
    mults = []
    for comp in comps:
        gens = free_basis(comp)
        mults.append(len(gens))
        for v in gens:
            cols += T.orbit(v, comp.factor.residue_degree)
    return exact.transpose(cols), tuple(mults)


def reference_model(blocks: Sequence[Tuple[Sequence[int], int]]) -> list:
    """Block companion matrix: for each (f_i, m_i), m_i copies of companion(f_i)."""
    return exact.block_companion(blocks)


def global_basis(T: LocalModule, blocks: Sequence[Tuple[Sequence[int], int]]) -> list:
    """Basis B of T with B^-1 U B equal to the reference model of ``blocks``.

    For block i the generators are w_t = sum over lambda | f_i of the t-th
    O_lambda-generator; their U-orbits of length deg f_i form an
    O-basis because O tensor Z_ell is the product of the O_lambda.
    """
    ctx = T.ctx
    ell = ctx.ell
    m = ctx.modulus
    polys = [tuple(f) for f, _ in blocks]
    comps = decompose(T, exact.poly_prod(polys))
    gens_by_block = [[] for _ in blocks]
    for comp in comps:
        owner = [i for i, f in enumerate(polys)
                 if not pm_rem(f, comp.factor.f_lambda, ell)]
        if len(owner) != 1:
            raise InconsistentModuleError("local factor does not belong to a unique block")
        gens_by_block[owner[0]].append(free_basis(comp))
    cols = []
    for (f, mult), gens in zip(blocks, gens_by_block):
        if any(len(g) != mult for g in gens):
            raise InconsistentModuleError(
                f"block {exact.poly_str(f)}: local ranks {[len(g) for g in gens]} "
                f"differ from the declared multiplicity {mult}")
        for t in range(mult):
            w = [sum(g[t][i] for g in gens) % m for i in range(T.n)]
            cols += T.orbit(w, len(f) - 1)
    return exact.transpose(cols)


def conjugates_to_model(B, U, model, ctx: PadicContext) -> bool:
    """Check B unimodular and B^-1 U B = model mod ell^N, via U B = B model."""
    m = ctx.modulus
    if det_valuation(B, ctx) != 0:
        return False
    return mat_mod(exact.mat_mul(U, B), m) == mat_mod(exact.mat_mul(B, model), m)
