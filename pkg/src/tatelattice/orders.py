"""Monogenic orders Z[x]/(f) in etale Q-algebras and their local factors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

from sympy import primerange

from . import exact
from .padic import BadPrimeError, PadicContext, factor_mod_prime, hensel_factor, valuation


class InvalidOrderError(ValueError):
    pass


@dataclass(frozen=True)
class Order:
    """The order Z[x]/(f) for monic squarefree ``f``."""

    f: tuple
    disc: int

    @property
    def degree(self) -> int:
        return len(self.f) - 1

    def is_good(self, ell: int, p: int = 0) -> bool:
        """ell does not divide p * disc."""
        return self.disc % ell != 0 and ell != p

    def bad_primes(self) -> List[int]:
        from sympy import factorint
        return sorted(factorint(abs(self.disc)))


@dataclass(frozen=True)
class LocalOrderFactor:
    """One factor O_lambda = Z_ell[x]/(f_lambda) of O tensor Z_ell."""

    ctx: PadicContext
    f_lambda: tuple

    @property
    def residue_degree(self) -> int:
        return len(self.f_lambda) - 1


def make_order(f: Sequence[int]) -> Order:
    f = exact.poly_trim(f)
    if not exact.is_monic(f):
        raise InvalidOrderError(f"{exact.poly_str(f)} is not monic")
    if len(f) < 2:
        raise InvalidOrderError("order needs a polynomial of degree >= 1")
    d = exact.poly_disc(f)
    if d == 0:
        raise InvalidOrderError(
            f"{exact.poly_str(f)} is not squarefree; a non-semisimple endomorphism "
            "must be given as block data")
    return Order(tuple(int(c) for c in f), int(d))


def splitting(order: Order, ctx: PadicContext, seed=None) -> List[LocalOrderFactor]:
    """Hensel-lifted local factors, one per prime lambda above ell."""
    if order.disc % ctx.ell == 0 and seed is None:
        raise BadPrimeError(
            f"{ctx.ell} divides disc = {order.disc}",
            valuation(order.disc, ctx.ell))
    return [LocalOrderFactor(ctx, g) for g in hensel_factor(order.f, ctx, seed=seed)]


def rank_h(order: Order, n: int) -> int:
    """Rank of the lattice as a module over the order: n / deg f."""
    if n % order.degree:
        raise InvalidOrderError(
            f"degree {order.degree} does not divide rank {n}; the rational Tate "
            "module cannot be free over E")
    return n // order.degree


def splitting_type(order: Order, ell: int, p: int = 0) -> str:
    """Short description of how ell decomposes in the order."""
    if ell == p:
        return "excluded (residue characteristic)"
    if order.disc % ell == 0:
        return f"bad (v_{ell}(disc) = {valuation(order.disc, ell)})"
    degs = [len(g) - 1 for g, _ in factor_mod_prime(order.f, ell)]
    if len(degs) == 1 and order.degree > 1:
        return "inert"
    if all(k == 1 for k in degs):
        return "split"
    return "residue degrees " + ",".join(map(str, degs))


def classify(order: Order, primes: Optional[Sequence[int]] = None, max_prime: int = 13) -> dict:
    """Discriminant plus the splitting type of each listed prime."""
    primes = list(primes) if primes is not None else list(primerange(2, max_prime + 1))
    return {
        "f": list(order.f),
        "disc": order.disc,
        "primes": {ell: splitting_type(order, ell) for ell in primes},
    }
