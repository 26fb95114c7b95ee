"""l-adic integers and matrices at fixed absolute precision.

Everything here works with residues modulo ``ell**N``.  Polynomials are
coefficient tuples (lowest degree first), matrices lists of rows.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from sympy import isprime

from . import exact
from .exact import poly_trim


class BadPrimeError(ValueError):
    """Raised when an operation needs ell to be a good prime."""

    def __init__(self, message: str, valuation: Optional[int] = None):
        super().__init__(message)
        self.valuation = valuation


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class PadicContext:
    ell: int
    N: int

    def __post_init__(self):
        if not isprime(self.ell):
            raise ValueError(f"{self.ell} is not prime")
        if self.N < 1:
            raise ValueError("precision must be at least 1")

    @property
    def modulus(self) -> int:
        return self.ell ** self.N

    def reduce(self, x: int) -> int:
        return x % self.modulus


def valuation(x, ell: int, cap: Optional[int] = None) -> int:
    """ell-adic valuation of a nonzero integer or Fraction, capped at ``cap``.

    Zero has valuation ``cap`` (infinite when no cap is given).
    """
    if x == 0:
        if cap is None:
            raise ValueError("valuation of zero")
        return cap
    from fractions import Fraction
    q = Fraction(x)
    v = 0
    num, den = q.numerator, q.denominator
    while num % ell == 0:
        num //= ell
        v += 1
    while den % ell == 0:
        den //= ell
        v -= 1
    return v if cap is None else min(v, cap)


def default_precision(f: Sequence[int], ell: int) -> int:
    d = exact.poly_disc(f)
    return max(24, 2 * valuation(d, ell, cap=10 ** 6) + 10) if d else 24


# ------------------------------------------------------------ polys mod m

def pm_reduce(f: Sequence[int], m: int) -> tuple:
    return poly_trim([c % m for c in f])


def pm_add(f, g, m) -> tuple:
    return pm_reduce(exact.poly_add(f, g), m)


def pm_sub(f, g, m) -> tuple:
    return pm_reduce(exact.poly_sub(f, g), m)


def pm_mul(f, g, m) -> tuple:
    return pm_reduce(exact.poly_mul(f, g), m)


def pm_divmod(f, g, m) -> Tuple[tuple, tuple]:
    """Division mod ``m`` by ``g`` whose leading coefficient is a unit mod m."""
    f = list(pm_reduce(f, m))
    g = pm_reduce(g, m)
    if not g:
        raise ZeroDivisionError("division by the zero polynomial")
    inv = pow(g[-1], -1, m)
    dg = len(g) - 1
    q = [0] * max(len(f) - dg, 0)
    while f and len(f) - 1 >= dg:
        c = f[-1] * inv % m
        shift = len(f) - 1 - dg
        q[shift] = c
        for i, b in enumerate(g):
            f[shift + i] = (f[shift + i] - c * b) % m
        f = list(poly_trim(f))
    return poly_trim(q), poly_trim(f)


def pm_rem(f, g, m) -> tuple:
    return pm_divmod(f, g, m)[1]


def pm_powmod(base, e: int, g, m) -> tuple:
    result: tuple = (1,)
    base = pm_rem(base, g, m)
    while e:
        if e & 1:
            result = pm_rem(pm_mul(result, base, m), g, m)
        base = pm_rem(pm_mul(base, base, m), g, m)
        e >>= 1
    return result


def _monic(f, p) -> tuple:
    f = pm_reduce(f, p)
    if not f:
        return f
    inv = pow(f[-1], -1, p)
    return tuple(c * inv % p for c in f)


def pf_gcd(f, g, p) -> tuple:
    """Monic gcd over the prime field F_p."""
    f, g = pm_reduce(f, p), pm_reduce(g, p)
    while g:
        f, g = g, pm_rem(f, g, p)
    return _monic(f, p)


def pf_xgcd(f, g, p):
    """(d, s, t) with s*f + t*g = d = gcd(f, g) monic, over F_p."""
    r0, r1 = pm_reduce(f, p), pm_reduce(g, p)
    s0, s1, t0, t1 = (1,), (), (), (1,)
    while r1:
        q, r = pm_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, pm_sub(s0, pm_mul(q, s1, p), p)
        t0, t1 = t1, pm_sub(t0, pm_mul(q, t1, p), p)
    inv = pow(r0[-1], -1, p)
    scale = lambda h: pm_reduce([c * inv for c in h], p)
    return scale(r0), scale(s0), scale(t0)


def pf_inverse(a, g, p) -> tuple:
    d, s, _ = pf_xgcd(a, g, p)
    if d != (1,):
        raise ValueError("polynomial is not invertible modulo g")
    return pm_rem(s, g, p)


# ---------------------------------------------------- factoring mod a prime

def _pth_root(f, p) -> tuple:
    return tuple(f[i] for i in range(0, len(f), p))


def _squarefree_decomposition(f, p) -> List[Tuple[tuple, int]]:
    f = _monic(f, p)
    if len(f) <= 1:
        return []
    out = []
    df = pm_reduce(exact.poly_derivative(f), p)
    if df:
        c = pf_gcd(f, df, p)
        w = pm_divmod(f, c, p)[0]
        i = 1
        while w != (1,):
            y = pf_gcd(w, c, p)
            fac = pm_divmod(w, y, p)[0]
            if fac != (1,):
                out.append((fac, i))
            w = y
            c = pm_divmod(c, y, p)[0]
            i += 1
        if c != (1,):
            out += [(g, e * p) for g, e in _squarefree_decomposition(_pth_root(c, p), p)]
    else:
        out += [(g, e * p) for g, e in _squarefree_decomposition(_pth_root(f, p), p)]
    return out


def _distinct_degree(f, p) -> List[Tuple[tuple, int]]:
    out = []
    x = (0, 1)
    fstar = f
    h = x
    i = 1
    while len(fstar) - 1 >= 2 * i:
        h = pm_powmod(h, p, fstar, p)
        g = pf_gcd(fstar, pm_sub(h, x, p), p)
        if g != (1,):
            out.append((g, i))
            fstar = pm_divmod(fstar, g, p)[0]
            h = pm_rem(h, fstar, p)
        i += 1
    if len(fstar) > 1:
        out.append((fstar, len(fstar) - 1))
    return out


def _equal_degree(g, k: int, p: int, rng: random.Random) -> List[tuple]:
    r = (len(g) - 1) // k
    factors = [g]
    while len(factors) < r:
        a = pm_reduce([rng.randrange(p) for _ in range(len(g) - 1)], p)
        if len(a) <= 1:
            continue
        if p == 2:
            b, t = (), a
            for _ in range(k):
                b = pm_add(b, t, 2)
                t = pm_rem(pm_mul(t, t, 2), g, 2)
        else:
            b = pm_sub(pm_powmod(a, (p ** k - 1) // 2, g, p), (1,), p)
        nxt = []
        for u in factors:
            if len(u) - 1 > k:
                d = pf_gcd(u, b, p)
                if 1 <= len(d) - 1 < len(u) - 1:
                    nxt += [d, pm_divmod(u, d, p)[0]]
                    continue
            nxt.append(u)
        factors = nxt
    return factors


def factor_mod_prime(f: Sequence[int], p: int) -> List[Tuple[tuple, int]]:
    """Factor a polynomial over F_p into monic irreducibles with multiplicity.

    Output is sorted by (degree, coefficients), so it is deterministic.
    """
    rng = random.Random(0)
    out = []
    for g, e in _squarefree_decomposition(f, p):
        for h, k in _distinct_degree(g, p):
            for irr in _equal_degree(h, k, p, rng):
                out.append((irr, e))
    return sorted(out, key=lambda t: (len(t[0]), t[0][::-1], t[1]))


def coprime_seed(f: Sequence[int], p: int) -> List[tuple]:
    """Primary-part factorization of f mod p: pairwise coprime monic factors."""
    return [pm_reduce(exact.poly_pow(g, e), p) for g, e in factor_mod_prime(f, p)]


# ------------------------------------------------------------ Hensel lifting

def _hensel_pair(f, g, h, ell: int, N: int) -> Tuple[tuple, tuple]:
    """Lift f = g*h (mod ell, g and h coprime monic) to mod ell^N."""
    _, s, t = pf_xgcd(g, h, ell)
    g, h = pm_reduce(g, ell), pm_reduce(h, ell)
    for k in range(1, N):
        pk = ell ** k
        diff = exact.poly_sub(f, exact.poly_mul(g, h))
        e = pm_reduce([c // pk for c in diff], ell)
        if not e:
            continue
        b = pm_rem(pm_mul(t, e, ell), g, ell)
        a, rem = pm_divmod(pm_sub(e, pm_mul(b, h, ell), ell), g, ell)
        assert not rem
        mod = pk * ell
        g = pm_reduce(exact.poly_add(g, [pk * c for c in b]), mod)
        h = pm_reduce(exact.poly_add(h, [pk * c for c in a]), mod)
    return g, h


def hensel_factor(f: Sequence[int], ctx: PadicContext, seed: Optional[Sequence] = None) -> List[tuple]:
    """Monic pairwise-coprime factors of ``f`` modulo ell^N.

    Without ``seed`` the factors are the lifts of the irreducible factors of
    ``f`` mod ell, which must be squarefree there.  ``seed`` may supply any
    factorization of ``f`` mod ell into pairwise coprime monic pieces.
    """
    f = poly_trim(f)
    if not exact.is_monic(f):
        raise exact.NotMonicError(f"{f} is not monic")
    ell, N = ctx.ell, ctx.N
    if seed is None:
        facs = factor_mod_prime(f, ell)
        if any(e > 1 for _, e in facs):
            d = exact.poly_disc(f)
            raise BadPrimeError(f"f is not squarefree mod {ell}",
                                valuation(d, ell, cap=10 ** 6) if d else None)
        seed = [g for g, _ in facs]
    seed = [_monic(g, ell) for g in seed]
    if pm_reduce(exact.poly_prod(seed), ell) != pm_reduce(f, ell):
        raise ValueError("seed factors do not multiply to f mod ell")
    for a, b in itertools.combinations(seed, 2):
        if pf_gcd(a, b, ell) != (1,):
            raise ValueError("seed factors are not pairwise coprime mod ell")
    out = []
    rest = pm_reduce(f, ctx.modulus)
    for i, g in enumerate(seed[:-1]):
        h = pm_reduce(exact.poly_prod(seed[i + 1:]), ell)
        G, rest = _hensel_pair(rest, g, h, ell, N)
        out.append(G)
    out.append(rest)
    return out


def idempotents(factors: Sequence[Sequence[int]], ctx: PadicContext) -> List[tuple]:
    """Orthogonal idempotents of (Z/ell^N)[x]/(f), f the product of ``factors``.

    ``e[i]`` is 1 on the ``factors[i]`` component and 0 on the others.
    """
    ell, m = ctx.ell, ctx.modulus
    f = pm_reduce(exact.poly_prod(factors), m)
    if len(factors) == 1:
        return [(1,)]
    out = []
    for i, g in enumerate(factors):
        gbar = pm_reduce(g, ell)
        cof = pm_reduce(exact.poly_prod(factors[:i] + factors[i + 1:]), ell)
        if pf_gcd(gbar, cof, ell) != (1,):
            raise ValueError("factors are not pairwise coprime mod ell")
        e = pm_rem(pm_mul(cof, pf_inverse(cof, gbar, ell), ell), f, m)
        # e -> 3e^2 - 2e^3 doubles the precision of an approximate idempotent.
        while True:
            e2 = pm_rem(pm_mul(e, e, m), f, m)
            if e2 == e:
                break
            e3 = pm_rem(pm_mul(e2, e, m), f, m)
            e = pm_sub([3 * c for c in e2], [2 * c for c in e3], m)
        out.append(e)
    return out


# ---------------------------------------------------------------- matrices

def mat_mod(M, m: int):
    return [[x % m for x in row] for row in M]


def mat_mul_mod(A, B, m: int):
    return mat_mod(exact.mat_mul(A, B), m)


def rational_mod(x, m: int) -> int:
    from fractions import Fraction
    q = Fraction(x)
    return q.numerator * pow(q.denominator, -1, m) % m


def rational_matrix_mod(M, m: int):
    """Reduce a matrix with denominators prime to m."""
    return [[rational_mod(x, m) for x in row] for row in M]


def det_valuation(M, ctx: PadicContext) -> int:
    """Valuation of det(M) computed from the exact integer determinant.

    Returns ``ctx.N`` when the determinant vanishes mod ell^N.
    """
    d = exact.det([[x % ctx.modulus for x in row] for row in M]) % ctx.modulus
    return valuation(d, ctx.ell, cap=ctx.N)


def inverse_mod(M, m: int):
    """Inverse of M modulo m; raises ValueError if det(M) is not a unit."""
    n = len(M)
    A = [[x % m for x in row] + [int(i == j) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        piv = None
        for r in range(c, n):
            try:
                inv = pow(A[r][c], -1, m)
            except ValueError:
                continue
            piv = r
            break
        if piv is None:
            raise ValueError("matrix is not invertible modulo m")
        A[c], A[piv] = A[piv], A[c]
        A[c] = [x * inv % m for x in A[c]]
        for r in range(n):
            if r != c and A[r][c]:
                t = A[r][c]
                A[r] = [(x - t * y) % m for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


def rank_mod_prime(M, p: int) -> int:
    A = mat_mod(M, p)
    r = 0
    ncols = len(A[0]) if A else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = pow(A[r][c], -1, p)
        for i in range(r + 1, len(A)):
            if A[i][c]:
                t = A[i][c] * inv % p
                A[i] = [(x - t * y) % p for x, y in zip(A[i], A[r])]
        r += 1
    return r


def solve_mod_prime(M, b, p: int) -> Optional[list]:
    """One solution x of M x = b over F_p, or None."""
    rows = len(M)
    ncols = len(M[0]) if M else 0
    A = [[x % p for x in M[i]] + [b[i] % p] for i in range(rows)]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, rows) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = pow(A[r][c], -1, p)
        A[r] = [x * inv % p for x in A[r]]
        for i in range(rows):
            if i != r and A[i][c]:
                t = A[i][c]
                A[i] = [(x - t * y) % p for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    if any(A[i][ncols] for i in range(r, rows)):
        return None
    x = [0] * ncols
    for i, c in enumerate(pivots):
        x[c] = A[i][ncols]
    return x


@dataclass(frozen=True)
class PadicMatrix:
    """Square matrix over Z/ell^N with entries reduced into [0, ell^N)."""

    ctx: PadicContext
    entries: Tuple[Tuple[int, ...], ...]
    _det_val: list = field(default_factory=list, compare=False, repr=False)

    @classmethod
    def from_rows(cls, ctx: PadicContext, rows) -> "PadicMatrix":
        m = ctx.modulus
        return cls(ctx, tuple(tuple(rational_mod(x, m) for x in row) for row in rows))

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def rows(self):
        return [list(r) for r in self.entries]

    @property
    def det_valuation(self) -> int:
        """Exact valuation of the determinant; ``N`` means "at least N"."""
        if not self._det_val:
            self._det_val.append(det_valuation(self.entries, self.ctx))
        return self._det_val[0]

    @property
    def is_unimodular(self) -> bool:
        return self.det_valuation == 0

    def __matmul__(self, other: "PadicMatrix") -> "PadicMatrix":
        return PadicMatrix.from_rows(self.ctx, exact.mat_mul(self.rows, other.rows))

    def inverse(self) -> "PadicMatrix":
        return PadicMatrix.from_rows(self.ctx, inverse_mod(self.rows, self.ctx.modulus))

    def charpoly(self) -> tuple:
        return pm_reduce(exact.charpoly(self.rows), self.ctx.modulus)


def padic_hnf(M, ctx: PadicContext):
    """Column reduction over Z/ell^N.

    Returns ``(H, T, pivots)`` with ``M T = H`` mod ell^N and ``T`` unimodular.
    Pivot columns come first, ordered by increasing valuation; pivot ``t``
    sits in row ``pivots[t][0]`` with value exactly ``ell**pivots[t][1]``
    and every later column vanishes in that row.  The remaining columns of
    ``H`` are zero mod ell^N.
    """
    ell, m = ctx.ell, ctx.modulus
    H = mat_mod(M, m)
    rows = len(H)
    ncols = len(H[0]) if rows else 0
    T = exact.identity(ncols)
    pivots = []
    used_rows = set()
    for t in range(ncols):
        best = None
        for i in range(rows):
            if i in used_rows:
                continue
            for j in range(t, ncols):
                x = H[i][j]
                if x:
                    v = valuation(x, ell)
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best and best[0] == 0:
                break
        if best is None:
            break
        v, i, j = best
        for X in (H, T):
            for row in X:
                row[t], row[j] = row[j], row[t]
        unit_inv = pow(H[i][t] // ell ** v, -1, m)
        for X in (H, T):
            for row in X:
                row[t] = row[t] * unit_inv % m
        for j2 in range(t + 1, ncols):
            x = H[i][j2]
            if x:
                q = x // ell ** v
                for X in (H, T):
                    for row in X:
                        row[j2] = (row[j2] - q * row[t]) % m
        used_rows.add(i)
        pivots.append((i, v))
    return H, T, pivots


def padic_smith(M, ctx: PadicContext):
    """Smith form over Z/ell^N: ``(vals, S, T)`` with ``S M T = diag(ell**vals)``.

    Valuations ``>= N`` are reported as ``N``.
    """
    ell, m, N = ctx.ell, ctx.modulus, ctx.N
    D = mat_mod(M, m)
    n_r = len(D)
    n_c = len(D[0]) if n_r else 0
    S, T = exact.identity(n_r), exact.identity(n_c)
    vals = []
    for t in range(min(n_r, n_c)):
        best = None
        for i in range(t, n_r):
            for j in range(t, n_c):
                if D[i][j]:
                    v = valuation(D[i][j], ell)
                    if best is None or v < best[0]:
                        best = (v, i, j)
        if best is None:
            vals += [N] * (min(n_r, n_c) - t)
            break
        v, i, j = best
        for X in (D, S):
            X[t], X[i] = X[i], X[t]
        for X in (D, T):
            for row in X:
                row[t], row[j] = row[j], row[t]
        inv = pow(D[t][t] // ell ** v, -1, m)
        for X in (D, S):
            X[t] = [x * inv % m for x in X[t]]
        pv = ell ** v
        for i2 in range(t + 1, n_r):
            if D[i2][t]:
                q = D[i2][t] // pv
                for X in (D, S):
                    X[i2] = [(a - q * b) % m for a, b in zip(X[i2], X[t])]
        for j2 in range(t + 1, n_c):
            if D[t][j2]:
                q = D[t][j2] // pv
                for X in (D, T):
                    for row in X:
                        row[j2] = (row[j2] - q * row[t]) % m
        vals.append(v)
    return vals, S, T


def intertwiners(A, U, ctx: PadicContext) -> List[list]:
    """Spanning set of {X : X A = U X mod ell^N} that is complete mod ell.

    Every solution reduces mod ell into the F_ell-span of the returned
    matrices; each returned matrix solves the equation exactly mod ell^N.
    """
    n = len(A)
    m = ctx.modulus
    # Unknown X[i][k] is variable i*n + k; equation (i, j) is (XA - UX)[i][j].
    L = [[0] * (n * n) for _ in range(n * n)]
    for i in range(n):
        for j in range(n):
            row = L[i * n + j]
            for k in range(n):
                row[i * n + k] += A[k][j]
                row[k * n + j] -= U[i][k]
    H, T, pivots = padic_hnf(L, ctx)
    out = []
    for c in range(len(pivots), n * n):
        vec = [T[r][c] % m for r in range(n * n)]
        out.append([vec[i * n:(i + 1) * n] for i in range(n)])
    return out


VERIFIED, REFUTED, UNKNOWN = "verified", "refuted", "unknown"


@dataclass(frozen=True)
class SimilarityResult:
    status: str
    conjugator: Optional[PadicMatrix] = None
    reason: str = ""

    def __bool__(self):
        return self.status == VERIFIED


def is_conjugator(P, A, U, ctx: PadicContext) -> bool:
    """True iff P is unimodular and P A P^-1 = U mod ell^N."""
    m = ctx.modulus
    if det_valuation(P, ctx) != 0:
        return False
    return mat_mul_mod(P, A, m) == mat_mul_mod(U, P, m)


def _combine(basis, coeffs, m):
    n = len(basis[0])
    X = [[0] * n for _ in range(n)]
    for c, B in zip(coeffs, basis):
        if c:
            for i in range(n):
                for j in range(n):
                    X[i][j] += c * B[i][j]
    return mat_mod(X, m)


def _elementary_divisor_mismatch(A, U, f, ctx) -> Optional[str]:
    for g, e in factor_mod_prime(f, ctx.ell):
        for k in range(1, e + 1):
            gk = exact.poly_pow(g, k)
            va = sorted(padic_smith(exact.mat_poly_eval(gk, A, ctx.modulus), ctx)[0])
            vu = sorted(padic_smith(exact.mat_poly_eval(gk, U, ctx.modulus), ctx)[0])
            if va != vu:
                return (f"elementary divisors of g(A) and g(U) differ for "
                        f"g = ({exact.poly_str(g)})^{k}: {va} vs {vu}")
    return None


def search_unit_intertwiner(A, U, ctx: PadicContext, hint=None, budget: int = 4096,
                            seed: int = 0) -> SimilarityResult:
    """Look for an invertible X with X A = U X mod ell^N.

    Exhaustive over the mod-ell span when it has at most ``budget`` points,
    so a negative answer is then a proof.  Otherwise samples and may give up.
    """
    ell, m = ctx.ell, ctx.modulus
    basis = intertwiners(A, U, ctx)
    K = len(basis)
    if K == 0:
        return SimilarityResult(REFUTED, reason="no nonzero intertwiner")
    if hint is not None:
        system = [[B[i][j] for B in basis] for i in range(len(A)) for j in range(len(A))]
        target = [hint[i][j] for i in range(len(A)) for j in range(len(A))]
        coeffs = solve_mod_prime(system, target, ell)
        if coeffs is not None:
            X = _combine(basis, coeffs, m)
            if is_conjugator(X, A, U, ctx):
                return SimilarityResult(VERIFIED, PadicMatrix.from_rows(ctx, X))
    basis_mod_ell = [mat_mod(B, ell) for B in basis]
    n = len(A)

    def unit_mod_ell(coeffs):
        return rank_mod_prime(_combine(basis_mod_ell, coeffs, ell), ell) == n

    if ell ** K <= budget:
        for coeffs in itertools.product(range(ell), repeat=K):
            if any(coeffs) and unit_mod_ell(coeffs):
                X = _combine(basis, coeffs, m)
                return SimilarityResult(VERIFIED, PadicMatrix.from_rows(ctx, X))
        return SimilarityResult(REFUTED, reason=f"no intertwiner is invertible mod {ell} "
                                                f"(exhaustive over {ell}^{K} residues)")
    rng = random.Random(seed)
    for _ in range(budget):
        coeffs = [rng.randrange(ell) for _ in range(K)]
        if unit_mod_ell(coeffs):
            X = _combine(basis, coeffs, m)
            return SimilarityResult(VERIFIED, PadicMatrix.from_rows(ctx, X))
    return SimilarityResult(UNKNOWN, reason=f"no invertible intertwiner among {budget} samples "
                                            f"of a {K}-dimensional space")


def similarity(A, U: PadicMatrix, f: Sequence[int], hint=None, budget: int = 4096,
               seed: int = 0) -> SimilarityResult:
    """Decide whether some Z_ell-basis carries the integer matrix A to U.

    ``f`` is the squarefree polynomial annihilating both operators (the
    defining polynomial of the order).  A verified result carries P with
    ``P A P^-1 = U`` mod ell^N.  UNKNOWN only occurs when ell | disc f.
    """
    from .local import LocalModule, lambda_basis

    ctx = U.ctx
    m = ctx.modulus
    A = [[int(x) for x in row] for row in A]
    if pm_reduce(exact.charpoly(A), m) != U.charpoly():
        raise PreconditionError("characteristic polynomials differ mod ell^N")
    Urows = U.rows
    fA_zero = not any(any(r) for r in exact.mat_poly_eval(f, A, m))
    fU_zero = not any(any(r) for r in exact.mat_poly_eval(f, Urows, m))
    if fA_zero != fU_zero:
        return SimilarityResult(REFUTED, reason="f annihilates only one of the two operators")
    d = exact.poly_disc(f)
    good = d % ctx.ell != 0
    if good and fA_zero:
        BA, multA = lambda_basis(LocalModule(ctx, PadicMatrix.from_rows(ctx, A)), f)
        BU, multU = lambda_basis(LocalModule(ctx, U), f)
        if multA != multU:
            return SimilarityResult(REFUTED, reason=f"component ranks differ: {multA} vs {multU}")
        P = mat_mul_mod(BU, inverse_mod(BA, m), m)
        assert is_conjugator(P, A, Urows, ctx)
        return SimilarityResult(VERIFIED, PadicMatrix.from_rows(ctx, P))
    if not fA_zero and good:
        raise PreconditionError("operators are not annihilated by f")
    reason = _elementary_divisor_mismatch(A, Urows, f, ctx)
    if reason:
        return SimilarityResult(REFUTED, reason=reason)
    result = search_unit_intertwiner(A, Urows, ctx, hint=hint, budget=budget, seed=seed)
    if result.status == UNKNOWN:
        # One retry with a doubled sampling budget.
        result = search_unit_intertwiner(A, Urows, ctx, budget=2 * budget, seed=seed + 1)
    return result
