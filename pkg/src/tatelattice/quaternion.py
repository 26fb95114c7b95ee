"""Quaternion algebras, Hilbert symbols, and the refuter for R-stable lattices.

The refuter works in a finite surrogate of the rational Tate module of
Y x Y, where End(Y) tensor Q is a definite quaternion algebra B: at each
prime ell of a finite set S the module is K_ell^4 with B acting on each
copy of K_ell^2 through an explicit splitting over an imaginary quadratic
field K_ell = Q(sqrt m) in which ell splits.  Keeping the splitting
algebraic makes membership in a Q-lattice an exact question.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Dict, List, Optional, Sequence, Tuple, Union

from sympy import factorint

from . import exact
from .padic import PadicContext, rational_mod

INF = "inf"
Place = Union[int, str]


# ------------------------------------------------------------ Hilbert symbols

def _square_class_int(x) -> int:
    """An integer in the same square class as the nonzero rational x."""
    q = Fraction(x)
    if q == 0:
        raise ValueError("Hilbert symbol needs nonzero arguments")
    return q.numerator * q.denominator


def _split_power(x: int, p: int) -> Tuple[int, int]:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v, x


def _legendre(u: int, p: int) -> int:
    r = pow(u % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


_SQ64 = {z * z % 64 for z in range(64)}
_ODD_SQ64 = {z * z % 64 for z in range(1, 64, 2)}


def _hilbert_2(a: int, b: int) -> int:
    # Depth 2^6 with primitive solutions suffices once the 2-adic
    # valuations are reduced to 0 or 1.
    va, ua = _split_power(a, 2)
    vb, ub = _split_power(b, 2)
    a = 2 ** (va % 2) * ua % 64
    b = 2 ** (vb % 2) * ub % 64
    for x in range(64):
        ax = a * x * x
        for y in range(64):
            t = (ax + b * y * y) % 64
            if (x | y) & 1:
                if t in _SQ64:
                    return 1
            elif t in _ODD_SQ64:
                return 1
    return -1


def hilbert_symbol(a, b, v: Place) -> int:
    """(a, b)_v: +1 iff z^2 = a x^2 + b y^2 has a nonzero solution over Q_v."""
    a, b = _square_class_int(a), _square_class_int(b)
    if v == INF:
        return -1 if a < 0 and b < 0 else 1
    p = int(v)
    if p == 2:
        return _hilbert_2(a, b)
    alpha, u = _split_power(a, p)
    beta, w = _split_power(b, p)
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    return sign * _legendre(u, p) ** beta * _legendre(w, p) ** alpha


def relevant_places(a, b) -> List[Place]:
    """Infinity and the primes dividing 2ab; all other symbols are +1."""
    primes = {2}
    for x in (Fraction(a), Fraction(b)):
        primes |= set(factorint(abs(x.numerator))) | set(factorint(x.denominator))
    primes.discard(1)
    return [INF] + sorted(primes)


def ramified_places(a, b) -> List[Place]:
    return [v for v in relevant_places(a, b) if hilbert_symbol(a, b, v) == -1]


# ----------------------------------------------------------- the algebra

@dataclass(frozen=True)
class QuaternionAlgebra:
    """B = (a, b): i^2 = a, j^2 = b, ij = -ji = k."""

    a: Fraction
    b: Fraction

    def __post_init__(self):
        if Fraction(self.a) == 0 or Fraction(self.b) == 0:
            raise ValueError("quaternion algebra needs a, b nonzero")
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    def mul(self, x: Sequence, y: Sequence) -> tuple:
        a, b = self.a, self.b
        x0, x1, x2, x3 = x
        y0, y1, y2, y3 = y
        return (
            x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
            x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
            x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        )

    def pure_square(self, x: Sequence) -> Fraction:
        """x^2 for a pure quaternion x = x1 i + x2 j + x3 k."""
        _, x1, x2, x3 = x
        return self.a * x1 * x1 + self.b * x2 * x2 - self.a * self.b * x3 * x3

    def reduced_norm(self, x: Sequence) -> Fraction:
        x0, x1, x2, x3 = (Fraction(t) for t in x)
        return x0 * x0 - self.a * x1 * x1 - self.b * x2 * x2 + self.a * self.b * x3 * x3


ONE, I, J, K = (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)


def is_division(B: QuaternionAlgebra) -> Tuple[bool, List[Place]]:
    """Whether B is a division algebra, with its full set of ramified places.

    A division algebra has no algebra map to 2x2 rational matrices, so it
    cannot act on a 2-dimensional Q-vector space.
    """
    ram = ramified_places(B.a, B.b)
    return bool(ram), ram


# --------------------------------------------------- quadratic field arithmetic

@dataclass(frozen=True)
class QuadElt:
    """r + s*sqrt(m) with rational r, s; m = 1 encodes Q itself."""

    r: Fraction
    s: Fraction
    m: int

    @classmethod
    def of(cls, r, s, m):
        r, s = Fraction(r), Fraction(s)
        if m == 1:
            return cls(r + s, Fraction(0), 1)
        return cls(r, s, m)

    def __add__(self, o):
        return QuadElt.of(self.r + o.r, self.s + o.s, self.m)

    def __sub__(self, o):
        return QuadElt.of(self.r - o.r, self.s - o.s, self.m)

    def __mul__(self, o):
        if not isinstance(o, QuadElt):
            return QuadElt.of(self.r * o, self.s * o, self.m)
        return QuadElt.of(self.r * o.r + self.m * self.s * o.s, self.r * o.s + self.s * o.r, self.m)

    __rmul__ = __mul__

    @property
    def is_rational(self) -> bool:
        return self.s == 0

    def embed(self, sqrt_m: int, modulus: int) -> int:
        return (rational_mod(self.r, modulus) + rational_mod(self.s, modulus) * sqrt_m) % modulus


def _qmat_mul(A, B):
    m = A[0][0].m
    zero = QuadElt.of(0, 0, m)
    out = []
    for row in A:
        new = []
        for col in zip(*B):
            acc = zero
            for x, y in zip(row, col):
                acc = acc + x * y
            new.append(acc)
        out.append(new)
    return out


def _qvec(M, v):
    m = M[0][0].m
    out = []
    for row in M:
        acc = QuadElt.of(0, 0, m)
        for x, y in zip(row, v):
            acc = acc + x * y
        out.append(acc)
    return out


def sqrt_mod_prime_power(m: int, ctx: PadicContext) -> int:
    """Hensel-lift a square root of m (a unit square mod odd ell) to ell^N."""
    ell, mod = ctx.ell, ctx.modulus
    if ell == 2 or m % ell == 0:
        raise ValueError("need an odd prime not dividing m")
    root = next((x for x in range(1, ell) if (x * x - m) % ell == 0), None)
    if root is None:
        raise ValueError(f"{m} is not a square mod {ell}")
    pk = ell
    while pk < mod:
        pk = min(pk * pk, mod)
        root = (root - (root * root - m) * pow(2 * root, -1, pk)) % pk
    return root


@dataclass
class Splitting:
    """Algebra map B -> M_2(Q(sqrt m)) and an embedding sqrt m -> Z_ell."""

    m: int
    images: Dict[str, list]  # "i", "j" -> 2x2 matrices of QuadElt
    ctx: Optional[PadicContext] = None
    sqrt_m: Optional[int] = None

    def rho(self, x: Sequence) -> list:
        """Image of the quaternion x0 + x1 i + x2 j + x3 k."""
        m = self.m
        Ii, Jj = self.images["i"], self.images["j"]
        Kk = _qmat_mul(Ii, Jj)
        out = []
        for r in range(2):
            row = []
            for c in range(2):
                e = QuadElt.of(Fraction(x[0]) * (r == c), 0, m)
                e = e + Ii[r][c] * Fraction(x[1]) + Jj[r][c] * Fraction(x[2]) + Kk[r][c] * Fraction(x[3])
                row.append(e)
            out.append(row)
        return out

    def local_images(self) -> Tuple[list, list]:
        mod = self.ctx.modulus
        emb = lambda M: [[e.embed(self.sqrt_m, mod) for e in row] for row in M]
        return emb(self.images["i"]), emb(self.images["j"])


def _is_rational_square(q: Fraction) -> bool:
    q = Fraction(q)
    return q > 0 and isqrt(q.numerator) ** 2 == q.numerator and isqrt(q.denominator) ** 2 == q.denominator


def _sqrt_q(q: Fraction) -> Fraction:
    q = Fraction(q)
    return Fraction(isqrt(q.numerator), isqrt(q.denominator))


def _split_with(B: QuaternionAlgebra, x: tuple, y: tuple) -> Optional[Splitting]:
    """Splitting over Q(sqrt(x^2)) with x -> diag(t, -t), y -> [[0, y^2], [1, 0]]."""
    mq = B.pure_square(x)
    c = B.pure_square(y)
    if mq == 0 or c == 0:
        return None
    if _is_rational_square(mq):
        r = _sqrt_q(mq)
        x = tuple(Fraction(t) / r for t in x)
        m, t = 1, QuadElt.of(1, 0, 1)
    else:
        if mq.denominator != 1:
            x = tuple(Fraction(t) * mq.denominator for t in x)
            mq = B.pure_square(x)
        m, t = int(mq), QuadElt.of(0, 1, int(mq))
    zero, one = QuadElt.of(0, 0, m), QuadElt.of(1, 0, m)
    X = [[t, zero], [zero, t * -1]]
    Y = [[zero, QuadElt.of(c, 0, m)], [one, zero]]
    XY = _qmat_mul(X, Y)
    xy = B.mul(x, y)
    # Columns: coordinates of 1, x, y, xy in the basis 1, i, j, k.
    basis = exact.transpose([list(map(Fraction, v)) for v in (ONE, x, y, xy)])
    try:
        inv = exact.inverse(basis)
    except ZeroDivisionError:
        return None
    I2 = [[one, zero], [zero, one]]
    images = {}
    for name, e in (("i", I), ("j", J)):
        coords = exact.mat_vec(inv, e)
        M = [[I2[r][s] * coords[0] + X[r][s] * coords[1] + Y[r][s] * coords[2] + XY[r][s] * coords[3]
              for s in range(2)] for r in range(2)]
        images[name] = M
    return Splitting(m, images)


def _orthogonal_pure(B: QuaternionAlgebra, x: tuple) -> List[tuple]:
    """Pure quaternions y anticommuting with x (integer kernel vectors)."""
    w = (B.a * x[1], B.b * x[2], -B.a * B.b * x[3])
    out = []
    for y in itertools.product(range(-3, 4), repeat=3):
        if any(y) and sum(wi * yi for wi, yi in zip(w, y)) == 0:
            out.append((0,) + y)
    out.sort(key=lambda v: (sum(map(abs, v)), v))
    return out


def split_quaternion_locally(B: QuaternionAlgebra, ctx: PadicContext) -> Splitting:
    """Splitting of B over Q(sqrt m) with m a nonzero square mod ell.

    The returned images of i and j, embedded mod ell^N through
    :meth:`Splitting.local_images`, satisfy the defining relations there.
    """
    ell = ctx.ell
    if hilbert_symbol(B.a, B.b, ell) == -1:
        raise ValueError(f"B = ({B.a}, {B.b}) is ramified at {ell}")
    if ell == 2:
        raise ValueError("local splittings are only built at odd primes")
    cands = [v for v in itertools.product(range(-3, 4), repeat=3) if any(v)]
    cands.sort(key=lambda v: (sum(map(abs, v)), v))
    for v in cands:
        x = (0,) + v
        mq = B.pure_square(x)
        if mq == 0:
            continue
        if not _is_rational_square(mq):
            mi = mq.numerator * mq.denominator
            if mi % ell == 0 or pow(mi % ell, (ell - 1) // 2, ell) != 1:
                continue
        for y in _orthogonal_pure(B, x):
            sp = _split_with(B, x, y)
            if sp is None:
                continue
            try:
                sp.ctx = ctx
                sp.sqrt_m = 1 if sp.m == 1 else sqrt_mod_prime_power(sp.m, ctx)
                sp.local_images()
            except ValueError:
                continue
            return sp
    raise ValueError(f"no small splitting of B found at {ell}")


# ---------------------------------------------------------- the R-model

R_GENERATORS = {
    "(1,0)": (1, (0, 0, 0, 0)),
    "(0,1)": (0, ONE),
    "(0,i)": (0, I),
    "(0,j)": (0, J),
    "(0,k)": (0, K),
}


def r_mul(B: QuaternionAlgebra, x, y):
    """(a, b)(a', b') = (aa', ab' + a'b) in R = {[[a, b], [0, a]]}."""
    a, b = x
    a2, b2 = y
    return (a * a2, tuple(a * t2 + a2 * t for t, t2 in zip(b, b2)))


@dataclass
class SplitModel:
    """The surrogate of V(Y x Y) over the primes in S."""

    B: QuaternionAlgebra
    p: int
    splittings: Dict[int, Splitting]

    @property
    def S(self) -> List[int]:
        return sorted(self.splittings)

    def act(self, r, ell: int, v: Sequence) -> list:
        """(a, b) . (y1, y2) = (a y1, rho(b) y1 + a y2) on K_ell^4."""
        sp = self.splittings[ell]
        a, b = r
        vq = [x if isinstance(x, QuadElt) else QuadElt.of(x, 0, sp.m) for x in v]
        top = [vq[0] * Fraction(a), vq[1] * Fraction(a)]
        img = _qvec(sp.rho(b), vq[:2])
        bottom = [img[0] + vq[2] * Fraction(a), img[1] + vq[3] * Fraction(a)]
        return top + bottom


def make_model(B=(-1, -1), p: int = 2, S: Sequence[int] = (3, 5), N: int = 24) -> SplitModel:
    B = B if isinstance(B, QuaternionAlgebra) else QuaternionAlgebra(*B)
    division, _ = is_division(B)
    if not division:
        raise ValueError("the model needs a division quaternion algebra")
    return SplitModel(B, p, {ell: split_quaternion_locally(B, PadicContext(ell, N)) for ell in S})


Candidate = Dict[int, list]


def as_candidate(basis, model: SplitModel) -> Candidate:
    """Normalize a single rational basis (shared by all primes) or a per-prime dict."""
    if isinstance(basis, dict):
        return {ell: basis[ell] for ell in model.S}
    return {ell: basis for ell in model.S}


def membership(candidate: Candidate, model: SplitModel, w: Dict[int, list]) -> Tuple[bool, str]:
    """Is the vector with components w[ell] in the Q-lattice {(C_ell q)_ell : q in Q^4}?"""
    common = None
    for ell in model.S:
        C = candidate[ell]
        Cinv = exact.inverse(C)
        m = model.splittings[ell].m
        q = []
        for row in Cinv:
            acc = QuadElt.of(0, 0, m)
            for c, x in zip(row, w[ell]):
                acc = acc + x * Fraction(c)
            q.append(acc)
        if not all(x.is_rational for x in q):
            return False, f"coordinates at {ell} are irrational in Q(sqrt {m})"
        qr = [x.r for x in q]
        if common is None:
            common = (ell, qr)
        elif qr != common[1]:
            return False, f"rational coordinates at {common[0]} and {ell} disagree"
    return True, ""


@dataclass
class StabilityReport:
    stable: bool
    witness: Optional[Tuple[str, int, str]] = None  # (generator, basis index, reason)
    dim_W: int = 0
    image_dims: Dict[str, int] = field(default_factory=dict)


def w_dimension(candidate: Candidate, model: SplitModel) -> int:
    """dim_Q of V intersected with 0 x V(Y): q with top(C_ell q) = 0 at every ell."""
    rows = [row for ell in model.S for row in candidate[ell][:2]]
    return 4 - exact.rank(rows)


def check_R_stability(candidate, model: SplitModel, generators=None) -> StabilityReport:
    """Test a candidate Q-lattice against a finite generating set of R.

    Returns the first failing (generator, basis vector) as a witness.  The
    off-diagonal generators (0, b) map V onto a space of dimension
    4 - dim W, which must lie inside W for V to be stable.
    """
    cand = as_candidate(candidate, model)
    for C in cand.values():
        if exact.rank(C) != 4:
            raise ValueError("candidate basis is not of full rank")
    gens = generators or R_GENERATORS
    dim_W = w_dimension(cand, model)
    image_dims = {name: 4 - dim_W for name, (a, b) in gens.items()
                  if a == 0 and any(b)}
    for name, r in gens.items():
        for k in range(4):
            w = {ell: model.act(r, ell, [row[k] for row in cand[ell]]) for ell in model.S}
            ok, reason = membership(cand, model, w)
            if not ok:
                return StabilityReport(False, (name, k, reason), dim_W, image_dims)
    return StabilityReport(True, None, dim_W, image_dims)


def verify_witness(candidate, model: SplitModel, witness, generators=None) -> bool:
    """Recompute r.v for a witness and confirm it lies outside the candidate."""
    cand = as_candidate(candidate, model)
    gens = generators or R_GENERATORS
    name, k, _ = witness
    w = {ell: model.act(gens[name], ell, [row[k] for row in cand[ell]]) for ell in model.S}
    return not membership(cand, model, w)[0]


def random_candidate(model: SplitModel, rng: random.Random) -> Candidate:
    from .instances import random_unimodular
    return {ell: random_unimodular(4, rng) for ell in model.S}


def demo_counterexample(seed: int = 0, trials: int = 100, B=(-1, -1), p: int = 2,
                        S: Sequence[int] = (3, 5), N: int = 24) -> dict:
    """Sample candidate lattices and refute each with a checked witness."""
    model = make_model(B, p, S, N)
    rng = random.Random(seed)
    stable = 0
    witnesses = []
    dims = []
    for _ in range(trials):
        cand = random_candidate(model, rng)
        rep = check_R_stability(cand, model)
        dims.append(rep.dim_W)
        if rep.stable:
            stable += 1
            continue
        if not verify_witness(cand, model, rep.witness):
            raise AssertionError("witness failed re-verification")
        witnesses.append(rep.witness)
    return {
        "B": [str(model.B.a), str(model.B.b)],
        "p": p,
        "S": model.S,
        "trials": trials,
        "stable": stable,
        "witnesses": len(witnesses),
        "dim_W_counts": {d: dims.count(d) for d in sorted(set(dims))},
        "summary": f"{stable}/{trials} candidates stable; {len(witnesses)} witnesses emitted",
    }
