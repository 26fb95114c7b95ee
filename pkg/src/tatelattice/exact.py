"""Exact integer/rational polynomial and matrix arithmetic.

Polynomials are dense coefficient sequences, lowest degree first.  Matrices
are lists of rows holding ``int`` or ``fractions.Fraction`` entries.  Every
routine returns fresh lists and never mutates its arguments.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Sequence, Tuple

Matrix = List[List]
Poly = Tuple[int, ...]


class NotMonicError(ValueError):
    pass


# ---------------------------------------------------------------- polynomials

def poly_trim(f: Sequence) -> tuple:
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return tuple(f)


def poly_degree(f: Sequence) -> int:
    """Degree of ``f``; the zero polynomial has degree -1."""
    return len(poly_trim(f)) - 1


def is_monic(f: Sequence) -> bool:
    f = poly_trim(f)
    return bool(f) and f[-1] == 1


def poly_add(f: Sequence, g: Sequence) -> tuple:
    n = max(len(f), len(g))
    return poly_trim([(f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0)
                      for i in range(n)])


def poly_sub(f: Sequence, g: Sequence) -> tuple:
    return poly_add(f, [-c for c in g])


def poly_mul(f: Sequence, g: Sequence) -> tuple:
    if not f or not g:
        return ()
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return poly_trim(out)


def poly_prod(polys) -> tuple:
    out: tuple = (1,)
    for f in polys:
        out = poly_mul(out, f)
    return out


def poly_pow(f: Sequence, e: int) -> tuple:
    out: tuple = (1,)
    for _ in range(e):
        out = poly_mul(out, f)
    return out


def poly_derivative(f: Sequence) -> tuple:
    return poly_trim([i * f[i] for i in range(1, len(f))])


def poly_divmod(f: Sequence, g: Sequence) -> Tuple[tuple, tuple]:
    """Division with remainder.

    Exact over the integers when ``g`` is monic; otherwise coefficients
    become Fractions.
    """
    f = list(poly_trim(f))
    g = poly_trim(g)
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    dg, lc = len(g) - 1, g[-1]
    q = [0] * max(len(f) - dg, 0)
    while len(f) - 1 >= dg and f:
        c = f[-1] if lc == 1 else Fraction(f[-1], 1) / lc
        shift = len(f) - 1 - dg
        q[shift] = c
        for i, b in enumerate(g):
            f[shift + i] -= c * b
        f = list(poly_trim(f))
    return poly_trim(q), poly_trim(f)


def poly_eval(f: Sequence, x):
    acc = 0
    for c in reversed(f):
        acc = acc * x + c
    return acc


def resultant(f: Sequence, g: Sequence):
    """Res(f, g) by the Euclidean remainder sequence over Q."""
    f, g = poly_trim(f), poly_trim(g)
    if not f or not g:
        return 0
    sign = 1
    acc = Fraction(1)
    while True:
        m, n = len(f) - 1, len(g) - 1
        if n == 0:
            acc *= Fraction(g[0]) ** m
            break
        _, r = poly_divmod(f, g)
        if not r:
            return 0
        if (m * n) % 2:
            sign = -sign
        acc *= Fraction(g[-1]) ** (m - (len(r) - 1))
        f, g = g, r
    out = sign * acc
    return int(out) if out.denominator == 1 else out


def poly_disc(f: Sequence) -> int:
    """Discriminant of a monic integer polynomial, (-1)^(d(d-1)/2) Res(f, f')."""
    f = poly_trim(f)
    if not is_monic(f):
        raise NotMonicError(f"polynomial {f} is not monic")
    d = len(f) - 1
    if d < 1:
        raise ValueError("discriminant needs degree >= 1")
    if d == 1:
        return 1
    r = resultant(f, poly_derivative(f))
    return (-1) ** (d * (d - 1) // 2) * r


def poly_gcd_q(f: Sequence, g: Sequence) -> tuple:
    """Monic gcd over Q."""
    f, g = poly_trim(f), poly_trim(g)
    while g:
        _, r = poly_divmod(f, g)
        f, g = g, r
    if not f:
        return ()
    lc = Fraction(f[-1])
    out = [Fraction(c) / lc for c in f]
    return tuple(int(c) if c.denominator == 1 else c for c in out)


def is_squarefree(f: Sequence) -> bool:
    return poly_degree(poly_gcd_q(f, poly_derivative(f))) == 0


def poly_str(f: Sequence, var: str = "x") -> str:
    terms = []
    for i in range(len(f) - 1, -1, -1):
        c = f[i]
        if c == 0:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if mono and c == 1:
            s = mono
        elif mono and c == -1:
            s = "-" + mono
        else:
            s = f"{c}{'*' + mono if mono else ''}"
        terms.append(s)
    if not terms:
        return "0"
    return " + ".join(terms).replace("+ -", "- ")


# ------------------------------------------------------------------- matrices

def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def zeros(m: int, n: int) -> Matrix:
    return [[0] * n for _ in range(m)]


def copy_matrix(M) -> Matrix:
    return [list(row) for row in M]


def transpose(M) -> Matrix:
    return [list(col) for col in zip(*M)] if M else []


def mat_mul(A, B) -> Matrix:
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def mat_vec(A, v) -> list:
    return [sum(a * b for a, b in zip(row, v)) for row in A]


def mat_add(A, B) -> Matrix:
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A, B) -> Matrix:
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_scale(c, A) -> Matrix:
    return [[c * a for a in row] for row in A]


def columns(M) -> List[list]:
    return transpose(M)


def from_columns(cols) -> Matrix:
    return transpose(cols)


def block_diag(*blocks) -> Matrix:
    n = sum(len(b) for b in blocks)
    out = zeros(n, n)
    k = 0
    for b in blocks:
        for i, row in enumerate(b):
            out[k + i][k:k + len(row)] = list(row)
        k += len(b)
    return out


def is_integral(M) -> bool:
    return all(Fraction(x).denominator == 1 for row in M for x in row)


def to_int(M) -> Matrix:
    if not is_integral(M):
        raise ValueError("matrix has non-integral entries")
    return [[int(x) for x in row] for row in M]


def common_denominator(M) -> int:
    d = 1
    for row in M:
        for x in row:
            q = Fraction(x).denominator
            d = d * q // gcd(d, q)
    return d


def companion(f: Sequence) -> Matrix:
    """Matrix of multiplication by x on Z[x]/(f) in the basis 1, x, ..., x^(d-1)."""
    f = poly_trim(f)
    if not is_monic(f):
        raise NotMonicError(f"polynomial {f} is not monic")
    d = len(f) - 1
    C = zeros(d, d)
    for i in range(1, d):
        C[i][i - 1] = 1
    for i in range(d):
        C[i][d - 1] = -f[i]
    return C


def block_companion(blocks) -> Matrix:
    """Direct sum over ``(f, m)`` pairs of ``m`` copies of companion(f)."""
    return block_diag(*[companion(f) for f, m in blocks for _ in range(m)])


def mat_poly_eval(f: Sequence, M, modulus: int = 0) -> Matrix:
    """f(M) by Horner; entries reduced mod ``modulus`` when it is nonzero."""
    n = len(M)
    acc = zeros(n, n)
    for c in reversed(poly_trim(f)):
        acc = mat_mul(acc, M)
        for i in range(n):
            acc[i][i] += c
        if modulus:
            acc = [[x % modulus for x in row] for row in acc]
    return acc


def det(M):
    """Determinant by fraction-free Bareiss elimination."""
    A = copy_matrix(M)
    n = len(A)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = A[i][j] * A[k][k] - A[i][k] * A[k][j]
                A[i][j] = num // prev if isinstance(num, int) and isinstance(prev, int) else num / prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def inverse(M) -> Matrix:
    """Inverse over Q by Gauss-Jordan elimination."""
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(M)]
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("matrix is singular")
        A[c], A[piv] = A[piv], A[c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                t = A[r][c]
                A[r] = [x - t * y for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


def rank(M) -> int:
    A = [[Fraction(x) for x in row] for row in M]
    r = 0
    cols = len(A[0]) if A else 0
    for c in range(cols):
        piv = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        for i in range(r + 1, len(A)):
            if A[i][c] != 0:
                t = A[i][c] / A[r][c]
                A[i] = [x - t * y for x, y in zip(A[i], A[r])]
        r += 1
    return r


def charpoly(M) -> tuple:
    """Characteristic polynomial det(xI - M), low-to-high coefficients.

    Berkowitz's algorithm: division free, so integer input stays integral.
    """
    n = len(M)
    if n == 0:
        return (1,)
    # Build the Toeplitz-vector product from the bottom-right corner outwards.
    vect = [1, -M[n - 1][n - 1]]
    for r in range(n - 2, -1, -1):
        size = n - r
        # R: row r to the right of the diagonal; C: column r below the diagonal.
        R = [M[r][j] for j in range(r + 1, n)]
        C = [M[i][r] for i in range(r + 1, n)]
        S = [row[r + 1:] for row in M[r + 1:]]
        # Column of the Toeplitz matrix: 1, -a, -R C, -R S C, -R S^2 C, ...
        col = [1, -M[r][r]]
        v = C
        for _ in range(size - 1):
            col.append(-sum(a * b for a, b in zip(R, v)))
            v = mat_vec(S, v)
        new = []
        for i in range(size + 1):
            new.append(sum(col[i - j] * vect[j] for j in range(min(i, size - 1) + 1)))
        vect = new
    return tuple(reversed(vect))


def xgcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


# ------------------------------------------------------------- normal forms

def _col_combine(M, j, k, a, b, c, d):
    """Replace columns (j, k) by (a*col_j + b*col_k, c*col_j + d*col_k)."""
    for row in M:
        x, y = row[j], row[k]
        row[j], row[k] = a * x + b * y, c * x + d * y


def hnf(M) -> Tuple[Matrix, Matrix]:
    """Column Hermite normal form.

    Returns ``(H, U)`` with ``H = M U``, ``U`` unimodular.  ``H`` is upper
    echelon with its zero columns first; each pivot is positive and the
    entries to its right in the pivot row lie in ``[0, pivot)``.
    """
    H = copy_matrix(M)
    m = len(H)
    n = len(H[0]) if m else 0
    U = identity(n)
    k = n - 1
    for i in range(m - 1, -1, -1):
        if k < 0:
            break
        for j in range(k - 1, -1, -1):
            b = H[i][j]
            if b == 0:
                continue
            a = H[i][k]
            g, x, y = xgcd(a, b)
            # new_k = x*col_k + y*col_j ; new_j = -(b/g)*col_k + (a/g)*col_j
            for T in (H, U):
                for row in T:
                    ck, cj = row[k], row[j]
                    row[k], row[j] = x * ck + y * cj, -(b // g) * ck + (a // g) * cj
        if H[i][k] == 0:
            continue
        if H[i][k] < 0:
            for T in (H, U):
                for row in T:
                    row[k] = -row[k]
        p = H[i][k]
        for j in range(k + 1, n):
            q = H[i][j] // p
            if q:
                for T in (H, U):
                    for row in T:
                        row[j] -= q * row[k]
        k -= 1
    return H, U


def snf(M) -> Tuple[Matrix, Matrix, Matrix]:
    """Smith normal form: ``(D, U, V)`` with ``U M V = D``, ``U``, ``V`` unimodular."""
    D = copy_matrix(M)
    m = len(D)
    n = len(D[0]) if m else 0
    U, V = identity(m), identity(n)

    def swap_rows(i, j):
        for T in (D, U):
            T[i], T[j] = T[j], T[i]

    def swap_cols(i, j):
        for T in (D, V):
            for row in T:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, c):
        for T in (D, U):
            T[dst] = [a + c * b for a, b in zip(T[dst], T[src])]

    def add_col(dst, src, c):
        for T in (D, V):
            for row in T:
                row[dst] += c * row[src]

    for t in range(min(m, n)):
        while True:
            entries = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
            if not entries:
                break
            _, i, j = min(entries)
            swap_rows(t, i)
            swap_cols(t, j)
            p = D[t][t]
            done = True
            for i in range(t + 1, m):
                q = D[i][t] // p
                if q:
                    add_row(i, t, -q)
                if D[i][t]:
                    done = False
            for j in range(t + 1, n):
                q = D[t][j] // p
                if q:
                    add_col(j, t, -q)
                if D[t][j]:
                    done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if D[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if t < m and t < n and D[t][t] < 0:
            for T in (D, U):
                T[t] = [-x for x in T[t]]
    return D, U, V


# ------------------------------------------------------------------ lattices

def lattice_basis(gens) -> Matrix:
    """HNF basis (as columns) of the lattice spanned by the columns of ``gens``.

    Rational input is scaled to a common denominator and back.
    """
    den = common_denominator(gens)
    G = [[int(Fraction(x) * den) for x in row] for row in gens]
    H, _ = hnf(G)
    keep = [j for j in range(len(H[0])) if any(row[j] for row in H)]
    B = [[row[j] for j in keep] for row in H]
    if den == 1:
        return B
    return [[Fraction(x, den) for x in row] for row in B]


def hstack(*Ms) -> Matrix:
    return [sum((list(M[i]) for M in Ms), []) for i in range(len(Ms[0]))]


def in_lattice(basis, v) -> bool:
    """Exact membership of the column vector ``v`` in the lattice spanned by ``basis``."""
    B = [[Fraction(x) for x in row] for row in basis]
    r = rank(B)
    aug = hstack(B, [[Fraction(x)] for x in v])
    if rank(aug) != r:
        return False
    # B has full column rank here; solve via normal equations on a pivot subset.
    Bt = transpose(B)
    G = mat_mul(Bt, B)
    rhs = mat_vec(Bt, [Fraction(x) for x in v])
    coeffs = mat_vec(inverse(G), rhs)
    return all(c.denominator == 1 for c in coeffs)
