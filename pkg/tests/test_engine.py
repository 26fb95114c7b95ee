import random
from fractions import Fraction

import pytest

from tatelattice import exact
from tatelattice.engine import (
    Block,
    Certificate,
    GlobalLattice,
    InvalidInstanceError,
    LocalTarget,
    ProblemInstance,
    SolveUnknown,
    glue_lattice,
    intersect_with_integral_structure,
    operator_span,
    reduce_blocks,
    solve,
    verify_certificate,
)
from tatelattice.instances import disc20_instance, hidden_instance
from tatelattice.padic import PadicContext, PadicMatrix, mat_mul_mod
from oracles import matrix_form

SQRT_M5 = [[0, -5], [1, 0]]


def test_glue_ideal_class():
    # Z[sqrt(-5)] replaced at 3 by the ideal (3, 1 + sqrt(-5)).
    M0 = GlobalLattice(exact.identity(2), SQRT_M5)
    ctx = PadicContext(3, 24)
    M = glue_lattice(M0, {3: LocalTarget(ctx, [[3, 1], [0, 1]])})
    assert M.basis == [[3, 1], [0, 1]]
    assert M.operator == [[-1, -2], [3, 1]]
    assert matrix_form(M.operator) == (2, 2, 3)


def test_glue_two_primes():
    M0 = GlobalLattice(exact.identity(2), SQRT_M5)
    targets = {3: LocalTarget(PadicContext(3, 20), [[3, 1], [0, 1]]),
               7: LocalTarget(PadicContext(7, 20), [[7, 3], [0, 1]])}
    M = glue_lattice(M0, targets)
    assert exact.det(M.basis) == 21
    assert M.is_stable


def test_glue_with_scale_gives_denominators():
    M0 = GlobalLattice(exact.identity(2), SQRT_M5)
    M = glue_lattice(M0, {3: LocalTarget(PadicContext(3, 10), exact.identity(2), scale=1)})
    assert M.basis == [[Fraction(1, 3), 0], [0, Fraction(1, 3)]]


def test_glue_without_targets_is_identity():
    M0 = GlobalLattice(exact.identity(2), SQRT_M5)
    assert glue_lattice(M0, {}).basis == exact.identity(2)


def test_operator_span_is_stable_and_idempotent():
    R = exact.companion((5, 0, 1))
    M = GlobalLattice.from_basis([[1, 0], [0, 3]], R)
    assert not M.is_stable
    S = operator_span(M, 2)
    assert S.is_stable
    assert operator_span(S, 2).basis == S.basis
    assert S.basis == exact.identity(2)


def test_integral_structure_rescales_away_from_p():
    M = GlobalLattice(exact.identity(2), SQRT_M5)
    N = intersect_with_integral_structure(M, 2)
    assert exact.det(N.basis) == Fraction(1, 2)
    assert intersect_with_integral_structure(M, 0) is M


def _two_block_instance(seed=0):
    rng = random.Random(seed)
    blocks = (Block(1, (5, 0, 1)), Block(2, (-2, 0, 1)))
    return hidden_instance(rng, blocks, (3, 11))


def test_reduce_blocks_splits_components():
    inst, _ = _two_block_instance()
    subs, recipe = reduce_blocks(inst)
    assert [s.n for s in subs] == [2, 4]
    assert sorted(recipe) == [3, 11]
    for ell, C in recipe.items():
        m = inst.context(ell).modulus
        W = exact.block_diag(*[s.locals[ell].rows for s in subs])
        assert mat_mul_mod(inst.locals[ell].rows, C, m) == mat_mul_mod(C, W, m)


def test_reduce_blocks_single_block_is_trivial():
    inst = disc20_instance()
    subs, recipe = reduce_blocks(inst)
    assert subs == [inst] and recipe[3] == exact.identity(2)


def test_solve_disc20():
    inst = disc20_instance()
    cert = solve(inst)
    assert cert.status == "verified"
    assert cert.A == [[0, -5], [1, 0]]
    assert verify_certificate(inst, cert).ok


def test_solve_two_blocks():
    inst, _ = _two_block_instance(3)
    cert = solve(inst)
    assert verify_certificate(inst, cert).ok


def test_solve_bad_prime_non_free():
    # Z[i] with u = 2i is not free over Z[2i] at 2; the solver must find it.
    ctx = PadicContext(2, 24)
    U = PadicMatrix.from_rows(ctx, [[0, (-2) % ctx.modulus], [2, 0]])
    inst = ProblemInstance(2, 0, (Block(1, (4, 0, 1)),), (2,), 24, {2: U}, g=1)
    cert = solve(inst)
    assert cert.A == [[0, -2], [2, 0]]
    assert verify_certificate(inst, cert).ok


def test_solve_with_excluded_characteristic():
    ctx = PadicContext(2, 24)
    U = PadicMatrix.from_rows(ctx, [[0, (-2) % ctx.modulus], [2, 0]])
    inst = ProblemInstance(2, 5, (Block(1, (4, 0, 1)),), (2,), 24, {2: U}, g=1)
    cert = solve(inst)
    assert verify_certificate(inst, cert).ok


@pytest.mark.parametrize("seed", range(12))
def test_solve_random_hidden_lattices(seed):
    rng = random.Random(seed)
    f = rng.choice([(5, 0, 1), (4, 0, 1), (1, 1, 0, 1), (-3, 0, 1), (9, 0, 1)])
    S = tuple(sorted(rng.sample([2, 3, 5, 7], 2)))
    p = rng.choice([0, 0, 11])
    inst, M = hidden_instance(rng, (Block(1, f, rng.randint(1, 2)),), S, p=p)
    try:
        cert = solve(inst, seed=seed)
    except SolveUnknown:
        pytest.skip("solver reported Unknown")
    assert verify_certificate(inst, cert).ok


def test_invalid_instances():
    inst = disc20_instance()
    bad = ProblemInstance(4, 0, inst.blocks, inst.S, 24, inst.locals, g=2)
    with pytest.raises(InvalidInstanceError):
        solve(bad)
    ctx = PadicContext(3, 24)
    wrong = ProblemInstance(2, 0, inst.blocks, (3,), 24,
                            {3: PadicMatrix.from_rows(ctx, [[0, 7], [1, 0]])})
    with pytest.raises(InvalidInstanceError):
        solve(wrong)
    with pytest.raises(InvalidInstanceError):
        solve(ProblemInstance(2, 3, inst.blocks, (3,), 24, inst.locals))
    with pytest.raises(InvalidInstanceError):
        solve(ProblemInstance(2, 0, (Block(1, (1, 2, 1)),), (3,), 24, inst.locals))


class TestTamper:
    @pytest.fixture
    def solved(self):
        inst, _ = _two_block_instance(5)
        return inst, solve(inst)

    def _copy(self, cert, **kw):
        fields = dict(A=exact.copy_matrix(cert.A), conjugators=dict(cert.conjugators),
                      precision=cert.precision, basis=exact.copy_matrix(cert.basis))
        fields.update(kw)
        return Certificate(**fields)

    def test_flip_entry_of_A(self, solved):
        inst, cert = solved
        A = exact.copy_matrix(cert.A)
        A[0][0] += 1
        assert not verify_certificate(inst, self._copy(cert, A=A)).ok

    def test_flip_entry_of_conjugator(self, solved):
        inst, cert = solved
        P = cert.conjugators[3]
        rows = [list(r) for r in P.rows]
        rows[0][1] = (rows[0][1] + 3) % P.ctx.modulus
        conj = dict(cert.conjugators)
        conj[3] = PadicMatrix.from_rows(P.ctx, rows)
        v = verify_certificate(inst, self._copy(cert, conjugators=conj))
        assert not v.ok

    def test_missing_conjugator(self, solved):
        inst, cert = solved
        conj = {11: cert.conjugators[11]}
        v = verify_certificate(inst, self._copy(cert, conjugators=conj))
        assert not v.ok and "missing" in v.reason

    def test_insufficient_precision(self, solved):
        inst, cert = solved
        v = verify_certificate(inst, self._copy(cert, precision=inst.precision - 1))
        assert not v.ok and "insufficient precision" in v.reason

    def test_stray_prime_in_basis(self, solved):
        inst, cert = solved
        basis = exact.mat_scale(13, cert.basis)
        v = verify_certificate(inst, self._copy(cert, basis=basis))
        assert not v.ok and "13" in v.reason

    def test_untampered_passes(self, solved):
        inst, cert = solved
        assert verify_certificate(inst, self._copy(cert)).ok


def test_blocks_sharing_a_factor_fall_back_to_direct_solve():
    # x^2 + 5 and x^2 - 2 agree mod 7, so components cannot be split there.
    rng = random.Random(1)
    blocks = (Block(1, (5, 0, 1)), Block(1, (-2, 0, 1)))
    inst, _ = hidden_instance(rng, blocks, (7,))
    cert = solve(inst)
    assert verify_certificate(inst, cert).ok


def test_too_little_precision_is_explicit_unknown():
    ctx = PadicContext(2, 1)
    U = PadicMatrix.from_rows(ctx, [[0, 0], [0, 0]])
    inst = ProblemInstance(2, 0, (Block(1, (4, 0, 1)),), (2,), 1, {2: U})
    with pytest.raises(SolveUnknown) as info:
        solve(inst)
    assert info.value.ell == 2
