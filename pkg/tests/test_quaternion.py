import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tatelattice import exact
from tatelattice.padic import PadicContext, mat_mul_mod
from tatelattice.quaternion import (
    INF,
    QuaternionAlgebra,
    SplitModel,
    check_R_stability,
    demo_counterexample,
    hilbert_symbol,
    is_division,
    make_model,
    random_candidate,
    ramified_places,
    relevant_places,
    split_quaternion_locally,
    verify_witness,
)
from oracles import hilbert_2_formula, hilbert_inf, hilbert_odd_bruteforce

nonzero = st.integers(-60, 60).filter(lambda x: x != 0)


@given(nonzero, nonzero)
@settings(max_examples=150, deadline=None)
def test_hilbert_at_two_matches_formula(a, b):
    assert hilbert_symbol(a, b, 2) == hilbert_2_formula(a, b)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_hilbert_odd_matches_bruteforce(p):
    rng = random.Random(p)
    for _ in range(12):
        a = rng.choice([-1, 1]) * rng.randint(1, 40)
        b = rng.choice([-1, 1]) * rng.randint(1, 40)
        assert hilbert_symbol(a, b, p) == hilbert_odd_bruteforce(a, b, p), (a, b)


def test_hilbert_infinity():
    assert hilbert_symbol(-1, -1, INF) == -1
    assert hilbert_symbol(-1, 3, INF) == hilbert_inf(-1, 3) == 1


@given(nonzero, nonzero, nonzero)
@settings(max_examples=80, deadline=None)
def test_hilbert_bimultiplicative(a, b, c):
    for v in relevant_places(a, b * c) + relevant_places(a, b) + relevant_places(a, c):
        assert hilbert_symbol(a, b * c, v) == hilbert_symbol(a, b, v) * hilbert_symbol(a, c, v)


def test_reciprocity_100_random_pairs():
    rng = random.Random(0)
    for _ in range(100):
        a = Fraction(rng.choice([-1, 1]) * rng.randint(1, 500), rng.randint(1, 30))
        b = Fraction(rng.choice([-1, 1]) * rng.randint(1, 500), rng.randint(1, 30))
        prod = 1
        for v in relevant_places(a, b):
            prod *= hilbert_symbol(a, b, v)
        assert prod == 1
        assert len(ramified_places(a, b)) % 2 == 0


def test_hamilton_quaternions_ramify_at_two_and_infinity():
    division, ram = is_division(QuaternionAlgebra(-1, -1))
    assert division and ram == [INF, 2]
    assert is_division(QuaternionAlgebra(1, 1)) == (False, [])
    assert is_division(QuaternionAlgebra(-1, 3))[1] == [2, 3]


def test_splitting_refuses_ramified_prime():
    with pytest.raises(ValueError):
        split_quaternion_locally(QuaternionAlgebra(-1, 3), PadicContext(3, 10))


@pytest.mark.parametrize("B, ell", [((-1, -1), 3), ((-1, -1), 5), ((-1, -1), 7),
                                    ((-1, 3), 5), ((2, 5), 7), ((1, 1), 5)])
def test_local_splitting_relations(B, ell):
    alg = QuaternionAlgebra(*B)
    ctx = PadicContext(ell, 20)
    m = ctx.modulus
    Ii, Jj = split_quaternion_locally(alg, ctx).local_images()
    scal = lambda c: [[int(c) % m, 0], [0, int(c) % m]]
    assert mat_mul_mod(Ii, Ii, m) == scal(alg.a)
    assert mat_mul_mod(Jj, Jj, m) == scal(alg.b)
    IJ, JI = mat_mul_mod(Ii, Jj, m), mat_mul_mod(Jj, Ii, m)
    assert IJ == [[(-x) % m for x in row] for row in JI]


def test_split_algebra_uses_rational_matrices():
    ctx = PadicContext(5, 24)
    sp = split_quaternion_locally(QuaternionAlgebra(1, 1), ctx)
    assert sp.m == 1
    Ii, _ = sp.local_images()
    assert sorted([Ii[0][0], Ii[1][1]]) == [1, ctx.modulus - 1]
    assert Ii[0][1] == Ii[1][0] == 0


def test_model_requires_division_algebra():
    with pytest.raises(ValueError):
        make_model(B=(1, 1))


def test_refuter_accepts_a_stable_lattice():
    # For the split algebra the standard lattice is R-stable; no false witness.
    alg = QuaternionAlgebra(1, 1)
    model = SplitModel(alg, 2, {ell: split_quaternion_locally(alg, PadicContext(ell, 12))
                                for ell in (3, 5)})
    rep = check_R_stability(exact.identity(4), model)
    assert rep.stable and rep.witness is None


def test_standard_candidate_is_refuted():
    model = make_model()
    rep = check_R_stability(exact.identity(4), model)
    assert not rep.stable
    assert verify_witness(exact.identity(4), model, rep.witness)


def test_random_candidates_refuted_with_checked_witnesses():
    model = make_model(N=16)
    rng = random.Random(5)
    for _ in range(10):
        cand = random_candidate(model, rng)
        rep = check_R_stability(cand, model)
        assert not rep.stable
        assert verify_witness(cand, model, rep.witness)
        assert rep.witness[0] in {"(1,0)", "(0,1)", "(0,i)", "(0,j)", "(0,k)"}


def test_demo_report_is_deterministic():
    r1 = demo_counterexample(seed=3, trials=10)
    r2 = demo_counterexample(seed=3, trials=10)
    assert r1 == r2
    assert r1["stable"] == 0 and r1["witnesses"] == 10
