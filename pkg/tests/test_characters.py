import cmath
import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st
from strategies import characters, polynomials

from lcahaar.characters import (CharacterSystem, PulledCharacter, evaluate, pullback, pullback_affine,
                                pullback_iterated, rank)
from lcahaar.lca import AffineCa, LcaPolynomial, compose, frobenius_power, pow_square_multiply


def C(text, m, dim=None):
    return CharacterSystem.parse(text, m, dim)


def P(text, m, dim=None):
    return LcaPolynomial.parse(text, m, dim)


def box_config(chi_or_poly_list, m, pad, rng):
    lo = min(min(k) for obj in chi_or_poly_list for k in obj.support())
    hi = max(max(k) for obj in chi_or_poly_list for k in obj.support())
    return {(i,): rng.randrange(m) for i in range(lo - pad, hi + pad + 1)}


def test_rank_examples():
    assert rank(CharacterSystem.trivial(3)) == 0
    assert rank(CharacterSystem.single_site(2)) == 1
    assert rank(pullback(CharacterSystem.single_site(2), P("1@(-1)+1@(1)", 2))) == 2


def test_evaluate_examples():
    assert evaluate(CharacterSystem.trivial(2), {}) == 1
    assert abs(evaluate(CharacterSystem.single_site(2), {0: 1}) + 1) < 1e-12
    chi = C("1@(0)+2@(1)", 3)
    assert abs(evaluate(chi, {0: 1, 1: 1}) - 1) < 1e-12
    with pytest.raises(KeyError):
        evaluate(chi, {0: 1})


def test_pullback_examples():
    chi = CharacterSystem.single_site(2)
    assert pullback(chi, LcaPolynomial.identity(2)) == chi
    assert pullback(chi, P("1@(-1)+1@(1)", 2)).terms == {(-1,): 1, (1,): 1}
    got = pullback(C("1@(0)+1@(2)", 2), P("1@(0)+1@(1)", 2))
    assert got.terms == {(0,): 1, (1,): 1, (2,): 1, (3,): 1}


def test_pullback_iterated_examples():
    chi = CharacterSystem.single_site(2)
    F = P("1@(0)+1@(1)", 2)
    assert pullback_iterated(chi, F, 0) == chi
    assert pullback_iterated(chi, F, 4).terms == {(0,): 1, (4,): 1}
    assert pullback_iterated(chi, F, 3).rank == 4


def test_pullback_affine_examples():
    chi = CharacterSystem.single_site(2)
    lind = P("1@(-1)+1@(1)", 2)
    pc = pullback_affine(chi, AffineCa(lind, 0), 5)
    assert pc.phase == 1 and pc.character == pullback_iterated(chi, lind, 5)
    pc = pullback_affine(chi, AffineCa(lind, 1), 1)
    assert abs(pc.phase + 1) < 1e-12
    pc = pullback_affine(CharacterSystem.trivial(2), AffineCa(lind, 1), 3)
    assert pc.character.is_trivial() and pc.phase == 1


def test_pulled_character_rejects_non_unit_phase():
    with pytest.raises(ValueError):
        PulledCharacter(CharacterSystem.trivial(2), 0.5)


@given(st.data())
def test_functoriality(data):
    m = data.draw(st.sampled_from([2, 3, 4, 5, 6]))
    dim = data.draw(st.integers(1, 2))
    F, G = data.draw(polynomials(m=m, dim=dim)), data.draw(polynomials(m=m, dim=dim))
    chi = data.draw(characters(m, dim, max_rank=5, lo=-4, hi=4))
    assert pullback(chi, compose(F, G)) == pullback(pullback(chi, F), G)


@given(st.data())
def test_duality(data):
    m = data.draw(st.sampled_from([2, 3, 4, 5, 6]))
    F = data.draw(polynomials(m=m, dim=1))
    chi = data.draw(characters(m, 1, max_rank=5, min_rank=1))
    rng = random.Random(data.draw(st.integers(0, 2**32)))
    config = box_config([chi], m, 4, rng)
    image = F.apply_window(config, chi.support())
    assert abs(evaluate(pullback(chi, F), config) - evaluate(chi, image)) < 1e-12


def test_duality_by_explicit_product():
    # chi(a) = prod_x exp(2 pi i chi_x a_x / m), evaluated term by term
    chi = C("1@(0)+2@(3)+4@(-2)", 5)
    config = {(i,): (3 * i + 1) % 5 for i in range(-3, 5)}
    want = 1
    for (x,), e in chi.terms.items():
        want *= cmath.exp(2j * cmath.pi * e * config[(x,)] / 5)
    assert abs(evaluate(chi, config) - want) < 1e-12


@given(st.sampled_from([2, 3, 5]).flatmap(
    lambda p: st.tuples(polynomials(m=p), characters(p, max_rank=4), st.integers(0, 3))))
def test_frobenius_rank_matches_square_multiply(args):
    F, chi, k = args
    p = F.m
    if F.dim != chi.dim:
        return
    a = pullback(chi, frobenius_power(F, k))
    b = pullback(chi, pow_square_multiply(F, p**k))
    assert a == b and a.rank == b.rank


@given(st.sampled_from([2, 3, 5, 4, 6]).flatmap(
    lambda m: st.tuples(polynomials(m=m, dim=1, max_terms=3), characters(m, max_rank=4),
                        st.integers(0, 40))))
def test_iterated_matches_power(args):
    F, chi, n = args
    assert pullback_iterated(chi, F, n) == pullback(chi, pow_square_multiply(F, n))


@given(st.data())
def test_affine_consistency(data):
    m = data.draw(st.sampled_from([2, 3, 4, 5]))
    F = data.draw(polynomials(m=m, dim=1, max_terms=3, lo=-1, hi=1))
    c = data.draw(st.integers(0, m - 1))
    n = data.draw(st.integers(0, 5))
    chi = data.draw(characters(m, 1, max_rank=3, lo=-2, hi=2))
    G = AffineCa(F, c)
    rng = random.Random(data.draw(st.integers(0, 2**32)))
    reach = n + 3
    config = {(i,): rng.randrange(m) for i in range(-reach - 4, reach + 5)}
    # iterate the local rule of G directly, shrinking the region by one step each time
    state = config
    for step in range(n):
        inner = [(i,) for i in range(-reach - 4 + (step + 1) * 1, reach + 5 - (step + 1) * 1)]
        state = G.apply_window(state, inner)
    pc = pullback_affine(chi, G, n)
    assert abs(abs(pc.phase) - 1) < 1e-12
    assert abs(evaluate(chi, state) - pc.evaluate(config)) < 1e-12


def test_exponent_sum_and_text():
    chi = C("3@(1) + 4@(-2)", 5)
    assert chi.exponent_sum() == 2
    assert CharacterSystem.parse(chi.to_text(), 5) == chi
    sites = list(itertools.chain.from_iterable(chi.support()))
    assert sites == [-2, 1]
