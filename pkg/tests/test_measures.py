import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from strategies import characters, positive_stochastic, probability_vectors

from lcahaar.characters import CharacterSystem
from lcahaar.measures import (BernoulliSpec, ConditionedMarkovSpec, HaarSpec, MarkovSpec, NonUniqueStationaryError,
                              NStepMarkovSpec, bernoulli_certificate, certificate, convolve, fourier,
                              fourier_bernoulli, fourier_markov, fourier_markov_conditioned, fourier_nstep,
                              markov_certificate, markov_operator_apply, nstep_block_code, stationary_vector)
from lcahaar.oracles import bernoulli_product, conditioned_path_sum, markov_path_sum, nstep_path_sum

Q2 = [[0.9, 0.1], [0.2, 0.8]]


def C(text, m):
    return CharacterSystem.parse(text, m, 1)


# ---------------------------------------------------------------- Bernoulli


def test_bernoulli_examples():
    beta = BernoulliSpec(2, (0.9, 0.1))
    assert np.allclose(beta.coefficients(), [1.0, 0.8])
    assert fourier_bernoulli(CharacterSystem.trivial(2), beta) == 1
    assert abs(fourier_bernoulli(C("1@(0)+1@(3)", 2), beta) - 0.64) < 1e-12
    assert abs(fourier_bernoulli(C("1@(0)", 3), BernoulliSpec.uniform(3))) < 1e-12


def test_bernoulli_rejects_bad_weights():
    with pytest.raises(ValueError):
        BernoulliSpec(2, (0.5, 0.6))
    with pytest.raises(ValueError):
        BernoulliSpec(3, (0.5, 0.5))
    with pytest.raises(ValueError):
        fourier_bernoulli(C("1@(0)", 3), BernoulliSpec(2, (0.5, 0.5)))


def test_bernoulli_certificate():
    cert = bernoulli_certificate(BernoulliSpec(2, (0.9, 0.1)))
    assert abs(cert.base - 0.8) < 1e-12 and cert.mixing
    assert abs(cert.bound(3) - 0.512) < 1e-12
    point = bernoulli_certificate(BernoulliSpec.point_mass(3, 1))
    assert point.base == 1.0 and not point.mixing
    assert not bernoulli_certificate(BernoulliSpec.uniform(4)).hypotheses_ok


@given(st.sampled_from([2, 3, 5, 4]).flatmap(
    lambda m: st.tuples(probability_vectors(m), characters(m, max_rank=6))))
def test_bernoulli_matches_product(args):
    w, chi = args
    beta = BernoulliSpec(chi.m, w)
    got = fourier_bernoulli(chi, beta)
    assert abs(got - bernoulli_product(chi, list(w))) < 1e-12
    if chi.m in (2, 3, 5):
        assert abs(got) <= bernoulli_certificate(beta).bound(chi.rank) + 1e-12


@given(st.sampled_from([2, 3, 5]).flatmap(
    lambda m: st.tuples(probability_vectors(m), probability_vectors(m), characters(m, max_rank=4))))
def test_convolution_is_multiplicative(args):
    a, b, chi = args
    m = chi.m
    A, B = BernoulliSpec(m, a), BernoulliSpec(m, b)
    AB = convolve(A, B)
    assert np.allclose(AB.coefficients(), A.coefficients() * B.coefficients())
    assert abs(fourier(chi, AB) - fourier(chi, A) * fourier(chi, B)) < 1e-12


# ---------------------------------------------------------------- Markov


def test_stationary_examples():
    assert np.allclose(stationary_vector(Q2), [2 / 3, 1 / 3])
    assert np.allclose(stationary_vector(np.full((3, 3), 1 / 3)), [1 / 3] * 3)
    with pytest.raises(NonUniqueStationaryError):
        stationary_vector([[1.0, 0.0], [0.5, 0.5]])
    with pytest.raises(ValueError):
        stationary_vector([[0.5, 0.6], [0.5, 0.5]])


@given(st.integers(2, 4).flatmap(positive_stochastic))
def test_stationary_is_invariant(Q):
    nu = stationary_vector(Q)
    assert np.allclose(nu @ Q, nu, atol=1e-12) and abs(nu.sum() - 1) < 1e-12


def test_markov_spec_rejects_wrong_stationary():
    with pytest.raises(ValueError):
        MarkovSpec(2, Q2, [0.5, 0.5])
    with pytest.raises(ValueError):
        MarkovSpec.from_transition(2, Q2, [0.5, 0.5])


def test_markov_operator_apply():
    assert np.allclose(markov_operator_apply(Q2, [1, -1]), [0.8, -0.6])


def test_fourier_markov_examples():
    spec = MarkovSpec.from_transition(2, Q2)
    assert abs(fourier_markov(C("1@(0)", 2), spec) - 1 / 3) < 1e-12
    assert fourier_markov(CharacterSystem.trivial(2), spec) == 1
    # two adjacent sites: sum_{a,b} nu_a q_ab (-1)^{a+b}
    want = sum(spec.stationary[a] * Q2[a][b] * (-1) ** (a + b) for a in range(2) for b in range(2))
    assert abs(fourier_markov(C("1@(5)+1@(6)", 2), spec) - want) < 1e-12


@given(st.sampled_from([2, 3]).flatmap(
    lambda m: st.tuples(probability_vectors(m), characters(m, max_rank=4, lo=-3, hi=3))))
def test_iid_chain_equals_bernoulli(args):
    w, chi = args
    beta = BernoulliSpec(chi.m, w)
    assert abs(fourier_markov(chi, MarkovSpec.iid(beta)) - fourier_bernoulli(chi, beta)) < 1e-12


@given(st.sampled_from([2, 3]).flatmap(
    lambda m: st.tuples(positive_stochastic(m), characters(m, max_rank=4, lo=-3, hi=3))))
def test_markov_matches_path_sum(args):
    Q, chi = args
    spec = MarkovSpec.from_transition(chi.m, Q)
    assert abs(fourier_markov(chi, spec) - markov_path_sum(chi, Q, spec.stationary)) < 1e-10


def test_markov_certificate_uniform_is_zero():
    cert = markov_certificate(np.full((3, 3), 1 / 3))
    assert cert.base < 1e-12 and cert.mixing


def test_markov_certificate_by_hand():
    # P = M_xi Q M_zeta Q with gamma(a) = (-1)^a, built entry by entry
    best = 0.0
    for xi in range(2):
        for zeta in (1,):
            P = [[sum((-1) ** (xi * a) * Q2[a][b] * (-1) ** (zeta * b) * Q2[b][c] for b in range(2))
                  for c in range(2)] for a in range(2)]
            best = max(best, max(abs(P[a][0]) + abs(P[a][1]) for a in range(2)))
    cert = markov_certificate(Q2)
    assert abs(cert.base - best) < 1e-12
    assert cert.exponent(1) == 0 and cert.exponent(5) == 2
    assert markov_certificate([[1.0, 0.0], [0.5, 0.5]]).violations


@given(st.sampled_from([2, 3]).flatmap(
    lambda m: st.tuples(positive_stochastic(m), characters(m, max_rank=7, lo=-8, hi=8))))
def test_markov_envelope(args):
    Q, chi = args
    spec = MarkovSpec.from_transition(chi.m, Q)
    cert = certificate(spec)
    assert abs(fourier(chi, spec)) <= cert.bound(chi.rank) + 1e-12


def test_reversed_transition_is_stochastic():
    spec = MarkovSpec.from_transition(3, [[0.5, 0.3, 0.2], [0.1, 0.6, 0.3], [0.4, 0.4, 0.2]])
    R = spec.reversed_transition()
    assert np.allclose(R.sum(axis=1), 1) and np.allclose(spec.stationary @ R, spec.stationary)


# ---------------------------------------------------------------- conditioned


def test_conditioned_examples():
    spec = MarkovSpec.from_transition(2, Q2)
    assert abs(fourier_markov_conditioned(C("1@(1)", 2), spec, (0, 0), (0,)) - 0.8) < 1e-12
    chi = C("1@(0)+1@(3)", 2)
    assert fourier_markov_conditioned(chi, spec, (0, -1), ()) == fourier_markov(chi, spec)
    with pytest.raises(ValueError):
        fourier_markov_conditioned(chi, spec, (0, 2), (0, 1))


def test_conditioned_rejects_null_word():
    spec = MarkovSpec.from_transition(2, [[0.5, 0.5], [1.0, 0.0]])
    with pytest.raises(ValueError):
        ConditionedMarkovSpec(spec, 0, (1, 1))


@given(st.data())
def test_conditioned_matches_path_sum(data):
    m = data.draw(st.sampled_from([2, 3]))
    Q = data.draw(positive_stochastic(m))
    chi = data.draw(characters(m, max_rank=3, lo=-3, hi=3))
    lo = data.draw(st.integers(-2, 2))
    word = tuple(data.draw(st.lists(st.integers(0, m - 1), min_size=1, max_size=3)))
    spec = MarkovSpec.from_transition(m, Q)
    mu = ConditionedMarkovSpec(spec, lo, word)
    want = conditioned_path_sum(chi, Q, spec.stationary, lo, word)
    assert abs(fourier(chi, mu) - want) < 1e-10


# ---------------------------------------------------------------- N-step


def test_nstep_order_one_is_markov():
    spec = NStepMarkovSpec.from_table(2, 1, Q2)
    markov = MarkovSpec.from_transition(2, Q2)
    for text in ("1@(0)", "1@(0)+1@(1)", "1@(-2)+1@(4)+1@(5)"):
        chi = C(text, 2)
        assert abs(fourier_nstep(chi, spec) - fourier_markov(chi, markov)) < 1e-12


def test_nstep_block_code_rows_sum_to_one():
    table = [[0.7, 0.3], [0.4, 0.6], [0.2, 0.8], [0.5, 0.5]]
    P = nstep_block_code(NStepMarkovSpec.from_table(2, 2, table)).transition
    assert np.allclose(P.sum(axis=1), 1)


def test_nstep_uniform_table_is_haar():
    spec = NStepMarkovSpec.from_table(3, 2, np.full((9, 3), 1 / 3))
    assert abs(fourier_nstep(C("1@(0)+2@(4)", 3), spec)) < 1e-12


@given(st.data())
def test_nstep_matches_path_sum(data):
    m = data.draw(st.sampled_from([2, 3]))
    order = data.draw(st.integers(1, 3 if m == 2 else 2))
    table = np.array([data.draw(probability_vectors(m, floor=0.02)) for _ in range(m**order)])
    chi = data.draw(characters(m, max_rank=3, lo=-3, hi=3))
    spec = NStepMarkovSpec.from_table(m, order, table)
    want = nstep_path_sum(chi, table, spec.stationary, m, order)
    assert abs(fourier_nstep(chi, spec) - want) < 1e-10


# ---------------------------------------------------------------- Haar


def test_haar():
    mu = HaarSpec(5)
    assert fourier(CharacterSystem.trivial(5), mu) == 1
    assert fourier(C("2@(1)", 5), mu) == 0
    # the uniform Bernoulli measure has the same coefficients
    assert abs(fourier(C("2@(1)+1@(3)", 5), BernoulliSpec.uniform(5))) < 1e-12
    assert abs(cmath.exp(0) - fourier(CharacterSystem.trivial(5), BernoulliSpec.uniform(5))) < 1e-12


def test_fourier_rejects_unknown_measure():
    with pytest.raises(TypeError):
        fourier(CharacterSystem.trivial(2), object())
