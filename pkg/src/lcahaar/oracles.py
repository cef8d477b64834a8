"""Slow, independent reference computations used to check the fast engines.

Nothing here shares code paths with the engines it checks: binomials come from
Pascal's triangle, powers from repeated composition, and Fourier coefficients
from explicit enumeration of finite paths.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .algebra import cyclic_char_value
from .lca import LcaPolynomial


def pascal_mod(n_max: int, p: int) -> list[list[int]]:
    """Rows 0..n_max of Pascal's triangle reduced mod p."""
    rows = [[1]]
    for n in range(1, n_max + 1):
        prev = rows[-1]
        row = [1] * (n + 1)
        for k in range(1, n):
            row[k] = (prev[k - 1] + prev[k]) % p
        rows.append(row)
    return rows


def repeated_compose(F: LcaPolynomial, n: int) -> dict:
    """F^n by n plain dictionary convolutions."""
    m = F.m
    acc = {(0,) * F.dim: 1}
    f = F.terms
    for _ in range(n):
        nxt: dict = {}
        for a, x in acc.items():
            for b, y in f.items():
                k = tuple(i + j for i, j in zip(a, b))
                nxt[k] = (nxt.get(k, 0) + x * y) % m
        acc = {k: v for k, v in nxt.items() if v}
    return acc


def _character_factor(chi_terms: dict, word, start: int, m: int) -> complex:
    total = 0
    for (s,), e in chi_terms.items():
        total += e * word[s - start]
    return cyclic_char_value(1, total % m, m)


def markov_path_sum(chi, Q, nu) -> complex:
    """sum over all words on the support hull of nu_{a_0} prod q * chi(word)."""
    terms = chi.terms
    if not terms:
        return 1 + 0j
    sites = [s for (s,) in terms]
    lo, hi = min(sites), max(sites)
    Q = np.asarray(Q)
    m = Q.shape[0]
    total = 0j
    for word in itertools.product(range(m), repeat=hi - lo + 1):
        w = nu[word[0]]
        for a, b in zip(word, word[1:]):
            w *= Q[a, b]
        total += w * _character_factor(terms, word, lo, m)
    return total


def nstep_path_sum(chi, table, nu, m: int, order: int) -> complex:
    """Enumerate every word of length max(order, hull) from the N-step law."""
    terms = chi.terms
    if not terms:
        return 1 + 0j
    sites = [s for (s,) in terms]
    lo, hi = min(sites), max(sites)
    length = max(order, hi - lo + 1)
    total = 0j
    for word in itertools.product(range(m), repeat=length):
        idx = 0
        for a in word[:order]:
            idx = idx * m + a
        w = nu[idx]
        for t in range(order, length):
            ctx = 0
            for a in word[t - order:t]:
                ctx = ctx * m + a
            w *= table[ctx, word[t]]
        total += w * _character_factor(terms, word, lo, m)
    return total


def conditioned_path_sum(chi, Q, nu, lo: int, word) -> complex:
    """E[chi | cylinder] by enumerating the hull of the window and chi's support."""
    terms = chi.terms
    sites = [s for (s,) in terms] + [lo, lo + len(word) - 1]
    a, b = min(sites), max(sites)
    Q = np.asarray(Q)
    m = Q.shape[0]
    num = 0j
    den = 0.0
    for full in itertools.product(range(m), repeat=b - a + 1):
        if tuple(full[lo - a: lo - a + len(word)]) != tuple(word):
            continue
        w = nu[full[0]]
        for x, y in zip(full, full[1:]):
            w *= Q[x, y]
        den += w
        num += w * (_character_factor(terms, full, a, m) if terms else 1)
    return num / den


def bernoulli_product(chi, weights) -> complex:
    """prod over sites of sum_a beta_a gamma^{chi_x}(a), evaluated term by term."""
    m = len(weights)
    out = 1 + 0j
    for e in chi.terms.values():
        out *= sum(weights[a] * cyclic_char_value(e, a, m) for a in range(m))
    return out


def digit_census(n: int, p: int = 2) -> int:
    """Number of nonzero base-p digits of n."""
    count = 0
    while n:
        count += n % p != 0
        n //= p
    return count


def binomial_mod(N: int, n: int, p: int) -> int:
    return math.comb(N, n) % p
