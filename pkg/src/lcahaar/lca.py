"""Linear and affine cellular automata on (Z/m)^(Z^D) as polynomials of shifts.

An LCA F acts by F(a)_x = sum_u f_u * a_{x+u}; the polynomial sum_u f_u s^u
records the coefficients, and composition of automata is polynomial
multiplication.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import algebra
from ._sparse import TermMap, convolve_codes, pack, canonical
from .algebra import Modulus, as_modulus


def as_site(x, dim: int) -> tuple[int, ...]:
    site = (int(x),) if isinstance(x, (int, np.integer)) else tuple(int(c) for c in x)
    if len(site) != dim:
        raise ValueError(f"site {site} does not have dimension {dim}")
    return site


def _lookup(config, site):
    if site in config:
        return config[site]
    if len(site) == 1 and site[0] in config:
        return config[site[0]]
    raise KeyError(site)


class LcaPolynomial(TermMap):
    """An LCA over Z/m in D dimensions, as a map shift vector -> coefficient."""

    __slots__ = ()

    @classmethod
    def identity(cls, modulus, dim: int = 1) -> "LcaPolynomial":
        return cls({(0,) * dim: 1}, modulus, dim)

    @classmethod
    def shift(cls, vector, modulus, coeff: int = 1) -> "LcaPolynomial":
        vector = (vector,) if isinstance(vector, int) else tuple(vector)
        return cls({vector: coeff}, modulus, len(vector))

    def is_nontrivial(self) -> bool:
        """At least two nonzero coefficients, i.e. not a scaled shift or the identity."""
        return len(self) >= 2

    def coefficient_sum(self) -> int:
        return int(self.values.sum()) % self.m

    def scaled(self, c: int) -> "LcaPolynomial":
        return LcaPolynomial(((k, v * c) for k, v in self.terms.items()), self.modulus, self.dim)

    def apply_local(self, patch) -> int:
        """The local rule: sum_u f_u * patch[u] mod m."""
        total = 0
        for key, coeff in self.terms.items():
            try:
                symbol = _lookup(patch, key)
            except KeyError:
                raise KeyError(f"patch has no value at site {key}") from None
            total += coeff * int(symbol)
        return total % self.m

    def apply_window(self, config, window) -> dict:
        """Evaluate F(config) at every site of ``window``.

        ``config`` maps sites to symbols and must cover window + keys(F).
        """
        out = {}
        terms = self.terms
        for x in window:
            site = as_site(x, self.dim)
            total = 0
            for key, coeff in terms.items():
                y = tuple(a + b for a, b in zip(site, key))
                try:
                    total += coeff * int(_lookup(config, y))
                except KeyError:
                    raise KeyError(
                        f"configuration does not cover site {y} needed for window site {site}"
                    ) from None
            out[site] = total % self.m
        return out

    def __call__(self, config, window):
        return self.apply_window(config, window)

    def __matmul__(self, other):
        return compose(self, other)


def compose(F: LcaPolynomial, G: LcaPolynomial, max_terms: int | None = None) -> LcaPolynomial:
    """F o G, i.e. the product of the two shift polynomials."""
    F._check_compatible(G)
    codes, vals = convolve_codes(F._codes, F.values, G._codes, G.values, F.m, F.dim, max_terms)
    return LcaPolynomial._from_codes(codes, vals, F.modulus, F.dim)


def pow_square_multiply(F: LcaPolynomial, N: int) -> LcaPolynomial:
    """F^N by binary exponentiation under composition."""
    if N < 0:
        raise ValueError(f"exponent must be nonnegative, got {N}")
    result = LcaPolynomial.identity(F.modulus, F.dim)
    base = F
    while N:
        if N & 1:
            result = compose(result, base)
        N >>= 1
        if N:
            base = compose(base, base)
    return result


def frobenius_power(F: LcaPolynomial, k: int) -> LcaPolynomial:
    """F^(p^k) over a prime field: same coefficients, exponents scaled by p^k."""
    p = F.modulus.require_prime("frobenius_power")
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    keys = F.keys * (p**k) if k else F.keys
    return LcaPolynomial._from_codes(pack(np.asarray(keys, dtype=np.int64)),
                                     F.values.copy(), F.modulus, F.dim)


def pow_frobenius(F: LcaPolynomial, N: int) -> LcaPolynomial:
    """F^N as the product over base-p digits d_i of frobenius_power(F^{d_i}, i)."""
    p = F.modulus.require_prime("pow_frobenius")
    result = LcaPolynomial.identity(F.modulus, F.dim)
    for i, d in enumerate(algebra.p_ary_expansion(N, p).digits):
        if d:
            result = compose(result, frobenius_power(pow_square_multiply(F, d), i))
    return result


@dataclass(frozen=True)
class NestedForm:
    """g0 * s^{l0} o (Id + f1 s^{m1} (Id + f2 s^{m2} ( ... (Id + fJ s^{mJ}))))."""

    modulus: Modulus
    leading_coefficient: int
    leading_shift: tuple[int, ...]
    factors: tuple[tuple[int, tuple[int, ...]], ...]

    def __post_init__(self):
        p = self.modulus.require_prime("NestedForm")
        if not 0 < self.leading_coefficient < p:
            raise ValueError(f"leading coefficient must lie in [1, {p})")
        for f, step in self.factors:
            if not 0 < f < p:
                raise ValueError(f"factor coefficient {f} is not invertible mod {p}")
            if len(step) != len(self.leading_shift):
                raise ValueError("factor shift dimension mismatch")

    @property
    def dim(self) -> int:
        return len(self.leading_shift)

    @property
    def J(self) -> int:
        return len(self.factors)

    @property
    def steps(self) -> list[tuple[int, ...]]:
        return [step for _, step in self.factors]

    def inner(self) -> LcaPolynomial:
        """The normalized factor Id + f1 s^{m1}(Id + ...), without g0 and s^{l0}."""
        one = LcaPolynomial.identity(self.modulus, self.dim)
        acc = one
        for f, step in reversed(self.factors):
            acc = LcaPolynomial(
                itertools.chain(one.terms.items(),
                                compose(LcaPolynomial.shift(step, self.modulus, f), acc).terms.items()),
                self.modulus, self.dim)
        return acc

    def to_polynomial(self) -> LcaPolynomial:
        outer = LcaPolynomial.shift(self.leading_shift, self.modulus, self.leading_coefficient)
        return compose(outer, self.inner())


def to_nested_form(F: LcaPolynomial) -> NestedForm:
    """Rewrite F = sum_j g_j s^{l_j} (lexicographically ordered l_j) in nested form."""
    F.modulus.require_prime("to_nested_form")
    if not len(F):
        raise ValueError("the zero polynomial has no nested form")
    keys = F.support()
    coeffs = [int(v) for v in F.values]
    factors = []
    for j in range(1, len(keys)):
        step = tuple(a - b for a, b in zip(keys[j], keys[j - 1]))
        f = F.modulus.inverse(coeffs[j - 1]) * coeffs[j] % F.m
        factors.append((f, step))
    return NestedForm(F.modulus, coeffs[0], keys[0], tuple(factors))


def _digit_chains(d: int, J: int):
    """All (c1, ..., cJ) with d >= c1 >= ... >= cJ >= 0."""
    if J == 0:
        yield ()
        return
    for c in range(d + 1):
        for rest in _digit_chains(c, J - 1):
            yield (c,) + rest


def lucas_index_tuples(N: int, J: int, p: int) -> np.ndarray:
    """The set L^J(N) = {(k1..kJ): kJ << ... << k1 << N} as an array of shape (n, J).

    Built digit by digit: at each base-p position the digits form a chain
    bounded by N's digit, so the set is a product of per-digit chains.
    """
    tuples = np.zeros((1, J), dtype=object)
    for i, d in enumerate(algebra.p_ary_expansion(N, p).digits):
        chains = np.array(list(_digit_chains(d, J)), dtype=object).reshape(-1, J) * (p**i)
        tuples = (tuples[:, None, :] + chains[None, :, :]).reshape(-1, J)
    return tuples


def pow_nested_lucas(nf: NestedForm, N: int) -> LcaPolynomial:
    """G^N for the automaton G encoded by ``nf``, via the Lucas expansion of the inner factor.

    F^N = sum over k in L^J(N) of f_(k) s^{<k, m>} with
    f_(k) = prod_j binom(k_{j-1}, k_j) f_j^{k_j} (k_0 = N), all mod p; then
    G^N = g0^N s^{N l0} F^N.
    """
    p = nf.modulus.require_prime("pow_nested_lucas")
    if N < 0:
        raise ValueError(f"exponent must be nonnegative, got {N}")
    D, J = nf.dim, nf.J
    table = algebra.digit_binomial_table(p)
    fs = [f for f, _ in nf.factors]
    steps = np.array(nf.steps, dtype=np.int64).reshape(J, D)

    # per-digit contributions, multiplied/added across digits (Cartesian product)
    exps = np.zeros((1, D), dtype=np.int64)
    coefs = np.ones(1, dtype=np.int64)
    for i, d in enumerate(algebra.p_ary_expansion(N, p).digits):
        chains = list(_digit_chains(d, J))
        c = np.array(chains, dtype=np.int64).reshape(-1, J)
        factor = np.ones(len(chains), dtype=np.int64)
        for row, chain in enumerate(chains):
            prev = d
            val = 1
            for j, cj in enumerate(chain):
                # binomial digit via Lucas; f^(cj * p^i) = f^cj by Fermat
                val = val * table[prev][cj] * pow(fs[j], cj, p) % p
                prev = cj
            factor[row] = val
        shift = (c @ steps) * (p**i) if J else np.zeros((len(chains), D), dtype=np.int64)
        exps = (exps[:, None, :] + shift[None, :, :]).reshape(-1, D)
        coefs = (coefs[:, None] * factor[None, :] % p).reshape(-1)
        keep = coefs != 0
        exps, coefs = exps[keep], coefs[keep]

    lead = pow(nf.leading_coefficient, N, p)
    exps = exps + N * np.array(nf.leading_shift, dtype=np.int64)
    codes, vals = canonical(pack(exps), coefs * lead % p, p)
    return LcaPolynomial._from_codes(codes, vals, nf.modulus, D)


@dataclass(frozen=True)
class AffineCa:
    """G(a) = F(a) + c, with F linear and c a constant symbol."""

    linear: LcaPolynomial
    constant: int = 0

    def __post_init__(self):
        object.__setattr__(self, "constant", int(self.constant) % self.linear.m)

    @property
    def modulus(self) -> Modulus:
        return self.linear.modulus

    @property
    def m(self) -> int:
        return self.linear.m

    @property
    def dim(self) -> int:
        return self.linear.dim

    def apply_local(self, patch) -> int:
        return (self.linear.apply_local(patch) + self.constant) % self.m

    def apply_window(self, config, window) -> dict:
        return {x: (v + self.constant) % self.m
                for x, v in self.linear.apply_window(config, window).items()}


def _geometric_sum(s: int, t: int, m: int) -> int:
    """sum_{k<t} s^k mod m by halving."""
    if t == 0:
        return 0
    if t % 2:
        return (1 + s * _geometric_sum(s, t - 1, m)) % m
    half = _geometric_sum(s, t // 2, m)
    return half * (1 + pow(s, t // 2, m)) % m


def affine_drift(G: AffineCa, n: int) -> int:
    """Constant value of h_n = c_0 + ... + c_n, where c_0 = c and c_{k+1} = F(c_k).

    F maps the constant configuration c to the constant s*c with s the sum of
    F's coefficients, so h_n = c * (1 + s + ... + s^n) mod m.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if G.constant == 0:
        return 0
    return G.constant * _geometric_sum(G.linear.coefficient_sum(), n + 1, G.m) % G.m


def iterate_drift(G: AffineCa, n: int) -> int:
    """Constant added by G^n on top of F^n: G^n(a) = F^n(a) + h_{n-1}, with h_{-1} = 0.

    G^1 = F + c already carries h_0 = c, so the drift of the n-th iterate is
    h_{n-1} rather than h_n.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    return affine_drift(G, n - 1) if n else 0


def parse_automaton(text: str, modulus, dim: int | None = None, constant: int = 0):
    """Parse a term list into an LcaPolynomial, or an AffineCa if constant != 0."""
    F = LcaPolynomial.parse(text, as_modulus(modulus), dim)
    return AffineCa(F, constant) if constant % F.m else F
