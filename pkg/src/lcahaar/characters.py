"""Characters of (Z/m)^(Z^D) and their pullbacks through linear and affine CA."""

from __future__ import annotations

from dataclasses import dataclass

from . import algebra
from ._sparse import TermMap, convolve_codes
from .lca import AffineCa, LcaPolynomial, iterate_drift, as_site, frobenius_power, pow_square_multiply


class CharacterSystem(TermMap):
    """chi(a) = prod_x exp(2 pi i chi_x a_x / m); stored as site -> exponent in [1, m).

    The empty map is the trivial character.
    """

    __slots__ = ()

    @classmethod
    def trivial(cls, modulus, dim: int = 1) -> "CharacterSystem":
        return cls({}, modulus, dim)

    @classmethod
    def single_site(cls, modulus, site=0, exponent: int = 1, dim: int | None = None):
        site = (site,) if isinstance(site, int) else tuple(site)
        if dim is not None and len(site) != dim:
            site = site + (0,) * (dim - len(site))
        return cls({site: exponent}, modulus, len(site))

    @property
    def rank(self) -> int:
        return len(self)

    def is_trivial(self) -> bool:
        return len(self) == 0

    def exponent_sum(self) -> int:
        return int(self.values.sum()) % self.m

    def evaluate(self, config) -> complex:
        return evaluate(self, config)


def rank(chi: CharacterSystem) -> int:
    return len(chi)


def evaluate(chi: CharacterSystem, config) -> complex:
    """chi(a) for a configuration given on (at least) the support of chi."""
    total = 0
    for site, e in chi.terms.items():
        if site in config:
            a = config[site]
        elif chi.dim == 1 and site[0] in config:
            a = config[site[0]]
        else:
            raise KeyError(f"configuration does not cover character site {site}")
        total += e * int(a)
    return algebra.cyclic_char_value(1, total % chi.m, chi.m)


def pullback(chi: CharacterSystem, F: LcaPolynomial, max_terms: int | None = None) -> CharacterSystem:
    """chi o F: exponents xi_k = sum_{x + u = k} chi_x f_u mod m."""
    chi._check_compatible(F)
    codes, vals = convolve_codes(chi._codes, chi.values, F._codes, F.values,
                                 chi.m, chi.dim, max_terms)
    return CharacterSystem._from_codes(codes, vals, chi.modulus, chi.dim)


def pullback_iterated(chi: CharacterSystem, F: LcaPolynomial, n: int,
                      max_terms: int | None = None) -> CharacterSystem:
    """chi o F^n.

    Over a prime field F^n is split along the base-p digits of n into
    rescaled copies of F^{digit}, which keeps every intermediate polynomial
    as small as F itself.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    chi._check_compatible(F)
    if not F.modulus.is_prime:
        return pullback(chi, pow_square_multiply(F, n), max_terms)
    p = F.m
    for i, d in enumerate(algebra.p_ary_expansion(n, p).digits):
        if d:
            chi = pullback(chi, frobenius_power(pow_square_multiply(F, d), i), max_terms)
    return chi


@dataclass(frozen=True)
class PulledCharacter:
    """phase * character, the pullback of a character through an affine CA."""

    character: CharacterSystem
    phase: complex

    def __post_init__(self):
        if abs(abs(self.phase) - 1.0) > 1e-12:
            raise ValueError(f"phase {self.phase} is not on the unit circle")

    def evaluate(self, config) -> complex:
        return self.phase * evaluate(self.character, config)


def affine_phase(chi: CharacterSystem, G: AffineCa, n: int) -> complex:
    """chi evaluated on the constant drift configuration of G^n (see iterate_drift)."""
    return algebra.cyclic_char_value(chi.exponent_sum(), iterate_drift(G, n), chi.m)


def pullback_affine(chi: CharacterSystem, G: AffineCa, n: int,
                    max_terms: int | None = None) -> PulledCharacter:
    """chi o G^n = K * (chi o F^n) where G = F + c and K = chi(drift of G^n)."""
    if isinstance(G, LcaPolynomial):
        G = AffineCa(G, 0)
    return PulledCharacter(pullback_iterated(chi, G.linear, n, max_terms), affine_phase(chi, G, n))


def as_config(values: dict, dim: int) -> dict:
    return {as_site(k, dim): v for k, v in values.items()}
