"""Bernoulli, Markov and N-step Markov measures on (Z/m)^Z and their Fourier coefficients.

A Fourier coefficient is <chi, mu> = integral of chi against mu. Markov
chains use the row convention: transition[a, b] = P(c_{t+1} = b | c_t = a),
and the stationary vector satisfies nu @ transition = nu.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import algebra
from .algebra import Modulus, as_modulus
from .characters import CharacterSystem

ROW_TOL = 1e-12
STATIONARY_TOL = 1e-10


class NonUniqueStationaryError(ValueError):
    """The chain does not have a unique, reachable stationary distribution."""


def _char_rows(m: int) -> np.ndarray:
    """Row k: the k-th character of Z/m evaluated at 0..m-1."""
    return np.array(algebra.char_table(m), dtype=complex)


# ---------------------------------------------------------------- Bernoulli


@dataclass(frozen=True)
class BernoulliSpec:
    modulus: Modulus
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "modulus", as_modulus(self.modulus))
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) != self.modulus.m:
            raise ValueError(f"need {self.modulus.m} weights, got {len(w)}")
        if min(w) < 0:
            raise ValueError(f"negative weight in {w}")
        if abs(sum(w) - 1.0) > ROW_TOL:
            raise ValueError(f"weights sum to {sum(w)!r}, not 1")

    @classmethod
    def uniform(cls, m) -> "BernoulliSpec":
        m = as_modulus(m)
        return cls(m, (1.0 / m.m,) * m.m)

    @classmethod
    def point_mass(cls, m, a: int = 0) -> "BernoulliSpec":
        m = as_modulus(m)
        return cls(m, tuple(1.0 if i == a % m.m else 0.0 for i in range(m.m)))

    @property
    def m(self) -> int:
        return self.modulus.m

    def coefficients(self) -> np.ndarray:
        """c_k = sum_a beta_a exp(2 pi i k a / m) for k = 0..m-1."""
        return _char_rows(self.m) @ np.array(self.weights)


@dataclass(frozen=True)
class MixingCertificate:
    """Decay base certifying harmonic mixing: |<chi, mu>| <= base ** exponent(rank)."""

    kind: str  # "bernoulli-c" or "markov-C"
    base: float
    rank_exponent_rule: str
    violations: tuple[str, ...] = ()

    @property
    def hypotheses_ok(self) -> bool:
        return not self.violations

    @property
    def mixing(self) -> bool:
        return self.hypotheses_ok and self.base < 1.0

    def exponent(self, rank: int) -> int:
        if self.kind == "bernoulli-c":
            return rank
        return max(0, (rank - 1) // 2)

    def bound(self, rank: int) -> float:
        return self.base ** self.exponent(rank)


def fourier_bernoulli(chi: CharacterSystem, beta: BernoulliSpec) -> complex:
    """Product over the sites of chi of c_{chi_x}."""
    if chi.m != beta.m:
        raise ValueError(f"modulus mismatch: character mod {chi.m}, measure mod {beta.m}")
    if chi.is_trivial():
        return 1 + 0j
    c = beta.coefficients()
    # product of per-exponent powers keeps large ranks cheap
    counts = np.bincount(chi.values, minlength=beta.m)
    result = 1 + 0j
    for k in range(1, beta.m):
        if counts[k]:
            result *= complex(c[k]) ** int(counts[k])
    return result


def bernoulli_certificate(beta: BernoulliSpec) -> MixingCertificate:
    """base = max_{0<k<m} |c_k|; below 1 whenever m is prime and beta is not a point mass."""
    c = np.abs(beta.coefficients()[1:])
    base = float(min(1.0, c.max()))
    violations = []
    if not beta.modulus.is_prime:
        violations.append(f"modulus {beta.m} is not prime; no mixing guarantee")
    if base >= 1.0 - ROW_TOL:
        base = 1.0
        violations.append("degenerate measure: |c_k| = 1 for some k != 0")
    return MixingCertificate("bernoulli-c", base, "c^R", tuple(violations))


def convolve(beta: BernoulliSpec, other: BernoulliSpec) -> BernoulliSpec:
    """(beta * other)(a) = sum_b beta(b) other(a - b)."""
    if beta.m != other.m:
        raise ValueError("modulus mismatch")
    m = beta.m
    out = [0.0] * m
    for a in range(m):
        out[a] = float(np.sum([beta.weights[b] * other.weights[(a - b) % m] for b in range(m)]))
    total = sum(out)
    return BernoulliSpec(beta.modulus, tuple(x / total for x in out))


# ---------------------------------------------------------------- Markov


def stationary_vector(Q, require_positive: bool = True, tol: float = 1e-14,
                      max_iter: int = 200_000) -> np.ndarray:
    """Stationary distribution nu (nu @ Q = nu) by power iteration from uniform.

    With ``require_positive`` the chain must have all entries > 0, which
    guarantees uniqueness. Otherwise the iteration must still converge; a
    periodic or reducible chain is reported as non-unique.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError(f"transition matrix must be square, got shape {Q.shape}")
    if (Q < 0).any() or np.abs(Q.sum(axis=1) - 1).max() > ROW_TOL:
        raise ValueError("transition matrix is not row-stochastic")
    if require_positive and (Q <= 0).any():
        a, b = np.argwhere(Q <= 0)[0]
        raise NonUniqueStationaryError(
            f"entry q[{a},{b}] = 0; positive entries are required for a unique stationary vector")
    n = Q.shape[0]
    nu = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = nu @ Q
        nxt /= nxt.sum()
        if np.abs(nxt - nu).max() <= tol:
            nu = nxt
            break
        nu = nxt
    else:
        raise NonUniqueStationaryError("power iteration did not converge (periodic or reducible chain)")
    if require_positive is False:
        # a second start must land in the same place, otherwise the chain is reducible
        alt = np.zeros(n)
        alt[-1] = 1.0
        for _ in range(max_iter):
            nxt = alt @ Q
            if np.abs(nxt - alt).max() <= tol:
                break
            alt = nxt
        if np.abs(alt - nu).max() > 1e-9:
            raise NonUniqueStationaryError("stationary distribution depends on the start (reducible chain)")
    return nu


@dataclass(frozen=True, eq=False)
class MarkovSpec:
    """Stationary Markov measure. ``block`` > 1 means the states are words of A^block."""

    modulus: Modulus
    transition: np.ndarray
    stationary: np.ndarray
    block: int = 1

    def __post_init__(self):
        object.__setattr__(self, "modulus", as_modulus(self.modulus))
        Q = np.array(self.transition, dtype=float)
        nu = np.array(self.stationary, dtype=float)
        n = self.modulus.m ** self.block
        if Q.shape != (n, n):
            raise ValueError(f"transition must be {n}x{n}, got {Q.shape}")
        if (Q < 0).any():
            raise ValueError("negative transition probability")
        rows = np.abs(Q.sum(axis=1) - 1)
        if rows.max() > ROW_TOL:
            raise ValueError(f"row {int(rows.argmax())} of the transition matrix does not sum to 1")
        if nu.shape != (n,) or (nu < 0).any() or abs(nu.sum() - 1) > ROW_TOL:
            raise ValueError("stationary vector must be a probability vector")
        if np.abs(nu @ Q - nu).max() > STATIONARY_TOL:
            raise ValueError("stationary vector is not invariant: sum_a nu_a q[a,b] != nu_b")
        Q.setflags(write=False)
        nu.setflags(write=False)
        object.__setattr__(self, "transition", Q)
        object.__setattr__(self, "stationary", nu)

    @classmethod
    def from_transition(cls, modulus, transition, stationary=None, block: int = 1):
        """Build from a transition matrix; an explicit ``stationary`` is checked against the computed one."""
        Q = np.asarray(transition, dtype=float)
        nu = stationary_vector(Q, require_positive=bool((Q > 0).all()))
        if stationary is not None:
            given = np.asarray(stationary, dtype=float)
            if given.shape != nu.shape or np.abs(given - nu).max() > STATIONARY_TOL:
                raise ValueError(f"given stationary vector {given} disagrees with computed {nu}")
            nu = given
        return cls(modulus, Q, nu, block)

    @classmethod
    def iid(cls, beta: BernoulliSpec) -> "MarkovSpec":
        """The memoryless chain whose rows all equal beta."""
        w = np.array(beta.weights)
        return cls(beta.modulus, np.tile(w, (beta.m, 1)), w)

    @property
    def m(self) -> int:
        return self.modulus.m

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    def reversed_transition(self) -> np.ndarray:
        """R[b, a] = nu_a q[a, b] / nu_b, the law of the previous symbol given the current one."""
        Q, nu = self.transition, self.stationary
        with np.errstate(divide="ignore", invalid="ignore"):
            R = (nu[:, None] * Q).T / nu[:, None]
        return np.nan_to_num(R)


def markov_operator_apply(Q, xi) -> np.ndarray:
    """(Q xi)(a) = sum_b q[a, b] xi(b)."""
    return np.asarray(Q) @ np.asarray(xi, dtype=complex)


class _Powers:
    def __init__(self, Q):
        self.Q = np.asarray(Q, dtype=float)
        self.cache = {1: self.Q}

    def __call__(self, k: int) -> np.ndarray:
        if k not in self.cache:
            self.cache[k] = np.linalg.matrix_power(self.Q, k)
        return self.cache[k]


def _chain_from_anchor(powers: _Powers, items, n_states: int) -> np.ndarray:
    """v(a) = E[prod_i f_i(c_{d_i}) | c_0 = a] for items (d_i, f_i), d_i > 0 increasing."""
    v = np.ones(n_states, dtype=complex)
    prev = None
    for d, f in reversed(items):
        if prev is not None:
            v = powers(prev - d) @ v
        v = v * f
        prev = d
    if prev is not None:
        v = powers(prev) @ v
    return v


def _site_functions(chi: CharacterSystem):
    """(site, values of chi_site on Z/m) in increasing site order."""
    rows = _char_rows(chi.m)
    return [(int(k[0]), rows[int(e)]) for k, e in zip(chi.keys, chi.values)]


def _require_1d(chi: CharacterSystem, what: str) -> None:
    if chi.dim != 1:
        raise ValueError(f"{what} is defined on Z only (D = 1), got D = {chi.dim}")


def _stationary_coefficient(spec: MarkovSpec, funcs) -> complex:
    """<M_f0 Q^{g1} M_f1 ... Q^{gr} [f_r], nu> for (site, function) pairs sorted by site."""
    if not funcs:
        return 1 + 0j
    powers = _Powers(spec.transition)
    s0, f0 = funcs[0]
    tail = [(s - s0, f) for s, f in funcs[1:]]
    v = f0 * _chain_from_anchor(powers, tail, spec.n_states)
    return complex(spec.stationary @ v)


def fourier_markov(chi: CharacterSystem, spec: MarkovSpec) -> complex:
    """<chi, mu> for the stationary Markov measure mu.

    The support is translated to start at 0 (valid by stationarity) and the
    operator chain M_{chi_0} Q M_{chi_1} Q ... Q [chi_N] is paired with nu;
    runs of trivial sites become powers of Q.
    """
    _require_1d(chi, "fourier_markov")
    if spec.block != 1:
        raise ValueError("fourier_markov needs a chain on Z/m itself; use fourier_nstep for block chains")
    if chi.m != spec.m:
        raise ValueError("modulus mismatch")
    return _stationary_coefficient(spec, _site_functions(chi))


def transfer_blocks(Q) -> list[tuple[int, int, np.ndarray]]:
    """All (xi, zeta, P) with P = M_xi Q M_zeta Q and zeta nontrivial."""
    Q = np.asarray(Q, dtype=float)
    m = Q.shape[0]
    rows = _char_rows(m)
    out = []
    for xi in range(m):
        for zeta in range(1, m):
            P = np.diag(rows[xi]) @ Q @ np.diag(rows[zeta]) @ Q
            out.append((xi, zeta, P))
    return out


def sup_operator_norm(P: np.ndarray) -> float:
    """Operator norm for the sup-norm on C^A: the largest absolute row sum."""
    return float(np.abs(P).sum(axis=1).max())


def markov_certificate(Q) -> MixingCertificate:
    """C = max over xi and nontrivial zeta of ||M_xi Q M_zeta Q||_inf."""
    if isinstance(Q, MarkovSpec):
        Q = Q.transition
    Q = np.asarray(Q, dtype=float)
    violations = tuple(f"transition entry q[{a},{b}] = {Q[a, b]!r} is not positive"
                       for a, b in np.argwhere(Q <= 0))
    base = max(sup_operator_norm(P) for _, _, P in transfer_blocks(Q))
    return MixingCertificate("markov-C", base, "C^floor((R-1)/2)", violations)


@dataclass(frozen=True, eq=False)
class ConditionedMarkovSpec:
    """The Markov measure conditioned on the cylinder [word] over sites lo..lo+len(word)-1."""

    base: MarkovSpec
    lo: int
    word: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(int(a) % self.base.m for a in self.word))
        if cylinder_probability(self.base, self.word) <= 0:
            raise ValueError(f"word {self.word} has zero probability")

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def modulus(self) -> Modulus:
        return self.base.modulus

    @property
    def hi(self) -> int:
        return self.lo + len(self.word) - 1


def cylinder_probability(spec: MarkovSpec, word) -> float:
    if not word:
        return 1.0
    Q = spec.transition
    prob = spec.stationary[word[0]]
    for a, b in zip(word, word[1:]):
        prob *= Q[a, b]
    return float(prob)


def fourier_markov_conditioned(chi: CharacterSystem, spec: MarkovSpec, window, word) -> complex:
    """<chi, mu_[word]> for mu conditioned on the cylinder word over the interval ``window``.

    Splits into a left tail (sites before the window, driven by the reversed
    chain from the leftmost word symbol), the product of chi over the window,
    and a right tail (sites after the window, driven by Q from the rightmost
    word symbol). An empty word means no conditioning.
    """
    _require_1d(chi, "fourier_markov_conditioned")
    word = tuple(int(a) % spec.m for a in word)
    if not word:
        return fourier_markov(chi, spec)
    lo, hi = window
    if hi - lo + 1 != len(word):
        raise ValueError(f"window [{lo}, {hi}] does not match word length {len(word)}")
    if cylinder_probability(spec, word) <= 0:
        raise ValueError(f"word {word} has zero probability")
    funcs = _site_functions(chi)
    left = [(lo - s, f) for s, f in reversed(funcs) if s < lo]
    middle = [(s, f) for s, f in funcs if lo <= s <= hi]
    right = [(s - hi, f) for s, f in funcs if s > hi]

    value = 1 + 0j
    for s, f in middle:
        value *= f[word[s - lo]]
    if right:
        value *= _chain_from_anchor(_Powers(spec.transition), right, spec.m)[word[-1]]
    if left:
        value *= _chain_from_anchor(_Powers(spec.reversed_transition()), left, spec.m)[word[0]]
    return complex(value)


# ---------------------------------------------------------------- N-step Markov


def block_index(word, m: int) -> int:
    """Index of a block (a_1, ..., a_N) with a_1 most significant."""
    idx = 0
    for a in word:
        idx = idx * m + int(a)
    return idx


def block_words(m: int, N: int):
    return list(itertools.product(range(m), repeat=N))


def sliding_transition(table: np.ndarray, m: int, N: int) -> np.ndarray:
    """Chain on A^N moving (a_1..a_N) -> (a_2..a_N, b) with probability q^{a}_b."""
    size = m**N
    S = np.zeros((size, size))
    for s in range(size):
        for b in range(m):
            S[s, (s * m) % size + b] += table[s, b]
    return S


@dataclass(frozen=True, eq=False)
class NStepMarkovSpec:
    """N-step Markov measure: table[block_index(a_1..a_N), b] = P(next = b | previous N = a)."""

    modulus: Modulus
    order: int
    table: np.ndarray
    stationary: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "modulus", as_modulus(self.modulus))
        m, N = self.modulus.m, self.order
        if N < 1:
            raise ValueError(f"order must be >= 1, got {N}")
        T = np.array(self.table, dtype=float)
        if T.shape != (m**N, m):
            raise ValueError(f"table must have shape {(m**N, m)}, got {T.shape}")
        if (T < 0).any():
            raise ValueError("negative transition probability")
        if np.abs(T.sum(axis=1) - 1).max() > ROW_TOL:
            raise ValueError("a conditional row of the table does not sum to 1")
        nu = np.array(self.stationary, dtype=float)
        S = sliding_transition(T, m, N)
        if nu.shape != (m**N,) or abs(nu.sum() - 1) > ROW_TOL or np.abs(nu @ S - nu).max() > STATIONARY_TOL:
            raise ValueError("block distribution is not stationary for the sliding block chain")
        T.setflags(write=False)
        nu.setflags(write=False)
        object.__setattr__(self, "table", T)
        object.__setattr__(self, "stationary", nu)

    @classmethod
    def from_table(cls, modulus, order: int, table) -> "NStepMarkovSpec":
        modulus = as_modulus(modulus)
        T = np.asarray(table, dtype=float)
        nu = stationary_vector(sliding_transition(T, modulus.m, order), require_positive=False)
        return cls(modulus, order, T, nu)

    @property
    def m(self) -> int:
        return self.modulus.m


def nstep_block_code(spec: NStepMarkovSpec) -> MarkovSpec:
    """The 1-step chain on A^N obtained by reading the sequence in disjoint N-blocks.

    p^{(a_1..a_N)}_{(b_1..b_N)} = prod_j q^{(a_j..a_N, b_1..b_{j-1})}_{b_j}.
    """
    m, N = spec.m, spec.order
    words = block_words(m, N)
    size = len(words)
    P = np.zeros((size, size))
    for ia, a in enumerate(words):
        for ib, b in enumerate(words):
            prob = 1.0
            for j in range(N):
                context = a[j:] + b[:j]
                prob *= spec.table[block_index(context, m), b[j]]
            P[ia, ib] = prob
    return MarkovSpec(spec.modulus, P, spec.stationary, block=N)


def fourier_nstep(chi: CharacterSystem, spec: NStepMarkovSpec) -> complex:
    """<chi, mu> for an N-step Markov measure via N-block coding.

    The support is shifted to start at 0 and cut into aligned N-blocks; each
    block carries a character of (Z/m)^N, evaluated on block states.
    """
    _require_1d(chi, "fourier_nstep")
    if chi.m != spec.m:
        raise ValueError("modulus mismatch")
    if chi.is_trivial():
        return 1 + 0j
    m, N = spec.m, spec.order
    block_chain = nstep_block_code(spec)
    rows = _char_rows(m)
    words = np.array(block_words(m, N), dtype=np.int64).reshape(-1, N)
    start = int(chi.keys[0, 0])
    per_block: dict[int, np.ndarray] = {}
    for site, e in zip(chi.keys[:, 0], chi.values):
        b, offset = divmod(int(site) - start, N)
        f = per_block.setdefault(b, np.ones(len(words), dtype=complex))
        f *= rows[int(e)][words[:, offset]]
    funcs = sorted(per_block.items())
    return _stationary_coefficient(block_chain, funcs)


# ---------------------------------------------------------------- Haar and dispatch


@dataclass(frozen=True)
class HaarSpec:
    modulus: Modulus

    def __post_init__(self):
        object.__setattr__(self, "modulus", as_modulus(self.modulus))

    @property
    def m(self) -> int:
        return self.modulus.m


def haar_fourier(chi: CharacterSystem) -> complex:
    return 1 + 0j if chi.is_trivial() else 0j


def fourier(chi: CharacterSystem, mu) -> complex:
    """Dispatch <chi, mu> on the measure type."""
    if isinstance(mu, BernoulliSpec):
        return fourier_bernoulli(chi, mu)
    if isinstance(mu, MarkovSpec):
        return fourier_markov(chi, mu)
    if isinstance(mu, NStepMarkovSpec):
        return fourier_nstep(chi, mu)
    if isinstance(mu, ConditionedMarkovSpec):
        return fourier_markov_conditioned(chi, mu.base, (mu.lo, mu.hi), mu.word)
    if isinstance(mu, HaarSpec):
        return haar_fourier(chi)
    raise TypeError(f"unsupported measure {type(mu).__name__}")


def certificate(mu) -> MixingCertificate:
    if isinstance(mu, BernoulliSpec):
        return bernoulli_certificate(mu)
    if isinstance(mu, MarkovSpec):
        return markov_certificate(mu.transition)
    if isinstance(mu, NStepMarkovSpec):
        cert = markov_certificate(nstep_block_code(mu).transition)
        bad = tuple(f"table entry q[{a},{b}] is not positive" for a, b in np.argwhere(mu.table <= 0))
        return MixingCertificate(cert.kind, cert.base, "C^floor((R/N-1)/2) on the block chain", bad)
    if isinstance(mu, ConditionedMarkovSpec):
        return markov_certificate(mu.base.transition)
    raise TypeError(f"no certificate for {type(mu).__name__}")
