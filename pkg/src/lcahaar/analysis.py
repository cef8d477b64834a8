"""Diffusion and convergence statistics for iterated linear/affine CA.

Rank traces, Fourier-coefficient decay with Cesaro averages, exact cylinder
distributions of F^n mu (by Fourier inversion and by brute-force
enumeration), and the p-ary gap diagnostics.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import algebra
from ._sparse import ResourceLimitError
from .characters import CharacterSystem, affine_phase, pullback, pullback_iterated
from .lca import AffineCa, LcaPolynomial, NestedForm, iterate_drift, as_site, pow_frobenius, pow_square_multiply
from .measures import (BernoulliSpec, ConditionedMarkovSpec, HaarSpec, MarkovSpec, NStepMarkovSpec,
                       fourier)

CHECKPOINT_EVERY = 64
DEFAULT_MAX_WINDOW = 4096
DEFAULT_MAX_ENUM = 1 << 22
_BLOCK = 1 << 15


class SelfCheckError(AssertionError):
    """Two independent computations of the same quantity disagreed."""


def _split(automaton) -> tuple[LcaPolynomial, AffineCa]:
    if isinstance(automaton, AffineCa):
        return automaton.linear, automaton
    return automaton, AffineCa(automaton, 0)


def _map_ordered(fn, chunks, jobs: int):
    if jobs <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, chunks))


def _ranges(N: int, jobs: int) -> list[tuple[int, int]]:
    """Split 0..N into at most ``jobs`` contiguous half-open ranges."""
    jobs = max(1, min(jobs, N + 1))
    bounds = np.linspace(0, N + 1, jobs + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


# ---------------------------------------------------------------- rank traces


@dataclass(frozen=True, eq=False)
class RankTrace:
    character: CharacterSystem
    automaton: object
    horizon: int
    ranks: np.ndarray

    @property
    def entries(self) -> list[tuple[int, int]]:
        return [(n, int(r)) for n, r in enumerate(self.ranks)]


def _iterates(chi, F, n0: int, n1: int, max_support, checkpoint: int):
    """Yield (n, chi o F^n) for n0 <= n < n1 by incremental pullback, with periodic cross-checks."""
    current = pullback_iterated(chi, F, n0, max_support)
    for n in range(n0, n1):
        if n > n0:
            current = pullback(current, F, max_support)
            if checkpoint and n % checkpoint == 0:
                if current != pullback_iterated(chi, F, n, max_support):
                    raise SelfCheckError(f"incremental pullback diverged from direct power at n={n}")
        yield n, current


def rank_trace(chi: CharacterSystem, automaton, N: int, max_support: int | None = None,
               jobs: int = 1, checkpoint: int = CHECKPOINT_EVERY) -> RankTrace:
    """rank(chi o F^n) for n = 0..N."""
    F, _ = _split(automaton)

    def run(bounds):
        return [len(c) for _, c in _iterates(chi, F, *bounds, max_support, checkpoint)]

    parts = _map_ordered(run, _ranges(N, jobs), jobs)
    ranks = np.array([r for part in parts for r in part], dtype=np.int64)
    return RankTrace(chi, automaton, N, ranks)


def density_above(trace: RankTrace, R: float) -> float:
    """Fraction of 1 <= n <= N with rank(chi o F^n) > R."""
    N = trace.horizon
    if N < 1:
        return 0.0
    return float(np.count_nonzero(trace.ranks[1:] > R)) / N


# ---------------------------------------------------------------- Fourier decay


@dataclass(frozen=True, eq=False)
class DecayTrace:
    """coefficients[n] = <chi o G^n, mu>; cesaro[n] = mean of |coefficients[1..n]| (cesaro[0] = |c_0|)."""

    coefficients: np.ndarray
    cesaro: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.coefficients) - 1

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.coefficients)


def _check_pairing(automaton, mu) -> None:
    F, _ = _split(automaton)
    if isinstance(mu, (MarkovSpec, NStepMarkovSpec, ConditionedMarkovSpec)) and F.dim != 1:
        raise ValueError("Markov measures are defined on Z; the automaton must have D = 1")
    if not isinstance(mu, (BernoulliSpec, MarkovSpec, NStepMarkovSpec, ConditionedMarkovSpec, HaarSpec)):
        raise TypeError(f"unsupported measure {type(mu).__name__}")
    if mu.m != F.m:
        raise ValueError(f"modulus mismatch: automaton mod {F.m}, measure mod {mu.m}")


def fourier_decay(chi: CharacterSystem, automaton, mu, N: int, jobs: int = 1,
                  max_support: int | None = None) -> DecayTrace:
    """<chi o G^n, mu> for n = 0..N, including the phase K_n for affine G."""
    _check_pairing(automaton, mu)
    F, G = _split(automaton)

    def run(bounds):
        out = []
        for n, c in _iterates(chi, F, *bounds, max_support, CHECKPOINT_EVERY):
            out.append(affine_phase(chi, G, n) * fourier(c, mu))
        return out

    parts = _map_ordered(run, _ranges(N, jobs), jobs)
    coeffs = np.array([c for part in parts for c in part], dtype=complex)
    mags = np.abs(coeffs)
    cesaro = np.empty(len(coeffs))
    cesaro[0] = mags[0]
    # running compensated sums; identical whatever the job split
    partial = 0.0
    comp = 0.0
    for n in range(1, len(coeffs)):
        y = mags[n] - comp
        t = partial + y
        comp = (t - partial) - y
        partial = t
        cesaro[n] = partial / n
    return DecayTrace(coeffs, cesaro)


def cesaro_average(trace: DecayTrace, N: int | None = None) -> float:
    """(1/N) * sum_{n=1}^N |coefficient(n)|."""
    N = trace.horizon if N is None else N
    if N > trace.horizon:
        raise ValueError(f"N = {N} exceeds the trace horizon {trace.horizon}")
    if N < 1:
        return 0.0
    return math.fsum(trace.magnitudes[1:N + 1]) / N


def fraction_below(trace: DecayTrace, eps: float) -> float:
    N = trace.horizon
    if N < 1:
        return 0.0
    return float(np.count_nonzero(trace.magnitudes[1:] < eps)) / N


# ---------------------------------------------------------------- cylinder distributions


@dataclass(frozen=True, eq=False)
class CylinderDistribution:
    """Law of the word on ``window``; probabilities[i] belongs to the i-th word in
    lexicographic order (first window site most significant)."""

    modulus: int
    window: tuple[tuple[int, ...], ...]
    probabilities: np.ndarray
    method: str  # "inversion" or "brute-force"

    def words(self):
        return itertools.product(range(self.modulus), repeat=len(self.window))

    def as_dict(self) -> dict:
        return {w: float(p) for w, p in zip(self.words(), self.probabilities)}

    def __getitem__(self, word) -> float:
        idx = 0
        for a in word:
            idx = idx * self.modulus + int(a) % self.modulus
        return float(self.probabilities[idx])


def _window(window, dim: int) -> tuple[tuple[int, ...], ...]:
    sites = tuple(as_site(x, dim) for x in window)
    if len(set(sites)) != len(sites):
        raise ValueError("window sites must be distinct")
    if not sites:
        raise ValueError("window must contain at least one site")
    return sites


def power(F: LcaPolynomial, n: int) -> LcaPolynomial:
    return pow_frobenius(F, n) if F.modulus.is_prime else pow_square_multiply(F, n)


def _validated(probs: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    if probs.min() < -tol:
        raise SelfCheckError(f"negative probability {probs.min()!r} beyond tolerance")
    if abs(math.fsum(probs) - 1.0) > tol:
        raise SelfCheckError(f"probabilities sum to {math.fsum(probs)!r}")
    # clamp only after the validity check passed
    return np.clip(probs, 0.0, None)


def cylinder_distribution(automaton, n: int, mu, window,
                          max_window: int = DEFAULT_MAX_WINDOW) -> CylinderDistribution:
    """Law of (G^n a)|_W for a ~ mu, by finite Fourier inversion over the characters supported in W.

    P[b] = m^{-|W|} sum_chi conj(chi(b)) <chi o G^n, mu>.
    """
    _check_pairing(automaton, mu)
    F, G = _split(automaton)
    m = F.m
    W = _window(window, F.dim)
    size = m ** len(W)
    if size > max_window:
        raise ResourceLimitError(f"window needs {size} characters, limit is {max_window}")
    Fn = power(F, n)
    h = iterate_drift(G, n)
    coeffs = np.empty(size, dtype=complex)
    for idx, exps in enumerate(itertools.product(range(m), repeat=len(W))):
        chi = CharacterSystem(zip(W, exps), F.modulus, F.dim)
        if chi.is_trivial():
            coeffs[idx] = 1.0
            continue
        phase = algebra.cyclic_char_value(chi.exponent_sum(), h, m)
        coeffs[idx] = phase * fourier(pullback(chi, Fn), mu)
    # sum_k c[k] exp(-2 pi i k.b / m) over the |W|-dimensional grid is a forward DFT
    grid = np.fft.fftn(coeffs.reshape((m,) * len(W))).reshape(-1)
    if np.abs(grid.imag).max() > 1e-9 * size:
        raise SelfCheckError("inverted distribution has a non-negligible imaginary part")
    probs = _validated(grid.real / size)
    return CylinderDistribution(m, W, probs, "inversion")


def _dependence_region(W, keys) -> list[tuple[int, ...]]:
    return sorted({tuple(a + b for a, b in zip(x, u)) for x in W for u in keys})


def _weights(mu, region, digits: np.ndarray, cache: dict) -> np.ndarray:
    """mu-probability of each configuration (rows of ``digits``) on ``region``."""
    if isinstance(mu, HaarSpec):
        return np.full(digits.shape[0], float(mu.m) ** -len(region))
    if isinstance(mu, BernoulliSpec):
        w = np.array(mu.weights)
        return np.prod(w[digits], axis=1)
    if isinstance(mu, MarkovSpec):
        if "gaps" not in cache:
            sites = [s[0] for s in region]
            cache["gaps"] = [np.linalg.matrix_power(mu.transition, b - a) for a, b in zip(sites, sites[1:])]
        out = mu.stationary[digits[:, 0]].copy()
        for i, Qg in enumerate(cache["gaps"]):
            out *= Qg[digits[:, i], digits[:, i + 1]]
        return out
    if isinstance(mu, NStepMarkovSpec):
        N, m = mu.order, mu.m
        ctx = np.zeros(digits.shape[0], dtype=np.int64)
        for i in range(N):
            ctx = ctx * m + digits[:, i]
        out = mu.stationary[ctx].copy()
        size = m**N
        for t in range(N, digits.shape[1]):
            out *= mu.table[ctx, digits[:, t]]
            ctx = (ctx * m) % size + digits[:, t]
        return out
    raise TypeError(f"brute force does not support {type(mu).__name__}")


def cylinder_distribution_bruteforce(automaton, n: int, mu, window,
                                     max_enum: int = DEFAULT_MAX_ENUM,
                                     jobs: int = 1) -> CylinderDistribution:
    """Law of (G^n a)|_W by enumerating every configuration on the dependence region.

    Linear automata are pushed through the polynomial of F^n. Affine automata
    apply their local rule n times, so the drift formula is never used here.
    """
    _check_pairing(automaton, mu)
    if isinstance(mu, ConditionedMarkovSpec):
        raise TypeError("brute force does not support conditioned measures")
    F, G = _split(automaton)
    m, D = F.m, F.dim
    W = _window(window, D)

    if G.constant:
        layers = [list(W)]
        for _ in range(n):
            layers.append(_dependence_region(layers[-1], F.support()))
        layers.reverse()
        steps = [(F, G.constant)] * n
    else:
        Fn = power(F, n)
        layers = [_dependence_region(W, Fn.support()), list(W)]
        steps = [(Fn, 0)]
    region = layers[0]
    if isinstance(mu, (MarkovSpec, NStepMarkovSpec)):
        if D != 1:
            raise ValueError("Markov measures need D = 1")
        if isinstance(mu, NStepMarkovSpec):
            lo, hi = region[0][0], region[-1][0]
            hull = max(hi - lo + 1, mu.order)
            region = [(lo + i,) for i in range(hull)]
            layers[0] = region
    total = m ** len(region)
    if total > max_enum:
        raise ResourceLimitError(f"enumeration of {total} configurations exceeds the limit {max_enum}")

    # index maps: value at site x of layer k+1 = sum_u f_u * layer_k[x + u] (+ c)
    plans = []
    for k, (P, c) in enumerate(steps):
        pos = {s: i for i, s in enumerate(layers[k])}
        terms = P.terms
        cols = np.array([[pos[tuple(a + b for a, b in zip(x, u))] for u in terms] for x in layers[k + 1]],
                        dtype=np.int64).reshape(len(layers[k + 1]), len(terms))
        plans.append((cols, np.array(list(terms.values()), dtype=np.int64), c))
    place = m ** np.arange(len(region) - 1, -1, -1, dtype=np.int64)
    word_place = m ** np.arange(len(W) - 1, -1, -1, dtype=np.int64)
    cache: dict = {}
    _weights(mu, region, np.zeros((1, len(region)), dtype=np.int64), cache)

    def run(start):
        idx = np.arange(start, min(start + _BLOCK, total), dtype=np.int64)
        vals = (idx[:, None] // place[None, :]) % m
        w = _weights(mu, region, vals, cache)
        for cols, coeffs, c in plans:
            vals = (np.einsum("bij,j->bi", vals[:, cols], coeffs) + c) % m
        words = vals @ word_place
        return np.bincount(words, weights=w, minlength=m ** len(W))

    blocks = _map_ordered(run, list(range(0, total, _BLOCK)), jobs)
    stacked = np.array(blocks)
    probs = np.array([math.fsum(stacked[:, j]) for j in range(stacked.shape[1])])
    return CylinderDistribution(m, W, _validated(probs), "brute-force")


def tv_to_haar(dist: CylinderDistribution) -> float:
    """(1/2) sum_b |P[b] - m^{-|W|}|."""
    u = float(dist.modulus) ** -len(dist.window)
    return 0.5 * math.fsum(np.abs(dist.probabilities - u))


def tv_distance(a: CylinderDistribution, b: CylinderDistribution) -> float:
    if a.modulus != b.modulus or a.window != b.window:
        raise ValueError("distributions live on different windows")
    return 0.5 * math.fsum(np.abs(a.probabilities - b.probabilities))


def translate_distribution(dist: CylinderDistribution, shift) -> CylinderDistribution:
    """Law of b + h: P'[b] = P[b - h] componentwise mod m."""
    m = dist.modulus
    h = [int(x) % m for x in shift]
    if len(h) != len(dist.window):
        raise ValueError(f"shift word has length {len(h)}, window has {len(dist.window)} sites")
    grid = dist.probabilities.reshape((m,) * len(h))
    moved = np.roll(grid, shift=h, axis=tuple(range(len(h)))).reshape(-1)
    return CylinderDistribution(m, dist.window, moved, dist.method)


# ---------------------------------------------------------------- gap diagnostics


@dataclass(frozen=True)
class GapReport:
    gamma: int
    word: tuple[int, ...]
    digits: tuple[int, ...]
    positions: tuple[int, ...]
    frequency: float


def gap_word(gamma: int) -> tuple[int, ...]:
    """w = 0^gamma 1."""
    return (0,) * gamma + (1,)


def gamma_from_steps(steps, p: int) -> int:
    """max of the union of index sets + ceil(log_p(sum |S(m_j)|) + log_p(J)) + 2."""
    steps = [int(s) for s in steps]
    if not steps:
        raise ValueError("need at least one step")
    if any(s <= 0 for s in steps):
        raise ValueError(f"steps must be positive, got {steps}")
    sets = [algebra.index_set(s, p) for s in steps]
    top = max(max(s) for s in sets)
    # log_p(a) + log_p(b) = log_p(a*b), rounded up exactly
    return top + algebra.ceil_log(sum(len(s) for s in sets) * len(steps), p) + 2


def projected_steps(nf: NestedForm, coordinate: int | None = None) -> list[int]:
    """One coordinate of each step m_j; by default the first coordinate where no step vanishes."""
    steps = nf.steps
    if coordinate is None:
        for d in range(nf.dim):
            if all(s[d] != 0 for s in steps):
                coordinate = d
                break
        else:
            raise ValueError("no coordinate has nonzero projections for every step")
    proj = [s[coordinate] for s in steps]
    if any(x <= 0 for x in proj):
        raise ValueError(f"projected steps must be positive, got {proj} on coordinate {coordinate}")
    return proj


def gamma_constant(nf: NestedForm, coordinate: int | None = None) -> int:
    if nf.J == 0:
        raise ValueError("a single-term automaton has no steps")
    return gamma_from_steps(projected_steps(nf, coordinate), nf.modulus.m)


def word_frequency(word, s) -> float:
    """Overlapping occurrences of ``word`` in ``s`` divided by len(s)."""
    word, s = tuple(word), tuple(s)
    if not s:
        raise ValueError("empty string")
    k = len(word)
    hits = sum(1 for i in range(len(s) - k + 1) if s[i:i + k] == word)
    return hits / len(s)


def gap_scan(N: int, p: int, gamma: int, width: int | None = None) -> GapReport:
    """Occurrences of 0^gamma 1 in the base-p digits of N (least significant first)."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    exp = algebra.p_ary_expansion(N, p)
    digits = exp.padded(width) if width is not None else exp.digits
    word = gap_word(gamma)
    k = len(word)
    positions = tuple(i for i in range(len(digits) - k + 1) if digits[i:i + k] == word)
    freq = len(positions) / len(digits) if digits else 0.0
    return GapReport(gamma, word, tuple(digits), positions, freq)


def gap_frequencies(width: int, p: int, gamma: int) -> np.ndarray:
    """fr[w, P(N)] for every N < p^width, digits padded to ``width``."""
    total = p**width
    n = np.arange(total, dtype=np.int64)
    digits = (n[:, None] // (p ** np.arange(width, dtype=np.int64))[None, :]) % p
    k = gamma + 1
    hits = np.zeros(total, dtype=np.int64)
    for i in range(width - k + 1):
        ok = digits[:, i + gamma] == 1
        for j in range(gamma):
            ok &= digits[:, i + j] == 0
        hits += ok
    return hits / width


def mean_gap_frequency(width: int, p: int, gamma: int) -> float:
    return float(math.fsum(gap_frequencies(width, p, gamma)) / p**width)
