"""The fourteen acceptance criteria, shared by ``lcahaar selftest`` and the test suite.

Each criterion returns (passed, detail). Randomized criteria use fixed seeds so
a run is reproducible. Runtimes are recorded next to the laptop targets but do
not decide pass/fail.
"""

from __future__ import annotations

import contextlib
import io
import itertools
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from unittest import mock

import numpy as np

from . import algebra, oracles
from .analysis import (cesaro_average, cylinder_distribution, cylinder_distribution_bruteforce,
                       density_above, fourier_decay, fraction_below, gamma_constant,
                       mean_gap_frequency, rank_trace, translate_distribution, tv_distance)
from .characters import CharacterSystem, evaluate, pullback
from .lca import (AffineCa, LcaPolynomial, NestedForm, affine_drift, compose, frobenius_power,
                  iterate_drift, pow_nested_lucas, pow_square_multiply, to_nested_form)
from .measures import (BernoulliSpec, MarkovSpec, NStepMarkovSpec, fourier_bernoulli, fourier_markov,
                       fourier_nstep, markov_certificate, nstep_block_code, bernoulli_certificate)


@dataclass(frozen=True)
class Result:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    target_seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.number:2d} {self.name}: {self.detail} "
                f"({self.seconds:.1f}s, target {self.target_seconds:.0f}s)")


@dataclass(frozen=True)
class BudgetExceeded:
    number: int
    name: str
    elapsed: float


# ---------------------------------------------------------------- helpers


def _random_poly(rng, p: int, dim: int, max_terms: int = 4, spread: int = 3) -> LcaPolynomial:
    n = int(rng.integers(1, max_terms + 1))
    terms = {}
    while len(terms) < n:
        key = tuple(int(x) for x in rng.integers(-spread, spread + 1, size=dim))
        terms[key] = int(rng.integers(1, p))
    return LcaPolynomial(terms, p, dim)


def _random_character(rng, m: int, rank: int, lo: int = -8, hi: int = 8, dim: int = 1) -> CharacterSystem:
    sites = set()
    while len(sites) < rank:
        sites.add(tuple(int(x) for x in rng.integers(lo, hi + 1, size=dim)))
    return CharacterSystem({s: int(rng.integers(1, m)) for s in sites}, m, dim)


def _random_stochastic(rng, k: int) -> np.ndarray:
    Q = rng.uniform(0.05, 1.0, size=(k, k))
    return Q / Q.sum(axis=1, keepdims=True)


def _lind(m: int = 2) -> LcaPolynomial:
    return LcaPolynomial({(-1,): 1, (1,): 1}, m)


def _one_plus_shift(m: int = 2) -> LcaPolynomial:
    return LcaPolynomial({(0,): 1, (1,): 1}, m)


# ---------------------------------------------------------------- criteria


def c01_lucas():
    bad = []
    for p in (2, 3, 5, 7):
        row = np.array([1], dtype=np.int64)
        for N in range(2001):
            if N:
                row = np.concatenate(([1], (row[1:] + row[:-1]) % p, [1]))
            got = [algebra.lucas_binomial(N, n, p) for n in range(N + 1)]
            if got != row.tolist():
                n = next(i for i, (a, b) in enumerate(zip(got, row.tolist())) if a != b)
                bad.append((p, N, n))
                break
    if bad:
        p, N, n = bad[0]
        return False, f"lucas_binomial({N},{n},{p}) disagrees with Pascal's triangle"
    return True, "all 0<=n<=N<=2000, p in {2,3,5,7} exact"


def c02_frobenius():
    rng = np.random.default_rng(2)
    for trial in range(100):
        p = int(rng.choice([2, 3, 5]))
        dim = int(rng.integers(1, 3))
        k = int(rng.integers(0, 4))
        F = _random_poly(rng, p, dim)
        if frobenius_power(F, k) != pow_square_multiply(F, p**k):
            return False, f"trial {trial}: F={F.to_text()} p={p} k={k}"
    return True, "100 random F, D in {1,2}, p in {2,3,5}, k<=3 exact"


def c03_nested_lucas():
    rng = np.random.default_rng(3)
    checked = 0
    for trial in range(50):
        p = int(rng.choice([2, 3, 5]))
        J = int(rng.integers(1, 4))
        dim = int(rng.integers(1, 3))
        steps = []
        while len(steps) < J:
            s = tuple(int(x) for x in rng.integers(-3, 4, size=dim))
            if any(s):
                steps.append(s)
        nf = NestedForm(algebra.Modulus(p), int(rng.integers(1, p)),
                        tuple(int(x) for x in rng.integers(-2, 3, size=dim)),
                        tuple((int(rng.integers(1, p)), s) for s in steps))
        G = nf.to_polynomial()
        for N in range(201):
            if pow_nested_lucas(nf, N) != pow_square_multiply(G, N):
                return False, f"trial {trial}: N={N} p={p} J={J}"
            checked += 1
    return True, f"{checked} (form, N) pairs, J<=3, N<=200, p in {{2,3,5}} exact"


def c04_functoriality():
    rng = np.random.default_rng(4)
    worst = 0.0
    for trial in range(200):
        m = int(rng.choice([2, 3, 4, 5, 6]))
        dim = int(rng.integers(1, 3))
        F, G = _random_poly(rng, m, dim), _random_poly(rng, m, dim)
        chi = _random_character(rng, m, int(rng.integers(1, 5)), -4, 4, dim)
        if pullback(chi, compose(F, G)) != pullback(pullback(chi, F), G):
            return False, f"trial {trial}: chi o (F o G) != (chi o F) o G"
        # evaluate-level duality on a random finite configuration
        lo, hi = chi.bounding_box()
        pad = 4
        grid = itertools.product(*[range(a - pad, b + pad + 1) for a, b in zip(lo, hi)])
        config = {site: int(rng.integers(0, m)) for site in grid}
        image = F.apply_window(config, chi.support())
        err = abs(evaluate(pullback(chi, F), config) - evaluate(chi, image))
        worst = max(worst, err)
        if err > 1e-12:
            return False, f"trial {trial}: duality error {err:.3g}"
    return True, f"200 triples exact, duality max error {worst:.2g}"


def c05_bernoulli_bound():
    rng = np.random.default_rng(5)
    worst = -np.inf
    count = 0
    for m in (2, 3, 5):
        for _ in range(20):
            beta = BernoulliSpec(m, rng.dirichlet(np.ones(m)))
            c = bernoulli_certificate(beta).base
            for _ in range(500 // 3 + 1):
                chi = _random_character(rng, m, int(rng.integers(1, 21)), -30, 30)
                gap = abs(fourier_bernoulli(chi, beta)) - c ** chi.rank
                worst = max(worst, gap)
                count += 1
                if gap > 1e-12:
                    return False, f"m={m}: |<chi,beta>| exceeds c^rank by {gap:.3g}"
    spike = fourier_bernoulli(CharacterSystem({(-1,): 1, (1,): 1}, 2), BernoulliSpec(2, (0.9, 0.1)))
    if abs(abs(spike) - 0.64) > 1e-12 or abs(spike - 0.64) > 1e-12:
        return False, f"Lind spike {spike!r} != 0.64"
    return True, f"{count} (chi, beta) pairs within bound (max excess {worst:.2g}); spike 0.64"


def c06_markov_paths():
    rng = np.random.default_rng(6)
    worst = 0.0
    count = 0
    for chain in range(20):
        k = 2 if chain < 10 else 3
        spec = MarkovSpec.from_transition(k, _random_stochastic(rng, k))
        for width in range(1, 7):
            for inner in itertools.product((0, 1), repeat=max(0, width - 2)):
                offsets = [0] + [i + 1 for i, b in enumerate(inner) if b] + ([width - 1] if width > 1 else [])
                start = int(rng.integers(-5, 6))
                chi = CharacterSystem({(start + o,): int(rng.integers(1, k)) for o in offsets}, k)
                got = fourier_markov(chi, spec)
                want = oracles.markov_path_sum(chi, spec.transition, spec.stationary)
                err = abs(got - want)
                worst = max(worst, err)
                count += 1
                if err > 1e-10:
                    return False, f"chain {chain}, chi={chi.to_text()}: error {err:.3g}"
    return True, f"{count} characters over 20 chains, max error {worst:.2g}"


def c07_markov_certificate():
    rng = np.random.default_rng(7)
    worst_c = 0.0
    worst_gap = -np.inf
    for chain in range(20):
        k = 2 if chain < 10 else 3
        Q = _random_stochastic(rng, k)
        spec = MarkovSpec.from_transition(k, Q)
        cert = markov_certificate(Q)
        worst_c = max(worst_c, cert.base)
        if not cert.base < 1 - 1e-9:
            return False, f"chain {chain}: C = {cert.base!r} not below 1"
        for _ in range(25):
            chi = _random_character(rng, k, int(rng.integers(1, 13)), -15, 15)
            gap = abs(fourier_markov(chi, spec)) - cert.bound(chi.rank)
            worst_gap = max(worst_gap, gap)
            if gap > 1e-9:
                return False, f"chain {chain}: envelope exceeded by {gap:.3g} at rank {chi.rank}"
    for k in (2, 3, 5):
        C = markov_certificate(np.full((k, k), 1.0 / k)).base
        if abs(C) > 1e-12:
            return False, f"uniform {k}-state chain has C = {C!r}"
    return True, f"max C {worst_c:.4f}; 500 characters within envelope (max excess {worst_gap:.2g}); uniform C = 0"


def c08_nstep():
    rng = np.random.default_rng(8)
    worst = 0.0
    worst_row = 0.0
    for _ in range(10):
        table = _random_stochastic(rng, 4)[:, :2]
        table = table / table.sum(axis=1, keepdims=True)
        spec = NStepMarkovSpec.from_table(2, 2, table)
        block = nstep_block_code(spec).transition
        worst_row = max(worst_row, float(np.abs(block.sum(axis=1) - 1).max()))
        for width in range(1, 5):
            for inner in itertools.product((0, 1), repeat=max(0, width - 2)):
                offsets = [0] + [i + 1 for i, b in enumerate(inner) if b] + ([width - 1] if width > 1 else [])
                start = int(rng.integers(-3, 4))
                chi = CharacterSystem({(start + o,): 1 for o in offsets}, 2)
                err = abs(fourier_nstep(chi, spec) - oracles.nstep_path_sum(chi, spec.table, spec.stationary, 2, 2))
                worst = max(worst, err)
                if err > 1e-10:
                    return False, f"chi={chi.to_text()}: error {err:.3g}"
    if worst_row > 1e-12:
        return False, f"block matrix row sums off by {worst_row:.3g}"
    return True, f"max error {worst:.2g}, block row error {worst_row:.2g}"


def c09_cylinder():
    rng = np.random.default_rng(9)
    worst = 0.0
    count = 0
    windows = ([0], [0, 1], [0, 2, 3])
    for m in (2, 3):
        measures = [BernoulliSpec(m, rng.dirichlet(np.ones(m))),
                    MarkovSpec.from_transition(m, _random_stochastic(rng, m))]
        for F in (_lind(m), _one_plus_shift(m)):
            for mu in measures:
                for n in range(7):
                    for W in windows:
                        a = cylinder_distribution(F, n, mu, W)
                        b = cylinder_distribution_bruteforce(F, n, mu, W)
                        d = tv_distance(a, b)
                        worst = max(worst, d)
                        count += 1
                        if d >= 1e-9:
                            return False, f"m={m}, F={F.to_text()}, n={n}, W={W}: TV {d:.3g}"
    return True, f"{count} cases, max TV {worst:.2g}"


def _lind_setup(N: int = 1024):
    F = _lind(2)
    beta = BernoulliSpec(2, (0.9, 0.1))
    chi = CharacterSystem.single_site(2)
    return F, beta, chi, fourier_decay(chi, F, beta, N)


def c10_density_convergence():
    F, beta, chi, trace = _lind_setup()
    frac = fraction_below(trace, 0.01)
    ces = cesaro_average(trace, 1024)
    spikes = [abs(abs(trace.coefficients[2**k]) - 0.64) for k in range(10)]
    ok = frac > 0.9 and ces < 0.05 and max(spikes) <= 1e-12
    return ok, (f"fraction below 0.01 = {frac:.4f}, Cesaro = {ces:.4f}, "
                f"max |spike - 0.64| = {max(spikes):.2g}")


def c11_diffusion():
    chi = CharacterSystem.single_site(2)
    cases = {
        "1+s": _one_plus_shift(2),
        "s^-1+s": _lind(2),
        "1+s+s^2": LcaPolynomial({(0,): 1, (1,): 1, (2,): 1}, 2),
        "1+s^(1,0)+s^(0,1)": LcaPolynomial({(0, 0): 1, (1, 0): 1, (0, 1): 1}, 2),
    }
    out = []
    ok = True
    for name, F in cases.items():
        c = chi if F.dim == 1 else CharacterSystem.single_site(2, dim=2)
        d = density_above(rank_trace(c, F, 4096), 8)
        out.append(f"{name}: {d:.4f}")
        ok &= d >= 0.95
    return ok, ", ".join(out)


def c12_affine():
    F, beta, chi, linear = _lind_setup()
    G = AffineCa(F, 1)
    affine = fourier_decay(chi, G, beta, 1024)
    mag = float(np.abs(affine.magnitudes - linear.magnitudes).max())
    if mag > 1e-12:
        return False, f"magnitudes differ by {mag:.3g}"
    worst = 0.0
    for n in range(1, 7):
        # for this automaton (coefficient sum 0) the drift of G^n is h_n = 1 for every n >= 1
        if iterate_drift(G, n) != affine_drift(G, n):
            return False, f"drift of G^{n} differs from h_{n}"
        h = affine_drift(G, n)
        for W in ([0], [0, 1], [0, 1, 2]):
            law = cylinder_distribution(G, n, beta, W)
            moved = translate_distribution(cylinder_distribution(F, n, beta, W), [h] * len(W))
            brute = cylinder_distribution_bruteforce(G, n, beta, W)
            d = max(tv_distance(law, moved), tv_distance(brute, moved))
            worst = max(worst, d)
            if d >= 1e-9:
                return False, f"n={n}, W={W}: TV {d:.3g}"
    return True, f"magnitude gap {mag:.2g}; translate TV max {worst:.2g}"


def c13_gap():
    cases = [(_one_plus_shift(2), 2), (LcaPolynomial({(0,): 1, (2,): 1}, 2), 3),
             (LcaPolynomial({(0,): 1, (1,): 1, (2,): 1}, 2), 4)]
    for F, want in cases:
        got = gamma_constant(to_nested_form(F))
        if got != want:
            return False, f"Gamma({F.to_text()}) = {got}, expected {want}"
    freq = mean_gap_frequency(16, 2, 2)
    ok = abs(freq - 1 / 8) <= 0.02
    return ok, f"Gamma values 2, 3, 4 exact; mean frequency {freq:.4f} vs 0.125"


_CLI_CONFIG = """\
[automaton]
modulus = 2
dimension = 1
terms = 1@(-1) + 1@(1)
constant = 0

[character]
terms = 1@(0)

[measure]
kind = bernoulli
weights = 0.9, 0.1

[run]
horizon = 256
window = 0, 1, 2
threshold_R = 8
epsilon = 0.01
"""


def c14_cli_determinism():
    from .cli import main

    runs = {
        "rank-trace": [],
        "decay": [],
        "cylinder": ["--horizon", "5"],
        "certify": [],
        "gap-scan": ["--automaton", "1@(0)+1@(1)", "--horizon", "4095"],
    }
    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "run.ini")
        with open(cfg, "w") as fh:
            fh.write(_CLI_CONFIG)
        for cmd, extra in runs.items():
            outputs = []
            for jobs in (1, 8):
                path = os.path.join(tmp, f"{cmd}-{jobs}.csv")
                sink = io.StringIO()
                with contextlib.redirect_stdout(sink), contextlib.redirect_stderr(sink):
                    code = main([cmd, "--config", cfg, "--jobs", str(jobs), "--out", path, *extra])
                if code != 0:
                    return False, f"{cmd} --jobs {jobs} exited with {code}"
                with open(path, "rb") as fh:
                    outputs.append(fh.read())
            if outputs[0] != outputs[1]:
                return False, f"{cmd}: --jobs 1 and --jobs 8 outputs differ"
    return True, f"{len(runs)} subcommands byte-identical across --jobs 1 and 8"


CRITERIA = [
    (1, "Lucas correctness", 10, c01_lucas),
    (2, "Fermat/Frobenius", 5, c02_frobenius),
    (3, "Nested-Lucas power", 30, c03_nested_lucas),
    (4, "Pullback functoriality and duality", 5, c04_functoriality),
    (5, "Bernoulli bound", 5, c05_bernoulli_bound),
    (6, "Markov engine vs path enumeration", 20, c06_markov_paths),
    (7, "Markov certificate", 30, c07_markov_certificate),
    (8, "N-step via block coding", 20, c08_nstep),
    (9, "Cylinder inversion = brute force", 60, c09_cylinder),
    (10, "Convergence in density", 30, c10_density_convergence),
    (11, "Diffusion in density", 60, c11_diffusion),
    (12, "Affine reduction", 30, c12_affine),
    (13, "Gap diagnostics", 10, c13_gap),
    (14, "CLI determinism", 60, c14_cli_determinism),
]


def run_criterion(number: int) -> Result:
    for num, name, target, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            try:
                passed, detail = fn()
            except Exception as exc:  # a crash is a failure of that criterion
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            return Result(num, name, bool(passed), detail, time.perf_counter() - t0, target)
    raise KeyError(f"no criterion {number}")


def _corrupt_lucas_table(p: int):
    table = [list(row) for row in _clean_table(p)]
    table[p - 1][1] = (table[p - 1][1] + 1) % p
    return tuple(tuple(r) for r in table)


_clean_table = algebra.digit_binomial_table


def run(budget: float | None = None, inject_fault: str | None = None, only=None, stream=None):
    """Run the criteria in order; returns the results, or BudgetExceeded."""
    stream = stream if stream is not None else sys.stdout
    patch = (mock.patch.object(algebra, "digit_binomial_table", _corrupt_lucas_table)
             if inject_fault == "lucas" else contextlib.nullcontext())
    results = []
    start = time.perf_counter()
    with patch:
        for num, name, _, _ in CRITERIA:
            if only and num not in only:
                continue
            res = run_criterion(num)
            results.append(res)
            print(res.line(), file=stream, flush=True)
            if budget is not None and time.perf_counter() - start > budget:
                return BudgetExceeded(num, name, time.perf_counter() - start)
    return results
