"""Command-line front end.

Output schemas (CSV, '.' decimal, floats written with repr):

    rank-trace   n,rank
    decay        n,re,im,abs,cesaro
    cylinder     method,word,probability
    certify      key,value
    gap-scan     N,position        (one row per occurrence of 0^G 1)

Words are written as concatenated digits when m <= 10 and ':'-separated
otherwise. Summary lines go to stdout when --out is given, else to stderr.

Exit codes: 0 ok, 2 config/validation error, 3 resource limit or runtime
budget, 4 self-check discrepancy.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

from . import __version__
from ._sparse import ExponentOverflowError, ResourceLimitError
from .analysis import (SelfCheckError, cesaro_average, cylinder_distribution,
                       cylinder_distribution_bruteforce, density_above, fourier_decay, fraction_below,
                       gamma_constant, gap_scan, rank_trace, tv_distance, tv_to_haar)
from .config import ConfigError, RunConfig, load_config, with_overrides
from .lca import to_nested_form
from .measures import ConditionedMarkovSpec, HaarSpec, certificate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_SELFCHECK = 4
DISCREPANCY_TOL = 1e-6


class TrivialLcaWarning(UserWarning):
    pass


# ---------------------------------------------------------------- output


class Output:
    def __init__(self, cfg: RunConfig, header: list[str]):
        self.cfg = cfg
        self.header = header
        self.rows: list[list] = []
        self.summary: dict = {}

    def row(self, *values):
        self.rows.append(list(values))

    def note(self, key: str, value):
        self.summary[key] = value

    def _cell(self, v):
        if isinstance(v, float):
            return repr(v)
        return str(v)

    def render(self) -> str:
        if self.cfg.format == "json":
            body = {"columns": self.header, "rows": self.rows, "summary": self.summary}
            return json.dumps(body, indent=1) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for r in self.rows:
            w.writerow([self._cell(v) for v in r])
        return buf.getvalue()

    def emit(self):
        text = self.render()
        if self.cfg.out:
            with open(self.cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            stream = sys.stdout
        else:
            sys.stdout.write(text)
            stream = sys.stderr
        if self.cfg.format == "csv":
            for k, v in self.summary.items():
                print(f"{k}: {self._cell(v)}", file=stream)


def _word(word, m: int) -> str:
    return "".join(map(str, word)) if m <= 10 else ":".join(map(str, word))


def _check_automaton(cfg: RunConfig):
    F = cfg.linear()
    if not F.is_nontrivial():
        warnings.warn("trivial LCA: the automaton is merely a shift map or the identity "
                      "(scaled), so no character diffuses", TrivialLcaWarning, stacklevel=2)
    return cfg.automaton()


def _nontrivial_character(cfg: RunConfig):
    chi = cfg.character()
    if chi.is_trivial():
        raise ConfigError("the character is trivial; diffusion and decay need a nontrivial character")
    return chi


# ---------------------------------------------------------------- commands


def cmd_rank_trace(cfg: RunConfig) -> int:
    chi = _nontrivial_character(cfg)
    A = _check_automaton(cfg)
    trace = rank_trace(chi, A, cfg.horizon, cfg.max_support, jobs=cfg.workers)
    out = Output(cfg, ["n", "rank"])
    for n, r in trace.entries:
        out.row(n, r)
    out.note("horizon", cfg.horizon)
    out.note("threshold_R", float(cfg.threshold_R))
    out.note("density_above", density_above(trace, cfg.threshold_R))
    out.emit()
    return EXIT_OK


def cmd_decay(cfg: RunConfig) -> int:
    chi = _nontrivial_character(cfg)
    A = _check_automaton(cfg)
    mu = cfg.measure_spec()
    trace = fourier_decay(chi, A, mu, cfg.horizon, jobs=cfg.workers, max_support=cfg.max_support)
    out = Output(cfg, ["n", "re", "im", "abs", "cesaro"])
    for n, c in enumerate(trace.coefficients):
        out.row(n, float(c.real), float(c.imag), float(abs(c)), float(trace.cesaro[n]))
    out.note("cesaro", cesaro_average(trace))
    out.note("epsilon", float(cfg.epsilon))
    out.note("fraction_below_epsilon", fraction_below(trace, cfg.epsilon))
    out.emit()
    return EXIT_OK


def cmd_cylinder(cfg: RunConfig) -> int:
    """Cylinder law of G^n mu on the window, with n = horizon."""
    A = _check_automaton(cfg)
    mu = cfg.measure_spec()
    W = cfg.window_sites()
    n = cfg.horizon
    inv = cylinder_distribution(A, n, mu, W, max_window=cfg.max_window)
    out = Output(cfg, ["method", "word", "probability"])
    for word, p in zip(inv.words(), inv.probabilities):
        out.row(inv.method, _word(word, inv.modulus), float(p))
    out.note("n", n)
    out.note("tv_to_haar", tv_to_haar(inv))
    status = EXIT_OK
    brute = None
    if isinstance(mu, ConditionedMarkovSpec):
        out.note("brute_force", "skipped (conditioned measure)")
    else:
        try:
            brute = cylinder_distribution_bruteforce(A, n, mu, W, max_enum=cfg.max_enum, jobs=cfg.workers)
        except ResourceLimitError as exc:
            out.note("brute_force", f"skipped (enumeration limit: {exc})")
    if brute is not None:
        for word, p in zip(brute.words(), brute.probabilities):
            out.row(brute.method, _word(word, brute.modulus), float(p))
        gap = tv_distance(inv, brute)
        out.note("brute_force", "done")
        out.note("tv_discrepancy", gap)
        if gap > DISCREPANCY_TOL:
            out.note("self_check", "FAIL")
            status = EXIT_SELFCHECK
    out.emit()
    if status:
        print(f"error: inversion and brute force differ by {gap!r} in total variation", file=sys.stderr)
    return status


def cmd_certify(cfg: RunConfig) -> int:
    mu = cfg.measure_spec()
    out = Output(cfg, ["key", "value"])
    if isinstance(mu, HaarSpec):
        out.row("kind", "haar")
        out.row("base", 0.0)
        out.row("status", "PASS")
    else:
        cert = certificate(mu)
        out.row("kind", cert.kind)
        out.row("base", float(cert.base))
        out.row("rule", cert.rank_exponent_rule)
        out.row("status", "PASS" if cert.mixing else "FAIL")
        for v in cert.violations:
            out.row("violation", v)
        if not cert.violations and not cert.mixing:
            out.row("violation", f"base {cert.base!r} is not below 1")
    out.emit()
    return EXIT_OK


def cmd_gap_scan(cfg: RunConfig) -> int:
    """Scan every N in 0..horizon, digits padded to a common width."""
    F = cfg.linear()
    if not F.modulus.is_prime:
        raise ConfigError(f"gap-scan needs a prime modulus, got {F.m}")
    if not F.is_nontrivial():
        raise ConfigError("gap-scan needs an automaton with at least two terms")
    nf = to_nested_form(F)
    try:
        gamma = gamma_constant(nf)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    p = F.m
    width = cfg.gap_width or max(1, len(gap_scan(cfg.horizon, p, gamma).digits))
    out = Output(cfg, ["N", "position"])
    freqs = []
    for N in range(cfg.horizon + 1):
        rep = gap_scan(N, p, gamma, width=width)
        for pos in rep.positions:
            out.row(N, pos)
        freqs.append(rep.frequency)
    total = math.fsum(freqs) / len(freqs)
    out.note("gamma", gamma)
    out.note("word", _word((0,) * gamma + (1,), p))
    out.note("width", width)
    out.note("mean_frequency", total)
    out.note("target_frequency", float(p) ** -(gamma + 1))
    out.emit()
    return EXIT_OK


def cmd_selftest(args) -> int:
    from . import acceptance

    inject = args.inject_fault
    results = acceptance.run(budget=args.budget, inject_fault=inject,
                             only=args.only, stream=sys.stdout)
    if isinstance(results, acceptance.BudgetExceeded):
        print(f"selftest: runtime budget of {args.budget}s exceeded during criterion "
              f"{results.number} ({results.name})", file=sys.stderr)
        return EXIT_RESOURCE
    failed = [r for r in results if not r.passed]
    if failed:
        first = failed[0]
        print(f"selftest: FAILED criterion {first.number} ({first.name}): {first.detail}", file=sys.stderr)
        return EXIT_SELFCHECK
    print(f"selftest: all {len(results)} criteria passed")
    return EXIT_OK


COMMANDS = {
    "rank-trace": cmd_rank_trace,
    "decay": cmd_decay,
    "cylinder": cmd_cylinder,
    "certify": cmd_certify,
    "gap-scan": cmd_gap_scan,
}


# ---------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI or JSON run config (default: $LCAHAAR_CONFIG)")
    common.add_argument("--modulus", type=int)
    common.add_argument("--dim", type=int, dest="dimension")
    common.add_argument("--automaton", dest="automaton_terms", help="term list, e.g. '1@(-1)+1@(1)'")
    common.add_argument("--constant", type=int, help="affine constant")
    common.add_argument("--character", dest="character_terms", help="term list, e.g. '1@(0)'")
    common.add_argument("--horizon", type=int, help="N for traces, the iterate n for cylinder")
    common.add_argument("--window", help="window sites, e.g. '0,1,2' or '(0,0);(1,0)'")
    common.add_argument("--threshold-R", type=float, dest="threshold_R")
    common.add_argument("--epsilon", type=float)
    common.add_argument("--out")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--jobs", type=int, help="worker threads (default: available cores)")
    common.add_argument("--max-support", type=int, dest="max_support")
    common.add_argument("--max-enum", type=int, dest="max_enum")
    common.add_argument("--max-window", type=int, dest="max_window")
    common.add_argument("--gap-width", type=int, dest="gap_width")

    parser = argparse.ArgumentParser(prog="lcahaar", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    st = sub.add_parser("selftest", help="run the acceptance criteria")
    st.add_argument("--inject-fault", choices=("lucas",), help="corrupt a component to exercise the harness")
    st.add_argument("--budget", type=float, help="abort with exit 3 after this many seconds")
    st.add_argument("--only", type=int, action="append", help="run only these criterion numbers")
    return parser


_OVERRIDES = ("modulus", "dimension", "automaton_terms", "constant", "character_terms", "horizon",
              "window", "threshold_R", "epsilon", "out", "format", "jobs", "max_support",
              "max_enum", "max_window", "gap_width")


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config)
    overrides = {k: getattr(args, k) for k in _OVERRIDES}
    return with_overrides(cfg, **overrides).validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "selftest":
            return cmd_selftest(args)
        cfg = resolve_config(args)
        with warnings.catch_warnings():
            warnings.simplefilter("always", TrivialLcaWarning)
            warnings.showwarning = _show_warning
            return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ResourceLimitError, ExponentOverflowError) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except SelfCheckError as exc:
        print(f"self-check failed: {exc}", file=sys.stderr)
        return EXIT_SELFCHECK
    except (ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
