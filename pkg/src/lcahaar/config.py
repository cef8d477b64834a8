"""Run configuration: one INI (or JSON) file with sections automaton, character, measure, run.

Example::

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
    horizon = 1024
    window = 0; 1; 2
    threshold_R = 8
    epsilon = 0.01

Measure kinds: ``bernoulli`` (weights), ``uniform``/``haar``, ``markov``
(transition rows separated by ';', optional stationary), ``nstep`` (order
plus a table of m^order rows), and ``conditioned`` (a markov section plus
``lo`` and ``word``). Command-line flags override file values.
"""

from __future__ import annotations

import configparser
import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .algebra import Modulus
from .characters import CharacterSystem
from .lca import AffineCa, LcaPolynomial, parse_automaton
from .measures import BernoulliSpec, ConditionedMarkovSpec, HaarSpec, MarkovSpec, NStepMarkovSpec

CONFIG_ENV = "LCAHAAR_CONFIG"
MEASURE_KINDS = ("bernoulli", "uniform", "haar", "markov", "nstep", "conditioned")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _matrix(text: str) -> list[list[float]]:
    return [_floats(row) for row in text.split(";") if row.strip()]


def parse_window(text: str, dim: int) -> list[tuple[int, ...]]:
    """Sites separated by ';' (or ',' when D = 1); a D-dim site is written (x,y) or x,y."""
    if not text.strip():
        return []
    if dim == 1 and ";" not in text and "(" not in text:
        parts = text.replace(",", " ").split()
    else:
        parts = [p for p in text.split(";") if p.strip()]
    sites = []
    for part in parts:
        coords = [int(c) for c in part.strip().strip("()").replace(",", " ").split()]
        if len(coords) != dim:
            raise ConfigError(f"window site {part.strip()!r} does not have dimension {dim}")
        sites.append(tuple(coords))
    return sites


@dataclass(frozen=True)
class RunConfig:
    modulus: int = 2
    dimension: int = 1
    automaton_terms: str = "1@(-1) + 1@(1)"
    constant: int = 0
    character_terms: str = "1@(0)"
    measure: dict = field(default_factory=lambda: {"kind": "bernoulli", "weights": "0.9, 0.1"})
    horizon: int = 64
    window: str = "0"
    threshold_R: float = 8.0
    epsilon: float = 0.01
    out: str | None = None
    format: str = "csv"
    jobs: int | None = None  # None: all available cores
    max_support: int | None = None
    max_enum: int = 1 << 22
    max_window: int = 4096
    gap_width: int | None = None

    @property
    def workers(self) -> int:
        return self.jobs or os.cpu_count() or 1

    # ------------------------------------------------------------ builders

    def automaton(self):
        try:
            A = parse_automaton(self.automaton_terms, self.modulus, self.dimension, self.constant)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"automaton: {exc}") from None
        if (A.linear if isinstance(A, AffineCa) else A).dim != self.dimension:
            raise ConfigError("automaton terms disagree with the configured dimension")
        return A

    def linear(self) -> LcaPolynomial:
        A = self.automaton()
        return A.linear if isinstance(A, AffineCa) else A

    def character(self) -> CharacterSystem:
        try:
            return CharacterSystem.parse(self.character_terms, self.modulus, self.dimension)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"character: {exc}") from None

    def window_sites(self) -> list[tuple[int, ...]]:
        return parse_window(self.window, self.dimension)

    def measure_spec(self):
        sec = {k.lower(): v for k, v in self.measure.items()}
        kind = str(sec.get("kind", "")).lower()
        m = self.modulus
        try:
            if kind in ("uniform", "haar"):
                return HaarSpec(m) if kind == "haar" else BernoulliSpec.uniform(m)
            if kind == "bernoulli":
                return BernoulliSpec(m, _floats(str(sec["weights"])))
            if kind in ("markov", "conditioned"):
                stationary = _floats(str(sec["stationary"])) if sec.get("stationary") else None
                base = MarkovSpec.from_transition(m, _matrix(str(sec["transition"])), stationary)
                if kind == "markov":
                    return base
                word = [int(x) for x in str(sec.get("word", "")).replace(",", " ").split()]
                return ConditionedMarkovSpec(base, int(sec.get("lo", 0)), tuple(word))
            if kind == "nstep":
                return NStepMarkovSpec.from_table(m, int(sec["order"]), _matrix(str(sec["table"])))
        except KeyError as exc:
            raise ConfigError(f"measure kind {kind!r} needs the key {exc.args[0]!r}") from None
        except ValueError as exc:
            raise ConfigError(f"measure: {exc}") from None
        raise ConfigError(f"unknown measure kind {kind!r}; expected one of {', '.join(MEASURE_KINDS)}")

    # ------------------------------------------------------------ validation

    def validate(self) -> "RunConfig":
        """Cross-check modulus, dimension and limits before any computation."""
        try:
            Modulus(self.modulus)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.dimension < 1:
            raise ConfigError(f"dimension must be >= 1, got {self.dimension}")
        if self.horizon < 0:
            raise ConfigError(f"horizon must be nonnegative, got {self.horizon}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.jobs is not None and self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        self.automaton()
        self.character()
        kind = str(self.measure.get("kind", "")).lower()
        if kind in ("markov", "nstep", "conditioned") and self.dimension != 1:
            raise ConfigError(f"{kind} measures need dimension 1, got {self.dimension}")
        window = self.window_sites()
        if self.modulus ** len(window) > self.max_window:
            raise ConfigError(f"window of {len(window)} sites needs {self.modulus ** len(window)} "
                              f"characters, above the limit {self.max_window}")
        return self


def _from_sections(sections: dict) -> RunConfig:
    def sec(name):
        return {k.lower(): v for k, v in sections.get(name, {}).items()}

    auto, char, meas, run = sec("automaton"), sec("character"), sec("measure"), sec("run")
    kw = {}
    try:
        if "modulus" in auto:
            kw["modulus"] = int(auto["modulus"])
        if "dimension" in auto:
            kw["dimension"] = int(auto["dimension"])
        if "terms" in auto:
            kw["automaton_terms"] = str(auto["terms"])
        if "constant" in auto:
            kw["constant"] = int(auto["constant"])
        if "terms" in char:
            kw["character_terms"] = str(char["terms"])
        if meas:
            kw["measure"] = meas
        ints = {"horizon": "horizon", "jobs": "jobs", "max_support": "max_support",
                "max_enum": "max_enum", "max_window": "max_window", "gap_width": "gap_width"}
        for key, attr in ints.items():
            if key in run:
                kw[attr] = int(run[key])
        for key, attr in {"threshold_r": "threshold_R", "epsilon": "epsilon"}.items():
            if key in run:
                kw[attr] = float(run[key])
        for key in ("window", "out", "format"):
            if key in run:
                kw[key] = str(run[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    return RunConfig(**kw)


def load_config(path: str | os.PathLike | None = None) -> RunConfig:
    """Read a config file; without a path fall back to $LCAHAAR_CONFIG, then to defaults."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return RunConfig()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {str(p)!r} not found")
    text = p.read_text()
    if p.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}: {exc}") from None
        return _from_sections(data)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(p))
    except configparser.Error as exc:
        raise ConfigError(f"{p}: {exc}") from None
    return _from_sections({s: dict(parser[s]) for s in parser.sections()})


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
