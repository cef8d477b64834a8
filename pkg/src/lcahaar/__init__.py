"""Exact character pullbacks, Fourier coefficients and diffusion statistics for linear CA."""

__version__ = "0.1.0"

from .algebra import Modulus, lucas_binomial, lucas_leq, p_ary_expansion, index_set  # noqa: E402
from .lca import (AffineCa, LcaPolynomial, NestedForm, affine_drift, compose, frobenius_power,  # noqa: E402
                  iterate_drift, pow_frobenius, pow_nested_lucas, pow_square_multiply, to_nested_form)
from .characters import CharacterSystem, pullback, pullback_affine, pullback_iterated  # noqa: E402
from .measures import (BernoulliSpec, ConditionedMarkovSpec, HaarSpec, MarkovSpec,  # noqa: E402
                       NStepMarkovSpec, certificate, fourier)
from .analysis import (cesaro_average, cylinder_distribution, cylinder_distribution_bruteforce,  # noqa: E402
                       density_above, fourier_decay, gamma_constant, gap_scan, rank_trace, tv_to_haar)

__all__ = [
    "Modulus", "lucas_binomial", "lucas_leq", "p_ary_expansion", "index_set",
    "AffineCa", "LcaPolynomial", "NestedForm", "affine_drift", "compose", "frobenius_power",
    "iterate_drift", "pow_frobenius", "pow_nested_lucas", "pow_square_multiply", "to_nested_form",
    "CharacterSystem", "pullback", "pullback_affine", "pullback_iterated",
    "BernoulliSpec", "ConditionedMarkovSpec", "HaarSpec", "MarkovSpec", "NStepMarkovSpec",
    "certificate", "fourier",
    "cesaro_average", "cylinder_distribution", "cylinder_distribution_bruteforce", "density_above",
    "fourier_decay", "gamma_constant", "gap_scan", "rank_trace", "tv_to_haar",
]
