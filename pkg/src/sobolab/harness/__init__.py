"""Empirical checks of interpolation inequalities on a function corpus.

Every inequality has the shape ``lhs <= C * A^θ * B^(1-θ)``, with ``B`` the
negative-index Besov norm of ``f``.  :func:`derive_params` completes and
validates the exponents, :func:`run_corpus` measures ``lhs / (A^θ B^(1-θ))``
on seeded members, and the stability studies test whether the measured
constant behaves like a genuine constant.
"""
from .params import (
    ALIASES,
    CASE_IDS,
    InequalityCase,
    ParameterError,
    canonical_id,
    derive_params,
    perturb_beta,
)
from .corpus import CorpusError, CorpusSpec, Member, members, parse_descriptor, sample
from .evaluate import (
    Record,
    Resources,
    aggregate,
    evaluate_case,
    hedberg_chain,
    hedberg_check,
    refinement_study,
    run_corpus,
    scaling_check,
)
from .report import VerificationReport, dumps

__all__ = [
    "ALIASES",
    "CASE_IDS",
    "InequalityCase",
    "ParameterError",
    "canonical_id",
    "derive_params",
    "perturb_beta",
    "CorpusError",
    "CorpusSpec",
    "Member",
    "members",
    "parse_descriptor",
    "sample",
    "Record",
    "Resources",
    "aggregate",
    "evaluate_case",
    "hedberg_chain",
    "hedberg_check",
    "refinement_study",
    "run_corpus",
    "scaling_check",
    "VerificationReport",
    "dumps",
]
