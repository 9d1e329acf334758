"""Flexible evolutionary algorithm with a dynamic mutation-rate archive."""
from .benchmarks import (
    GeneralizedHurdles,
    Jump,
    LeadingOnes,
    MSTFitness,
    OneMax,
    TrimmedOneMax,
    TwoRates,
    WeightedGraph,
    make_benchmark,
)
from .core import BitString, FlexEAError, RandomSource
from .optimizers import ALGORITHMS, RLS12, SDRLS, FastEA, FlexEA, OnePlusOneEA, make_optimizer
from .results import RunRecord, TerminationCriterion
from .schedule import RateSchedule

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "BitString",
    "FastEA",
    "FlexEA",
    "FlexEAError",
    "GeneralizedHurdles",
    "Jump",
    "LeadingOnes",
    "MSTFitness",
    "OneMax",
    "OnePlusOneEA",
    "RLS12",
    "RandomSource",
    "RateSchedule",
    "RunRecord",
    "SDRLS",
    "TerminationCriterion",
    "TrimmedOneMax",
    "TwoRates",
    "WeightedGraph",
    "make_benchmark",
    "make_optimizer",
]
