"""Concrete saddle-point problems."""

from .bilinear import BilinearProblem
from .fairness import FairnessProblem, Group
from .mksvm import (
    MkSvmPrediction,
    MkSvmProblem,
    gaussian_kernel,
    linear_kernel,
    mksvm_predict,
    normalize_kernel,
    polynomial_kernel,
)
from .quadratic import QuadraticSaddleProblem
from .toy import ToyProblem, random_toy_problem

__all__ = [
    "BilinearProblem",
    "FairnessProblem",
    "Group",
    "MkSvmPrediction",
    "MkSvmProblem",
    "QuadraticSaddleProblem",
    "ToyProblem",
    "random_toy_problem",
    "gaussian_kernel",
    "linear_kernel",
    "mksvm_predict",
    "normalize_kernel",
    "polynomial_kernel",
]
