"""Quantum dot with a central point impurity on the Lobachevsky plane."""

__version__ = "0.1.0"

from .errors import AccuracyError, ConvergenceError, DomainError, HypdotError, PoleError, RangeError
from .greens import ModelParams, green_full, green_full_H
from .krein import ExtensionParam, perturbed_green, q_function, q_function_H
from .spectrum import perturbed_spectrum, unperturbed_spectrum

__all__ = [
    "AccuracyError",
    "ConvergenceError",
    "DomainError",
    "ExtensionParam",
    "HypdotError",
    "ModelParams",
    "PoleError",
    "RangeError",
    "green_full",
    "green_full_H",
    "perturbed_green",
    "perturbed_spectrum",
    "q_function",
    "q_function_H",
    "unperturbed_spectrum",
]
