"""Compiler and simulator for exergetic port-Hamiltonian models."""

from ._core import (
    EphsError,
    FlatSystem,
    Model,
    Trajectory,
    differentiate,
    evaluate,
    flatten,
    load,
    parse,
    simulate,
)

__all__ = [
    "EphsError",
    "FlatSystem",
    "Model",
    "Trajectory",
    "differentiate",
    "evaluate",
    "flatten",
    "load",
    "parse",
    "simulate",
]
