"""Bigraded field-space calculus for Yang-Mills theory, with a lattice companion."""
from .algebra import (
    Atom, Bidegree, Expression, Registry, DEFAULT_REGISTRY, ym_registry, bracket, canonicalize,
    equals, mul, trace,
)
from .dsl import parse, pretty

__all__ = [
    "Atom", "Bidegree", "Expression", "Registry", "DEFAULT_REGISTRY", "ym_registry", "bracket",
    "canonicalize", "equals", "mul", "trace", "parse", "pretty",
]
__version__ = "0.1.0"
