"""Representations of the crystallized algebra and their exact identity suites."""
from .bundle import dump_bundle, from_bundle, load_bundle, to_bundle
from .polynomial import StarPolynomial, parse_polynomial, product, z, zs
from .symbolic import (
    SymbolicRep,
    build,
    character_rep,
    convolve,
    convolve_full,
    elementary_rep,
    evaluate,
)

__all__ = [
    "StarPolynomial",
    "SymbolicRep",
    "build",
    "character_rep",
    "convolve",
    "convolve_full",
    "dump_bundle",
    "elementary_rep",
    "evaluate",
    "from_bundle",
    "load_bundle",
    "parse_polynomial",
    "product",
    "to_bundle",
    "z",
    "zs",
]
