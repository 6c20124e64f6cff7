"""JSON bundles: a representation's word, lambda mode and image table."""
from __future__ import annotations

import json
from typing import Mapping

from ..opalgebra import TensorOperator
from ..weyl import format_word, parse_word
from .symbolic import SymbolicRep

__all__ = ["to_bundle", "from_bundle", "dump_bundle", "load_bundle"]

FORMAT = "crystalrep-bundle/1"


def _lam_to_json(lam):
    if isinstance(lam, str):
        return lam
    return [[complex(x).real, complex(x).imag] for x in lam]


def _lam_from_json(data):
    if isinstance(data, str):
        return data
    return tuple(complex(re, im) for re, im in data)


def to_bundle(rep: SymbolicRep) -> dict:
    images = []
    for (i, j), op in sorted(rep.images.items()):
        if op:
            images.append({"i": i, "j": j, "op": op.to_json(rep.n)})
    return {
        "format": FORMAT,
        "n": rep.n,
        "word": None if rep.word is None else format_word(rep.word),
        "lambda": _lam_to_json(rep.lam),
        "factors": rep.factors,
        "images": images,
    }


def from_bundle(data: Mapping) -> SymbolicRep:
    if data.get("format") != FORMAT:
        raise ValueError(f"not a representation bundle (format {data.get('format')!r})")
    n = int(data["n"])
    images = {(int(e["i"]), int(e["j"])): TensorOperator.from_json(e["op"]) for e in data["images"]}
    word = data.get("word")
    nf = None if word is None else parse_word(word, n)
    return SymbolicRep(n, int(data["factors"]), images, nf, _lam_from_json(data["lambda"]))


def dump_bundle(rep: SymbolicRep, fh) -> None:
    json.dump(to_bundle(rep), fh, indent=1, sort_keys=True)


def load_bundle(fh) -> SymbolicRep:
    return from_bundle(json.load(fh))
