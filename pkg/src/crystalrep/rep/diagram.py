"""Path diagrams of ``psi_{lambda, w}``: rows, crossings and monotone paths."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from ..opalgebra import TensorOperator, ToeplitzElement
from ..weyl import NormalForm
from .symbolic import LambdaSpec, _character_scalars

__all__ = ["Edge", "Section", "Diagram", "diagram"]

_OPS = {
    "I": ToeplitzElement.I,
    "S": ToeplitzElement.S,
    "S*": ToeplitzElement.Sstar,
    "P0": ToeplitzElement.P0,
}


@dataclass(frozen=True)
class Edge:
    column: int  # tensor factor position, 0-based
    src: int  # row before the crossing
    dst: int  # row after it
    label: str  # I, S, S* or P0


@dataclass(frozen=True)
class Section:
    segment: int  # j in 1..k
    a: int
    b: int
    start: int  # first column
    stop: int  # one past the last column


@dataclass
class Diagram:
    n: int
    word: NormalForm
    letters: tuple
    edges: tuple
    sections: tuple
    row_scalars: tuple  # lambda scalar attached to each row 1..n+1

    def out_edges(self, column: int, row: int) -> list:
        return [e for e in self.edges if e.column == column and e.src == row]

    def paths(self, m: int, l: int) -> Iterator[tuple]:
        """Monotone edge sequences from row ``m`` (left) to row ``l`` (right)."""
        lo, hi = min(m, l), max(m, l)

        def walk(col, row, acc):
            if col == len(self.letters):
                if row == l:
                    yield tuple(acc)
                return
            for e in self.out_edges(col, row):
                if lo <= e.dst <= hi and (e.dst - row) * (l - m) >= 0:
                    acc.append(e)
                    yield from walk(col + 1, e.dst, acc)
                    acc.pop()

        yield from walk(0, m, [])

    def path_operator(self, path: tuple) -> TensorOperator:
        return TensorOperator.from_factors([_OPS[e.label]() for e in path])

    def path_sum(self, m: int, l: int) -> TensorOperator:
        """``lambda-scalar(row m) * sum over paths``; equals the image of ``z[m,l]``."""
        acc = TensorOperator.zero(len(self.letters))
        for p in self.paths(m, l):
            acc = acc + self.path_operator(p)
        return acc.scale(self.row_scalars[m - 1])


def diagram(nf: NormalForm, lam: LambdaSpec = "formal") -> Diagram:
    letters = nf.letters()
    edges = []
    for col, r in enumerate(letters):
        for row in range(1, nf.n + 2):
            if row == r:
                edges.append(Edge(col, row, row, "S"))
                edges.append(Edge(col, row, row + 1, "P0"))
            elif row == r + 1:
                edges.append(Edge(col, row, row, "S*"))
                edges.append(Edge(col, row, row - 1, "P0"))
            else:
                edges.append(Edge(col, row, row, "I"))
    sections = tuple(
        Section(j, nf.a(j), nf.b(j), nf.factor_offset(j), nf.factor_offset(j) + nf.seg_len(j))
        for j in range(nf.k, 0, -1)
    )
    return Diagram(nf.n, nf, letters, tuple(edges), sections, tuple(_character_scalars(nf.n, lam)))
