import io

import numpy as np
import pytest

from crystalrep.qlimit import (
    convergence_table,
    limit_distance,
    q_build,
    q_elementary,
    scaled_generator,
    unitarity_defect,
    write_csv,
)
from crystalrep.rep import build
from crystalrep.weyl import NormalForm, WordError, longest_word, parse_word

LAM = (1j, (3 + 4j) / 5)


def test_elementary_entries():
    e = q_elementary(2, 1, 0.1, 6)
    assert e.u(1, 1)[0, 1] == pytest.approx(np.sqrt(1 - 0.01), abs=1e-12)
    assert e.u(1, 1)[0, 1] == pytest.approx(0.99499, abs=1e-5)
    assert np.allclose(e.u(2, 1).toarray(), np.diag(0.1 ** np.arange(6)))
    assert np.allclose(e.u(3, 3).toarray(), np.eye(6))
    assert e.u(1, 3).nnz == 0


def test_elementary_range():
    with pytest.raises(ValueError):
        q_elementary(2, 1, 1.5, 6)
    with pytest.raises(WordError):
        q_elementary(2, 3, 0.1, 6)


def test_identity_word_is_character():
    rep = q_build(LAM, NormalForm(2, ()), 0.2, 4)
    l1, l2 = LAM
    expect = [l1, np.conj(l1) * l2, np.conj(l2)]
    for i in range(1, 4):
        assert rep.u(i, i).toarray()[0, 0] == pytest.approx(expect[i - 1])
    assert rep.u(1, 2).nnz == 0


def test_two_letter_dimension():
    rep = q_build(LAM, parse_word("s[1,1] s[2,2]", 2), 0.1, 5)
    assert rep.size == 25 and rep.u(1, 1).shape == (25, 25)


def test_scaling_exponent():
    rep = q_elementary(2, 1, 0.1, 6)
    assert abs(scaled_generator(rep, 2, 1) - rep.u(2, 1)).max() == 0
    scaled = scaled_generator(rep, 1, 2).toarray()
    # -q^{-1} * (-q q^N) = q^N -> P0 as q -> 0
    assert np.allclose(scaled, np.diag(0.1 ** np.arange(6)))


def test_tiny_q_distance_vanishes():
    nf = longest_word(2)
    d = limit_distance(q_build(LAM, nf, 1e-9, 8), build(LAM, nf), 4)
    assert max(d.values()) <= 4e-9


def test_unitarity_defect_small():
    rep = q_build(LAM, longest_word(2), 0.3, 10)
    assert unitarity_defect(rep, 5) <= 10 * 0.3 ** 5


def test_table_decreases_and_duplicates():
    rows = convergence_table(LAM, longest_word(2), [0.3, 0.1, 0.03, 0.03], 10, 5)
    by_q = {}
    for q, i, j, d in rows:
        by_q.setdefault(q, []).append(d)
    worst = [max(by_q[q]) for q in (0.3, 0.1, 0.03)]
    assert worst[0] > worst[1] > worst[2]
    blocks = [rows[k : k + 9] for k in range(0, len(rows), 9)]
    assert blocks[2] == blocks[3]


def test_window_rejected():
    with pytest.raises(ValueError):
        convergence_table(LAM, longest_word(2), [0.1], 8, 5)


def test_csv_format():
    buf = io.StringIO()
    write_csv([(0.1, 1, 2, 0.05)], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "q,i,j,distance"
    assert lines[1].startswith("0.1,1,2,")
