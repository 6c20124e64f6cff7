import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crystalrep.classify import (
    ClassifyError,
    EquivalenceVerdict,
    equivalent,
    factor_numeric,
    identify,
    peel_symbolic,
    r_index,
    verify_witness,
)
from crystalrep.numeric import truncate_rep
from crystalrep.opalgebra import TensorOperator
from crystalrep.rep import build, convolve, elementary_rep
from crystalrep.rep.polynomial import z
from crystalrep.weyl import NormalForm, enumerate_normal_forms, longest_word, parse_word

LAM = (1j, (3 + 4j) / 5)
N2 = list(enumerate_normal_forms(2))
N3 = list(enumerate_normal_forms(3))


# -- r(pi) -----------------------------------------------------------------------


def test_r_index_examples():
    assert r_index(elementary_rep(2, 1)) == 3
    assert r_index(build("one", NormalForm(3, ()))) == 4
    for nf in N3:
        if nf.k and nf.b(1) == 3:
            assert r_index(build("formal", nf)) == nf.a(1)


def test_r_index_numeric_agrees():
    for nf in N2:
        assert r_index(truncate_rep(build(LAM, nf), 6)) == r_index(build(LAM, nf))


# -- equivalence -------------------------------------------------------------------


def test_identical_pairs():
    v = equivalent("formal", longest_word(2), "formal", longest_word(2))
    assert v.equivalent and v.witness is None


def test_case_one_example():
    a, b = parse_word("s[2,2]", 2), parse_word("s[1,1]", 2)
    v = equivalent("formal", a, "formal", b)
    assert not v.equivalent and v.case == "I"
    assert v.witness == z(2, 3) and v.kind == "zero-vs-nonzero"
    assert build("formal", a).evaluate(v.witness) != TensorOperator.zero(1)
    assert build("formal", b).evaluate(v.witness).is_zero()


def test_lambda_spectral_witness():
    w0 = longest_word(2)
    v = equivalent((1j, 1), w0, (1, 1), w0)
    assert v.case == "lambda" and v.kind == "spectral"
    assert verify_witness(v, (1j, 1), w0, (1, 1), w0)


def test_formal_vs_numeric_lambda_rejected():
    with pytest.raises(ValueError):
        equivalent("formal", longest_word(2), (1, 1), longest_word(2))


@given(st.sampled_from(N3), st.sampled_from(N3))
def test_symmetric(a, b):
    x, y = equivalent("formal", a, "formal", b), equivalent("formal", b, "formal", a)
    assert x.equivalent == y.equivalent == (a == b)
    if not x.equivalent:
        assert verify_witness(x, "formal", a, "formal", b)
        assert verify_witness(y, "formal", b, "formal", a)


def test_verdict_json_roundtrip():
    a, b = parse_word("s[1,2]", 2), parse_word("s[1,1] s[1,2]", 2)
    v = equivalent("formal", a, "formal", b)
    back = EquivalenceVerdict.from_json(json.loads(json.dumps(v.to_json())))
    assert back == v


# -- symbolic peel --------------------------------------------------------------------


@pytest.mark.parametrize("nf", [f for f in N3 if f.k and f.b(1) == 3], ids=str)
def test_peel_reconstructs(nf):
    rep = build("formal", nf)
    r, pi1 = peel_symbolic(rep)
    assert r == nf.letters()[-1]
    again = convolve(pi1, elementary_rep(3, r))
    for i in range(1, 5):
        for j in range(1, 5):
            assert again.z(i, j) == rep.z(i, j)
    assert r_index(pi1) == r + 1


def test_peel_single_letter():
    r, pi1 = peel_symbolic(build("one", parse_word("s[2,2]", 2)))
    assert r == 2 and pi1.factors == 0
    assert pi1.z(3, 3) == TensorOperator.identity(0)


def test_peel_refuses_top_r():
    with pytest.raises(ClassifyError):
        peel_symbolic(build("one", NormalForm(2, ())))


# -- numeric factor step ----------------------------------------------------------------


def test_factor_segment_to_one_dim():
    nf = parse_word("s[1,2]", 2)
    cur = truncate_rep(build(LAM, nf), 8)
    rs = []
    while r_index(cur) <= 2:
        step = factor_numeric(cur, 1e-8)
        rs.append(step.r)
        assert step.diagnostics["decomposition_residual"] <= 1e-9
        assert step.diagnostics["r_next"] == step.r + 1
        cur = step.rep
    assert rs == [1, 2] and cur.factors == 0


def test_factor_y2_pattern():
    from crystalrep.classify import _Y_matrices
    from crystalrep.numeric import W_op

    tr = truncate_rep(build(LAM, longest_word(2)), 8)
    step = factor_numeric(tr, 1e-8)
    r = step.r
    W = (np.conj(step.phase) * W_op(tr, 3, r + 1, r)).tocsr()
    _, Y2 = _Y_matrices(tr, r, W)
    assert set(Y2) == {(1, 1), (2, 2), (3, 3), (1, 2), (2, 1)}
    defect = tr.identity() - W @ W.conj().T
    assert abs(Y2[(r, r + 1)] - defect).max() == 0


def test_factor_w0_residual():
    step = factor_numeric(truncate_rep(build(LAM, longest_word(2)), 12), 1e-8)
    d = step.diagnostics
    assert d["decomposition_residual"] <= 1e-9
    assert d["wandering_dim"] == 12 ** 2
    assert d["unitary_defect"] <= 1e-6


# -- identification ----------------------------------------------------------------------


@pytest.mark.parametrize("nf", N3, ids=str)
def test_identify_symbolic(nf):
    res = identify(build("formal", nf))
    assert res.word == nf
    assert [x.exponents(3) for x in res.lam] == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


def test_identify_counit():
    res = identify(build("one", NormalForm(2, ())))
    assert res.word.k == 0
    assert res.lam_numeric() == (1, 1)


@pytest.mark.parametrize("nf", N2, ids=str)
def test_identify_numeric_small(nf):
    res = identify(truncate_rep(build(LAM, nf), 8), "numeric", 1e-8)
    assert res.word == nf
    assert np.allclose(res.lam, LAM, atol=1e-6)


def test_identify_mode_mismatch():
    with pytest.raises(TypeError):
        identify(build("one", longest_word(2)), "numeric")


def test_result_json():
    res = identify(build("formal", longest_word(2)))
    data = json.loads(json.dumps(res.to_json()))
    assert data["word"] == "s[1,1] s[1,2]" and data["mode"] == "symbolic"
