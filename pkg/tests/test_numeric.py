import numpy as np
import pytest
import scipy.sparse as sp

from crystalrep.numeric import (
    DimensionCapError,
    RS_direct,
    RS_ops,
    W_op,
    conj_sum,
    distinct_points,
    op_norm,
    read_triplets,
    r_index_numeric,
    spectrum,
    truncate_rep,
    window_mask,
    window_norm,
    wold,
    write_triplets,
    wu_residuals,
)
from crystalrep.opalgebra import TensorOperator, ToeplitzElement as T
from crystalrep.rep import build, elementary_rep
from crystalrep.rep.suites import defining_relations
from crystalrep.weyl import NormalForm, longest_word, parse_word

LAM = (1j, (3 + 4j) / 5)


def test_truncated_shift():
    m = T.S().to_matrix(4).toarray()
    assert np.array_equal(m, np.diag(np.ones(3), 1))


def test_elementary_images():
    tr = truncate_rep(elementary_rep(2, 1), 6, (1, 1))
    assert np.array_equal(tr.z(1, 1).toarray(), np.diag(np.ones(5), 1))
    assert np.array_equal(tr.z(1, 2).toarray(), np.diag([1.0, 0, 0, 0, 0, 0]))
    assert tr.z(1, 3).nnz == 0
    assert np.array_equal(tr.z(3, 3).toarray(), np.eye(6))


def test_window_must_fit():
    with pytest.raises(ValueError):
        truncate_rep(build("one", longest_word(2)), 8, window=5)


def test_dimension_cap():
    with pytest.raises(DimensionCapError):
        truncate_rep(build("one", longest_word(2)), 12, dim_cap=1000)


def test_window_mask_counts():
    assert window_mask(6, 2, 3).sum() == 9
    assert window_mask(6, 0, 3).sum() == 1


@pytest.mark.parametrize("word", ["s[1,1] s[1,2]", "s[2,2]", "id"])
def test_relation_residuals_on_window(word):
    nf = parse_word(word, 2)
    tr = truncate_rep(build(LAM, nf), 8)
    worst = max(tr.wnorm(tr.evaluate(c.poly)) for c in defining_relations(2))
    assert worst <= 1e-14


def test_spectrum_p0_tensor():
    m = TensorOperator.from_factors([T.P0(), T.P0()]).to_matrix(4)
    pts = distinct_points(spectrum(m))
    assert np.allclose(sorted(abs(p) for p in pts), [0, 1])


def test_norms():
    S = T.S().to_matrix(10)
    assert abs(op_norm(S) - 1) < 1e-12
    big = sp.identity(5000, format="csr") * 0.5
    assert abs(op_norm(big) - 0.5) < 1e-9
    assert window_norm(S, window_mask(10, 1, 5)) == pytest.approx(1.0)


def test_conj_sum_projection():
    # sum_k S*^k P0 S^k = I on a truncated space
    Sst = T.Sstar().to_matrix(6)
    P0 = T.P0().to_matrix(6)
    total = conj_sum(Sst, P0)
    assert np.allclose(total.toarray(), np.eye(6))


def test_w_base_case():
    tr = truncate_rep(build(LAM, longest_word(2)), 8)
    r = r_index_numeric(tr)
    assert (W_op(tr, r, r, r) != tr.z(3, r)).nnz == 0


def test_r_index_examples():
    assert r_index_numeric(truncate_rep(elementary_rep(2, 1), 6, (1, 1))) == 3
    assert r_index_numeric(truncate_rep(build("one", NormalForm(2, ())), 4)) == 3
    nf = parse_word("s[1,1] s[2,2]", 2)
    assert r_index_numeric(truncate_rep(build("one", nf), 6)) == nf.a(1)


@pytest.mark.parametrize("word", ["s[1,1] s[1,2]", "s[1,2]", "s[2,2]", "s[1,1] s[2,2]"])
def test_wu_identities(word):
    tr = truncate_rep(build(LAM, parse_word(word, 2)), 10)
    res = wu_residuals(tr)
    assert abs(abs(res["phase"]) - 1) < 1e-12
    for key in ("scalar", "commute", "wu", "isometry", "defect"):
        assert res[key] <= 1e-10, key


def test_wu_skipped_when_r_is_top():
    res = wu_residuals(truncate_rep(build(LAM, parse_word("s[1,1]", 2)), 6))
    assert res["r"] == 3 and "wu" not in res
    assert res["scalar"] <= 1e-12


def test_rs_first_segment_is_v():
    nf = longest_word(2)
    tr = truncate_rep(build("formal", nf), 8, (1, 1))
    from crystalrep.rep.voperators import v_poly

    R, _ = RS_ops(tr, 1, 2)
    assert abs(R - tr.evaluate(v_poly(nf, 1, 2))).max() < 1e-15
    R, S = RS_ops(tr, 1, 1 + nf.b(1))
    assert abs(S - R).max() < 1e-15


def test_rs_matches_direct_w0():
    nf = longest_word(2)
    tr = truncate_rep(build(LAM, nf), 10)
    for j in range(1, nf.k + 1):
        for i in range(nf.a(j) + 1, nf.b(j) + 2):
            R, S = RS_ops(tr, j, i)
            Rd, Sd = RS_direct(nf, j, i, 10)
            assert tr.wnorm(R - Rd) <= 1e-12
            assert tr.wnorm(S - Sd) <= 1e-12


def test_wold_right_shift():
    W = T.Sstar().to_matrix(12)
    res = wold(W, window_mask(12, 1, 6))
    assert res.dim == 1
    assert abs(abs(res.basis[0, 0]) - 1) < 1e-12
    assert res.isometry_defect < 1e-12 and res.unitary_defect < 1e-12


def test_wold_tensor_model():
    dim = 6
    W = TensorOperator.from_factors([T.I(), T.Sstar()]).to_matrix(dim)
    res = wold(W, window_mask(dim, 2, 3))
    assert res.dim == 3
    # the wandering vectors live on e_mu (x) e_0
    support = np.nonzero(np.abs(res.basis).sum(axis=1) > 1e-12)[0]
    assert set(support % dim) == {0}


def test_wold_rejects_unitary():
    with pytest.raises(ValueError):
        wold(sp.identity(4, format="csr"), np.ones(4, dtype=bool))


def test_triplets_roundtrip(tmp_path):
    m = build(LAM, longest_word(2)).z(1, 2).to_matrix(5, LAM)
    path = tmp_path / "z.txt"
    write_triplets(m, path)
    back = read_triplets(path)
    assert back.shape == m.shape
    assert abs(back - m).max() == 0
