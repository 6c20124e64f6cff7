import io

import pytest
from hypothesis import given, strategies as st

from crystalrep.opalgebra import LaurentScalar, TensorOperator, ToeplitzElement as T
from crystalrep.rep import (
    build,
    character_rep,
    convolve,
    convolve_full,
    dump_bundle,
    elementary_rep,
    load_bundle,
    parse_polynomial,
    product,
    z,
)
from crystalrep.rep.bialgebra import (
    check_coassociativity,
    check_counit,
    check_morphism_intertwines,
    coproduct_on_generator,
    counit,
    phi_generator,
)
from crystalrep.rep.diagram import diagram
from crystalrep.rep.suites import (
    PROJECTION_IDS,
    RELATION_IDS,
    mutation_fixture,
    verify_defining_relations,
    verify_projection_suite,
)
from crystalrep.rep.voperators import (
    E_op,
    V_op,
    closed_form_E,
    closed_form_V,
    in_range_pairs,
    rank_one_direct,
    rank_one_projector,
)
from crystalrep.weyl import NormalForm, enumerate_normal_forms, longest_word, parse_word

l = LaurentScalar.symbol


def tensor(*parts):
    return TensorOperator.from_factors(list(parts))


# -- construction ---------------------------------------------------------------


def test_elementary_rep():
    e = elementary_rep(2, 1)
    assert e.z(1, 1) == T.S()
    assert e.z(2, 2) == T.Sstar()
    assert e.z(1, 2) == T.P0() and e.z(2, 1) == T.P0()
    assert e.z(3, 3) == T.I()
    assert e.z(1, 3).is_zero()


def test_character_rep():
    c = character_rep(2)
    assert c.z(1, 1) == TensorOperator.identity(0, l(1))
    assert c.z(2, 2) == TensorOperator.identity(0, l(1).conj() * l(2))
    assert c.z(3, 3) == TensorOperator.identity(0, l(2).conj())
    assert c.z(1, 2).is_zero()


def test_convolution_top_corner():
    p = convolve(elementary_rep(2, 1), elementary_rep(2, 2))
    assert p.z(1, 3) == tensor(T.P0(), T.P0())
    assert p.factors == 2


def test_full_sum_agrees_on_two_letters():
    a = convolve(elementary_rep(2, 1), elementary_rep(2, 2))
    b = convolve_full(elementary_rep(2, 1), elementary_rep(2, 2))
    for i in range(1, 4):
        for j in range(1, 4):
            assert a.z(i, j) == b.z(i, j)


def test_full_sum_is_not_a_rep_at_q0():
    e1, e2 = elementary_rep(2, 1), elementary_rep(2, 2)
    full = convolve_full(convolve_full(e1, e2), e1)
    restricted = convolve(convolve(e1, e2), e1)
    assert full.z(1, 1) != restricted.z(1, 1)
    assert not verify_defining_relations(full).passed
    assert verify_defining_relations(restricted).passed


def test_character_times_rep_is_scalar_multiple():
    e = elementary_rep(2, 2)
    c = convolve(character_rep(2), e)
    assert c.z(2, 2) == e.z(2, 2).scale(l(1).conj() * l(2))


def test_counit_on_right():
    e = elementary_rep(2, 1)
    c = convolve(e, build("one", NormalForm(2, ())))
    for i in range(1, 4):
        for j in range(1, 4):
            assert c.z(i, j) == e.z(i, j)


def test_build_identity_is_counit():
    eps = build("one", NormalForm(3, ()))
    for i in range(1, 5):
        for j in range(1, 5):
            expect = TensorOperator.identity(0) if i == j else TensorOperator.zero(0)
            assert eps.z(i, j) == expect


def test_build_single_letter_n1():
    r = build("formal", parse_word("s[1,1]", 1))
    assert r.z(1, 1) == T.S().scale(l(1))
    assert r.z(2, 2) == T.Sstar().scale(l(1).conj())


def test_build_w0_factor_count():
    assert build("one", longest_word(2)).factors == 3


def test_evaluate_determinant_and_row_zero():
    r = build("formal", longest_word(2))
    assert r.evaluate(product([z(1, 1), z(2, 2), z(3, 3)])) == TensorOperator.identity(3)
    assert r.evaluate(z(1, 1) * z(1, 2)).is_zero()


def test_parse_polynomial():
    r = build("formal", longest_word(2))
    p = parse_polynomial("z[2,3]*z[1,1]^*")
    assert r.evaluate(p) == r.z(2, 3) * r.z(1, 1).adjoint()


# -- suites -----------------------------------------------------------------------


@pytest.mark.parametrize("nf", list(enumerate_normal_forms(2)), ids=str)
def test_suites_pass_n2(nf):
    r = build("formal", nf)
    assert verify_defining_relations(r).passed
    assert verify_projection_suite(r).passed


def test_suites_pass_counit():
    r = build("one", NormalForm(3, ()))
    assert verify_defining_relations(r).passed
    assert verify_projection_suite(r).passed


def test_mutated_determinant_fails():
    r = build("formal", longest_word(2))
    images = dict(r.images)
    images[(1, 1)] = r.z(1, 1).adjoint()
    rep = r.with_images(images)
    report = verify_defining_relations(rep)
    assert "determinant" in report.failed_ids()


@pytest.mark.parametrize("rel", RELATION_IDS + PROJECTION_IDS)
def test_mutation_fixture_breaks_named_relation(rel):
    r = build("formal", longest_word(2))
    _, _, bad = mutation_fixture(r, rel)
    suite = verify_defining_relations if rel in RELATION_IDS else verify_projection_suite
    assert rel in suite(bad).failed_ids()


def test_report_json_shape():
    rep = verify_defining_relations(build("formal", longest_word(2))).to_json()
    assert rep["passed"] is True
    assert {r["id"] for r in rep["relations"]} == set(RELATION_IDS)


# -- V and E ------------------------------------------------------------------------


def test_v_first_segment_is_generator():
    nf = longest_word(2)
    r = build("formal", nf)
    b1 = nf.b(1)
    for i in range(nf.a(1), b1 + 2):
        assert V_op(r, 1, i) == r.z(b1 + 1, i)


def test_v_w0_j2():
    nf = longest_word(2)
    assert V_op(("formal", nf), 2, 1).strip_phase()[1] == closed_form_V(nf, 2, 1)


def test_e_closed_form_shapes():
    nf = longest_word(2)  # segment 2 = (1,1) is written first, segment 1 = (1,2)
    # i = a_j: segment j and every lower segment are all P0
    assert closed_form_E(nf, 2, 1) == tensor(T.P0(), T.P0(), T.P0())
    # i = a_j + 1: P0^(b_j+1-i) (x) S* (x) I^(i-a_j-1), then P0 on segment 1
    assert closed_form_E(nf, 2, 2) == tensor(T.Sstar(), T.P0(), T.P0())


def test_e_matches_closed_form_w0():
    nf = longest_word(2)
    for j, i in in_range_pairs(nf):
        assert E_op(("formal", nf), j, i).strip_phase()[1] == closed_form_E(nf, j, i)


@pytest.mark.parametrize("nf", list(enumerate_normal_forms(2)), ids=str)
def test_closed_forms_n2(nf):
    for j, i in in_range_pairs(nf):
        assert V_op(("formal", nf), j, i).strip_phase()[1] == closed_form_V(nf, j, i)
        assert E_op(("formal", nf), j, i).strip_phase()[1] == closed_form_E(nf, j, i)


def test_rank_one_all_zero():
    nf = longest_word(2)
    got = rank_one_projector(("formal", nf), (0, 0, 0), (0, 0, 0)).strip_phase()[1]
    assert got == tensor(T.P0(), T.P0(), T.P0())


def test_rank_one_expansion():
    assert T.rank_one(2, 1) == T.word(2, 0) * T.P0() * T.word(0, 1)


def test_rank_one_w0_entries():
    nf = longest_word(2)
    rows, cols = (1, 0, 2), (0, 1, 1)
    got = rank_one_projector(("formal", nf), rows, cols).strip_phase()[1]
    assert got == rank_one_direct(nf, rows, cols)
    assert got.entry(rows, cols) == LaurentScalar.const(1)
    assert got.entry(rows, (0, 0, 1)).is_zero()


# -- diagrams ---------------------------------------------------------------------


def test_diagram_single_crossing():
    d = diagram(parse_word("s[1,1]", 2))
    assert len(d.letters) == 1
    assert sum(1 for e in d.edges if e.label == "P0") == 2


def test_diagram_identity_lines():
    d = diagram(NormalForm(2, ()))
    assert d.letters == () and d.edges == ()
    assert len(d.row_scalars) == 3


def test_diagram_path_count():
    d = diagram(parse_word("s[1,1] s[2,2]", 2))
    assert len(list(d.paths(1, 3))) == 1


def test_diagram_no_path_is_zero():
    d = diagram(parse_word("s[1,1]", 2))
    assert list(d.paths(1, 3)) == []
    assert d.path_sum(1, 3).is_zero()


def test_diagram_n10_sections(n10_word):
    d = diagram(n10_word)
    assert len(d.sections) == 5
    assert [(s.a, s.b) for s in d.sections] == [(2, 4), (6, 7), (1, 8), (5, 9), (3, 10)]


@pytest.mark.parametrize("nf", list(enumerate_normal_forms(3)), ids=str)
def test_paths_match_images(nf):
    d = diagram(nf)
    r = build("formal", nf)
    for m in range(1, 5):
        for k in range(1, 5):
            assert d.path_sum(m, k) == r.z(m, k)


# -- bialgebra ------------------------------------------------------------------------


def test_coproduct_examples():
    d11 = coproduct_on_generator(2, 1, 1).as_dict()
    assert list(d11) == [(((1, 1, False),), ((1, 1, False),))]
    assert len(coproduct_on_generator(2, 1, 3).as_dict()) == 3


def test_counit_values():
    assert counit(((1, 1, False),)) == 1
    assert counit(((1, 2, False),)) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_bialgebra_laws(n):
    assert check_coassociativity(n) == []
    assert check_counit(n) == []


def test_phi_cases():
    assert phi_generator(3, 2, 1, 2) == z(1, 2)
    assert phi_generator(3, 2, 4, 4) == parse_polynomial("1")
    assert phi_generator(3, 2, 1, 4).terms == {}


@pytest.mark.parametrize("n,m", [(2, 1), (3, 1), (3, 2), (4, 2)])
def test_morphism_intertwines(n, m):
    assert check_morphism_intertwines(n, m) == []


# -- bundles --------------------------------------------------------------------------


@pytest.mark.parametrize("lam", ["formal", "one", (1j, (3 + 4j) / 5)])
def test_bundle_roundtrip(lam):
    r = build(lam, longest_word(2))
    buf = io.StringIO()
    dump_bundle(r, buf)
    buf.seek(0)
    back = load_bundle(buf)
    assert back.word == r.word and back.factors == r.factors
    assert back.lam == r.lam
    for key, op in r.images.items():
        assert back.z(*key) == op


# -- properties -------------------------------------------------------------------------

n3_forms = list(enumerate_normal_forms(3))


@given(st.sampled_from(n3_forms), st.sampled_from(n3_forms), st.sampled_from(n3_forms))
def test_convolution_associative(a, b, c):
    ra, rb, rc = (build("one", x) for x in (a, b, c))
    left = convolve(convolve(ra, rb), rc)
    right = convolve(ra, convolve(rb, rc))
    for i in range(1, 5):
        for j in range(1, 5):
            assert left.z(i, j) == right.z(i, j)


@given(st.sampled_from(n3_forms))
def test_generators_are_partial_isometries(nf):
    r = build("formal", nf)
    for i in range(1, 5):
        for j in range(1, 5):
            Z = r.z(i, j)
            assert Z * Z.adjoint() * Z == Z
