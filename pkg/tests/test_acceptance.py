"""Acceptance criteria 1-10, one test each.

Each test records a one-line verdict (printed at the end of the session) and
then asserts it.
"""
import json
import random
import time


from conftest import ACCEPTANCE
from crystalrep.classify import equivalent, factor_numeric, identify, verify_witness
from crystalrep.cli import main
from crystalrep.numeric import truncate_rep, wu_residuals
from crystalrep.qlimit import limit_distance, q_build
from crystalrep.rep import build, dump_bundle
from crystalrep.rep.bialgebra import check_coassociativity, check_counit, check_morphism_intertwines
from crystalrep.rep.suites import (
    PROJECTION_IDS,
    RELATION_IDS,
    mutation_fixture,
    verify_defining_relations,
    verify_projection_suite,
)
from crystalrep.rep.voperators import E_op, V_op, closed_form_E, closed_form_V, in_range_pairs, rank_one_direct, rank_one_projector
from crystalrep.weyl import enumerate_normal_forms, format_word, longest_word

N2 = list(enumerate_normal_forms(2))
N3 = list(enumerate_normal_forms(3))
LAMBDAS_C6 = [(1, 1), (1j, 1), ((3 + 4j) / 5, (5 + 12j) / 13)]


def record(num: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[num] = (ok, detail)
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_01_relations():
    t = time.time()
    failed = []
    for nf in N2 + N3:
        report = verify_defining_relations(build("formal", nf))
        if not report.passed:
            failed.append((format_word(nf), report.failed_ids()))
    record(1, not failed, f"{len(N2) + len(N3)} words, failures={failed}, {time.time() - t:.1f}s")


def test_criterion_02_projection_suite():
    failed = []
    for nf in N2 + N3:
        report = verify_projection_suite(build("formal", nf))
        if not report.passed:
            failed.append((format_word(nf), report.failed_ids()))
    record(2, not failed, f"{len(N2) + len(N3)} words, failures={failed}")


def test_criterion_03_closed_forms(n10_word):
    checked, bad = 0, []
    for nf in N2 + N3:
        rep = build("formal", nf)
        for j, i in in_range_pairs(nf):
            checked += 1
            if V_op(rep, j, i).strip_phase()[1] != closed_form_V(nf, j, i):
                bad.append(("V", format_word(nf), j, i))
            if E_op(rep, j, i).strip_phase()[1] != closed_form_E(nf, j, i):
                bad.append(("E", format_word(nf), j, i))
    big = build("formal", n10_word, lazy=True)
    big_pairs = 0
    for j, i in in_range_pairs(n10_word):
        if j <= 4:
            big_pairs += 1
            if V_op(big, j, i).strip_phase()[1] != closed_form_V(n10_word, j, i):
                bad.append(("V", "n10", j, i))
        if j <= 2:
            if E_op(big, j, i).strip_phase()[1] != closed_form_E(n10_word, j, i):
                bad.append(("E", "n10", j, i))
    ok = not bad and big_pairs >= 10
    record(3, ok, f"{checked} small pairs, {big_pairs} n=10 pairs, mismatches={bad}")


def test_criterion_04_rank_one():
    rng = random.Random(4)
    bad = []
    for n in (2, 3):
        nf = longest_word(n)
        for _ in range(5):
            rows = tuple(rng.randrange(3) for _ in range(len(nf)))
            cols = tuple(rng.randrange(3) for _ in range(len(nf)))
            got = rank_one_projector(("formal", nf), rows, cols).strip_phase()[1]
            if got != rank_one_direct(nf, rows, cols):
                bad.append((n, rows, cols))
    record(4, not bad, f"10 index tuples, mismatches={bad}")


def test_criterion_05_equivalence():
    rng = random.Random(5)
    pairs = [(a, b, "formal", "formal") for a in N2 for b in N2]
    pairs += [(a, b, "formal", "formal") for a, b in rng.sample([(a, b) for a in N3 for b in N3], 100)]
    lam_a, lam_b = (1j, 1, -1), (1j, -1j, -1)
    pairs += [(nf, nf, lam_a, lam_b) for nf in rng.sample(N3, 10) if nf.k]
    wrong, unverified = [], []
    for a, b, la, lb in pairs:
        v = equivalent(la, a, lb, b)
        truth = a == b and la == lb
        if v.equivalent != truth:
            wrong.append((format_word(a), format_word(b)))
        elif not v.equivalent and (not verify_witness(v, la, a, lb, b) or v.case == "search"):
            unverified.append((format_word(a), format_word(b), v.case))
    record(5, not wrong and not unverified, f"{len(pairs)} pairs, wrong={wrong}, unverified={unverified}")


def test_criterion_06_identification():
    t = time.time()
    bad = []
    for nf in N2 + N3:
        res = identify(build("formal", nf))
        if res.word != nf or [x.exponents(nf.n) for x in res.lam] != [tuple(int(k == i) for k in range(nf.n)) for i in range(nf.n)]:
            bad.append(("symbolic", format_word(nf)))
    worst = 0.0
    for lam in LAMBDAS_C6:
        for nf in N2:
            res = identify(truncate_rep(build(lam, nf), 12, window=6), "numeric", 1e-8)
            err = max(abs(x - y) for x, y in zip(res.lam, lam))
            worst = max(worst, err)
            if res.word != nf or err > 1e-6:
                bad.append(("numeric", format_word(nf), lam))
    elapsed = time.time() - t
    record(6, not bad and elapsed < 600, f"failures={bad}, worst lambda error={worst:.2e}, {elapsed:.1f}s")


def test_criterion_07_wu_properties():
    lam2, lam3 = (1j, (3 + 4j) / 5), (1j, (3 + 4j) / 5, -1)
    cases = [(lam2, longest_word(2))] + [(lam3, nf) for nf in N3 if len(nf) <= 3]
    worst: dict = {}
    for lam, nf in cases:
        tr = truncate_rep(build(lam, nf), 12)
        res = wu_residuals(tr)
        for key in ("scalar", "commute", "wu", "isometry", "defect"):
            if key in res:
                worst[key] = max(worst.get(key, 0.0), res[key])
        if res["r"] <= nf.n:
            d = factor_numeric(tr, 1e-8).diagnostics["decomposition_residual"]
            worst["decomposition"] = max(worst.get("decomposition", 0.0), d)
    ok = len(worst) == 6 and max(worst.values()) <= 1e-10
    detail = ", ".join(f"{k}={v:.1e}" for k, v in sorted(worst.items()))
    record(7, ok, f"{len(cases)} reps at N=12: {detail}")


def test_criterion_08_q_limit():
    t = time.time()
    lam = (1j, (3 + 4j) / 5)
    nf = longest_word(2)
    srep = build(lam, nf)
    qs = [0.3, 0.1, 0.03, 0.01]
    dist = {q: limit_distance(q_build(lam, nf, q, 16), srep, 8) for q in qs}
    bound_ok = all(d <= 4 * q for q in qs for d in dist[q].values())
    ratios = []
    for q in qs:
        q3 = q / 3
        d3 = limit_distance(q_build(lam, nf, q3, 16), srep, 8)
        for key, d in dist[q].items():
            if d > 0:
                ratios.append(d3[key] / d)
    elapsed = time.time() - t
    worst = max(max(d.values()) / q for q, d in dist.items())
    ok = bound_ok and max(ratios) <= 0.6 and elapsed < 120
    record(8, ok, f"max distance/q={worst:.3f}, max d(q/3)/d(q)={max(ratios):.3f}, {elapsed:.1f}s")


def test_criterion_09_bialgebra():
    bad = []
    for n in range(1, 5):
        bad += check_coassociativity(n) + check_counit(n)
        for m in range(1, n):
            bad += check_morphism_intertwines(n, m)
    record(9, not bad, f"n <= 4, failures={bad[:3]}")


def test_criterion_10_negative_controls(tmp_path, capsys):
    rep = build("formal", longest_word(2))
    missed = []
    for rel in RELATION_IDS + PROJECTION_IDS:
        _, _, bad = mutation_fixture(rep, rel)
        path = tmp_path / f"{rel}.json"
        with open(path, "w") as fh:
            dump_bundle(bad, fh)
        code = main(["verify", "--bundle", str(path)])
        report = json.loads(capsys.readouterr().out)
        if code != 1 or rel not in report["failed_ids"]:
            missed.append(rel)
    clean = tmp_path / "clean.json"
    with open(clean, "w") as fh:
        dump_bundle(rep, fh)
    clean_code = main(["verify", "--bundle", str(clean)])
    capsys.readouterr()
    total = len(RELATION_IDS) + len(PROJECTION_IDS)
    record(10, not missed and clean_code == 0, f"{total} fixtures, missed={missed}, clean exit={clean_code}")
