"""Command-line front end.

Exit codes: 0 success, 1 a mathematical check failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import math
import os
import re
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .classify import ClassifyError, equivalent, identify
from .numeric import DEFAULT_DIM_CAP, DEFAULT_TOL, TruncatedRep, read_triplets, truncate_rep, write_triplets
from .qlimit import convergence_table, write_csv
from .rep import build, dump_bundle, load_bundle
from .rep.diagram import Diagram, diagram
from .rep.suites import verify_defining_relations, verify_projection_suite
from .rep.symbolic import SymbolicRep
from .rep.voperators import E_op, V_op, closed_form_E, closed_form_V, in_range_pairs
from .weyl import NormalForm, WordError, format_word, parse_word

log = logging.getLogger("crystalrep")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


# -- configuration ------------------------------------------------------------


@dataclass
class RunConfig:
    n: Optional[int] = None
    word: str = ""
    lam: str = "formal"
    dim: int = 12
    window: Optional[int] = None
    tol: float = DEFAULT_TOL
    q: str = "0.3,0.1,0.03,0.01"
    out: Optional[str] = None
    format: Optional[str] = None
    dim_cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        if self.window is None:
            self.window = self.dim // 2
        if self.window > self.dim // 2:
            raise UsageError(f"window {self.window} must be at most dim/2 = {self.dim // 2}")
        if self.tol <= 0:
            raise UsageError("tol must be positive")

    def normal_form(self) -> NormalForm:
        if self.n is None:
            raise UsageError("--n is required")
        return parse_word(self.word, self.n)

    def lambda_spec(self):
        return parse_lambda(self.lam, self.n)

    def q_values(self) -> list:
        try:
            qs = [float(x) for x in self.q.split(",") if x.strip()]
        except ValueError as exc:
            raise UsageError(f"bad q list {self.q!r}") from exc
        if not qs or any(not 0 < x < 1 for x in qs):
            raise UsageError("q values must lie in (0, 1)")
        return qs


_CONFIG_KEYS = {"n": int, "word": str, "lambda": str, "dim": int, "window": int, "tol": float, "q": str, "out": str, "format": str, "dim_cap": int}


def read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment, quotes around values are dropped."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            val = val.strip("\"'")
            if key not in _CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                out[key] = _CONFIG_KEYS[key](val)
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: bad value for {key}") from exc
    return out


_GAUSS = re.compile(r"^\(?\s*([+-]?\d+)\s*([+-])\s*(\d*)\s*[ij]\s*\)?\s*/\s*(\d+)$")


def _parse_unit(tok: str) -> complex:
    tok = tok.strip().replace(" ", "")
    m = _GAUSS.match(tok)
    if m:
        re_, sign, im, den = m.groups()
        im = int(im or 1) * (1 if sign == "+" else -1)
        val = complex(int(re_), im) / int(den)
    else:
        t = tok.replace("i", "j")
        if t in ("j", "+j"):
            val = 1j
        elif t == "-j":
            val = -1j
        else:
            try:
                val = complex(t)
            except ValueError as exc:
                raise UsageError(f"cannot parse lambda entry {tok!r}") from exc
    if abs(abs(val) - 1) > 1e-12:
        raise UsageError(f"lambda entry {tok!r} is not unimodular")
    return val


def parse_lambda(text: str, n: Optional[int]):
    """``formal``, ``one``, a comma list of unit complex numbers, or ``angle:t1,t2,...`` (turns)."""
    text = (text or "formal").strip()
    if text in ("formal", "one"):
        return text
    if text.startswith("angle:"):
        vals = tuple(complex(np.exp(2j * math.pi * float(Fraction(t.strip())))) for t in text[6:].split(","))
    else:
        vals = tuple(_parse_unit(t) for t in text.split(","))
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} lambda values, got {len(vals)}")
    return vals


def _numeric_lambda(spec, n: int) -> tuple:
    return (1 + 0j,) * n if isinstance(spec, str) else tuple(spec)


# -- helpers --------------------------------------------------------------------


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _load_rep(args, cfg: RunConfig) -> SymbolicRep:
    if getattr(args, "bundle", None):
        try:
            with open(args.bundle) as fh:
                return load_bundle(fh)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read bundle {args.bundle}: {exc}") from exc
    nf = cfg.normal_form()
    return build(cfg.lambda_spec(), nf, lazy=len(nf) > 8)


def closed_form_report(rep: SymbolicRep) -> list:
    """One entry per operator family: in-range pairs where the closed form fails."""
    out = []
    nf = rep.word
    for name, op, closed in (("closed-form-V", V_op, closed_form_V), ("closed-form-E", E_op, closed_form_E)):
        checked, failures, example = 0, 0, None
        for j, i in in_range_pairs(nf) if nf is not None else []:
            checked += 1
            try:
                ok = op(rep, j, i).strip_phase()[1] == closed(nf, j, i)
            except ValueError:
                ok = False
            if not ok:
                failures += 1
                example = example or f"j={j},i={i}"
        out.append({"id": name, "passed": failures == 0, "checked": checked, "failures": failures, "counterexample": example})
    return out


def verify_report(rep: SymbolicRep) -> dict:
    rel = verify_defining_relations(rep).to_json()
    proj = verify_projection_suite(rep).to_json()
    closed = closed_form_report(rep)
    failed = [r["id"] for r in rel["relations"] + proj["relations"] + closed if not r["passed"]]
    return {
        "n": rep.n,
        "word": None if rep.word is None else format_word(rep.word),
        "passed": not failed,
        "failed_ids": failed,
        "suites": [rel, proj, {"suite": "closed-forms", "passed": all(c["passed"] for c in closed), "relations": closed}],
    }


# -- commands -------------------------------------------------------------------


def cmd_build(args, cfg: RunConfig) -> int:
    rep = _load_rep(args, cfg)
    buf = io.StringIO()
    dump_bundle(rep, buf)
    _emit(buf.getvalue(), cfg.out)
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    rep = _load_rep(args, cfg)
    report = verify_report(rep)
    _emit(json.dumps(report, indent=1), cfg.out)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_classify(args, cfg: RunConfig) -> int:
    nf1 = cfg.normal_form()
    nf2 = parse_word(args.word2, cfg.n)
    l1 = cfg.lambda_spec()
    l2 = parse_lambda(args.lambda2, cfg.n) if args.lambda2 else l1
    try:
        verdict = equivalent(l1, nf1, l2, nf2)
    except ClassifyError as exc:
        _emit(json.dumps({"error": str(exc)}), cfg.out)
        return EXIT_FAIL
    _emit(json.dumps(verdict.to_json(), indent=1), cfg.out)
    return EXIT_OK


def _load_matrices(path: str) -> TruncatedRep:
    try:
        with open(os.path.join(path, "meta.json")) as fh:
            meta = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read {path}/meta.json: {exc}") from exc
    n, dim, factors, window = meta["n"], meta["dim"], meta["factors"], meta["window"]
    size = dim ** factors
    images = {}
    for name in os.listdir(path):
        m = re.fullmatch(r"z_(\d+)_(\d+)\.txt", name)
        if m:
            images[(int(m.group(1)), int(m.group(2)))] = read_triplets(os.path.join(path, name), (size, size))
    lam = tuple(complex(a, b) for a, b in meta.get("lambda", []))
    return TruncatedRep(n, dim, factors, window, images, lam, "external")


def cmd_identify(args, cfg: RunConfig) -> int:
    mode = args.mode
    if args.matrices:
        target = _load_matrices(args.matrices)
        mode = "numeric"
    else:
        rep = _load_rep(args, cfg)
        if mode == "numeric":
            lam = _numeric_lambda(rep.lam, rep.n)
            target = truncate_rep(rep, cfg.dim, lam, cfg.window, cfg.dim_cap)
        else:
            target = rep
    try:
        res = identify(target, mode, cfg.tol)
    except ClassifyError as exc:
        _emit(json.dumps({"error": str(exc)}), cfg.out)
        return EXIT_FAIL
    out = res.to_json()
    if res.mode == "symbolic" and not isinstance(target.lam, str):
        out["lambda_values"] = [[x.real, x.imag] for x in res.lam_numeric(target.lam)]
    _emit(json.dumps(out, indent=1), cfg.out)
    return EXIT_OK


def cmd_qlimit(args, cfg: RunConfig) -> int:
    nf = cfg.normal_form()
    lam = _numeric_lambda(cfg.lambda_spec(), cfg.n)
    if cfg.dim ** len(nf) > cfg.dim_cap:
        raise UsageError(f"dimension {cfg.dim}^{len(nf)} exceeds dim_cap {cfg.dim_cap}")
    rows = convergence_table(lam, nf, cfg.q_values(), cfg.dim, cfg.window)
    if (cfg.format or "csv") == "json":
        text = json.dumps([{"q": q, "i": i, "j": j, "distance": d} for q, i, j, d in rows], indent=1)
    else:
        buf = io.StringIO()
        write_csv(rows, buf)
        text = buf.getvalue()
    _emit(text, cfg.out)
    return EXIT_OK


def cmd_diagram(args, cfg: RunConfig) -> int:
    nf = cfg.normal_form()
    d = diagram(nf, cfg.lambda_spec())
    hl = None
    if args.highlight:
        try:
            m, l = (int(x) for x in args.highlight.split(","))
        except ValueError as exc:
            raise UsageError("--highlight expects m,l") from exc
        if not (1 <= m <= nf.n + 1 and 1 <= l <= nf.n + 1):
            raise UsageError(f"--highlight rows must lie in 1..{nf.n + 1}")
        hl = (m, l)
    fmt = cfg.format or "txt"
    if fmt == "svg":
        text = render_svg(d, hl)
    elif fmt == "json":
        text = json.dumps(diagram_json(d, hl), indent=1)
    else:
        text = render_text(d, hl)
    _emit(text, cfg.out)
    return EXIT_OK


def cmd_export(args, cfg: RunConfig) -> int:
    """Write every truncated image as ``z_i_j.txt`` triplets plus ``meta.json``."""
    if not cfg.out:
        raise UsageError("export needs --out DIR")
    rep = _load_rep(args, cfg)
    lam = _numeric_lambda(rep.lam, rep.n)
    trep = truncate_rep(rep, cfg.dim, lam, cfg.window, cfg.dim_cap)
    os.makedirs(cfg.out, exist_ok=True)
    for (i, j), mat in sorted(trep.images.items()):
        write_triplets(mat, os.path.join(cfg.out, f"z_{i}_{j}.txt"))
    meta = {
        "n": trep.n,
        "dim": trep.dim,
        "factors": trep.factors,
        "window": trep.window,
        "lambda": [[x.real, x.imag] for x in lam],
        "word": None if rep.word is None else format_word(rep.word),
    }
    with open(os.path.join(cfg.out, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=1)
    return EXIT_OK


# -- diagram rendering ----------------------------------------------------------


def _highlight_edges(d: Diagram, hl) -> set:
    if hl is None:
        return set()
    return {e for p in d.paths(*hl) for e in p}


def _row_label(d: Diagram, row: int) -> str:
    return repr(d.row_scalars[row - 1])


def diagram_json(d: Diagram, hl=None) -> dict:
    marked = _highlight_edges(d, hl)
    return {
        "n": d.n,
        "word": format_word(d.word),
        "letters": list(d.letters),
        "rows": [_row_label(d, r) for r in range(1, d.n + 2)],
        "sections": [{"segment": s.segment, "a": s.a, "b": s.b, "start": s.start, "stop": s.stop} for s in d.sections],
        "edges": [
            {"column": e.column, "src": e.src, "dst": e.dst, "label": e.label, "highlight": e in marked} for e in d.edges
        ],
        "paths": None if hl is None else len(list(d.paths(*hl))),
    }


def render_text(d: Diagram, hl=None) -> str:
    """Rows top to bottom, one 5-character cell per letter; ``X`` marks a crossing.

    Highlighted horizontal cells use ``=``; highlighted diagonals use ``\\`` or ``/``.
    """
    marked = _highlight_edges(d, hl)
    labels = [_row_label(d, r) for r in range(1, d.n + 2)]
    pad = max(len(s) for s in labels) + 1
    cols = len(d.letters)
    head = [" " * pad]
    for s in d.sections:
        width = 5 * (s.stop - s.start)
        head.append(f"[{s.a},{s.b}]".center(width, " "))
    lines = ["".join(head).rstrip()]
    for row in range(1, d.n + 2):
        cells = []
        for c, r in enumerate(d.letters):
            lab = "S" if row == r else "S*" if row == r + 1 else ""
            hit = any(e.column == c and e.src == row and e.dst == row for e in marked)
            fill = "=" if hit else "-"
            cells.append(lab.center(5, fill) if lab else fill * 5)
        lines.append(labels[row - 1].ljust(pad) + "".join(cells))
        if row <= d.n:
            gap = []
            for c, r in enumerate(d.letters):
                if r != row:
                    gap.append(" " * 5)
                    continue
                down = any(e.column == c and e.src == row and e.dst == row + 1 for e in marked)
                up = any(e.column == c and e.src == row + 1 and e.dst == row for e in marked)
                mid = "X" if not (down or up) else ("\\" if down and not up else "/" if up and not down else "#")
                gap.append(mid.center(5))
            lines.append(" " * pad + "".join(gap).rstrip())
    if hl is not None:
        lines.append(f"paths for z[{hl[0]},{hl[1]}]: {len(list(d.paths(*hl)))}")
    if cols == 0:
        lines.append("(identity word: no crossings)")
    return "\n".join(lines) + "\n"


def render_svg(d: Diagram, hl=None) -> str:
    marked = _highlight_edges(d, hl)
    cw, rh, left, top = 60, 50, 130, 50
    cols = len(d.letters)
    width = left + cw * max(cols, 1) + 40
    height = top + rh * (d.n + 1) + 20

    def y(row):
        return top + rh * (row - 1)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="monospace" font-size="12">'
    ]
    for s in d.sections:
        x0, x1 = left + cw * s.start, left + cw * s.stop
        out.append(
            f'<rect x="{x0}" y="{top - 30}" width="{x1 - x0}" height="{rh * d.n + 45}" fill="none" stroke="#999" stroke-dasharray="4 3"/>'
        )
        out.append(f'<text x="{(x0 + x1) / 2}" y="{top - 34}" text-anchor="middle">s[{s.a},{s.b}]</text>')
    for row in range(1, d.n + 2):
        out.append(f'<text x="8" y="{y(row) + 4}">{_row_label(d, row)}</text>')
        if cols == 0:
            out.append(f'<line x1="{left}" y1="{y(row)}" x2="{left + cw}" y2="{y(row)}" stroke="black"/>')
    for e in d.edges:
        x0, x1 = left + cw * e.column, left + cw * (e.column + 1)
        color, w = ("#d62728", 3) if e in marked else ("black", 1)
        out.append(f'<line x1="{x0}" y1="{y(e.src)}" x2="{x1}" y2="{y(e.dst)}" stroke="{color}" stroke-width="{w}"/>')
        if e.src == e.dst and e.label in ("S", "S*"):
            out.append(f'<text x="{(x0 + x1) / 2}" y="{y(e.src) - 4}" text-anchor="middle">{e.label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- argument parsing -------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", "-n", type=int, help="rank n (the group is S_{n+1})")
    p.add_argument("--word", help='normal form, e.g. "s[1,1] s[1,2]"; "id" for the identity')
    p.add_argument("--lambda", dest="lam", help="formal | one | comma list of unit complex | angle:t1,t2,...")
    p.add_argument("--dim", type=int, help="truncation per tensor factor")
    p.add_argument("--window", type=int, help="window size (at most dim/2)")
    p.add_argument("--tol", type=float, help="numeric tolerance")
    p.add_argument("--q", help="comma separated q values")
    p.add_argument("--out", "-o", help="output file (directory for export)")
    p.add_argument("--format", choices=("json", "csv", "svg", "txt"))
    p.add_argument("--config", help="file with key = value lines")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crystalrep", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build psi_{lambda,w} and write a JSON bundle")
    _common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="run the exact relation, projection and closed-form suites")
    _common(p)
    p.add_argument("--bundle", help="verify a bundle file instead of building")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classify", help="decide equivalence of two (lambda, word) pairs")
    _common(p)
    p.add_argument("--word2", required=True)
    p.add_argument("--lambda2")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("identify", help="recover (lambda, word) from a representation")
    _common(p)
    p.add_argument("--bundle")
    p.add_argument("--matrices", help="directory written by export")
    p.add_argument("--mode", choices=("symbolic", "numeric"), default="symbolic")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("qlimit", help="distance of the scaled q-representation from its limit")
    _common(p)
    p.set_defaults(func=cmd_qlimit)

    p = sub.add_parser("diagram", help="draw the path diagram")
    _common(p)
    p.add_argument("--highlight", help="m,l: mark the paths contributing to z[m,l]")
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("export", help="write truncated images as sparse triplets")
    _common(p)
    p.add_argument("--bundle")
    p.set_defaults(func=cmd_export)
    return parser


def _config(args) -> RunConfig:
    base = read_config(args.config) if args.config else {}
    if "lambda" in base:
        base["lam"] = base.pop("lambda")
    for name in ("n", "word", "lam", "dim", "window", "tol", "q", "out", "format"):
        val = getattr(args, name, None)
        if val is not None:
            base[name] = val
    if base.get("n") is None and getattr(args, "bundle", None) is None and not getattr(args, "matrices", None):
        raise UsageError("--n is required")
    keys = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in base.items() if k in keys})


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except (UsageError, WordError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
