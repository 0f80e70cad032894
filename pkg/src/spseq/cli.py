"""``spseq`` command line.

Exit codes: 0 success, 1 usage error, 2 parse or invariant failure,
3 counterexample or disagreement found.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .bigraded import BigradedMap
from .document import Document, _fmt_bd, _fmt_matrix, dumps, loads
from .errors import DocumentSyntaxError, InvalidObject, NotAMorphism, SpseqError
from .filtered import FilteredComplex, FilteredMorphism, e_of_morphism, lambda_fc, spectral_sequence, two_generator_fc
from .harness import CHECKS, MUTATIONS, GenSpec, run_check
from .linalg import Field, parse_field, use_field
from .multicomplex import Multicomplex, MultiMorphism, eprime, eprime_of_morphism, lambda_mc, tot
from .paths import find_r_homotopy, lambda_, mapping_path_space
from .representables import acyclic_rfib_via_rlp, disk, rfib_via_rlp, sphere, varphi
from .spectral import (
    SpectralMorphism,
    SpectralSequence,
    fixture_f_S,
    fixture_pi_T,
    fixture_S,
    fixture_T,
    is_acyclic_r_fibration,
    is_Er_quasi_iso,
    is_r_fibration,
    is_surjection,
    ring,
)

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_COUNTEREXAMPLE = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# -- fixtures -------------------------------------------------------------------

_FIXTURES = {
    "R": (2, lambda p, n: ring(p, n), "R(p,n): the field at (p,n)"),
    "S": (0, fixture_S, "two copies of R joined by an identity d_1"),
    "T": (0, fixture_T, "two copies of R joined by an identity d_0"),
    "f_S": (0, fixture_f_S, "R(0,0) -> S onto the (0,0) summand"),
    "pi_T": (0, fixture_pi_T, "T -> R(0,0), identity on page 0"),
    "lambda": (1, lambda_, "Lambda_r"),
    "disk": (3, disk, "D_r(p,n)"),
    "sphere": (3, sphere, "S_r(p,n)"),
    "varphi": (3, varphi, "D_r(p,n) -> S_r(p,n)"),
    "lambda_fc": (1, lambda_fc, "Lambda_r as a filtered complex"),
    "lambda_mc": (1, lambda_mc, "Lambda_r as a multicomplex"),
    "two_generator": (0, two_generator_fc, "x at level 1, dx = y at level 0"),
}


# -- helpers ----------------------------------------------------------------------


def _read(path: str, flag_field: Optional[Field]) -> Document:
    try:
        text = Path(path).read_text() if path != "-" else sys.stdin.read()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from None
    doc = loads(text, default_field=flag_field or _env_field())
    if flag_field is not None and doc.field.name != flag_field.name:
        raise InvalidObject(f"document field {doc.field.name} differs from --field {flag_field.name}")
    return doc


def _as_sequence(obj) -> SpectralSequence:
    if isinstance(obj, SpectralSequence):
        return obj
    if isinstance(obj, FilteredComplex):
        return spectral_sequence(obj)
    if isinstance(obj, Multicomplex):
        return eprime(obj)
    raise _UsageError(f"expected a spectral sequence, filtered complex or multicomplex, got a {type(obj).__name__}")


def _as_morphism(obj) -> SpectralMorphism:
    if isinstance(obj, SpectralMorphism):
        return obj
    if isinstance(obj, FilteredMorphism):
        return e_of_morphism(obj)
    if isinstance(obj, MultiMorphism):
        return eprime_of_morphism(obj)
    raise _UsageError(f"expected a morphism document, got a {type(obj).__name__}")


def _yn(b: bool) -> str:
    return "true" if b else "false"


def _table(s: SpectralSequence, m: int) -> list[str]:
    mod = s.module(m)
    out = [f"page {m}" + ("" if s.d(m).is_zero() else f" (d_{m} nonzero)")]
    if mod.is_zero():
        out.append("  zero")
        return out
    ps = sorted({bd[0] for bd in mod.support()})
    qs = sorted({bd[1] for bd in mod.support()}, reverse=True)
    ps = list(range(ps[0], ps[-1] + 1))
    qs = list(range(qs[0], qs[-1] - 1, -1))
    width = max(3, max(len(str(p)) for p in ps) + 1)
    out.append("  q\\p " + "".join(f"{p:>{width}}" for p in ps))
    for q in qs:
        cells = "".join(f"{(mod.dim((p, q)) or '.'):>{width}}" for p in ps)
        out.append(f"  {q:>3} " + cells)
    return out


# -- commands -----------------------------------------------------------------------


def cmd_pages(args, field) -> int:
    doc = _read(args.file, field)
    with use_field(doc.field):
        s = _as_sequence(doc.obj)
        pages = [args.page] if args.page is not None else range(s.M + 1)
        for m in pages:
            if m < 0:
                raise _UsageError("--page must be non-negative")
            print("\n".join(_table(s, m)))
        if args.page is None:
            print(f"stable from page {s.M}")
    return EXIT_OK


def cmd_validate(args, field) -> int:
    doc = _read(args.file, field)
    with use_field(doc.field):
        extra = ""
        if isinstance(doc.obj, SpectralSequence):
            extra = f", {doc.obj.M + 1} page(s)"
        print(f"ok: {doc.kind} over {doc.field.name}{extra}")
    return EXIT_OK


def _emit(obj, out: Optional[str], name: str) -> None:
    text = dumps(obj)
    if out is None:
        print(f"# --- {name} ---")
        sys.stdout.write(text)
    else:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / f"{name}.txt").write_text(text)
        print(f"wrote {Path(out) / f'{name}.txt'}")


def cmd_factor(args, field) -> int:
    doc = _read(args.file, field)
    with use_field(doc.field):
        u = _as_morphism(doc.obj)
        mp = mapping_path_space(args.r, u)
        for obj, name in ((mp.Pbar, "Pbar"), (mp.i, "i"), (mp.p, "p"), (mp.rho, "rho")):
            _emit(obj, args.out, name)
        ok = (mp.p @ mp.i) == u and is_r_fibration(mp.p, args.r) and is_acyclic_r_fibration(mp.rho, args.r)
        print(f"# p o i = u, p {args.r}-fibration, rho acyclic: {_yn(ok)}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_COUNTEREXAMPLE


def cmd_predicates(args, field) -> int:
    doc = _read(args.file, field)
    with use_field(doc.field):
        f = _as_morphism(doc.obj)
        r = args.r
        print(f"surjection: {_yn(is_surjection(f))}")
        print(f"E_{r}-quasi-isomorphism: {_yn(is_Er_quasi_iso(f, r))}")
        print(f"{r}-fibration: {_yn(is_r_fibration(f, r))}")
        print(f"acyclic {r}-fibration: {_yn(is_acyclic_r_fibration(f, r))}")
    return EXIT_OK


def cmd_rlp(args, field) -> int:
    doc = _read(args.file, field)
    with use_field(doc.field):
        f = _as_morphism(doc.obj)
        r = args.r
        rows = [
            (f"{r}-fibration", is_r_fibration(f, r), rfib_via_rlp(f, r)),
            (f"acyclic {r}-fibration", is_acyclic_r_fibration(f, r), acyclic_rfib_via_rlp(f, r)),
        ]
        agree = True
        for name, direct, lifted in rows:
            same = direct == lifted
            agree &= same
            print(f"{name}: direct {_yn(direct)}, lifting {_yn(lifted)}, agree {_yn(same)}")
    return EXIT_OK if agree else EXIT_COUNTEREXAMPLE


def cmd_homotopy(args, field) -> int:
    df, dg = _read(args.f, field), _read(args.g, field)
    if df.field.name != dg.field.name:
        raise InvalidObject(f"documents use different fields ({df.field.name}, {dg.field.name})")
    with use_field(df.field):
        f, g = _as_morphism(df.obj), _as_morphism(dg.obj)
        if dumps(f.source) != dumps(g.source) or dumps(f.target) != dumps(g.target):
            raise _UsageError("the two morphisms must share source and target")
        h = find_r_homotopy(f, g, args.r)
        if h is None:
            print(f"{args.r}-homotopic: false")
            return EXIT_OK
        print(f"{args.r}-homotopic: true")
        for m, hat in enumerate(h.hats):
            print(f"hat {m}")
            for bd, blk in sorted(hat.blocks().items()):
                print(f"block {_fmt_bd(bd)} {_fmt_matrix(blk)}")
    return EXIT_OK


def cmd_tot(args, field) -> int:
    doc = _read(args.file, field)
    if not isinstance(doc.obj, Multicomplex):
        raise _UsageError("tot expects a multicomplex document")
    with use_field(doc.field):
        sys.stdout.write(dumps(tot(doc.obj)))
    return EXIT_OK


def cmd_ss(args, field) -> int:
    doc = _read(args.file, field)
    if not isinstance(doc.obj, (FilteredComplex, Multicomplex)):
        raise _UsageError("ss expects a filtered-complex or multicomplex document")
    with use_field(doc.field):
        sys.stdout.write(dumps(_as_sequence(doc.obj)))
    return EXIT_OK


def cmd_fixture(args, field) -> int:
    if args.name not in _FIXTURES:
        raise _UsageError(f"unknown fixture {args.name!r}; known: {', '.join(_FIXTURES)}")
    arity, make, _ = _FIXTURES[args.name]
    if len(args.params) != arity:
        raise _UsageError(f"fixture {args.name} takes {arity} integer argument(s)")
    try:
        params = [int(x) for x in args.params]
    except ValueError:
        raise _UsageError("fixture arguments must be integers") from None
    with use_field(field or _env_field()):
        try:
            sys.stdout.write(dumps(make(*params)))
        except ValueError as exc:
            raise _UsageError(str(exc)) from None
    return EXIT_OK


def cmd_fuzz(args, field) -> int:
    names = list(CHECKS) if args.check == "all" else [args.check]
    for n in names:
        if n not in CHECKS:
            raise _UsageError(f"unknown check {n!r}; known: all, {', '.join(CHECKS)}")
    if args.mutation is not None and args.mutation not in MUTATIONS:
        raise _UsageError(f"unknown mutation {args.mutation!r}; known: {', '.join(MUTATIONS)}")
    try:
        rs = tuple(int(x) for x in args.r.split(","))
        spec = GenSpec(
            seed=args.seed,
            field=(field or _env_field()).name,
            trials=args.trials,
            r_values=rs,
            window=args.window,
            max_dim=args.max_dim,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    only = [args.trial] if args.trial is not None else None
    failed = False
    for n in names:
        rep = run_check(n, spec, mutation=args.mutation, only_trials=only, jobs=args.jobs)
        sys.stdout.write(rep.text())
        failed |= not rep.ok
    return EXIT_COUNTEREXAMPLE if failed else EXIT_OK


def _env_field() -> Field:
    env = os.environ.get("SPSEQ_FIELD")
    return parse_field(env) if env else Field(7)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spseq", description="Exact computations with spectral sequences over a field.")
    p.add_argument("--field", help="field for generated objects and field-less documents: 'Fp:<prime>' or 'Q' (default $SPSEQ_FIELD or Fp:7)")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("pages", cmd_pages, "print dimension tables per page")
    sp.add_argument("file")
    sp.add_argument("--page", type=int)
    sp = add("validate", cmd_validate, "parse and validate a document")
    sp.add_argument("file")
    sp = add("factor", cmd_factor, "mapping path space factorization u = p o i")
    sp.add_argument("file")
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--out", help="directory for Pbar/i/p/rho documents (default: stdout)")
    sp = add("predicates", cmd_predicates, "surjection, quasi-isomorphism and fibration verdicts")
    sp.add_argument("file")
    sp.add_argument("--r", type=int, required=True)
    sp = add("rlp", cmd_rlp, "compare direct verdicts with lifting-property verdicts")
    sp.add_argument("file")
    sp.add_argument("--r", type=int, required=True)
    sp = add("homotopy", cmd_homotopy, "search for an r-homotopy between two morphisms")
    sp.add_argument("f")
    sp.add_argument("g")
    sp.add_argument("--r", type=int, required=True)
    sp = add("tot", cmd_tot, "totalize a multicomplex into a filtered complex")
    sp.add_argument("file")
    sp = add("ss", cmd_ss, "spectral sequence of a filtered complex or multicomplex")
    sp.add_argument("file")
    sp = add("fixture", cmd_fixture, "emit a named fixture: " + ", ".join(f"{k} ({v[2]})" for k, v in _FIXTURES.items()))
    sp.add_argument("name")
    sp.add_argument("params", nargs="*")
    sp = add("fuzz", cmd_fuzz, "run a randomized property check")
    sp.add_argument("--check", required=True, help="all, " + ", ".join(CHECKS))
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--r", default="0,1,2", help="comma-separated page indices")
    sp.add_argument("--trial", type=int, help="replay a single trial")
    sp.add_argument("--mutation", help="corrupt a predicate: " + ", ".join(MUTATIONS))
    sp.add_argument("--window", type=int, default=4)
    sp.add_argument("--max-dim", type=int, default=3)
    sp.add_argument("--jobs", type=int, default=1)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "fn", None):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    if getattr(args, "r", None) is not None and isinstance(args.r, int) and args.r < 0:
        print("spseq: error: --r must be non-negative", file=sys.stderr)
        return EXIT_USAGE
    try:
        field = parse_field(args.field) if args.field else None
    except ValueError as exc:
        print(f"spseq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args, field)
    except _UsageError as exc:
        print(f"spseq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DocumentSyntaxError as exc:
        print(f"spseq: syntax error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InvalidObject, NotAMorphism) as exc:
        print(f"spseq: invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SpseqError as exc:
        print(f"spseq: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
