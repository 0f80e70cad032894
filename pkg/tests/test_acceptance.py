"""Acceptance suite: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v`` (lines appear in the terminal
summary) or ``python3 tests/test_acceptance.py``.
"""

import time


from spseq.errors import NotASurjection
from spseq.filtered import lambda_fc, spectral_sequence, two_generator_fc
from spseq.harness import GenSpec, run_check
from spseq.linalg import use_field
from spseq.multicomplex import eprime, lambda_mc
from spseq.paths import lambda_
from spseq.representables import disk, sphere
from spseq.spectral import (
    SpectralMorphism,
    final_object,
    find_isomorphism,
    fixture_f_S,
    fixture_pi_T,
    fixture_S,
    fixture_T,
    pagewise_cokernel,
    pullback_surjection,
    ring,
    validate_spectral_sequence,
)

RESULTS: list[str] = []
WINDOW = range(-4, 5)


def _report(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _harness(names, trials, min_counts=None):
    spec = GenSpec(seed=42, field="Fp:7", trials=trials, r_values=(0, 1, 2))
    reports = [run_check(n, spec) for n in names]
    bad = [f"{rep.check}: {len(rep.failures)} counterexample(s)" for rep in reports if not rep.ok]
    for key, least in (min_counts or {}).items():
        got = sum(rep.counts.get(key, 0) for rep in reports)
        if got < least:
            bad.append(f"only {got} {key}, expected {least}")
    return reports, bad


def test_criterion_1_validators():
    start = time.perf_counter()
    objs = [lambda_(r) for r in range(5)]
    objs += [disk(r, p, n) for r in range(4) for p in WINDOW for n in WINDOW]
    # spheres start at r = 1: S_0 would need a disk of index -1
    objs += [sphere(r, p, n) for r in range(1, 4) for p in WINDOW for n in WINDOW]
    objs += [fixture_S(), fixture_T()]
    bad = [s for s in objs if not validate_spectral_sequence(s)]
    rep = validate_spectral_sequence(pagewise_cokernel(fixture_f_S()))
    cok_ok = (not rep) and rep.page == 1 and "= 1" in rep.message and "= 0" in rep.message
    elapsed = time.perf_counter() - start
    ok = not bad and cok_ok and elapsed < 1.0
    _report(1, ok, f"{len(objs) - len(bad)}/{len(objs)} objects valid, cokernel rejected: {cok_ok}, {elapsed:.2f}s")


def test_criterion_2_axioms():
    start = time.perf_counter()
    _, bad = _harness(["two-out-of-three", "axiom-C", "axiom-D", "partial-brown"], 100)
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 60
    _report(2, ok, f"4 checks x 300 trials, {'; '.join(bad) or 'no counterexamples'}, {elapsed:.1f}s")


def test_criterion_3_lifting_agreement():
    reports, bad = _harness(["rlp"], 100)
    _report(3, not bad, f"{reports[0].trials_run} fuzzed morphisms, {'; '.join(bad) or '100% agreement'}")


def test_criterion_4_filtered_pages():
    found = find_isomorphism(spectral_sequence(two_generator_fc()), disk(1, 1, 1)) is not None
    lam = [r for r in range(4) if find_isomorphism(spectral_sequence(lambda_fc(r)), lambda_(r)) is None]
    _report(4, found and not lam, f"two-generator iso found: {found}, lambda_fc mismatches: {lam or 'none'}")


def test_criterion_5_functor_E():
    _, bad = _harness(["functor-E"], 50, {"pullbacks": 150, "homotopy witnesses": 150})
    _report(5, not bad, f"50 trials per r, {'; '.join(bad) or 'no failures'}")


def test_criterion_6_multicomplexes():
    lam = [r for r in range(4) if find_isomorphism(eprime(lambda_mc(r)), lambda_(r)) is None]
    reports, bad = _harness(["functor-Eprime"], 50, {"totalizations (D^2 = 0)": 150, "path comparisons": 75})
    ok = not lam and not bad
    _report(6, ok, f"lambda mismatches: {lam or 'none'}, {'; '.join(bad) or 'D^2 = 0 and path comparisons hold'}")


def test_criterion_7_homotopy_relation():
    _, bad = _harness(["homotopy"], 50, {"homotopic pairs": 150, "path contractions": 30})
    _report(7, not bad, f"50 pairs per r, {'; '.join(bad) or 'closure and path contraction hold'}")


def test_criterion_8_surjection_guard():
    try:
        pullback_surjection(SpectralMorphism.zero(final_object(), ring(0, 0)), fixture_pi_T())
        refused = False
    except NotASurjection:
        refused = True
    _report(8, refused, "pullback along a non-surjection " + ("refused" if refused else "was computed"))


if __name__ == "__main__":
    import sys

    failed = 0
    with use_field("Fp:7"):
        for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_criterion_")):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
