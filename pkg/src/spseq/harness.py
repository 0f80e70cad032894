"""Randomized verification of the category axioms and comparison functors.

Every trial draws its objects from ``default_rng([seed, trial, r, salt])``, so
a report is a pure function of ``(GenSpec, check, mutation)`` and any single
trial can be replayed in isolation.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

import numpy as np

from .bigraded import BigradedMap, BigradedModule
from .errors import SpseqError
from .filtered import (
    FilteredComplex,
    FilteredMorphism,
    direct_sum_fc,
    e_of_morphism,
    filtered_r_homotopy_check,
    is_fc_fibration,
    is_fc_weq,
    pullback_fc,
    spectral_sequence,
    spectral_witness,
    tensor_lambda_fc,
)
from .linalg import get_field, inverse, kernel_basis, use_field
from .linsys import LinearSystem
from .multicomplex import (
    Multicomplex,
    MultiMorphism,
    eprime,
    eprime_of_morphism,
    lambda_mc,
    mc_direct_sum,
    mc_path,
    mc_pullback,
    mc_strict_homotopy_check,
    op_bidegree,
    strict_to_spectral_witness,
    tensor,
    tot,
    tot_morphism,
    validate_multicomplex,
)
from .paths import (
    find_r_homotopy,
    homotopy_from_morphism,
    is_r_homotopy,
    lambda_,
    mapping_path_space,
    path,
    path_contraction,
)
from .representables import acyclic_rfib_via_rlp, disk, rfib_via_rlp
from .spectral import (
    SpectralMorphism,
    SpectralSequence,
    find_isomorphism,
    hom_space,
    inclusions,
    is_Er_quasi_iso,
    is_r_fibration,
    product,
    pullback_surjection,
    solve_morphisms,
)

__all__ = [
    "GenSpec",
    "CheckReport",
    "gen_filtered",
    "gen_filtered_morphism",
    "gen_filtered_homotopy",
    "gen_multicomplex",
    "gen_strict_morphism",
    "gen_spectral",
    "gen_morphism",
    "CHECKS",
    "MUTATIONS",
    "run_check",
    "check_two_out_of_three",
    "check_axiom_C",
    "check_axiom_D",
    "check_partial_brown",
    "check_functor_E",
    "check_functor_Eprime",
    "check_rlp_agreement",
    "check_homotopy_relation",
]


@dataclass(frozen=True)
class GenSpec:
    seed: int = 42
    field: str = "Fp:7"
    window: int = 4
    max_dim: int = 3
    trials: int = 100
    r_values: tuple[int, ...] = (0, 1, 2)
    max_pieces: int = 4
    density: float = 0.5

    def __post_init__(self):
        if self.window < 1 or self.window > 16:
            raise ValueError("window must be in 1..16")
        if self.max_dim < 0 or self.max_dim > 8:
            raise ValueError("max_dim must be in 0..8")
        if self.trials < 0:
            raise ValueError("trials must be non-negative")
        if any(r < 0 for r in self.r_values):
            raise ValueError("r values must be non-negative")
        if self.max_pieces < 1:
            raise ValueError("max_pieces must be positive")

    def rng(self, trial: int, r: int = 0, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, trial, r, salt])


# -- predicates and mutations -------------------------------------------------------


@dataclass(frozen=True)
class Predicates:
    weq: Callable[[SpectralMorphism, int], bool]
    fib: Callable[[SpectralMorphism, int], bool]

    def acyclic(self, f: SpectralMorphism, r: int) -> bool:
        return self.fib(f, r) and self.weq(f, r)


def _weq_early(f: SpectralMorphism, r: int) -> bool:
    return f.map(r).is_iso()


def _fib_late(f: SpectralMorphism, r: int) -> bool:
    return all(f.map(k).is_surjective() for k in range(r + 2))


PREDICATES = Predicates(is_Er_quasi_iso, is_r_fibration)
MUTATIONS: dict[str, Predicates] = {
    "weq-early": Predicates(_weq_early, is_r_fibration),
    "fib-late": Predicates(is_Er_quasi_iso, _fib_late),
}


# -- generators ----------------------------------------------------------------------

_DEGREES = (-1, 0, 1)
_LEVELS = (-2, -1, 0, 1, 2)


def _rand_unit(rng: np.random.Generator) -> int:
    F = get_field()
    if F.p is None:
        return int(rng.integers(1, 4)) * (1 if rng.random() < 0.5 else -1)
    return int(rng.integers(1, F.p))


def _rand_entry(rng: np.random.Generator) -> int:
    F = get_field()
    if F.p is None:
        return int(rng.integers(-2, 3))
    return int(rng.integers(0, F.p))


def _upper_unitriangular(k: int, rng: np.random.Generator) -> np.ndarray:
    F = get_field()
    g = F.zeros(k, k)
    for i in range(k):
        g[i, i] = F.scalar(_rand_unit(rng))
        for j in range(i + 1, k):
            g[i, j] = F.scalar(_rand_entry(rng))
    return g


def _random_invertible(k: int, rng: np.random.Generator) -> np.ndarray:
    F = get_field()
    return F.matmul(_upper_unitriangular(k, rng), _upper_unitriangular(k, rng).T)


def gen_filtered(spec: GenSpec, rng: np.random.Generator, max_jump: int = 3) -> FilteredComplex:
    """Direct sum of dots and arrows ``x -> dx``, conjugated by a filtration-preserving automorphism."""
    F = get_field()
    if spec.max_dim == 0:
        return FilteredComplex.zero()
    w = spec.window
    dims: dict[int, int] = {}
    levels: dict[int, list[int]] = {}
    arrows: list[tuple[int, int, int]] = []
    load: dict[tuple[int, int], int] = {}

    def room(n: int, p: int) -> bool:
        return abs(p) <= w and abs(n + p) <= w and load.get((p, n + p), 0) < spec.max_dim

    def put(n: int, p: int) -> int:
        load[(p, n + p)] = load.get((p, n + p), 0) + 1
        levels.setdefault(n, []).append(p)
        dims[n] = dims.get(n, 0) + 1
        return dims[n] - 1

    for _ in range(int(rng.integers(1, spec.max_pieces + 1))):
        n = int(rng.choice(_DEGREES))
        p = int(rng.choice(_LEVELS))
        if rng.random() < 0.35:
            if room(n, p):
                put(n, p)
            continue
        q = p - int(rng.integers(0, max_jump + 1))
        if room(n, p) and room(n + 1, q) and (p, n + p) != (q, n + 1 + q):
            i = put(n, p)
            j = put(n + 1, q)
            arrows.append((n, i, j))
    d = {n: F.zeros(dims[n + 1], dims[n]) for n in {n for n, _, _ in arrows}}
    for n, i, j in arrows:
        d[n][j, i] = F.one
    a, _ = FilteredComplex.from_unsorted(dims, d, levels)
    g = {n: _upper_unitriangular(k, rng) for n, k in a.dims.items()}
    conj = {n: F.matmul(g[n + 1], F.matmul(m, inverse(g[n]))) for n, m in a.d.items()}
    return FilteredComplex(a.dims, conj, a.levels)


def _solve_blocks(
    shapes: dict[int, tuple[int, int]],
    allowed: dict[int, np.ndarray],
    equations: Callable[[dict[int, np.ndarray]], list[np.ndarray]],
) -> tuple[dict[int, tuple[int, int]], np.ndarray]:
    """Kernel of a linear condition on block matrices, returned as ``(offsets, basis columns)``.

    ``equations`` is applied to each unit block assignment; its outputs are
    flattened into the columns of the constraint matrix.
    """
    F = get_field()
    offsets, pos = {}, 0
    for n, (t, s) in shapes.items():
        offsets[n] = (pos, t * s)
        pos += t * s
    cols = []
    for n, (t, s) in shapes.items():
        for idx in range(t * s):
            unit = {k: F.zeros(*shapes[k]) for k in shapes}
            unit[n].reshape(-1)[idx] = F.one
            cols.append(np.concatenate([e.reshape(-1) for e in equations(unit)] + [F.zeros(0, 1).reshape(0)]))
    forbid = []
    for n, (t, s) in shapes.items():
        mask = allowed[n].reshape(-1)
        for idx in np.nonzero(~mask)[0]:
            row = F.zeros(1, pos)
            row[0, offsets[n][0] + idx] = F.one
            forbid.append(row)
    if not pos:
        return offsets, F.zeros(0, 0)
    system = np.stack(cols, axis=1) if cols else F.zeros(0, pos)
    if forbid:
        system = np.concatenate([system, np.concatenate(forbid, axis=0)], axis=0)
    return offsets, kernel_basis(system) if system.shape[0] else F.eye(pos)


def _random_point(offsets, basis, shapes, rng) -> dict[int, np.ndarray]:
    F = get_field()
    if basis.shape[1]:
        c = np.array([F.scalar(_rand_entry(rng)) for _ in range(basis.shape[1])], dtype=F.dtype).reshape(-1, 1)
        x = F.matmul(basis, c).reshape(-1)
    else:
        x = F.zeros(basis.shape[0], 1).reshape(-1)
    return {n: x[o : o + k].reshape(shapes[n]) for n, (o, k) in offsets.items()}


def gen_filtered_morphism(a: FilteredComplex, b: FilteredComplex, rng: np.random.Generator) -> FilteredMorphism:
    """Uniform-ish sample of the space of filtered chain maps ``A -> B``."""
    F = get_field()
    shapes = {n: (b.dim(n), a.dim(n)) for n in a.degrees() if b.dim(n)}
    allowed = {
        n: np.array([[b.levels[n][i] <= a.levels[n][j] for j in range(s)] for i in range(t)], dtype=bool).reshape(t, s)
        for n, (t, s) in shapes.items()
    }

    def eqs(x):
        out = []
        for n in sorted(set(a.degrees()) | set(b.degrees())):
            fn = x.get(n, F.zeros(b.dim(n), a.dim(n)))
            fn1 = x.get(n + 1, F.zeros(b.dim(n + 1), a.dim(n + 1)))
            out.append(F.reduce(F.matmul(b.dmat(n), fn) - F.matmul(fn1, a.dmat(n))))
        return out

    offsets, basis = _solve_blocks(shapes, allowed, eqs)
    return FilteredMorphism(a, b, _random_point(offsets, basis, shapes, rng))


def gen_filtered_homotopy(
    f: FilteredMorphism, r: int, rng: np.random.Generator
) -> tuple[dict[int, np.ndarray], FilteredMorphism]:
    """A random ``h`` with ``h(F_p) ⊆ F_{p+r}`` whose ``dh + hd`` preserves filtrations, and ``g = f + dh + hd``."""
    F = get_field()
    a, b = f.source, f.target
    shapes = {n: (b.dim(n - 1), a.dim(n)) for n in a.degrees() if b.dim(n - 1)}
    allowed = {
        n: np.array([[b.levels[n - 1][i] <= a.levels[n][j] + r for j in range(s)] for i in range(t)], dtype=bool).reshape(t, s)
        for n, (t, s) in shapes.items()
    }

    def dh(x, n):
        hn = x.get(n, F.zeros(b.dim(n - 1), a.dim(n)))
        hn1 = x.get(n + 1, F.zeros(b.dim(n), a.dim(n + 1)))
        return F.reduce(F.matmul(b.dmat(n - 1), hn) + F.matmul(hn1, a.dmat(n)))

    def eqs(x):
        out = []
        for n in a.degrees():
            if not b.dim(n):
                continue
            m = dh(x, n)
            bad = np.array([[b.levels[n][i] > a.levels[n][j] for j in range(a.dim(n))] for i in range(b.dim(n))], dtype=bool)
            out.append(m[bad])
        return out

    offsets, basis = _solve_blocks(shapes, allowed, eqs)
    h = _random_point(offsets, basis, shapes, rng)
    g = FilteredMorphism(a, b, {n: F.reduce(f.mat(n) + dh(h, n)) for n in a.degrees()})
    return h, g


def _single(at, k=1) -> BigradedModule:
    return BigradedModule({at: k})


def _mc_piece(spec: GenSpec, rng: np.random.Generator, max_op: int) -> Optional[Multicomplex]:
    F = get_field()
    w = spec.window
    p = int(rng.integers(-2, 3))
    q = int(rng.integers(-2, 3))
    kind = rng.choice(["dot", "arrow", "arrow", "fork"])
    if kind == "dot":
        return Multicomplex(_single((p, q)), {})
    i = int(rng.integers(0, max_op + 1))
    tgts = [i]
    if kind == "fork":
        j = int(rng.integers(0, max_op + 1))
        if j != i:
            tgts.append(j)
    bds = [(p, q)] + [(p - k, q + 1 - k) for k in tgts]
    if any(abs(x) > w or abs(y) > w for x, y in bds):
        return None
    dims: dict = {}
    for bd in bds:
        dims[bd] = dims.get(bd, 0) + 1
    mod = BigradedModule(dims)
    ops = {}
    for slot, k in enumerate(tgts):
        tbd = bds[slot + 1]
        blk = F.zeros(mod.dim(tbd), mod.dim((p, q)))
        blk[mod.dim(tbd) - 1, 0] = F.scalar(_rand_unit(rng))
        ops[k] = BigradedMap(mod, mod, op_bidegree(k), {(p, q): blk})
    return Multicomplex(mod, ops)


def gen_multicomplex(spec: GenSpec, rng: np.random.Generator, max_op: int = 2) -> Multicomplex:
    """Direct sum of dots, arrows and forks (sometimes a tensor of two pieces), conjugated blockwise."""
    F = get_field()
    if spec.max_dim == 0:
        return Multicomplex.zero()
    parts: list[Multicomplex] = []
    for _ in range(int(rng.integers(1, spec.max_pieces + 1))):
        piece = _mc_piece(spec, rng, max_op)
        if piece is None:
            continue
        if rng.random() < 0.2:
            other = _mc_piece(spec, rng, max_op)
            if other is not None:
                t = tensor(piece, other)
                if all(abs(p) <= spec.window and abs(q) <= spec.window for p, q in t.module.support()):
                    piece = t
        trial, _, _ = mc_direct_sum(*(parts + [piece]))
        if all(k <= spec.max_dim for _, k in trial.module.items()):
            parts.append(piece)
    if not parts:
        return Multicomplex.zero()
    s, _, _ = mc_direct_sum(*parts)
    g = {bd: _random_invertible(k, rng) for bd, k in s.module.items()}
    gi = {bd: inverse(m) for bd, m in g.items()}
    G = BigradedMap(s.module, s.module, (0, 0), g)
    Gi = BigradedMap(s.module, s.module, (0, 0), gi)
    return Multicomplex(s.module, {i: G @ d @ Gi for i, d in s.ops.items()})


def gen_strict_morphism(a: Multicomplex, b: Multicomplex, rng: np.random.Generator) -> MultiMorphism:
    sys = LinearSystem()
    f = sys.allocate(a.module, b.module, (0, 0))
    for i in sorted(set(a.ops) | set(b.ops)):
        sys.equate(f.left(b.d(i)) - f.right(a.d(i)))
    x0, ker = sys.solve()
    F = get_field()
    x = x0
    if ker.shape[1]:
        c = np.array([F.scalar(_rand_entry(rng)) for _ in range(ker.shape[1])], dtype=F.dtype).reshape(-1, 1)
        x = F.reduce(x0 + F.matmul(ker, c).reshape(-1))
    return MultiMorphism(a, b, f.evaluate(x))


def gen_spectral(spec: GenSpec, rng: np.random.Generator) -> SpectralSequence:
    return spectral_sequence(gen_filtered(spec, rng))


def gen_morphism(spec: GenSpec, a: SpectralSequence, b: SpectralSequence, rng: np.random.Generator) -> Optional[SpectralMorphism]:
    """Random point of ``Hom(A, B)``; None when only the zero map exists."""
    space = hom_space(a, b)
    if space.empty or space.dim == 0:
        return None
    return space.random(rng)


def _any_morphism(spec, a, b, rng) -> SpectralMorphism:
    f = gen_morphism(spec, a, b, rng)
    return f if f is not None else SpectralMorphism.zero(a, b)


# -- manufactured weak equivalences and acyclic fibrations ------------------------------


def _acyclic_piece(spec: GenSpec, rng: np.random.Generator, r: int) -> SpectralSequence:
    k = int(rng.integers(0, r + 1))
    return disk(k, int(rng.integers(-2, 3)), int(rng.integers(-2, 3)))


def _acyclic_fibration(spec: GenSpec, rng: np.random.Generator, a: SpectralSequence, r: int) -> SpectralMorphism:
    """An acyclic r-fibration with target ``A`` drawn from several constructions."""
    kind = int(rng.integers(0, 4))
    if kind == 0:
        pb = path(r, a)
        return pb.minus if rng.random() < 0.5 else pb.plus
    if kind == 1:
        b = gen_spectral(spec, rng)
        return mapping_path_space(r, _any_morphism(spec, a, b, rng)).rho
    if kind == 2:
        prod, (pa, _) = product(a, _acyclic_piece(spec, rng, r))
        return pa
    first = _acyclic_fibration(spec, rng, a, r)
    return first @ _acyclic_fibration(spec, rng, first.source, r) if rng.random() < 0.5 else first


def _weak_equivalence_from(spec: GenSpec, rng: np.random.Generator, a: SpectralSequence, r: int) -> SpectralMorphism:
    kind = int(rng.integers(0, 4))
    if kind == 0:
        return path(r, a).iota
    if kind == 1:
        k = _acyclic_piece(spec, rng, r)
        prod, _ = product(a, k)
        return inclusions(prod, [a, k])[0]
    if kind == 2:
        b = gen_spectral(spec, rng)
        return mapping_path_space(r, _any_morphism(spec, a, b, rng)).i
    return SpectralMorphism.identity(a).scale(_rand_unit(rng))


def _map_from(spec: GenSpec, rng: np.random.Generator, a: SpectralSequence, r: int) -> SpectralMorphism:
    """A morphism out of ``A``: a weak equivalence half of the time."""
    if rng.random() < 0.5:
        return _weak_equivalence_from(spec, rng, a, r)
    return _any_morphism(spec, a, gen_spectral(spec, rng), rng)


# -- reports ---------------------------------------------------------------------------


@dataclass
class CheckReport:
    check: str
    spec: GenSpec
    mutation: Optional[str] = None
    trials_run: int = 0
    counts: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def count(self, key: str, by: int = 1) -> None:
        self.counts[key] = self.counts.get(key, 0) + by

    def fail(self, trial: int, r: int, prop: str, message: str, objects: Optional[dict] = None) -> None:
        self.failures.append(
            {
                "trial": trial,
                "r": r,
                "property": prop,
                "message": message,
                "replay": self._replay(trial, r),
                "objects": objects or {},
            }
        )

    def _replay(self, trial: int, r: int) -> str:
        s = self.spec
        cmd = f"spseq --field {s.field} fuzz --check {self.check} --seed {s.seed} --trial {trial} --r {r}"
        if (s.window, s.max_dim) != (GenSpec.window, GenSpec.max_dim):
            cmd += f" --window {s.window} --max-dim {s.max_dim}"
        return cmd + (f" --mutation {self.mutation}" if self.mutation else "")

    @property
    def ok(self) -> bool:
        return not self.failures

    def text(self) -> str:
        s = self.spec
        lines = [
            f"check {self.check}",
            f"seed {s.seed} field {s.field} trials {s.trials} r {','.join(map(str, s.r_values))}"
            + (f" mutation {self.mutation}" if self.mutation else ""),
        ]
        for key in sorted(self.counts):
            lines.append(f"  {key}: {self.counts[key]}")
        for f in self.failures:
            lines.append(f"  FAIL trial {f['trial']} r={f['r']} [{f['property']}] {f['message']}")
            lines.append(f"    replay: {f['replay']}")
        lines.append(f"verdict {'ok' if self.ok else 'counterexample'}: {len(self.failures)} failure(s) in {self.trials_run} trial(s)")
        trailer = {
            "check": self.check,
            "seed": s.seed,
            "field": s.field,
            "trials": self.trials_run,
            "r": list(s.r_values),
            "mutation": self.mutation,
            "counts": dict(sorted(self.counts.items())),
            "failures": self.failures,
        }
        lines.append("RESULT " + json.dumps(trailer, sort_keys=True))
        return "\n".join(lines) + "\n"


def _serialize(**objs) -> dict:
    from .document import dumps

    out = {}
    for k, v in objs.items():
        try:
            out[k] = dumps(v)
        except SpseqError as exc:  # pragma: no cover - serialization is best effort in reports
            out[k] = f"unserializable: {exc}"
    return out


# -- checks -----------------------------------------------------------------------------

TrialFn = Callable[[GenSpec, np.random.Generator, int, int, CheckReport, Predicates], None]


def _trial_two_out_of_three(spec, rng, t, r, rep, pr):
    a = gen_spectral(spec, rng)
    f = _map_from(spec, rng, a, r)
    g = _map_from(spec, rng, f.target, r)
    h = g @ f
    wf, wg, wh = pr.weq(f, r), pr.weq(g, r), pr.weq(h, r)
    rep.count(f"weq pattern f={int(wf)} g={int(wg)} gf={int(wh)}")
    if (wf and wg) != wh and (wf and wg or wh and (wf or wg)):
        bad = "f,g weq but gf not" if wf and wg else ("gf,f weq but g not" if wf else "gf,g weq but f not")
        rep.fail(t, r, "two-out-of-three", bad, _serialize(f=f, g=g))


def _trial_axiom_C(spec, rng, t, r, rep, pr):
    a = gen_spectral(spec, rng)
    p = _acyclic_fibration(spec, rng, a, r)
    if not pr.acyclic(p, r):
        rep.fail(t, r, "manufactured acyclic fibration", "sampled p is not an acyclic r-fibration", _serialize(p=p))
        return
    u = gen_spectral(spec, rng)
    g = _any_morphism(spec, u, a, rng)
    x, pu, pa = pullback_surjection(g, p)
    rep.count("pullbacks")
    if not (g @ pu) == (p @ pa):
        rep.fail(t, r, "pullback square", "g o pi_U != p o pi_A", _serialize(g=g, p=p))
    elif not pr.acyclic(pu, r):
        rep.fail(t, r, "axiom C", "pullback of an acyclic r-fibration is not one", _serialize(g=g, p=p))


def _trial_axiom_D(spec, rng, t, r, rep, pr):
    a, b = gen_spectral(spec, rng), gen_spectral(spec, rng)
    u = _any_morphism(spec, a, b, rng)
    mp = mapping_path_space(r, u)
    rep.count("factorizations")
    checks = [
        ("p o i = u", (mp.p @ mp.i) == u),
        ("rho o i = 1", (mp.rho @ mp.i) == SpectralMorphism.identity(a)),
        ("p is an r-fibration", pr.fib(mp.p, r)),
        ("rho is an acyclic r-fibration", pr.acyclic(mp.rho, r)),
    ]
    for name, ok in checks:
        if not ok:
            rep.fail(t, r, "axiom D", f"{name} fails", _serialize(u=u))
            return


def _trial_partial_brown(spec, rng, t, r, rep, pr):
    a = gen_spectral(spec, rng)
    g = _weak_equivalence_from(spec, rng, a, r)
    if not pr.weq(g, r):
        rep.fail(t, r, "manufactured weak equivalence", "sampled g is not an E_r-quasi-isomorphism", _serialize(g=g))
        return
    mp = mapping_path_space(r, g)
    rep.count("weak equivalences factored")
    checks = [
        ("g = f(g) o w(g)", (mp.p @ mp.i) == g),
        ("s(g) o w(g) = 1", (mp.rho @ mp.i) == SpectralMorphism.identity(a)),
        ("f(g) acyclic r-fibration", pr.acyclic(mp.p, r)),
        ("s(g) acyclic r-fibration", pr.acyclic(mp.rho, r)),
        ("w(g) weak equivalence", pr.weq(mp.i, r)),
    ]
    for name, ok in checks:
        if not ok:
            rep.fail(t, r, "partial Brown factorization", f"{name} fails", _serialize(g=g))
            return


def _acyclic_fc_piece(rng: np.random.Generator, r: int) -> FilteredComplex:
    F = get_field()
    p = int(rng.integers(-2, 3))
    n = int(rng.integers(-1, 2))
    jump = int(rng.integers(0, r + 1))
    return FilteredComplex({n: 1, n + 1: 1}, {n: F.array([[1]])}, {n: [p], n + 1: [p - jump]})


def _acyclic_fc_fibration(spec, rng, a: FilteredComplex, r: int) -> FilteredMorphism:
    if rng.random() < 0.5:
        tl = tensor_lambda_fc(r, a)
        return tl.minus if rng.random() < 0.5 else tl.plus
    _, (pa, _), _ = direct_sum_fc(a, _acyclic_fc_piece(rng, r))
    return pa


def _same_up_to_iso(x: SpectralSequence, y: SpectralSequence, post, rng) -> bool:
    return find_isomorphism(x, y, post=post, rng=rng) is not None


def _trial_functor_E(spec, rng, t, r, rep, pr):
    a, b = gen_filtered(spec, rng), gen_filtered(spec, rng)
    ea, eb = spectral_sequence(a), spectral_sequence(b)
    # products
    s, (pa, pb), _ = direct_sum_fc(a, b)
    prod, (qa, qb) = product(ea, eb)
    rep.count("products")
    if not _same_up_to_iso(spectral_sequence(s), prod, [(qa, e_of_morphism(pa)), (qb, e_of_morphism(pb))], rng):
        rep.fail(t, r, "E preserves products", "E(A x B) is not E(A) x E(B) over the projections")
    # fibrations: projections are fibrations, and so is whatever random map passes the test
    f = gen_filtered_morphism(a, b, rng)
    for cand, tag in ((pa, "projection"), (f, "random")):
        if is_fc_fibration(cand, r):
            rep.count(f"fibrations ({tag})")
            if not pr.fib(e_of_morphism(cand), r):
                rep.fail(t, r, "E preserves fibrations", f"{tag} fibration not sent to an r-fibration")
    # acyclic fibrations and their pullbacks
    p = _acyclic_fc_fibration(spec, rng, b, r)
    if not (is_fc_fibration(p, r) and is_fc_weq(p, r)):
        rep.fail(t, r, "manufactured acyclic fibration", "sampled filtered map is not an acyclic fibration")
        return
    ep = e_of_morphism(p)
    rep.count("acyclic fibrations")
    if not pr.acyclic(ep, r):
        rep.fail(t, r, "E preserves acyclic fibrations", "E(p) is not an acyclic r-fibration")
    x, xu, xa = pullback_fc(f, p)
    ex, exu, exa = pullback_surjection(e_of_morphism(f), ep)
    rep.count("pullbacks")
    if not _same_up_to_iso(spectral_sequence(x), ex, [(exu, e_of_morphism(xu)), (exa, e_of_morphism(xa))], rng):
        rep.fail(t, r, "E preserves pullbacks", "E(U x_B A) is not the pagewise pullback")
    # homotopies
    f0 = gen_filtered_morphism(a, b, rng)
    h, g0 = gen_filtered_homotopy(f0, r, rng)
    if not filtered_r_homotopy_check(h, f0, g0, r):
        rep.fail(t, r, "filtered homotopy", "generated witness fails the filtered check")
        return
    w = spectral_witness(h, f0, g0, r, rng=rng)
    rep.count("homotopy witnesses")
    ef, eg = e_of_morphism(f0), e_of_morphism(g0)
    if w is None or not is_r_homotopy(w) or not (w.f == ef and w.g == eg):
        rep.fail(t, r, "E preserves r-homotopy", "induced witness is not an r-homotopy E(f) ~ E(g)")
    elif find_r_homotopy(ef, eg, r) is None:
        rep.fail(t, r, "E preserves r-homotopy", "solver finds no r-homotopy between E(f) and E(g)")


def _acyclic_mc_piece(rng, r: int) -> Multicomplex:
    F = get_field()
    i = int(rng.integers(0, r + 1))
    p, q = int(rng.integers(-2, 3)), int(rng.integers(-2, 3))
    bd = (p - i, q + 1 - i)
    mod = BigradedModule({(p, q): 1, bd: 1})
    return Multicomplex(mod, {i: BigradedMap(mod, mod, op_bidegree(i), {(p, q): F.array([[1]])})})


def _trial_functor_Eprime(spec, rng, t, r, rep, pr):
    a, b = gen_multicomplex(spec, rng), gen_multicomplex(spec, rng)
    rep.count("totalizations (D^2 = 0)")
    tot(a)
    ea, eb = eprime(a), eprime(b)
    # path object
    pth = mc_path(r, a)
    pobj = path(r, ea)
    if t < 25:
        rep.count("path comparisons")
        post = [(pobj.minus, eprime_of_morphism(pth.minus)), (pobj.plus, eprime_of_morphism(pth.plus))]
        if not _same_up_to_iso(eprime(pth.P), pobj.P, post, rng):
            rep.fail(t, r, "E' preserves the r-path", "E'(Lambda_r (x) A) is not P(r; E'(A))")
    # products
    s, (pa, pb), _ = mc_direct_sum(a, b)
    prod, (qa, qb) = product(ea, eb)
    rep.count("products")
    if not _same_up_to_iso(eprime(s), prod, [(qa, eprime_of_morphism(pa)), (qb, eprime_of_morphism(pb))], rng):
        rep.fail(t, r, "E' preserves products", "E'(A x B) is not E'(A) x E'(B)")
    # acyclic fibrations, fibrations and pullbacks
    f = gen_strict_morphism(a, b, rng)
    ef = eprime_of_morphism(f)
    if rng.random() < 0.5:
        p = pth.minus
        g = gen_strict_morphism(b, a, rng)
    else:
        k = _acyclic_mc_piece(rng, r) if rng.random() < 0.7 else gen_multicomplex(spec, rng)
        sum_, (p, _), _ = mc_direct_sum(a, k)
        g = gen_strict_morphism(b, a, rng)
    epm = eprime_of_morphism(p)
    if all(epm.map(i).is_surjective() for i in range(max(epm.N, r) + 1)):
        rep.count("surjective pullbacks")
        x, xu, xa = mc_pullback(g, p)
        ex, exu, exa = pullback_surjection(eprime_of_morphism(g), epm)
        if not _same_up_to_iso(eprime(x), ex, [(exu, eprime_of_morphism(xu)), (exa, eprime_of_morphism(xa))], rng):
            rep.fail(t, r, "E' preserves pullbacks", "E'(U x_B A) is not the pagewise pullback")
        if pr.acyclic(epm, r):
            rep.count("acyclic fibration pullbacks")
            if not pr.acyclic(exu, r):
                rep.fail(t, r, "E' preserves acyclic fibrations", "pulled-back map is not an acyclic r-fibration")
    # functoriality of Tot
    c = gen_multicomplex(spec, rng)
    g2 = gen_strict_morphism(b, c, rng)
    if tot_morphism(g2 @ f).maps.keys() != (tot_morphism(g2) @ tot_morphism(f)).maps.keys() or not all(
        np.array_equal(tot_morphism(g2 @ f).mat(n), (tot_morphism(g2) @ tot_morphism(f)).mat(n)) for n in tot(a).degrees()
    ):
        rep.fail(t, r, "Tot functorial", "Tot(g f) != Tot(g) Tot(f)")
    # strict homotopies
    pb_ = mc_path(r, b)
    h = gen_strict_morphism(a, pb_.P, rng)
    f1, g1 = pb_.minus @ h, pb_.plus @ h
    rep.count("strict homotopies")
    if not mc_strict_homotopy_check(h, f1, g1, pb_):
        rep.fail(t, r, "strict homotopy", "sampled strict homotopy fails its own check")
        return
    w = strict_to_spectral_witness(h, pb_, rng=rng)
    if w is None or not is_r_homotopy(w):
        rep.fail(t, r, "E' preserves r-homotopy", "strict homotopy does not yield a spectral r-homotopy")


def _fuzzed_morphism(spec, rng, r: int) -> SpectralMorphism:
    """Random maps mixed with manufactured fibrations, so both verdicts occur."""
    a = gen_spectral(spec, rng)
    kind = int(rng.integers(0, 5))
    if kind == 0:
        return _any_morphism(spec, a, gen_spectral(spec, rng), rng)
    if kind == 1:
        return _acyclic_fibration(spec, rng, a, r)
    if kind == 2:
        return mapping_path_space(r, _any_morphism(spec, a, gen_spectral(spec, rng), rng)).p
    if kind == 3:
        prod, (pa, _) = product(a, gen_spectral(spec, rng))
        return pa
    return _any_morphism(spec, gen_spectral(spec, rng), a, rng)


def _trial_rlp(spec, rng, t, r, rep, pr):
    f = _fuzzed_morphism(spec, rng, r)
    direct_fib, lift_fib = pr.fib(f, r), rfib_via_rlp(f, r)
    direct_ac, lift_ac = pr.acyclic(f, r), acyclic_rfib_via_rlp(f, r)
    rep.count(f"r-fibration {'yes' if direct_fib else 'no'}")
    rep.count(f"acyclic r-fibration {'yes' if direct_ac else 'no'}")
    if direct_fib != lift_fib:
        rep.fail(t, r, "r-fibration via RLP", f"direct {direct_fib}, lifting {lift_fib}", _serialize(f=f))
    if direct_ac != lift_ac:
        rep.fail(t, r, "acyclic r-fibration via RLP", f"direct {direct_ac}, lifting {lift_ac}", _serialize(f=f))


def _homotopic_pair(spec, rng, a, b, r):
    pb = path(r, b)
    k = _any_morphism(spec, a, pb.P, rng)
    return homotopy_from_morphism(k, pb), pb


def _trial_homotopy(spec, rng, t, r, rep, pr):
    a, b = gen_spectral(spec, rng), gen_spectral(spec, rng)
    h1, pb = _homotopic_pair(spec, rng, a, b, r)
    rep.count("homotopic pairs")
    checks = [("witness", h1)]
    refl = find_r_homotopy(h1.f, h1.f, r)
    if refl is None:
        rep.fail(t, r, "reflexivity", "no r-homotopy f ~ f found")
    else:
        checks.append(("reflexivity", refl))
    checks.append(("symmetry", h1.reversed()))
    space = solve_morphisms(a, pb.P, post=[(pb.minus, h1.g)])
    if space.empty:
        rep.fail(t, r, "transitivity", "no path morphism starting at g")
    else:
        h2 = homotopy_from_morphism(space.random(rng), pb)
        checks.append(("transitivity", h1.then(h2)))
    c = gen_spectral(spec, rng)
    checks.append(("post-composition", h1.post(_any_morphism(spec, b, c, rng))))
    z = gen_spectral(spec, rng)
    checks.append(("pre-composition", h1.pre(_any_morphism(spec, z, a, rng))))
    for name, h in checks:
        if not is_r_homotopy(h):
            rep.fail(t, r, name, "constructed witness is not an r-homotopy", _serialize(f=h.f, g=h.g))
    if t < 10:
        rep.count("path contractions")
        pa = path(r, a)
        w = path_contraction(pa)
        ok = is_r_homotopy(w) and w.f == SpectralMorphism.identity(pa.P) and w.g == (pa.iota @ pa.minus)
        if not ok:
            rep.fail(t, r, "path contraction", "(0,0,-y) does not certify 1 ~ iota o minus")


CHECKS: dict[str, TrialFn] = {
    "two-out-of-three": _trial_two_out_of_three,
    "axiom-C": _trial_axiom_C,
    "axiom-D": _trial_axiom_D,
    "partial-brown": _trial_partial_brown,
    "functor-E": _trial_functor_E,
    "functor-Eprime": _trial_functor_Eprime,
    "rlp": _trial_rlp,
    "homotopy": _trial_homotopy,
}

_SALT = {name: i for i, name in enumerate(CHECKS)}


def _run_slice(task: tuple) -> tuple[dict, list, int]:
    name, spec, mutation, r, trials = task
    rep = run_check(name, replace(spec, r_values=(r,)), mutation, trials)
    return rep.counts, rep.failures, rep.trials_run


def run_check(
    name: str,
    spec: GenSpec = GenSpec(),
    mutation: Optional[str] = None,
    only_trials: Optional[Iterable[int]] = None,
    jobs: int = 1,
) -> CheckReport:
    """Run one named check over ``spec.trials`` trials for each ``r`` in ``spec.r_values``.

    With ``jobs > 1`` slices of trials run in worker processes; results are
    merged in ``(r, trial)`` order, so the report does not depend on ``jobs``.
    """
    if name not in CHECKS:
        raise KeyError(f"unknown check {name!r}; expected one of {', '.join(CHECKS)}")
    if mutation is not None and mutation not in MUTATIONS:
        raise KeyError(f"unknown mutation {mutation!r}; expected one of {', '.join(MUTATIONS)}")
    pr = MUTATIONS[mutation] if mutation else PREDICATES
    rep = CheckReport(name, spec, mutation)
    trials = list(only_trials) if only_trials is not None else list(range(spec.trials))
    if jobs > 1 and len(trials) > 1:
        size = max(1, -(-len(trials) // jobs))
        tasks = [
            (name, spec, mutation, r, trials[i : i + size]) for r in spec.r_values for i in range(0, len(trials), size)
        ]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            for counts, failures, run in ex.map(_run_slice, tasks):
                for k, v in counts.items():
                    rep.count(k, v)
                rep.failures.extend(failures)
                rep.trials_run += run
        return rep
    fn = CHECKS[name]
    with use_field(spec.field):
        for r in spec.r_values:
            for t in trials:
                rng = spec.rng(t, r, _SALT[name])
                try:
                    fn(spec, rng, t, r, rep, pr)
                except SpseqError as exc:
                    rep.fail(t, r, "exception", f"{type(exc).__name__}: {exc}")
                rep.trials_run += 1
    return rep


def check_two_out_of_three(spec: GenSpec = GenSpec(), **kw) -> CheckReport:
    return run_check("two-out-of-three", spec, **kw)


def check_axiom_C(spec: GenSpec = GenSpec(), **kw) -> CheckReport:
    return run_check("axiom-C", spec, **kw)


def check_axiom_D(spec: GenSpec = GenSpec(), **kw) -> CheckReport:
    return run_check("axiom-D", spec, **kw)


def check_partial_brown(spec: GenSpec = GenSpec(), **kw) -> CheckReport:
    return run_check("partial-brown", spec, **kw)


def check_functor_E(spec: GenSpec = GenSpec(), **kw) -> CheckReport:
    return run_check("functor-E", spec, **kw)


def check_functor_Eprime(spec: GenSpec = GenSpec(), **kw) -> CheckReport:
    return run_check("functor-Eprime", spec, **kw)


def check_rlp_agreement(spec: GenSpec = GenSpec(), **kw) -> CheckReport:
    return run_check("rlp", spec, **kw)


def check_homotopy_relation(spec: GenSpec = GenSpec(), **kw) -> CheckReport:
    return run_check("homotopy", spec, **kw)
