"""Randomized property checks for the mean constructions.

Every check draws seeded SPD tuples, measures a signed violation
(metric minus tolerance, so values <= 0 pass), and reports the worst
trial. Failures carry a witness seed: rerunning the same check with
``seed = witness_seed`` and ``trials = 1`` reproduces the failing trial
exactly, because trial t of seed s is trial 0 of the derived seed
``(s + t * 0x9E3779B97F4A7C15) mod 2^64``.

Loewner comparisons are scaled by ``1 + max|entry|`` of the operands;
equality comparisons use the relative max-norm.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .kernel import SpdMatrix, SymMatrix, _eigh, _eigvalsh, _sym_part, inverse
from .means import (
    ConvergenceError,
    MeanKind,
    RegularMap,
    SpdTuple,
    _sandwich,
    arithmetic_mean,
    harmonic_mean,
    inductive_auxiliary,
    inductive_mean,
    karcher_mean,
    karcher_residual,
    mean,
    power,
    variant_auxiliary,
    variant_mean,
    weighted_geometric_2,
)

__all__ = [
    "GenSpec",
    "CheckReport",
    "CHECK_NAMES",
    "STRUCTURES",
    "gen_spd",
    "gen_tuple",
    "check_monotone",
    "check_concavity",
    "check_congruence",
    "check_self_dual",
    "check_determinant",
    "check_hga",
    "check_updating",
    "check_block_regularity",
    "check_jensen_contraction",
    "check_jensen_pair",
    "check_commuting",
    "check_two_var",
    "check_karcher_residual",
    "run_suite",
]

STRUCTURES = ("generic", "commuting", "block")


@dataclass(frozen=True)
class GenSpec:
    """Deterministic recipe for drawing SPD tuples.

    Eigenvalues are log-uniform in ``[1/sqrt(cond_bound), sqrt(cond_bound)]``,
    conjugated by a Haar-distributed orthogonal basis, so every draw has
    condition number at most ``cond_bound``. ``structure`` selects generic
    tuples, tuples sharing one eigenbasis (pairwise commuting), or
    block-diagonal tuples with a common split.
    """

    dim: int
    k: int
    seed: int
    cond_bound: float = 100.0
    structure: str = "generic"

    def __post_init__(self) -> None:
        if not (1 <= self.dim <= 64):
            raise ValueError("dim must be in [1, 64]")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be an unsigned 64-bit integer")
        if not (1.0 <= self.cond_bound <= 1e6):
            raise ValueError("cond_bound must be in [1, 1e6]")
        if self.structure not in STRUCTURES:
            raise ValueError(f"structure must be one of {STRUCTURES}")
        if self.structure == "block" and self.dim < 2:
            raise ValueError("block structure needs dim >= 2")


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one check: worst signed violation and failure count.

    ``worst_violation <= 0`` means every trial passed. ``witness_seed`` is
    set only when there were failures and reproduces the worst trial when
    used as the spec seed with a single trial.
    """

    check_name: str
    trials: int
    failures: int
    worst_violation: float
    witness_seed: int | None = None

    @property
    def passed(self) -> bool:
        return self.failures == 0


# ---------------------------------------------------------------------------
# deterministic generation
# ---------------------------------------------------------------------------

_GOLDEN = 0x9E3779B97F4A7C15
_U64 = 0xFFFFFFFFFFFFFFFF


def _trial_seed(seed: int, trial: int) -> int:
    return (seed + trial * _GOLDEN) & _U64


def _stream(seed: int, purpose: str) -> np.random.Generator:
    tag = int.from_bytes(
        hashlib.blake2b(purpose.encode(), digest_size=8).digest(), "big"
    )
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, tag])))


def _random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.diag(r)
    return q * np.where(d >= 0.0, 1.0, -1.0)


def _draw_eigs(seed: int, dim: int, cond: float, tag: str) -> np.ndarray:
    u = _stream(seed, f"{tag}/eigs").uniform(-1.0, 1.0, dim)
    return cond ** (u / 2.0)


def _spd_entries(seed: int, dim: int, cond: float, tag: str) -> np.ndarray:
    lam = _draw_eigs(seed, dim, cond, tag)
    q = _random_orthogonal(_stream(seed, f"{tag}/basis"), dim)
    return _sym_part((q * lam) @ q.T)


def _gen_items(spec: GenSpec, prefix: str = "item") -> list[SpdMatrix]:
    return [
        SpdMatrix(SymMatrix._wrap(
            _spd_entries(spec.seed, spec.dim, spec.cond_bound, f"{prefix}{i}")
        ))
        for i in range(spec.k)
    ]


def _commuting_parts(spec: GenSpec):
    """Shared basis, per-item eigenvalue rows, and the certified items."""
    q = _random_orthogonal(_stream(spec.seed, "item0/basis"), spec.dim)
    lams = np.stack([
        _draw_eigs(spec.seed, spec.dim, spec.cond_bound, f"item{i}")
        for i in range(spec.k)
    ])
    items = [
        SpdMatrix(SymMatrix._wrap(_sym_part((q * lam) @ q.T))) for lam in lams
    ]
    return q, lams, items


def _block_sizes(dim: int) -> tuple[int, int]:
    return (dim + 1) // 2, dim // 2


def _assemble_block(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    d1, d2 = x.shape[0], y.shape[0]
    out = np.zeros((d1 + d2, d1 + d2))
    out[:d1, :d1] = x
    out[d1:, d1:] = y
    return out


def gen_spd(spec: GenSpec) -> SpdMatrix:
    """One certified SPD draw (the first element of :func:`gen_tuple`)."""
    return SpdMatrix(SymMatrix._wrap(
        _spd_entries(spec.seed, spec.dim, spec.cond_bound, "item0")
    ))


def gen_tuple(spec: GenSpec) -> SpdTuple:
    """Draw a deterministic SPD tuple with the requested structure."""
    if spec.structure == "generic":
        return SpdTuple(_gen_items(spec))
    if spec.structure == "commuting":
        _, _, items = _commuting_parts(spec)
        return SpdTuple(items)
    d1, d2 = _block_sizes(spec.dim)
    xs = _gen_items(replace(spec, dim=d1), "xitem")
    ys = _gen_items(replace(spec, dim=d2), "yitem")
    return SpdTuple([
        SpdMatrix(SymMatrix._wrap(_assemble_block(x.entries, y.entries)))
        for x, y in zip(xs, ys)
    ])


# ---------------------------------------------------------------------------
# violation metrics and the trial sweep
# ---------------------------------------------------------------------------

def _absmax(a: np.ndarray) -> float:
    return float(np.abs(a).max())


def _loewner_violation(small: np.ndarray, large: np.ndarray, tol: float) -> float:
    """Signed violation of ``small <= large`` in the Loewner order."""
    scale = 1.0 + max(_absmax(small), _absmax(large))
    return -float(_eigvalsh(large - small)[0]) / scale - tol


def _releq_violation(actual: np.ndarray, expected: np.ndarray, tol: float) -> float:
    """Signed violation of equality in the relative max-norm."""
    denom = max(_absmax(actual), _absmax(expected))
    if denom == 0.0:
        return -tol
    return _absmax(actual - expected) / denom - tol


def _sweep(name: str, spec: GenSpec, trials: int,
           trial_fn: Callable[[GenSpec], float]) -> CheckReport:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    worst = -math.inf
    worst_seed = spec.seed
    failures = 0
    for t in range(trials):
        sub = replace(spec, seed=_trial_seed(spec.seed, t))
        v = trial_fn(sub)
        if v > worst:
            worst, worst_seed = v, sub.seed
        if v > 0.0:
            failures += 1
    return CheckReport(
        check_name=name,
        trials=trials,
        failures=failures,
        worst_violation=worst,
        witness_seed=worst_seed if failures else None,
    )


def _as_kind(kind: MeanKind | str) -> MeanKind:
    return MeanKind(kind)


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

def check_monotone(kind: MeanKind | str, spec: GenSpec,
                   trials: int = 100, tol: float = 1e-8) -> CheckReport:
    """Adding an SPD perturbation to every item never lowers the mean."""
    kind = _as_kind(kind)

    def trial(sub: GenSpec) -> float:
        t = gen_tuple(sub)
        base = mean(kind, t).entries
        bumped = []
        for i, a in enumerate(t):
            p = _spd_entries(sub.seed, sub.dim, sub.cond_bound, f"pert{i}")
            bumped.append(SpdMatrix(SymMatrix._wrap(
                a.entries + 0.1 * _absmax(a.entries) * p
            )))
        larger = mean(kind, SpdTuple(bumped)).entries
        return _loewner_violation(base, larger, tol)

    return _sweep(f"monotone[{kind.value}]", spec, trials, trial)


def check_concavity(kind: MeanKind | str, spec: GenSpec,
                    trials: int = 100, tol: float = 1e-8) -> CheckReport:
    """Means are jointly concave: mixing tuples beats mixing results."""
    kind = _as_kind(kind)

    def trial(sub: GenSpec) -> float:
        ta = gen_tuple(sub)
        tb = SpdTuple(_gen_items(sub, "second"))
        lam = float(_stream(sub.seed, "lambda").uniform(0.0, 1.0))
        combo = lam * mean(kind, ta).entries + (1.0 - lam) * mean(kind, tb).entries
        mixed = SpdTuple([
            SpdMatrix(SymMatrix._wrap(
                lam * a.entries + (1.0 - lam) * b.entries
            ))
            for a, b in zip(ta, tb)
        ])
        return _loewner_violation(combo, mean(kind, mixed).entries, tol)

    return _sweep(f"concavity[{kind.value}]", spec, trials, trial)


def check_congruence(kind: MeanKind | str, spec: GenSpec,
                     trials: int = 100, tol: float = 1e-8) -> CheckReport:
    """Invariance under congruence by an invertible matrix."""
    kind = _as_kind(kind)

    def trial(sub: GenSpec) -> float:
        t = gen_tuple(sub)
        rng = _stream(sub.seed, "congr")
        # Random invertible factor with singular values in [0.1, 10]. An
        # unconstrained Gaussian draw occasionally has condition numbers
        # large enough that merely rounding C^T A C to float64 perturbs
        # the exact invariance beyond testable tolerances.
        while True:
            s = 10.0 ** rng.uniform(-1.0, 1.0, sub.dim)
            c = (_random_orthogonal(rng, sub.dim) * s) @ \
                _random_orthogonal(rng, sub.dim)
            if abs(np.linalg.det(c)) >= 1e-6:
                break
        m0 = mean(kind, t).entries
        conj = SpdTuple([
            SpdMatrix(SymMatrix._wrap(_sym_part(c.T @ a.entries @ c)))
            for a in t
        ])
        return _releq_violation(
            mean(kind, conj).entries, _sym_part(c.T @ m0 @ c), tol
        )

    return _sweep(f"congruence[{kind.value}]", spec, trials, trial)


def check_self_dual(kind: MeanKind | str, spec: GenSpec,
                    trials: int = 100, tol: float = 1e-8) -> CheckReport:
    """Duality under inversion.

    Geometric kinds are self-dual: ``M(A^-1) = M(A)^-1``. Arithmetic and
    harmonic are each other's duals, so the check compares against the
    partner kind.
    """
    kind = _as_kind(kind)

    def trial(sub: GenSpec) -> float:
        t = gen_tuple(sub)
        inv_t = SpdTuple([inverse(a) for a in t])
        if kind is MeanKind.ARITHMETIC:
            lhs = arithmetic_mean(inv_t)
            rhs = inverse(harmonic_mean(t))
        elif kind is MeanKind.HARMONIC:
            lhs = harmonic_mean(inv_t)
            rhs = inverse(arithmetic_mean(t))
        else:
            lhs = mean(kind, inv_t)
            rhs = inverse(mean(kind, t))
        return _releq_violation(lhs.entries, rhs.entries, tol)

    return _sweep(f"self_dual[{kind.value}]", spec, trials, trial)


def check_determinant(kind: MeanKind | str, spec: GenSpec,
                      trials: int = 100, tol: float = 1e-8) -> CheckReport:
    """Geometric means multiply determinants: det M = (prod det A_i)^(1/k).

    Compared in log space through the eigenvalues, so large dimensions do
    not overflow.
    """
    kind = _as_kind(kind)
    if kind not in _GEOMETRIC:
        raise ValueError(f"determinant identity only holds for {_GEOMETRIC}")

    def trial(sub: GenSpec) -> float:
        t = gen_tuple(sub)
        ld_target = float(np.mean([
            np.log(_eigvalsh(a.entries)).sum() for a in t
        ]))
        ld_actual = float(np.log(_eigvalsh(mean(kind, t).entries)).sum())
        return abs(math.expm1(ld_actual - ld_target)) - tol

    return _sweep(f"determinant[{kind.value}]", spec, trials, trial)


def check_hga(kind: MeanKind | str, spec: GenSpec,
              trials: int = 100, tol: float = 1e-8) -> CheckReport:
    """Harmonic <= geometric <= arithmetic, in the Loewner order."""
    kind = _as_kind(kind)
    if kind not in _GEOMETRIC:
        raise ValueError(f"the sandwich applies to {_GEOMETRIC}")

    def trial(sub: GenSpec) -> float:
        t = gen_tuple(sub)
        g = mean(kind, t).entries
        return max(
            _loewner_violation(harmonic_mean(t).entries, g, tol),
            _loewner_violation(g, arithmetic_mean(t).entries, tol),
        )

    return _sweep(f"hga[{kind.value}]", spec, trials, trial)


def check_updating(kind: MeanKind | str, spec: GenSpec,
                   trials: int = 100, tol: float = 1e-8) -> CheckReport:
    """Appending the identity contracts to the previous mean.

    Inductive: ``G_{k+1}(A_1..A_k, I) = G_k(A_1..A_k)^(k/(k+1))``.
    Variant:   ``H_{k+1}(A_1..A_k, I) = H_k(A_1^(k/(k+1)), ...)``.
    """
    kind = _as_kind(kind)
    if kind not in (MeanKind.INDUCTIVE, MeanKind.VARIANT):
        raise ValueError("updating rules are defined for inductive and variant")

    def trial(sub: GenSpec) -> float:
        t = gen_tuple(sub)
        eye = SpdMatrix(np.eye(sub.dim))
        ext = SpdTuple(list(t) + [eye])
        p = sub.k / (sub.k + 1)
        if kind is MeanKind.INDUCTIVE:
            lhs = inductive_mean(ext)
            rhs = power(inductive_mean(t), p)
        else:
            lhs = variant_mean(ext)
            rhs = variant_mean(SpdTuple([power(a, p) for a in t]))
        return _releq_violation(lhs.entries, rhs.entries, tol)

    return _sweep(f"updating[{kind.value}]", spec, trials, trial)


def check_block_regularity(kind: MeanKind | str, spec: GenSpec,
                           trials: int = 100, tol: float = 1e-8,
                           block_sizes: tuple[int, int] | None = None) -> CheckReport:
    """Means act blockwise on block-diagonal tuples.

    ``block_sizes`` overrides the default even split of ``spec.dim``.
    """
    kind = _as_kind(kind)
    d1, d2 = block_sizes if block_sizes is not None else _block_sizes(spec.dim)
    if d1 < 1 or d2 < 1 or d1 + d2 != spec.dim:
        raise ValueError(f"block sizes {d1}+{d2} do not partition dim {spec.dim}")

    def trial(sub: GenSpec) -> float:
        xs = _gen_items(replace(sub, dim=d1), "xitem")
        ys = _gen_items(replace(sub, dim=d2), "yitem")
        full = SpdTuple([
            SpdMatrix(SymMatrix._wrap(_assemble_block(x.entries, y.entries)))
            for x, y in zip(xs, ys)
        ])
        oracle = _assemble_block(
            mean(kind, SpdTuple(xs)).entries,
            mean(kind, SpdTuple(ys)).entries,
        )
        return _releq_violation(mean(kind, full).entries, oracle, tol)

    return _sweep(f"block_regularity[{kind.value}]", spec, trials, trial)


def _contraction(sub: GenSpec) -> np.ndarray:
    """Random square matrix rescaled to top singular value 0.9."""
    g = _stream(sub.seed, "contraction").standard_normal((sub.dim, sub.dim))
    smax = math.sqrt(float(_eigvalsh(g.T @ g)[-1]))
    return g * (0.9 / smax)


def check_jensen_contraction(F: RegularMap, spec: GenSpec,
                             trials: int = 100, tol: float = 1e-8,
                             name: str = "jensen_contraction") -> CheckReport:
    """Jensen inequality for a concave map under a contraction.

    For ``C`` with top singular value 0.9:
    ``C^T F(A_1..A_k) C <= F(C^T A_1 C, ..., C^T A_k C)``.
    """
    if F.arity != spec.k:
        raise ValueError(f"map arity {F.arity} does not match spec.k {spec.k}")

    def trial(sub: GenSpec) -> float:
        t = gen_tuple(sub)
        c = _contraction(sub)
        lhs = _sym_part(c.T @ F.fn(t).entries @ c)
        conj = SpdTuple([
            SpdMatrix(SymMatrix._wrap(_sym_part(c.T @ a.entries @ c)))
            for a in t
        ])
        return _loewner_violation(lhs, F.fn(conj).entries, tol)

    return _sweep(name, spec, trials, trial)


def check_jensen_pair(F: RegularMap, spec: GenSpec,
                      trials: int = 100, tol: float = 1e-8,
                      name: str = "jensen_pair") -> CheckReport:
    """Two-term Jensen inequality with ``X = C`` and ``Y = (I - C^T C)^1/2``.

    ``X^T X + Y^T Y = I`` exactly in this construction, and concavity gives
    ``X^T F(A) X + Y^T F(B) Y <= F(X^T A_i X + Y^T B_i Y)``.
    """
    if F.arity != spec.k:
        raise ValueError(f"map arity {F.arity} does not match spec.k {spec.k}")

    def trial(sub: GenSpec) -> float:
        ta = gen_tuple(sub)
        tb = SpdTuple(_gen_items(sub, "second"))
        x = _contraction(sub)
        w, v = _eigh(np.eye(sub.dim) - x.T @ x)
        y = _sym_part((v * np.sqrt(w)) @ v.T)
        lhs = _sym_part(x.T @ F.fn(ta).entries @ x) + _sandwich(y, F.fn(tb).entries)
        combo = SpdTuple([
            SpdMatrix(SymMatrix._wrap(
                _sym_part(x.T @ a.entries @ x) + _sandwich(y, b.entries)
            ))
            for a, b in zip(ta, tb)
        ])
        return _loewner_violation(lhs, F.fn(combo).entries, tol)

    return _sweep(name, spec, trials, trial)


def check_commuting(kind: MeanKind | str, spec: GenSpec,
                    trials: int = 100, tol: float = 1e-8) -> CheckReport:
    """On commuting tuples every mean reduces to its scalar counterpart.

    Items share an eigenbasis; the oracle applies the scalar mean to each
    eigenvalue row and rebuilds in that basis.
    """
    kind = _as_kind(kind)

    def trial(sub: GenSpec) -> float:
        q, lams, items = _commuting_parts(sub)
        m = mean(kind, SpdTuple(items)).entries
        oracle = _sym_part((q * scalar_mean(kind, lams)) @ q.T)
        return _releq_violation(m, oracle, tol)

    return _sweep(f"commuting[{kind.value}]", spec, trials, trial)


def scalar_mean(kind: MeanKind | str, rows: np.ndarray) -> np.ndarray:
    """Scalar mean across the first axis: the commuting-case oracle."""
    kind = _as_kind(kind)
    if kind in _GEOMETRIC:
        return np.exp(np.log(rows).mean(axis=0))
    if kind is MeanKind.ARITHMETIC:
        return rows.mean(axis=0)
    return 1.0 / (1.0 / rows).mean(axis=0)


def check_two_var(spec: GenSpec, trials: int = 100,
                  tol: float = 1e-8) -> CheckReport:
    """All geometric kinds agree with the closed form at k = 2."""

    def trial(sub: GenSpec) -> float:
        a, b = _gen_items(replace(sub, k=2))
        pair = SpdTuple([a, b])
        closed = weighted_geometric_2(a, b, 0.5).entries
        return max(
            _releq_violation(inductive_mean(pair).entries, closed, tol),
            _releq_violation(variant_mean(pair).entries, closed, tol),
            _releq_violation(karcher_mean(pair).entries, closed, tol),
        )

    return _sweep("two_var", spec, trials, trial)


def check_karcher_residual(spec: GenSpec, trials: int = 100,
                           tol: float = 1e-8) -> CheckReport:
    """The Karcher solution's log-sum residual is numerically zero."""

    def trial(sub: GenSpec) -> float:
        t = gen_tuple(sub)
        try:
            x = karcher_mean(t)
        except ConvergenceError as exc:
            return exc.residual_norm - tol
        return float(np.linalg.norm(karcher_residual(x, t).entries)) - tol

    return _sweep("karcher_residual", spec, trials, trial)


# ---------------------------------------------------------------------------
# suite runner
# ---------------------------------------------------------------------------

_GEOMETRIC = (MeanKind.INDUCTIVE, MeanKind.VARIANT, MeanKind.KARCHER)
_ALL_KINDS = tuple(MeanKind)
_JENSEN_KINDS = (MeanKind.INDUCTIVE, MeanKind.VARIANT)


def _jensen_contraction_by_kind(kind, spec, trials, tol):
    aux = (inductive_auxiliary if kind is MeanKind.INDUCTIVE
           else variant_auxiliary)(spec.k)
    return check_jensen_contraction(
        aux, spec, trials, tol, name=f"jensen_contraction[{kind.value}]"
    )


def _jensen_pair_by_kind(kind, spec, trials, tol):
    aux = (inductive_auxiliary if kind is MeanKind.INDUCTIVE
           else variant_auxiliary)(spec.k)
    return check_jensen_pair(
        aux, spec, trials, tol, name=f"jensen_pair[{kind.value}]"
    )


# name -> (runner, kinds it applies to; None marks kind-independent checks)
_REGISTRY: dict[str, tuple[Callable, tuple[MeanKind, ...] | None]] = {
    "monotone": (check_monotone, _ALL_KINDS),
    "concavity": (check_concavity, _ALL_KINDS),
    "congruence": (check_congruence, _ALL_KINDS),
    "self_dual": (check_self_dual, _ALL_KINDS),
    "determinant": (check_determinant, _GEOMETRIC),
    "hga": (check_hga, _GEOMETRIC),
    "updating": (check_updating, _JENSEN_KINDS),
    "block_regularity": (check_block_regularity, _ALL_KINDS),
    "jensen_contraction": (_jensen_contraction_by_kind, _JENSEN_KINDS),
    "jensen_pair": (_jensen_pair_by_kind, _JENSEN_KINDS),
    "commuting": (check_commuting, _ALL_KINDS),
    "two_var": (check_two_var, None),
    "karcher_residual": (check_karcher_residual, None),
}

CHECK_NAMES = tuple(_REGISTRY)


def run_suite(suite: Sequence[str], spec: GenSpec, trials: int = 100,
              tol: float = 1e-8,
              kinds: Sequence[MeanKind | str] | None = None) -> list[CheckReport]:
    """Run the named checks, fanning kind-dependent ones over ``kinds``.

    Unknown check names raise ``ValueError``. Kind-dependent checks are
    skipped for kinds they do not apply to (e.g. the determinant identity
    for the arithmetic mean), so restricting ``kinds`` narrows the suite.
    """
    unknown = [n for n in suite if n not in _REGISTRY]
    if unknown:
        raise ValueError(
            f"unknown check name(s) {unknown}; available: {list(CHECK_NAMES)}"
        )
    want = _ALL_KINDS if kinds is None else tuple(_as_kind(k) for k in kinds)
    reports: list[CheckReport] = []
    for name in suite:
        fn, supported = _REGISTRY[name]
        if supported is None:
            reports.append(fn(spec, trials, tol))
        else:
            for kd in want:
                if kd in supported:
                    reports.append(fn(kd, spec, trials, tol))
    return reports
