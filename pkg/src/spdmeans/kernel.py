"""Functional calculus for dense real symmetric matrices.

Value types certify their invariants once at construction (exact symmetry,
finite entries, positive definiteness) and are immutable afterwards. All
operations are pure functions built on the symmetric eigendecomposition:
``f(A) = U f(L) U^T`` where ``A = U L U^T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "ORTHO_TOL",
    "RECON_TOL",
    "SYMMETRY_RTOL",
    "SpdMeansError",
    "ShapeError",
    "SymmetryError",
    "DomainError",
    "NotPositiveDefiniteError",
    "EigenSolverError",
    "SymMatrix",
    "SpdMatrix",
    "EigenDecomposition",
    "GeneralMatrix",
    "default_spd_tol",
    "sym_eigen",
    "spectral_apply",
    "power",
    "sqrt",
    "inv_sqrt",
    "inverse",
    "log_m",
    "exp_m",
    "congruence",
    "loewner_leq",
    "is_spd",
]

# Eigenvector orthonormality is checked in absolute terms (the basis is unit
# scale by construction); reconstruction is relative to max|entry| of the
# input. The symmetry gate is relative: asymmetry beyond round-off is an
# input error and is rejected, never repaired.
ORTHO_TOL = 1e-10
RECON_TOL = 1e-10
SYMMETRY_RTOL = 1e-12


class SpdMeansError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(SpdMeansError):
    """Operand is not square, is empty, or dimensions do not match."""


class SymmetryError(SpdMeansError):
    """Input is too far from symmetric to be accepted."""


class DomainError(SpdMeansError):
    """Entries are not finite, or a scalar function left its domain."""


class NotPositiveDefiniteError(SpdMeansError):
    """Certification failed: smallest eigenvalue at or below tolerance."""


class EigenSolverError(SpdMeansError):
    """The symmetric eigensolver failed or returned an invalid basis."""


def default_spd_tol(entries: np.ndarray) -> float:
    """Positive-definiteness floor used when no explicit tolerance is given.

    Scales with the data: ``1e-12 * (1 + max|entry|)``.
    """
    return 1e-12 * (1.0 + float(np.abs(entries).max()))


def _square_float_array(values, name: str = "matrix") -> np.ndarray:
    try:
        a = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ShapeError(f"{name} is not a numeric grid: {exc}") from exc
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] == 0:
        raise ShapeError(f"{name} must have positive dimension")
    return a


class SymMatrix:
    """Dense real symmetric matrix.

    Construction accepts anything convertible to a square float array whose
    asymmetry is within round-off (``SYMMETRY_RTOL`` relative, max-norm) and
    stores the exactly symmetrized ``(M + M.T) / 2``. Larger asymmetry is an
    input error. Entries are read-only after construction.
    """

    __slots__ = ("entries",)

    entries: np.ndarray

    def __init__(self, values) -> None:
        a = _square_float_array(values)
        if not np.isfinite(a).all():
            raise DomainError("matrix entries must be finite")
        scale = float(np.abs(a).max())
        asym = float(np.abs(a - a.T).max())
        if asym > SYMMETRY_RTOL * scale:
            raise SymmetryError(
                f"asymmetry {asym:.3e} exceeds {SYMMETRY_RTOL:.0e} * max|entry|"
                f" = {SYMMETRY_RTOL * scale:.3e}"
            )
        a = (a + a.T) * 0.5
        a.setflags(write=False)
        self.entries = a

    @classmethod
    def _wrap(cls, a: np.ndarray) -> "SymMatrix":
        # Trusted path for freshly computed, exactly symmetric arrays.
        # Callers must own `a`; it is frozen in place.
        if not np.isfinite(a).all():
            raise DomainError("matrix entries must be finite")
        obj = cls.__new__(cls)
        a.setflags(write=False)
        obj.entries = a
        return obj

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __repr__(self) -> str:
        return f"SymMatrix(dim={self.dim})"


class SpdMatrix:
    """A symmetric matrix certified positive definite.

    ``min_eig_witness`` is the smallest eigenvalue found at certification
    time; it is strictly above the tolerance in force (``default_spd_tol``
    of the entries unless an explicit ``tol`` was passed). A matrix that
    fails certification is rejected, never repaired.
    """

    __slots__ = ("base", "min_eig_witness")

    base: SymMatrix
    min_eig_witness: float

    def __init__(self, values, tol: float | None = None) -> None:
        base = values if isinstance(values, SymMatrix) else SymMatrix(values)
        if tol is None:
            tol = default_spd_tol(base.entries)
        witness = float(_eigvalsh(base.entries)[0])
        if witness <= tol:
            raise NotPositiveDefiniteError(
                f"smallest eigenvalue {witness:.6e} not above tolerance {tol:.3e}"
            )
        self.base = base
        self.min_eig_witness = witness

    @classmethod
    def _with_witness(cls, base: SymMatrix, witness: float) -> "SpdMatrix":
        # Trusted path for results whose spectrum was just computed, e.g.
        # spectral ops where the witness is min f(eigenvalues). Still holds
        # the certified invariant: witness must beat the default floor.
        if witness <= default_spd_tol(base.entries):
            raise NotPositiveDefiniteError(
                f"smallest eigenvalue {witness:.6e} not above tolerance "
                f"{default_spd_tol(base.entries):.3e}"
            )
        obj = cls.__new__(cls)
        obj.base = base
        obj.min_eig_witness = witness
        return obj

    @property
    def entries(self) -> np.ndarray:
        return self.base.entries

    @property
    def dim(self) -> int:
        return self.base.dim

    def __repr__(self) -> str:
        return f"SpdMatrix(dim={self.dim}, min_eig={self.min_eig_witness:.3e})"


class GeneralMatrix:
    """Square real matrix with finite entries; no symmetry requirement."""

    __slots__ = ("entries",)

    entries: np.ndarray

    def __init__(self, values) -> None:
        a = _square_float_array(values)
        if not np.isfinite(a).all():
            raise DomainError("matrix entries must be finite")
        a.setflags(write=False)
        self.entries = a

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __repr__(self) -> str:
        return f"GeneralMatrix(dim={self.dim})"


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvector columns (orthonormal) and eigenvalues (ascending)."""

    vectors: np.ndarray
    values: np.ndarray


def _eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        return np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"symmetric eigensolver failed: {exc}") from exc


def _eigvalsh(a: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"symmetric eigensolver failed: {exc}") from exc


def _sym_part(a: np.ndarray) -> np.ndarray:
    # (a + a.T)/2 is exactly symmetric in IEEE arithmetic.
    return (a + a.T) * 0.5


def _rebuild(vectors: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Assemble ``V diag(values) V^T``, symmetrized."""
    return _sym_part((vectors * values) @ vectors.T)


def sym_eigen(A: SymMatrix) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix.

    Returns eigenvalues in ascending order with orthonormal eigenvector
    columns. The basis is verified after the solve: orthonormality within
    ``ORTHO_TOL`` and reconstruction within ``RECON_TOL`` relative to
    max|entry|; a basis failing either check raises ``EigenSolverError``.
    """
    w, v = _eigh(A.entries)
    n = A.dim
    ortho = float(np.abs(v.T @ v - np.eye(n)).max())
    if ortho > ORTHO_TOL:
        raise EigenSolverError(
            f"eigenvector basis not orthonormal: defect {ortho:.3e}"
        )
    scale = float(np.abs(A.entries).max())
    recon = float(np.abs((v * w) @ v.T - A.entries).max())
    if recon > RECON_TOL * scale:
        raise EigenSolverError(
            f"reconstruction defect {recon:.3e} exceeds {RECON_TOL:.0e} * max|entry|"
        )
    w.setflags(write=False)
    v.setflags(write=False)
    return EigenDecomposition(vectors=v, values=w)


def spectral_apply(A: SpdMatrix, f: Callable[[float], float]) -> SymMatrix:
    """Apply a scalar function to an SPD matrix through its spectrum.

    Parameters
    ----------
    A : SpdMatrix
        Matrix to transform.
    f : callable
        Real function evaluated at each eigenvalue. A non-finite value or a
        raised ``ValueError``/``OverflowError``/``ZeroDivisionError`` is
        reported as ``DomainError`` naming the offending eigenvalue.

    Returns
    -------
    SymMatrix
        ``U f(L) U^T``, exactly symmetrized.
    """
    dec = sym_eigen(A.base)
    out = np.empty_like(dec.values)
    for i, lam in enumerate(dec.values):
        try:
            out[i] = float(f(float(lam)))
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise DomainError(f"f({lam!r}) failed: {exc}") from exc
    if not np.isfinite(out).all():
        bad = float(dec.values[~np.isfinite(out)][0])
        raise DomainError(f"f evaluated non-finite at eigenvalue {bad!r}")
    return SymMatrix._wrap(_rebuild(dec.vectors, out))


def _spectral_spd(A: SpdMatrix, fn) -> SpdMatrix:
    """Vectorized spectral transform whose image is strictly positive."""
    w, v = _eigh(A.entries)
    if w[0] <= 0.0:
        raise NotPositiveDefiniteError(
            f"matrix lost positive definiteness: eigenvalue {w[0]:.3e}"
        )
    fw = fn(w)
    base = SymMatrix._wrap(_rebuild(v, fw))
    return SpdMatrix._with_witness(base, float(fw.min()))


def power(A: SpdMatrix, p: float) -> SpdMatrix:
    """Matrix power ``A**p`` for real ``p`` via the functional calculus."""
    return _spectral_spd(A, lambda w: w**p)


def sqrt(A: SpdMatrix) -> SpdMatrix:
    """Principal matrix square root."""
    return power(A, 0.5)


def inv_sqrt(A: SpdMatrix) -> SpdMatrix:
    """Inverse of the principal square root."""
    return power(A, -0.5)


def inverse(A: SpdMatrix) -> SpdMatrix:
    """Matrix inverse through the eigendecomposition (stays symmetric)."""
    return power(A, -1.0)


def log_m(A: SpdMatrix) -> SymMatrix:
    """Matrix logarithm of an SPD matrix (symmetric, any signature)."""
    w, v = _eigh(A.entries)
    if w[0] <= 0.0:
        raise NotPositiveDefiniteError(
            f"matrix lost positive definiteness: eigenvalue {w[0]:.3e}"
        )
    return SymMatrix._wrap(_rebuild(v, np.log(w)))


def exp_m(S: SymMatrix) -> SpdMatrix:
    """Matrix exponential of a symmetric matrix; the result is SPD."""
    w, v = _eigh(S.entries)
    fw = np.exp(w)
    base = SymMatrix._wrap(_rebuild(v, fw))
    return SpdMatrix._with_witness(base, float(fw.min()))


def congruence(C: GeneralMatrix, A: SymMatrix) -> SymMatrix:
    """Congruence transform ``C^T A C``, exactly symmetrized."""
    if C.dim != A.dim:
        raise ShapeError(f"dimension mismatch: C is {C.dim}, A is {A.dim}")
    return SymMatrix._wrap(_sym_part(C.entries.T @ A.entries @ C.entries))


def loewner_leq(A: SymMatrix, B: SymMatrix, tol: float) -> bool:
    """Loewner order test: ``A <= B`` iff ``lambda_min(B - A) >= -tol``."""
    if A.dim != B.dim:
        raise ShapeError(f"dimension mismatch: A is {A.dim}, B is {B.dim}")
    w = _eigvalsh(B.entries - A.entries)
    return bool(w[0] >= -tol)


def is_spd(A: SymMatrix, tol: float | None = None) -> bool:
    """True iff the smallest eigenvalue of ``A`` is strictly above ``tol``.

    ``tol`` defaults to ``default_spd_tol`` of the entries.
    """
    if tol is None:
        tol = default_spd_tol(A.entries)
    return bool(_eigvalsh(A.entries)[0] > tol)
