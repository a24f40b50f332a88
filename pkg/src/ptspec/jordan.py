"""A two-mode operator whose spectrum is real yet non-diagonalizable.

Q(g) = N1 + N2 + i g a2* a1 preserves total quanta, so in the graded basis
it is block diagonal with one (m+1) x (m+1) block per grade.  Each block is
upper triangular with constant diagonal m and a single superdiagonal of
couplings sqrt(h (m-h+1)); for g != 0 it is a full Jordan block: one
eigenvector, nilpotency index m+1.

Certification is structural (triangularity plus the rank of the explicit
nilpotent part), never via a general eigensolver: a defective eigenvalue
scatters numerically computed eigenvalues on circles of radius roughly
eps**(1/(m+1)), so raw eigensolves are only a pseudospectrum demonstration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisTruncation, enumerate_basis
from .errors import ToleranceAmbiguityError
from .operators import OperatorMatrix, ladder_matrix, number_matrix

_TWO_MODE = "requires a two-mode basis (d=2)"


@dataclass(frozen=True)
class JordanBlockReport:
    """Certified structure of one grade block."""

    m: int
    g: float
    eigenvalue_q: int            # grade-block eigenvalue of Q(g)
    eigenvalue_h: int            # shifted by the vacuum term: Q(g) + 1
    geometric_multiplicity: int
    nilpotency_index: int
    residual_nilpotent: float    # norm of (block - m I)^(nilpotency_index)
    residual_block_leak: float   # largest off-grade entry of the assembled operator


def build_q(g: float, basis: BasisTruncation) -> OperatorMatrix:
    """Assemble Q(g) = N1 + N2 + i g a2* a1 on a two-mode truncation.

    The coupling lowers mode 1 and raises mode 2, so it never changes the
    total number of quanta: entries between different grades are exactly
    zero, with no truncation defect.
    """
    if basis.d != 2:
        raise ValueError(_TWO_MODE)
    n1 = number_matrix(basis, 1).entries
    n2 = number_matrix(basis, 2).entries
    coupling = ladder_matrix(basis, 2, "raise").entries @ ladder_matrix(basis, 1, "lower").entries
    q = n1 + n2 + 1j * g * coupling
    return OperatorMatrix(q, basis.ref, tags=frozenset({"block-graded"}))


def dm_matrix(m: int) -> OperatorMatrix:
    """Superdiagonal coupling block of grade m: entries sqrt(h (m-h+1)).

    Nilpotent of order m+1, persymmetric along the superdiagonal
    (entry h equals entry m+1-h).
    """
    if m < 0:
        raise ValueError(f"grade must be >= 0, got {m}")
    d = np.zeros((m + 1, m + 1))
    for h in range(1, m + 1):
        d[h - 1, h] = np.sqrt(h * (m - h + 1))
    return OperatorMatrix(d, basis_ref=f"jordan-grade(m={m})")


def grade_block(g: float, m: int, basis: BasisTruncation | None = None) -> np.ndarray:
    """Extract the grade-m block of Q(g) from the assembled operator."""
    if basis is None:
        basis = enumerate_basis(2, m)
    q = build_q(g, basis).entries
    sl = basis.grade_slice(m)
    return q[sl, sl]


def block_leak(q: np.ndarray, basis: BasisTruncation) -> float:
    """Largest off-grade entry of an assembled operator matrix."""
    masked = q.copy()
    for m in range(basis.n_max + 1):
        sl = basis.grade_slice(m)
        masked[sl, sl] = 0.0
    return float(np.abs(masked).max())


def jordan_report(m: int, g: float, rank_tol: float = 1e-10,
                  basis: BasisTruncation | None = None) -> JordanBlockReport:
    """Certify eigenvalue, geometric multiplicity and nilpotency of a block.

    The eigenvalue is read off the (triangular) diagonal exactly.  The
    geometric multiplicity is (m+1) - rank(block - m I) with the rank
    decided by singular values above rank_tol * ||block||; a singular value
    within a factor 10 of the threshold raises ToleranceAmbiguityError
    instead of silently misranking.
    """
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    if basis is None:
        basis = enumerate_basis(2, m)
    q = build_q(g, basis).entries
    sl = basis.grade_slice(m)
    block = q[sl, sl]
    diag = np.real(np.diag(block))
    if not np.all(diag == float(m)):
        raise AssertionError(f"grade-{m} block diagonal is not exactly {m}")

    nil = block - m * np.eye(m + 1)
    svals = np.linalg.svd(nil, compute_uv=False)
    scale = max(float(svals[0]) if svals.size else 0.0, float(m), 1.0)
    threshold = rank_tol * scale
    ambiguous = (svals > threshold / 10) & (svals < threshold * 10)
    if np.any(ambiguous):
        raise ToleranceAmbiguityError(
            f"singular value {svals[ambiguous][0]:.3e} within a factor 10 of "
            f"threshold {threshold:.3e} for m={m}, g={g}")
    rank = int(np.sum(svals > threshold))
    geometric = (m + 1) - rank

    nil_norm = float(np.abs(nil).max())
    power = np.eye(m + 1, dtype=complex)
    nilpotency = m + 1
    for k in range(1, m + 2):
        power = power @ nil
        if np.abs(power).max() <= rank_tol * max(nil_norm, 1.0) ** k:
            nilpotency = k
            break
    residual = float(np.abs(np.linalg.matrix_power(nil, nilpotency)).max())

    return JordanBlockReport(
        m=m, g=g, eigenvalue_q=m, eigenvalue_h=m + 1,
        geometric_multiplicity=geometric, nilpotency_index=nilpotency,
        residual_nilpotent=residual,
        residual_block_leak=block_leak(q, basis),
    )


def eigvec_check(m: int, g: float, h: int = 0,
                 basis: BasisTruncation | None = None) -> float:
    """Residual ||Q(g) f - m f|| for the grade-m vector with h quanta in mode 1.

    h = 0 is the true eigenvector (residual at machine zero); h >= 1 picks
    up the superdiagonal coupling and the residual is |g| sqrt(h (m-h+1)).
    """
    if not 0 <= h <= m:
        raise ValueError(f"need 0 <= h <= m, got h={h}, m={m}")
    if basis is None:
        basis = enumerate_basis(2, m)
    q = build_q(g, basis).entries
    f = np.zeros(basis.size, dtype=complex)
    f[basis.index_of((h, m - h))] = 1.0
    return float(np.linalg.norm(q @ f - m * f))


def symbol_bound_check(g: float, samples: int, radius: float, seed: int = 0) -> float:
    """Worst margin of the phase-space lower bound over random samples.

    At each point of the radius-ball in (x1, x2, xi1, xi2) space the full
    symbol must dominate: |sigma_g| >= (1 - |g|/2) sigma_0 where
    sigma_0 = (|x|^2 + |xi|^2)/2 and
    sigma_g = sigma_0 + i g (x2 - i xi2)(x1 + i xi1)/2.
    Returns min(|sigma_g| - (1 - |g|/2) sigma_0); the bound holds iff >= 0.
    Requires |g| < 2.
    """
    if not abs(g) < 2:
        raise ValueError(f"bound requires |g| < 2, got {g}")
    if samples < 1 or radius <= 0:
        raise ValueError("need samples >= 1 and radius > 0")
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(samples, 4))
    pts *= (radius * rng.uniform(size=samples) ** 0.25
            / np.linalg.norm(pts, axis=1))[:, None]
    x1, x2, xi1, xi2 = pts.T
    sigma0 = 0.5 * (x1**2 + x2**2 + xi1**2 + xi2**2)
    tilde = 0.5 * (x2 - 1j * xi2) * (x1 + 1j * xi1)
    margin = np.abs(sigma0 + 1j * g * tilde) - (1 - abs(g) / 2) * sigma0
    return float(margin.min())
