"""Dense operator matrices over a basis truncation.

All matrices are plain complex (or real) numpy arrays wrapped with the
basis identifier and verified structural tags.  Ladder action follows the
standard sqrt-weight convention; a raise that would leave the truncation
contributes zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .basis import BasisTruncation, MultiIndex
from .errors import BasisMismatchError
from .resonance import FrequencyVector

_TAGS = {"real-symmetric", "diagonal", "block-graded"}


@dataclass
class OperatorMatrix:
    """A dense matrix tied to a basis, with verified structural tags."""

    entries: np.ndarray
    basis_ref: str
    tags: frozenset[str] = frozenset()
    # Optional exact spectral data (set by build_h0): level of each basis
    # state in units of omega, plus omega itself.  Cluster identification
    # never relies on float comparison.
    exact_levels: tuple[Fraction, ...] | None = field(default=None, repr=False)
    omega: float | None = None
    # Quanta reach per application (polynomial degree); None when unknown.
    reach: int | None = None

    def __post_init__(self):
        self.entries = np.asarray(self.entries)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ValueError(f"entries must be square, got shape {self.entries.shape}")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("matrix entries must be finite")
        unknown = set(self.tags) - _TAGS
        if unknown:
            raise ValueError(f"unknown tags {sorted(unknown)}")
        self._verify_tags()

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def _verify_tags(self):
        a = self.entries
        scale = max(np.abs(a).max(), 1.0)
        if "real-symmetric" in self.tags:
            if np.abs(a - a.T).max() > 1e-12 * scale or np.abs(a.imag).max() > 1e-12 * scale:
                raise ValueError("tag 'real-symmetric' not satisfied")
        if "diagonal" in self.tags:
            if np.abs(a - np.diag(np.diag(a))).max() > 0:
                raise ValueError("tag 'diagonal' not satisfied")

    def same_basis(self, other: "OperatorMatrix"):
        if self.basis_ref != other.basis_ref:
            raise BasisMismatchError(f"{self.basis_ref} != {other.basis_ref}")


def ladder_matrix(basis: BasisTruncation, mode: int, kind: str) -> OperatorMatrix:
    """Matrix of the lowering or raising operator for one mode.

    lower: |..n..> -> sqrt(n) |..n-1..>;  raise: |..n..> -> sqrt(n+1) |..n+1..>
    (zero when the target leaves the truncation).  `mode` is 1-based.
    """
    if not 1 <= mode <= basis.d:
        raise ValueError(f"mode {mode} outside 1..{basis.d}")
    if kind not in ("raise", "lower"):
        raise ValueError(f"kind must be 'raise' or 'lower', got {kind!r}")
    k = mode - 1
    a = np.zeros((basis.size, basis.size))
    for col, state in enumerate(basis.states):
        n = state[k]
        if kind == "lower":
            if n == 0:
                continue
            target = state[:k] + (n - 1,) + state[k + 1:]
            a[basis.index_of(target), col] = np.sqrt(n)
        else:
            target = state[:k] + (n + 1,) + state[k + 1:]
            if sum(target) <= basis.n_max:
                a[basis.index_of(target), col] = np.sqrt(n + 1)
    return OperatorMatrix(a, basis.ref)


def number_matrix(basis: BasisTruncation, mode: int) -> OperatorMatrix:
    """Diagonal occupation-number operator for one mode (1-based)."""
    if not 1 <= mode <= basis.d:
        raise ValueError(f"mode {mode} outside 1..{basis.d}")
    diag = np.array([s[mode - 1] for s in basis.states], dtype=float)
    return OperatorMatrix(np.diag(diag), basis.ref, tags=frozenset({"diagonal", "real-symmetric"}))


def position_matrix(basis: BasisTruncation, mode: int, omega: float = 1.0) -> OperatorMatrix:
    """Position operator (raise + lower) / sqrt(2 * omega) for one mode.

    At the default unit frequency this is the standard tridiagonal
    (raise + lower)/sqrt(2); a mode frequency rescales it by 1/sqrt(omega).
    """
    up = ladder_matrix(basis, mode, "raise").entries
    dn = ladder_matrix(basis, mode, "lower").entries
    x = (up + dn) / np.sqrt(2.0 * omega)
    return OperatorMatrix(x, basis.ref, tags=frozenset({"real-symmetric"}), reach=1)


def build_h0(freqs: FrequencyVector, basis: BasisTruncation) -> OperatorMatrix:
    """Diagonal unperturbed Hamiltonian, omega * sum_k (p_k/q_k)(n_k + 1/2).

    The diagonal floats are produced from exact rational level values,
    which are kept on the result for exact cluster work downstream.
    """
    if freqs.d != basis.d:
        raise BasisMismatchError(f"frequency dimension {freqs.d} != basis dimension {basis.d}")
    levels = tuple(freqs.level_of(s) for s in basis.states)
    diag = np.array([float(lv) * freqs.omega for lv in levels])
    return OperatorMatrix(np.diag(diag), basis.ref,
                          tags=frozenset({"diagonal", "real-symmetric"}),
                          exact_levels=levels, omega=freqs.omega)


def assemble_h(g: float, h0: OperatorMatrix, w: OperatorMatrix) -> OperatorMatrix:
    """Perturbed operator H = H0 + i g W."""
    h0.same_basis(w)
    h = h0.entries.astype(complex) + 1j * g * w.entries
    return OperatorMatrix(h, h0.basis_ref,
                          exact_levels=h0.exact_levels, omega=h0.omega)
