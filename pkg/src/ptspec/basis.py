"""Truncated occupation-number bases for d independent oscillator modes.

States are labelled by multi-indices (n_1, ..., n_d) of occupation numbers.
A truncation keeps all states with total quanta sum(n) <= n_max, ordered by
grade (total quanta) and lexicographically within a grade, so that any
operator preserving total quanta is block diagonal with contiguous blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

MultiIndex = tuple[int, ...]


def parity_of(state: MultiIndex) -> int:
    """Parity sign (-1)**sum(n) of a product-Hermite basis state.

    A one-mode eigenfunction is even/odd with its occupation number, so the
    product state is odd exactly when it contains an odd number of odd
    factors.
    """
    return -1 if sum(state) % 2 else 1


@dataclass(frozen=True)
class BasisTruncation:
    """Ordered finite basis of all states with total quanta <= n_max."""

    d: int
    n_max: int
    states: tuple[MultiIndex, ...]
    index: dict[MultiIndex, int] = field(repr=False, compare=False)

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def ref(self) -> str:
        """Identifier tying operator matrices to this truncation."""
        return f"fock(d={self.d},n_max={self.n_max})"

    def index_of(self, state: MultiIndex) -> int:
        return self.index[tuple(state)]

    def grade_slice(self, m: int) -> slice:
        """Contiguous index range of the grade-m states (sum(n) == m)."""
        if not 0 <= m <= self.n_max:
            raise ValueError(f"grade {m} outside truncation 0..{self.n_max}")
        lo = comb(m - 1 + self.d, self.d)  # states of grade < m
        hi = comb(m + self.d, self.d)
        return slice(lo, hi)

    def grades(self):
        """Total quanta per state, aligned with the ordering."""
        return [sum(s) for s in self.states]

    def parities(self):
        return [parity_of(s) for s in self.states]


def _states_of_grade(d: int, total: int):
    """All multi-indices with sum == total, in lexicographic order."""
    if d == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _states_of_grade(d - 1, total - first):
            yield (first,) + rest


def enumerate_basis(d: int, n_max: int) -> BasisTruncation:
    """Enumerate all multi-indices with sum(n) <= n_max, graded-lex ordered.

    The basis size is C(n_max + d, d) and the index map is the inverse of
    the enumeration order.
    """
    if d < 1:
        raise ValueError(f"dimension d must be >= 1, got {d}")
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    states: list[MultiIndex] = []
    for total in range(n_max + 1):
        states.extend(_states_of_grade(d, total))
    assert len(states) == comb(n_max + d, d)
    index = {s: i for i, s in enumerate(states)}
    return BasisTruncation(d=d, n_max=n_max, states=tuple(states), index=index)
