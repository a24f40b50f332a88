"""Exact arithmetic for rationally related oscillator frequencies.

Everything spectral in this module is a rational multiple of the base
frequency omega and is computed with `fractions.Fraction`: cluster
identification, parity classification, the resonance-lattice parity
criterion, and the minimal level spacing. No tolerances appear anywhere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

from .basis import MultiIndex, parity_of
from .errors import GapInconsistencyError, UnboundedPotentialError


@dataclass(frozen=True)
class FrequencyVector:
    """Base frequency omega with rational multipliers omega_k = (p_k/q_k) omega."""

    omega: float
    multipliers: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not self.multipliers:
            raise ValueError("need at least one frequency multiplier")
        mults = tuple((int(p), int(q)) for p, q in self.multipliers)
        for k, (p, q) in enumerate(mults):
            if p <= 0 or q <= 0:
                raise ValueError(f"multiplier {k}: p, q must be positive, got {p}/{q}")
            if gcd(p, q) != 1:
                raise ValueError(f"multiplier {k}: {p}/{q} is not in lowest terms")
        object.__setattr__(self, "multipliers", mults)

    @property
    def d(self) -> int:
        return len(self.multipliers)

    @property
    def ratios(self) -> tuple[Fraction, ...]:
        """omega_k / omega as exact fractions."""
        return tuple(Fraction(p, q) for p, q in self.multipliers)

    def level_of(self, state: MultiIndex) -> Fraction:
        """Unperturbed level of a state, in units of omega (exact)."""
        return sum(r * (n + Fraction(1, 2)) for r, n in zip(self.ratios, state, strict=True))

    def ground_level(self) -> Fraction:
        return sum(r / 2 for r in self.ratios)


@dataclass(frozen=True)
class Cluster:
    """One unperturbed eigenvalue with its member states and parity tag."""

    level_value: Fraction          # in units of omega
    members: tuple[MultiIndex, ...]
    parity_tag: str                # "even" | "odd" | "mixed"

    @property
    def multiplicity(self) -> int:
        return len(self.members)

    @property
    def top_grade(self) -> int:
        return max(sum(s) for s in self.members)


@dataclass(frozen=True)
class ConditionAReport:
    """Outcome of the resonance-lattice parity check.

    When the check fails, `witness` is a primitive integer vector in the
    resonance lattice with an odd number of odd components.
    """

    holds: bool
    witness: tuple[int, ...] | None
    kernel_rank: int
    kernel_basis: tuple[tuple[int, ...], ...]


def _parity_tag(members) -> str:
    signs = {parity_of(s) for s in members}
    if signs == {1}:
        return "even"
    if signs == {-1}:
        return "odd"
    return "mixed"


def eigenvalue_clusters(freqs: FrequencyVector, cutoff: Fraction | int | str) -> list[Cluster]:
    """Group all states with level <= cutoff (units of omega) by exact level.

    Clusters are sorted by increasing level; multiplicities are the exact
    combinatorial counts of states sharing the level.
    """
    cutoff = Fraction(cutoff)
    ground = freqs.ground_level()
    if cutoff < ground:
        raise ValueError(f"cutoff {cutoff} is below the ground level {ground}")
    ratios = freqs.ratios
    budget = cutoff - ground  # remaining quanta budget in omega units
    groups: dict[Fraction, list[MultiIndex]] = {}

    def visit(mode: int, state: list[int], used: Fraction):
        if mode == freqs.d:
            level = ground + used
            groups.setdefault(level, []).append(tuple(state))
            return
        r = ratios[mode]
        n_top = int((budget - used) / r)
        for n in range(n_top + 1):
            state.append(n)
            visit(mode + 1, state, used + r * n)
            state.pop()

    visit(0, [], Fraction(0))
    return [
        Cluster(level_value=lv, members=tuple(sorted(groups[lv])), parity_tag=_parity_tag(groups[lv]))
        for lv in sorted(groups)
    ]


def _integer_weights(freqs: FrequencyVector) -> tuple[list[int], int]:
    """Clear denominators: weights w_k with omega_k/omega = w_k / Q."""
    qs = [q for _, q in freqs.multipliers]
    big_q = lcm(*qs) if len(qs) > 1 else qs[0]
    weights = [p * (big_q // q) for p, q in freqs.multipliers]
    return weights, big_q


def _normalize_sign(vec: tuple[int, ...]) -> tuple[int, ...]:
    for v in vec:
        if v != 0:
            return vec if v > 0 else tuple(-x for x in vec)
    return vec


def kernel_lattice(freqs: FrequencyVector) -> list[tuple[int, ...]]:
    """Basis of the integer lattice {k : sum_k omega_k k_k = 0}.

    The lattice is the kernel of a single rational linear form, so its rank
    is d - 1 and it is saturated: every integer solution is an integer
    combination of the returned vectors.  Computed by accumulating the gcd
    of the cleared-denominator weights with unimodular column operations.
    """
    weights, _ = _integer_weights(freqs)
    d = freqs.d
    # Columns of u are tracked under the same operations that reduce
    # `weights` to (g, 0, ..., 0); columns 1..d-1 then span the kernel.
    u = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
    g = weights[0]
    for i in range(1, d):
        w = weights[i]
        gg, x, y = _xgcd(g, w)
        # new col0 = x*col0 + y*coli ; new coli = -(w/gg)*col0 + (g/gg)*coli
        c0 = [x * u[r][0] + y * u[r][i] for r in range(d)]
        ci = [-(w // gg) * u[r][0] + (g // gg) * u[r][i] for r in range(d)]
        for r in range(d):
            u[r][0], u[r][i] = c0[r], ci[r]
        g = gg
    basis = [tuple(u[r][j] for r in range(d)) for j in range(1, d)]
    return [_normalize_sign(b) for b in basis]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with x*a + y*b == g == gcd(a, b)."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def check_condition_a(freqs: FrequencyVector) -> ConditionAReport:
    """Decide whether every primitive resonance vector has an even number
    of odd components.

    The infinite quantification reduces to a finite one: every primitive
    lattice vector is an integer combination of the kernel basis, and its
    component parities are the F2 combination of the basis parities.
    Dividing an integer lattice vector by its (necessarily odd) gcd does
    not change any component parity, so the check over the 2^rank - 1
    nonzero F2 classes is exhaustive.
    """
    basis = kernel_lattice(freqs)
    rank = len(basis)
    classes_bad: list[tuple[int, ...]] = []
    for mask in range(1, 2**rank):
        vec = [0] * freqs.d
        for j in range(rank):
            if mask >> j & 1:
                for r in range(freqs.d):
                    vec[r] += basis[j][r]
        weight = sum(v % 2 for v in vec)
        if weight % 2 == 1:
            classes_bad.append(tuple(vec))
    if not classes_bad:
        return ConditionAReport(holds=True, witness=None, kernel_rank=rank,
                                kernel_basis=tuple(basis))
    witness = _minimal_witness(freqs, classes_bad)
    return ConditionAReport(holds=False, witness=witness, kernel_rank=rank,
                            kernel_basis=tuple(basis))


def _minimal_witness(freqs: FrequencyVector, lifts) -> tuple[int, ...]:
    """Smallest (max-norm) primitive lattice vector with odd odd-count.

    A violating F2 class lifts to an integer lattice vector whose gcd is
    odd; dividing it out yields a primitive witness, so the search radius
    is bounded by the smallest lift.
    """
    ratios = freqs.ratios
    bound = min(max(abs(v) for v in lift) for lift in lifts)
    for radius in range(1, bound + 1):
        for k in itertools.product(range(-radius, radius + 1), repeat=freqs.d):
            if max(abs(v) for v in k) != radius:
                continue
            if sum(r * v for r, v in zip(ratios, k)) != 0:
                continue
            g = gcd(*(abs(v) for v in k))
            if g != 1:
                continue
            if sum(v % 2 for v in k) % 2 == 1:
                return _normalize_sign(k)
    raise AssertionError("violating class exists but no witness found within bound")


def gap_and_delta(freqs: FrequencyVector, verify_cutoff: Fraction | int | str = 50) -> dict:
    """Minimal level spacing (exact) plus the derived radii.

    gap   = omega * gcd_k(p_k Q / q_k) / Q with Q = lcm(q_k); self-checked
            against the brute-force minimum spacing of all clusters below
            verify_cutoff (in units of omega).
    delta = gap / 2 (the conservative half-spacing convention).
    paper_bound = omega / (q_1 ... q_d), the coarser closed-form bound.
    """
    weights, big_q = _integer_weights(freqs)
    g = gcd(*weights) if len(weights) > 1 else weights[0]
    gap = Fraction(g, big_q)

    clusters = eigenvalue_clusters(freqs, Fraction(verify_cutoff))
    if len(clusters) < 2:
        raise ValueError("verify_cutoff too small: fewer than two clusters")
    brute = min(b.level_value - a.level_value for a, b in zip(clusters, clusters[1:]))
    if brute != gap:
        raise GapInconsistencyError(
            f"closed-form gap {gap} != brute-force spacing {brute} below "
            f"{verify_cutoff}; raise verify_cutoff or report a bug")

    q_prod = 1
    for _, q in freqs.multipliers:
        q_prod *= q
    paper_bound = Fraction(1, q_prod)
    assert gap >= paper_bound
    return {"gap": gap, "delta": gap / 2, "paper_bound": paper_bound}


def rho(freqs: FrequencyVector, sup_norm: float, verify_cutoff=50) -> float:
    """Reality radius delta / ||W||_inf for a bounded odd potential."""
    if sup_norm is None or sup_norm != sup_norm or sup_norm == float("inf"):
        raise UnboundedPotentialError("rho requires a finite sup norm")
    if sup_norm <= 0:
        raise ValueError(f"sup_norm must be positive, got {sup_norm}")
    delta = gap_and_delta(freqs, verify_cutoff)["delta"]
    return float(delta) * freqs.omega / sup_norm
