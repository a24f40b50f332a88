"""Degenerate perturbation series around one unperturbed eigenvalue cluster.

The machinery follows the classical reduction: spectral projection series
P(g) = sum g^n P_n built from strings of reduced resolvents alternating
with the perturbation V = i W, the reduced operator series of
P(-g) H(g) P(g), and its compression onto the cluster members.

Sign conventions are pinned by independent oracles (a numerically
differentiated spectral projector and exactly solvable shifted
oscillators), not taken on faith:

* the reduced resolvent S has diagonal -1/(l_j - l_r) off the cluster and
  S^(0) = -P_r;
* with that convention the n-th projection coefficient is
  MINUS the sum of all strings over compositions of n into n+1 parts
  (a global sign; the familiar (-1)^(n+1) prefactor belongs to the
  opposite resolvent sign).

The literal compression B_n = <psi_j, T_n psi_l> is real symmetric at even
orders and vanishes at odd orders for parity-pure clusters, but its
eigenvalues are skewed by the Gram matrix of the perturbed frame
{P(g) psi}.  The series stored in `g_matrices` is therefore the
Gram-normalized compression K(g) = M(g)^(-1/2) B(g) M(g)^(-1/2), whose
truncated eigenvalues match the perturbed eigenvalues to O(g^(order+1));
the literal coefficients remain available as `raw_g_matrices`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .basis import BasisTruncation
from .errors import DegenerateFrameError, ExactnessWindowWarning
from .operators import OperatorMatrix
from .resonance import Cluster


@dataclass(frozen=True)
class StringSpec:
    """Exponent tuple (k_1, ..., k_{n+1}) of one resolvent string."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        if not self.exponents:
            raise ValueError("a string needs at least one resolvent slot")
        if any(k < 0 for k in self.exponents):
            raise ValueError("resolvent exponents must be >= 0")

    @property
    def length(self) -> int:
        """Number of perturbation factors."""
        return len(self.exponents) - 1


@dataclass
class ClusterOperators:
    """Projector and reduced resolvents of one cluster, with parity split.

    All of these are diagonal in the oscillator basis: p_diag is the 0/1
    indicator of the members, s_diag holds -1/(l_j - l_r) off the cluster
    (energy units), and s_plus/s_minus restrict s_diag to basis states of
    even/odd parity.  s_powers caches S^(k); S^(0) is -P_r by convention.
    """

    basis: BasisTruncation
    cluster: Cluster
    member_idx: np.ndarray
    level_energy: float
    p_diag: np.ndarray
    s_diag: np.ndarray
    s_plus_diag: np.ndarray
    s_minus_diag: np.ndarray
    s_powers: dict = field(default_factory=dict, repr=False)

    @property
    def multiplicity(self) -> int:
        return len(self.member_idx)

    @property
    def p_r(self) -> np.ndarray:
        return np.diag(self.p_diag)

    def s_power_diag(self, k: int, half: str | None = None) -> np.ndarray:
        """Diagonal of S^(k); S^(0) = -P_r.  half in {None, '+', '-'}."""
        if k < 0:
            raise ValueError("resolvent power must be >= 0")
        key = (k, half)
        if key in self.s_powers:
            return self.s_powers[key]
        if k == 0:
            # The parity halves of S^(0) = -P_r restrict to members of the
            # matching parity; for a parity-pure cluster one half is -P_r
            # and the other vanishes.
            par = np.array(self.basis.parities())
            diag = -self.p_diag.astype(float)
            if half == "+":
                diag = np.where(par == 1, diag, 0.0)
            elif half == "-":
                diag = np.where(par == -1, diag, 0.0)
        else:
            base = {None: self.s_diag, "+": self.s_plus_diag, "-": self.s_minus_diag}[half]
            diag = base**k
        self.s_powers[key] = diag
        return diag

    def compress(self, a: np.ndarray) -> np.ndarray:
        """m x m block of a full-space matrix over the cluster members."""
        return a[np.ix_(self.member_idx, self.member_idx)]


def cluster_operators(h0: OperatorMatrix, basis: BasisTruncation,
                      cluster: Cluster) -> ClusterOperators:
    """Build the projector and reduced resolvents for one cluster.

    Membership and energy denominators are decided from the exact rational
    levels carried by h0, never from float comparison.
    """
    if h0.exact_levels is None or h0.omega is None:
        raise ValueError("h0 must carry exact levels (build it with build_h0)")
    if h0.basis_ref != basis.ref:
        raise ValueError(f"basis mismatch: {h0.basis_ref} != {basis.ref}")
    levels = h0.exact_levels
    member_idx = np.array(sorted(basis.index_of(s) for s in cluster.members))
    for i in member_idx:
        if levels[i] != cluster.level_value:
            raise ValueError("cluster members do not sit at the cluster level")

    size = basis.size
    p_diag = np.zeros(size)
    p_diag[member_idx] = 1.0
    s_diag = np.zeros(size)
    for j in range(size):
        if levels[j] != cluster.level_value:
            s_diag[j] = -1.0 / (float(levels[j] - cluster.level_value) * h0.omega)
    par = np.array(basis.parities())
    return ClusterOperators(
        basis=basis, cluster=cluster, member_idx=member_idx,
        level_energy=float(cluster.level_value) * h0.omega,
        p_diag=p_diag, s_diag=s_diag,
        s_plus_diag=np.where(par == 1, s_diag, 0.0),
        s_minus_diag=np.where(par == -1, s_diag, 0.0),
    )


def _entries(v) -> np.ndarray:
    return v.entries if isinstance(v, OperatorMatrix) else np.asarray(v)


def string_product(ops: ClusterOperators, w, spec: StringSpec | tuple,
                   parity_route: str | None = None) -> np.ndarray:
    """Alternating product S^(k_1) V S^(k_2) V ... V S^(k_{n+1}), V = i W.

    The caller passes the odd real potential W; the factor i of the
    perturbation is inserted here.  All resolvent powers are diagonal, so
    the product costs one dense multiply per perturbation factor.  With
    parity_route set to "even" or "odd" (the cluster parity), each S^(k_i)
    is replaced by the parity half selected by the alternation rule:
    reading from the right, the running vector has flipped parity after
    each V, and the complementary half would annihilate it.
    """
    exps = spec.exponents if isinstance(spec, StringSpec) else tuple(spec)
    n = len(exps) - 1
    mat_v = 1j * _entries(w)

    def half_for(slot: int) -> str | None:
        if parity_route is None:
            return None
        base = 1 if parity_route == "even" else -1
        running = base * (-1) ** (n - slot)  # parity seen by S at this slot
        return "+" if running == 1 else "-"

    # slots are 0-based from the left; slot i has n - i factors V to its right
    acc = None  # running product, built left to right
    for i, k in enumerate(exps):
        d = ops.s_power_diag(k, half_for(i))
        if acc is None:
            acc = np.diag(d).astype(complex)
        else:
            acc = (acc @ mat_v) * d[None, :]
    return acc


def _compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative integers summing to `total`."""
    for cuts in combinations(range(total + parts - 1), parts - 1):
        prev, comp = -1, []
        for c in cuts:
            comp.append(c - prev - 1)
            prev = c
        comp.append(total + parts - 2 - prev)
        yield tuple(comp)


def _warn_window(ops: ClusterOperators, w, n: int):
    reach = getattr(w, "reach", None)
    if reach is not None and ops.cluster.top_grade + n * reach > ops.basis.n_max:
        warnings.warn(
            f"order {n} exceeds the truncation-exact window "
            f"(top grade {ops.cluster.top_grade}, reach {reach}, "
            f"n_max {ops.basis.n_max})", ExactnessWindowWarning)


def pn(ops: ClusterOperators, w, n: int) -> np.ndarray:
    """n-th coefficient of the spectral projection series.

    Minus the sum of all strings of length n over compositions of n into
    n+1 nonnegative resolvent exponents (enumerated literally); the global
    sign makes the series match the contour-integral projection, verified
    against a numerically differentiated spectral projector.
    """
    if n < 0:
        raise ValueError("order must be >= 0")
    _warn_window(ops, w, n)
    size = ops.basis.size
    total = np.zeros((size, size), dtype=complex)
    for comp in _compositions(n, n + 1):
        total += string_product(ops, w, comp)
    return -total


def tn_hat(ops: ClusterOperators, h0: OperatorMatrix, w, n: int,
           p_list: list[np.ndarray] | None = None) -> np.ndarray:
    """n-th coefficient of the reduced-operator series P(-g) H(g) P(g).

    T_0 = H0 P_r; for n >= 1 the direct expansion gives
    sum_p (-1)^p P_p H0 P_{n-p}  +  sum_p (-1)^p P_p V P_{n-1-p}
    with V = i W inserted here (W passed as the odd real potential).
    """
    if n < 0:
        raise ValueError("order must be >= 0")
    mat_h0 = _entries(h0)
    if p_list is None:
        p_list = [pn(ops, w, k) for k in range(n + 1)]
    if n == 0:
        return mat_h0 @ p_list[0]
    mat_v = 1j * _entries(w)
    total = np.zeros_like(p_list[0])
    for p in range(n + 1):
        total += (-1) ** p * (p_list[p] @ mat_h0 @ p_list[n - p])
    for p in range(n):
        total += (-1) ** p * (p_list[p] @ mat_v @ p_list[n - 1 - p])
    return total


@dataclass
class PerturbationSeries:
    """Coefficients of the cluster-reduced eigenvalue problem.

    g_matrices holds the Gram-normalized compressions whose truncated sum
    has the perturbed eigenvalues to O(g^(order+1)); raw_g_matrices holds
    the literal frame compressions (same parity and reality structure,
    Gram-skewed eigenvalues); gram_matrices the frame Gram coefficients.
    exact_through is the largest order at which the truncation reproduces
    the untruncated coefficients exactly (polynomial reach argument), or 0
    when no such window is known.
    """

    order: int
    g_matrices: list[np.ndarray]
    raw_g_matrices: list[np.ndarray]
    gram_matrices: list[np.ndarray]
    p_matrices: list[OperatorMatrix]
    t_hat: list[OperatorMatrix]
    exact_through: int
    cluster: Cluster
    level_energy: float

    @property
    def multiplicity(self) -> int:
        return self.g_matrices[0].shape[0]


def _sqrt_series(m_list: list[np.ndarray]) -> list[np.ndarray]:
    """Coefficients of R with R(g)^2 = M(g), M(0) = I."""
    m_dim = m_list[0].shape[0]
    r_list = [np.eye(m_dim, dtype=complex)]
    for n in range(1, len(m_list)):
        acc = m_list[n].astype(complex).copy()
        for i in range(1, n):
            acc -= r_list[i] @ r_list[n - i]
        r_list.append(acc / 2.0)
    return r_list


def _inverse_series(r_list: list[np.ndarray]) -> list[np.ndarray]:
    """Coefficients of R(g)^(-1) for R(0) = I."""
    m_dim = r_list[0].shape[0]
    n_list = [np.eye(m_dim, dtype=complex)]
    for n in range(1, len(r_list)):
        acc = np.zeros((m_dim, m_dim), dtype=complex)
        for i in range(n):
            acc -= n_list[i] @ r_list[n - i]
        n_list.append(acc)
    return n_list


def series(h0: OperatorMatrix, w, cluster: Cluster, order: int,
           basis: BasisTruncation) -> PerturbationSeries:
    """Assemble all series coefficients for one cluster through `order`."""
    if order < 0:
        raise ValueError("order must be >= 0")
    ops = cluster_operators(h0, basis, cluster)
    with warnings.catch_warnings():
        warnings.simplefilter("once", ExactnessWindowWarning)
        p_list = [pn(ops, w, k) for k in range(order + 1)]
    t_list = [tn_hat(ops, h0, w, k, p_list=p_list) for k in range(order + 1)]

    b_list = [ops.compress(t) for t in t_list]
    m_list = []
    for n in range(order + 1):
        acc = np.zeros((basis.size, basis.size), dtype=complex)
        for p in range(n + 1):
            acc += (-1) ** p * (p_list[p] @ p_list[n - p])
        m_list.append(ops.compress(acc))

    r_list = _sqrt_series(m_list)
    n_list = _inverse_series(r_list)
    k_list = []
    for n in range(order + 1):
        acc = np.zeros_like(b_list[0])
        for i in range(n + 1):
            for j in range(n + 1 - i):
                acc += n_list[i] @ b_list[j] @ n_list[n - i - j]
        k_list.append(acc)

    reach = getattr(w, "reach", None)
    if reach:
        exact_through = min(order, max((basis.n_max - cluster.top_grade) // reach, 0))
    else:
        exact_through = 0
    return PerturbationSeries(
        order=order, g_matrices=k_list, raw_g_matrices=b_list,
        gram_matrices=m_list,
        p_matrices=[OperatorMatrix(p, basis.ref) for p in p_list],
        t_hat=[OperatorMatrix(t, basis.ref) for t in t_list],
        exact_through=exact_through, cluster=cluster,
        level_energy=ops.level_energy)


def gn(series_ctx: PerturbationSeries, n: int, raw: bool = False) -> np.ndarray:
    """n-th compressed coefficient; raw=True returns the literal frame
    compression instead of the Gram-normalized one."""
    if not 0 <= n <= series_ctx.order:
        raise ValueError(f"order {n} outside computed range 0..{series_ctx.order}")
    return (series_ctx.raw_g_matrices if raw else series_ctx.g_matrices)[n]


def series_eigenvalues(series_ctx: PerturbationSeries, g: float) -> np.ndarray:
    """Eigenvalues of the truncated reduced matrix sum g^n G_n at one g."""
    total = sum(gm * g**n for n, gm in enumerate(series_ctx.g_matrices))
    vals = np.linalg.eigvals(total)
    return vals[np.lexsort((vals.imag, vals.real))]


def similarity_coefficients(ops: ClusterOperators, w, order: int,
                            p_list: list[np.ndarray] | None = None) -> list[np.ndarray]:
    """Coefficients U_k of the frame transport, k U_k = sum_j j P_j U_{k-j}.

    U_0 is the identity; the transported columns U(g) psi span the
    perturbed invariant subspace order by order.
    """
    if p_list is None:
        p_list = [pn(ops, w, k) for k in range(order + 1)]
    size = ops.basis.size
    u_list = [np.eye(size, dtype=complex)]
    for k in range(1, order + 1):
        acc = np.zeros((size, size), dtype=complex)
        for j in range(1, k + 1):
            acc += j * (p_list[j] @ u_list[k - j])
        u_list.append(acc / k)
    return u_list


def similarity_u(ops: ClusterOperators, w, g: float, order: int,
                 p_list: list[np.ndarray] | None = None) -> np.ndarray:
    """Frame map (1 + sum_k g^k U_k) P_r; its member columns span the
    perturbed cluster subspace up to O(g^(order+1))."""
    u_list = similarity_coefficients(ops, w, order, p_list=p_list)
    total = sum(u * g**k for k, u in enumerate(u_list))
    return total * ops.p_diag[None, :]


def gram_schmidt(columns: np.ndarray, pivot_tol: float = 1e-10) -> np.ndarray:
    """Orthonormalize columns by modified Gram-Schmidt.

    Raises DegenerateFrameError when a pivot norm falls below pivot_tol,
    which signals that the frame columns are numerically dependent.
    """
    q = np.array(columns, dtype=complex)
    for j in range(q.shape[1]):
        for i in range(j):
            q[:, j] -= (q[:, i].conj() @ q[:, j]) * q[:, i]
        norm = np.linalg.norm(q[:, j])
        if norm < pivot_tol:
            raise DegenerateFrameError(
                f"Gram-Schmidt pivot {norm:.3e} below {pivot_tol:.1e} at column {j}")
        q[:, j] /= norm
    return q


def x_matrix(ops: ClusterOperators, h, g: float, order: int,
             w=None, p_list: list[np.ndarray] | None = None,
             pivot_tol: float = 1e-10) -> np.ndarray:
    """Compression of H(g) in the orthonormalized transported frame.

    The transported member columns are orthonormalized by Gram-Schmidt and
    H(g) is compressed onto them.  Under the reality hypotheses the result
    is hermitian up to the frame truncation error O(g^(order+1)) and its
    eigenvalues match the series eigenvalues within combined error.
    Either the potential w or a precomputed projection-coefficient list
    must be supplied to build the frame.
    """
    if p_list is None:
        if w is None:
            raise ValueError("x_matrix needs the potential w (or p_list)")
        p_list = [pn(ops, w, k) for k in range(order + 1)]
    frame = similarity_u(ops, w, g, order, p_list=p_list)[:, ops.member_idx]
    q = gram_schmidt(frame, pivot_tol)
    return q.conj().T @ _entries(h) @ q
