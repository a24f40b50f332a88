"""Direct finite-truncation spectral experiments.

Truncation trust is empirical: eigenvalues are accepted only where two
truncations (n_max and n_max - buffer) agree, since the operators carry no
a-priori truncation theory.  Reality verdicts, branch continuation in g,
and the series-versus-direct order scaling all work on top of that window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .basis import enumerate_basis
from .errors import EigensolverError, EmptyTrustWindowError
from .operators import OperatorMatrix, assemble_h, build_h0
from .potentials import PotentialSpec, potential_matrix
from .resonance import Cluster, FrequencyVector, eigenvalue_clusters, rho
from .rspt import series, series_eigenvalues


def _entries(h) -> np.ndarray:
    return h.entries if isinstance(h, OperatorMatrix) else np.asarray(h)


def dense_spectrum(h, residual_tol: float = 1e-8) -> np.ndarray:
    """Eigenvalues of a dense (generally non-normal) matrix.

    Backward-stable general eigensolve with an explicit residual contract:
    every returned pair satisfies ||H v - lambda v|| <= residual_tol ||H||
    (infinity norm), otherwise EigensolverError is raised.  Sorted by real
    part, then imaginary part.
    """
    a = _entries(h)
    if not np.all(np.isfinite(a)):
        raise EigensolverError("matrix has non-finite entries")
    try:
        w, vr = scipy.linalg.eig(a, right=True)
    except Exception as exc:  # LinAlgError and friends
        raise EigensolverError(f"dense eigensolver failed: {exc}") from exc
    norm = np.abs(a).sum(axis=1).max() or 1.0
    resid = np.linalg.norm(a @ vr - vr * w[None, :], axis=0)
    worst = float(resid.max()) if resid.size else 0.0
    if worst > residual_tol * norm:
        raise EigensolverError(
            f"eigenpair residual {worst:.3e} exceeds {residual_tol:.1e} * ||H||")
    return w[np.lexsort((w.imag, w.real))]


def trust_window(h_builder, g: float, n_max: int, buffer: int = 4,
                 tol: float = 1e-6) -> float:
    """Energy threshold below which eigenvalues are truncation-stable.

    Diagonalizes h_builder(g, n_max) and h_builder(g, n_max - buffer),
    pairs the spectra greedily in sorted order, and returns the largest
    real part up to which every pair matches within tol.  Raises
    EmptyTrustWindowError if even the lowest eigenvalue fails to match.
    """
    if n_max <= buffer:
        raise ValueError(f"need n_max > buffer, got {n_max} <= {buffer}")
    big = dense_spectrum(h_builder(g, n_max))
    small = dense_spectrum(h_builder(g, n_max - buffer))
    # Walk the smaller spectrum upward in real part, matching each value to
    # its nearest unused counterpart; conjugate partners have real parts
    # equal only to rounding, so index pairing alone would scramble them.
    used = np.zeros(big.size, dtype=bool)
    threshold = None
    for s in small:
        dist = np.abs(big - s)
        dist[used] = np.inf
        j = int(np.argmin(dist))
        if dist[j] < tol:
            used[j] = True
            threshold = float(big[j].real) if threshold is None else max(threshold,
                                                                         float(big[j].real))
        else:
            break
    if threshold is None:
        raise EmptyTrustWindowError(
            f"no eigenvalue stable across truncations {n_max} vs {n_max - buffer}")
    return threshold


@dataclass
class SpectrumReport:
    """Spectrum of one H(g) with its empirical trust mask."""

    g: float
    eigenvalues: np.ndarray
    trusted_mask: np.ndarray
    max_abs_imag_trusted: float
    verdict: str                 # "real" | "complex-pair-found"
    threshold: float
    within_rho: bool             # certification wording allowed only if True


def _hamiltonian_builder(freqs: FrequencyVector, w_spec: PotentialSpec,
                         quad_order: int | None = None):
    """Cached (g, n_max) -> H(g) builder sharing H0 and W per truncation."""
    parts: dict[int, tuple] = {}

    def parts_for(n_max: int):
        if n_max not in parts:
            basis = enumerate_basis(freqs.d, n_max)
            h0 = build_h0(freqs, basis)
            w = potential_matrix(basis, w_spec, quad_order=quad_order,
                                 freqs=freqs, check=False)
            parts[n_max] = (basis, h0, w)
        return parts[n_max]

    def build(g: float, n_max: int) -> OperatorMatrix:
        _, h0, w = parts_for(n_max)
        return assemble_h(g, h0, w)

    build.parts_for = parts_for
    return build


def reality_scan(freqs: FrequencyVector, w_spec: PotentialSpec, g_grid,
                 n_max: int, tol: float = 1e-6, buffer: int = 4,
                 quad_order: int | None = None) -> list[SpectrumReport]:
    """Spectrum reports over a coupling grid with per-g trust windows.

    The verdict is "real" iff every trusted eigenvalue has |Im| <= tol.
    Certification wording (within_rho) is only offered for bounded
    potentials at |g| < delta / ||W||_inf; outside that radius the report
    is an observation.
    """
    build = _hamiltonian_builder(freqs, w_spec, quad_order)
    try:
        radius = rho(freqs, w_spec.sup_norm)
    except Exception:
        radius = 0.0  # unbounded potential: never certified
    reports = []
    for g in g_grid:
        threshold = trust_window(build, g, n_max, buffer=buffer, tol=tol)
        eigs = dense_spectrum(build(g, n_max))
        # tiny slack so a conjugate partner of the last matched eigenvalue
        # (equal real part up to rounding) is not dropped from the window
        mask = eigs.real <= threshold + 1e-10 * (1.0 + abs(threshold))
        max_imag = float(np.abs(eigs[mask].imag).max()) if mask.any() else 0.0
        reports.append(SpectrumReport(
            g=float(g), eigenvalues=eigs, trusted_mask=mask,
            max_abs_imag_trusted=max_imag,
            verdict="real" if max_imag <= tol else "complex-pair-found",
            threshold=threshold, within_rho=bool(abs(g) < radius)))
    return reports


@dataclass
class Branch:
    """One eigenvalue branch continued through the coupling grid."""

    origin_cluster: Cluster
    g_values: list[float] = field(default_factory=list)
    values: list[complex] = field(default_factory=list)


@dataclass
class BranchTrackResult:
    branches: list[Branch]
    collisions: list[tuple[float, float]]   # (g_lo, g_hi) candidate windows


def branch_track(freqs: FrequencyVector, w_spec: PotentialSpec, g_grid,
                 n_max: int, max_level: float | None = None,
                 quad_order: int | None = None,
                 max_bisections: int = 6) -> BranchTrackResult:
    """Continue eigenvalue branches from the unperturbed clusters.

    Starts at g = 0 on the exact cluster levels and follows each branch by
    nearest-neighbor pairing in the complex plane, stepping through the
    grid away from zero in both directions.  A step whose worst pairing
    move exceeds half the smallest separation between distinct branch
    values is bisected; if the bisection budget runs out the window is
    recorded as a candidate exceptional point and tracking continues.
    """
    grid = sorted(float(g) for g in g_grid)
    if not any(g == 0.0 for g in grid):
        raise ValueError("g_grid must include 0")
    if max_level is None:
        max_level = freqs.omega * (n_max // 2)
    build = _hamiltonian_builder(freqs, w_spec, quad_order)
    clusters = [c for c in eigenvalue_clusters(freqs, n_max)
                if float(c.level_value) * freqs.omega <= max_level]

    def fresh() -> list[Branch]:
        return [Branch(origin_cluster=c,
                       g_values=[0.0],
                       values=[complex(float(c.level_value) * freqs.omega)])
                for c in clusters for _ in range(c.multiplicity)]

    collisions: list[tuple[float, float]] = []

    def spectrum_at(g: float) -> np.ndarray:
        return dense_spectrum(build(g, n_max))

    def step(track: list[Branch], g_from: float, g_to: float, depth: int):
        cand = spectrum_at(g_to)
        last = np.array([b.values[-1] for b in track])
        cost = np.abs(last[:, None] - cand[None, :])
        rows, cols = linear_sum_assignment(cost)
        moves = cost[rows, cols]
        distinct = np.unique(np.round(last, 12))
        if distinct.size > 1:
            sep = np.min(np.abs(distinct[:, None] - distinct[None, :])
                         [~np.eye(distinct.size, dtype=bool)])
        else:
            sep = np.inf
        if moves.max() > sep / 2 and depth < max_bisections:
            mid = (g_from + g_to) / 2
            step(track, g_from, mid, depth + 1)
            step(track, mid, g_to, depth + 1)
            return
        if moves.max() > sep / 2:
            collisions.append((g_from, g_to))
        for r, c in zip(rows, cols):
            track[r].g_values.append(g_to)
            track[r].values.append(complex(cand[c]))

    pos, neg = fresh(), fresh()
    for direction, track in ((+1, pos), (-1, neg)):
        leg = sorted((g for g in grid if direction * g > 0), key=abs)
        g_prev = 0.0
        for g in leg:
            step(track, g_prev, g, 0)
            g_prev = g

    branches = []
    for b_pos, b_neg in zip(pos, neg):
        tail = sorted(((gv, val) for gv, val in zip(b_neg.g_values, b_neg.values)
                       if gv < 0.0))
        branches.append(Branch(
            origin_cluster=b_pos.origin_cluster,
            g_values=[t[0] for t in tail] + b_pos.g_values,
            values=[t[1] for t in tail] + b_pos.values))
    return BranchTrackResult(branches=branches, collisions=collisions)


@dataclass
class SlopeReport:
    """Least-squares order-scaling fit of series-versus-direct discrepancy."""

    slope: float | None
    g_values: list[float]
    discrepancies: list[float]
    at_noise_floor: bool

    @property
    def exact_to_machine_precision(self) -> bool:
        return self.at_noise_floor


def rspt_vs_direct(freqs: FrequencyVector, w_spec: PotentialSpec,
                   cluster: Cluster, order: int, g_probe,
                   n_max: int, quad_order: int | None = None,
                   noise_floor: float = 1e-13) -> SlopeReport:
    """Log-log slope of |direct - series| eigenvalue discrepancy in g.

    Both sides live in the same truncated model, so the discrepancy is the
    genuine series remainder O(g^(order+1)) regardless of how well the
    truncation approximates the untruncated operator.  Points at the noise
    floor are excluded; if every point sits there the report says so
    instead of fitting.
    """
    basis = enumerate_basis(freqs.d, n_max)
    h0 = build_h0(freqs, basis)
    w = potential_matrix(basis, w_spec, quad_order=quad_order, freqs=freqs, check=False)
    ser = series(h0, w, cluster, order, basis)
    level = float(cluster.level_value) * freqs.omega

    gs, discs = [], []
    for g in g_probe:
        eigs = dense_spectrum(assemble_h(g, h0, w))
        nearest = eigs[np.argsort(np.abs(eigs - level))[: cluster.multiplicity]]
        nearest = nearest[np.argsort(nearest.real)]
        predicted = series_eigenvalues(ser, g)
        discs.append(float(np.abs(nearest - predicted).max()))
        gs.append(float(g))
    fit_pts = [(g, d) for g, d in zip(gs, discs) if d > noise_floor]
    if not fit_pts:
        return SlopeReport(slope=None, g_values=gs, discrepancies=discs,
                           at_noise_floor=True)
    lg = np.log([p[0] for p in fit_pts])
    ld = np.log([p[1] for p in fit_pts])
    slope = float(np.polyfit(lg, ld, 1)[0])
    return SlopeReport(slope=slope, g_values=gs, discrepancies=discs,
                       at_noise_floor=False)
