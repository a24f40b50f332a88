"""Odd potentials and their matrix elements in the oscillator basis.

Two families are supported:

* polynomials with odd-total-degree terms, whose matrix elements are exact
  (ladder algebra; one-mode power tables are built in an enlarged space so
  no truncation error contaminates entries near the cutoff), and
* bounded builtins (sine of a linear form, products of sin/cos factors),
  integrated with tensorized Gauss-Hermite quadrature.  The quadrature
  absorbs the Gaussian factor of the Hermite functions into the weight, so
  only the bounded potential and bounded weighted Hermite values are ever
  evaluated.

Entries between states of equal parity are structurally zero: the parity
selection rule is enforced by masking, not left to cancellation.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from math import comb, inf

import numpy as np

from .basis import BasisTruncation
from .errors import OddnessError, QuadratureOrderWarning
from .operators import OperatorMatrix, position_matrix
from .resonance import FrequencyVector

PolyTerm = tuple[float, tuple[int, ...]]
Factor = tuple[str, int, int]  # (fn "sin"|"cos", 1-based mode, integer coefficient)


@dataclass(frozen=True)
class PotentialSpec:
    """Declarative description of an odd real potential W.

    kind is "polynomial" (terms = [(coeff, powers)]) or "builtin"
    (name plus parameters).  sup_norm is the exact sup of |W| when finite,
    math.inf for polynomials.
    """

    kind: str
    terms: tuple[PolyTerm, ...] = ()
    name: str = ""
    coeffs: tuple[int, ...] = ()
    factors: tuple[Factor, ...] = ()
    sup_norm: float = inf

    @property
    def d(self) -> int:
        if self.kind == "polynomial":
            return len(self.terms[0][1])
        if self.name == "sin_linear":
            return len(self.coeffs)
        return max(mode for _, mode, _ in self.factors)

    @property
    def reach(self) -> int | None:
        """Maximal change of total quanta per application (None if unbounded
        in grade, as for non-polynomial potentials)."""
        if self.kind == "polynomial":
            return max(sum(p) for _, p in self.terms)
        return None

    def describe(self) -> str:
        if self.kind == "polynomial":
            return " + ".join(f"{c}*x^{list(p)}" for c, p in self.terms)
        if self.name == "sin_linear":
            return f"sin({'+'.join(f'{c}*x{k+1}' for k, c in enumerate(self.coeffs) if c)})"
        return "*".join(f"{fn}({c}*x{m})" for fn, m, c in self.factors)


def polynomial(terms) -> PotentialSpec:
    """Polynomial potential from (coeff, powers) pairs; must be odd."""
    tt = tuple((float(c), tuple(int(a) for a in p)) for c, p in terms)
    if not tt:
        raise ValueError("polynomial needs at least one term")
    d = len(tt[0][1])
    for c, p in tt:
        if len(p) != d:
            raise ValueError("all terms must share the same dimension")
        if any(a < 0 for a in p):
            raise ValueError(f"negative power in term {p}")
        if sum(p) % 2 == 0:
            raise OddnessError(f"term coeff={c} powers={list(p)} has even total degree")
    return PotentialSpec(kind="polynomial", terms=tt, sup_norm=inf)


def coordinate(d: int, mode: int) -> PotentialSpec:
    """The single-coordinate potential W(x) = x_mode (1-based)."""
    powers = tuple(1 if k == mode - 1 else 0 for k in range(d))
    return polynomial([(1.0, powers)])


def sin_linear(coeffs) -> PotentialSpec:
    """W(x) = sin(c_1 x_1 + ... + c_d x_d) with integer coefficients."""
    cc = tuple(int(c) for c in coeffs)
    if all(c == 0 for c in cc):
        raise ValueError("sin_linear needs a nonzero coefficient vector")
    return PotentialSpec(kind="builtin", name="sin_linear", coeffs=cc, sup_norm=1.0)


def sin_cos_product(factors) -> PotentialSpec:
    """W(x) = prod of sin/cos(c * x_mode) factors over distinct modes.

    Odd iff the number of sine factors is odd; the sup norm is exactly 1
    because the factors depend on distinct coordinates.
    """
    ff = tuple((str(fn), int(mode), int(c)) for fn, mode, c in factors)
    modes = [m for _, m, _ in ff]
    if len(set(modes)) != len(modes):
        raise ValueError("sin_cos_product factors must use distinct modes")
    for fn, mode, c in ff:
        if fn not in ("sin", "cos"):
            raise ValueError(f"unknown factor kind {fn!r}")
        if mode < 1:
            raise ValueError(f"mode must be >= 1, got {mode}")
        if c == 0:
            raise ValueError("zero coefficient in factor")
    n_sin = sum(1 for fn, _, _ in ff if fn == "sin")
    if n_sin % 2 == 0:
        raise OddnessError(f"product with {n_sin} sine factors is even, not odd")
    return PotentialSpec(kind="builtin", name="sin_cos_product", factors=ff, sup_norm=1.0)


def evaluate(spec: PotentialSpec, points: np.ndarray) -> np.ndarray:
    """Evaluate W on an (npoints, d) array of coordinates."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if spec.kind == "polynomial":
        out = np.zeros(pts.shape[0])
        for c, powers in spec.terms:
            term = np.full(pts.shape[0], c)
            for k, a in enumerate(powers):
                if a:
                    term = term * pts[:, k] ** a
            out += term
        return out
    if spec.name == "sin_linear":
        return np.sin(pts[:, : len(spec.coeffs)] @ np.asarray(spec.coeffs, dtype=float))
    out = np.ones(pts.shape[0])
    for fn, mode, c in spec.factors:
        f = np.sin if fn == "sin" else np.cos
        out = out * f(c * pts[:, mode - 1])
    return out


def validate_oddness(spec: PotentialSpec, samples: int = 64, seed: int = 0):
    """Check W(-x) = -W(x) by construction and by seeded sampling.

    Polynomial terms are odd by construction (verified again here);
    builtins carry a parity declaration that is cross-checked numerically.
    Raises OddnessError naming the failing term or sample point.
    """
    if spec.kind == "polynomial":
        for c, p in spec.terms:
            if sum(p) % 2 == 0:
                raise OddnessError(f"term coeff={c} powers={list(p)} has even total degree")
        return
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-3.0, 3.0, size=(samples, spec.d))
    resid = evaluate(spec, pts) + evaluate(spec, -pts)
    worst = int(np.argmax(np.abs(resid)))
    if abs(resid[worst]) > 1e-12:
        raise OddnessError(
            f"W(x)+W(-x) = {resid[worst]:.3e} at sample {pts[worst].tolist()}")


# ---------------------------------------------------------------------------
# matrix elements

def _x_power_table(n_max: int, power: int, omega: float) -> np.ndarray:
    """Exact <m|x^power|n> for m, n <= n_max at mode frequency omega.

    Built in a space enlarged by `power` so every kept entry equals its
    untruncated value (each ladder factor moves at most one quantum).
    """
    if power == 0:
        return np.eye(n_max + 1)
    big = n_max + power + 1
    n = np.arange(1, big)
    x = (np.diag(np.sqrt(n), 1) + np.diag(np.sqrt(n), -1)) / np.sqrt(2.0 * omega)
    table = np.linalg.matrix_power(x, power)
    return table[: n_max + 1, : n_max + 1]


def _parity_mask(basis: BasisTruncation) -> np.ndarray:
    par = np.array(basis.parities())
    return par[:, None] != par[None, :]


def _mode_omegas(basis: BasisTruncation, freqs: FrequencyVector | None) -> list[float]:
    if freqs is None:
        return [1.0] * basis.d
    if freqs.d != basis.d:
        raise ValueError(f"frequency dimension {freqs.d} != basis dimension {basis.d}")
    return [float(r) * freqs.omega for r in freqs.ratios]


def _polynomial_matrix(basis: BasisTruncation, spec: PotentialSpec,
                       freqs: FrequencyVector | None) -> np.ndarray:
    omegas = _mode_omegas(basis, freqs)
    occ = np.array(basis.states)  # (size, d)
    w = np.zeros((basis.size, basis.size))
    for c, powers in spec.terms:
        block = np.full((basis.size, basis.size), c)
        for k in range(basis.d):
            a = powers[k] if k < len(powers) else 0
            if a == 0:
                # untouched mode: occupation must match exactly
                block = block * (occ[:, k][:, None] == occ[:, k][None, :])
            else:
                table = _x_power_table(basis.n_max, a, omegas[k])
                block = block * table[occ[:, k][:, None], occ[:, k][None, :]]
        w += block
    return w


def _weighted_hermite_values(n_top: int, nodes: np.ndarray) -> np.ndarray:
    """phi_n(y) = (normalized Hermite_n)(y) * exp(-y^2/2), rows n = 0..n_top.

    The Gaussian half-weight keeps every value bounded; the matching
    exp(+y^2) goes into the quadrature weights.
    """
    vals = np.empty((n_top + 1, nodes.size))
    vals[0] = np.pi ** -0.25 * np.exp(-0.5 * nodes**2)
    if n_top >= 1:
        vals[1] = np.sqrt(2.0) * nodes * vals[0]
    for n in range(1, n_top):
        vals[n + 1] = (np.sqrt(2.0 / (n + 1)) * nodes * vals[n]
                       - np.sqrt(n / (n + 1.0)) * vals[n - 1])
    return vals


def quadrature_matrix(basis: BasisTruncation, spec: PotentialSpec,
                      quad_order: int, freqs: FrequencyVector | None = None) -> np.ndarray:
    """Tensorized Gauss-Hermite matrix elements <psi_j, W psi_l>.

    Works for any potential with an evaluation rule, which also makes it
    the independent cross-check for the exact polynomial path.
    """
    omegas = _mode_omegas(basis, freqs)
    nodes, weights = np.polynomial.hermite.hermgauss(quad_order)
    total_weights = weights * np.exp(nodes**2)  # undo the phi_n half-weights
    phi = _weighted_hermite_values(basis.n_max, nodes)

    occ = np.array(basis.states)
    grid = np.indices((quad_order,) * basis.d).reshape(basis.d, -1)  # (d, Q^d)
    points = np.stack([nodes[grid[k]] / np.sqrt(omegas[k]) for k in range(basis.d)], axis=1)
    w_vals = evaluate(spec, points)
    w_prod = np.prod([total_weights[grid[k]] for k in range(basis.d)], axis=0)

    bmat = np.ones((basis.size, grid.shape[1]))
    for k in range(basis.d):
        bmat = bmat * phi[occ[:, k]][:, grid[k]]
    m = (bmat * (w_prod * w_vals)) @ bmat.T
    return (m + m.T) / 2.0


def potential_matrix(basis: BasisTruncation, spec: PotentialSpec,
                     quad_order: int | None = None,
                     freqs: FrequencyVector | None = None,
                     check: bool = True) -> OperatorMatrix:
    """Real symmetric matrix of an odd potential over the truncation.

    Polynomials are assembled exactly through one-mode power tables;
    builtins use Gauss-Hermite quadrature of order quad_order (default
    2 n_max + 8, which is also the allowed minimum).  With check=True a
    doubled-order rerun warns if any entry moves by more than 1e-10.
    Passing `freqs` evaluates the potential in the frequency-scaled
    eigenbasis of the corresponding oscillator.
    """
    validate_oddness(spec)
    if spec.d > basis.d:
        raise ValueError(f"potential touches mode {spec.d} but basis has d={basis.d}")
    if spec.kind == "polynomial":
        w = _polynomial_matrix(basis, spec, freqs)
    else:
        min_order = 2 * basis.n_max + 8
        if quad_order is None:
            quad_order = min_order
        if quad_order < min_order:
            raise ValueError(f"quad_order {quad_order} < required minimum {min_order}")
        w = quadrature_matrix(basis, spec, quad_order, freqs)
        if check:
            w2 = quadrature_matrix(basis, spec, 2 * quad_order, freqs)
            drift = np.abs(w - w2).max()
            if drift > 1e-10:
                warnings.warn(
                    f"quadrature order {quad_order} not converged: doubling moved "
                    f"an entry by {drift:.3e}", QuadratureOrderWarning)
            w = w2
    w = np.where(_parity_mask(basis), w, 0.0)
    return OperatorMatrix(w, basis.ref, tags=frozenset({"real-symmetric"}),
                          reach=spec.reach)


# ---------------------------------------------------------------------------
# serialization

def spec_to_json(spec: PotentialSpec) -> str:
    if spec.kind == "polynomial":
        doc = {"kind": "polynomial",
               "terms": [{"coeff": c, "powers": list(p)} for c, p in spec.terms]}
    elif spec.name == "sin_linear":
        doc = {"kind": "builtin", "name": "sin_linear",
               "coeffs": list(spec.coeffs), "sup_norm": spec.sup_norm}
    else:
        doc = {"kind": "builtin", "name": "sin_cos_product",
               "factors": [{"fn": fn, "mode": m, "coeff": c} for fn, m, c in spec.factors],
               "sup_norm": spec.sup_norm}
    return json.dumps(doc, sort_keys=True)


def spec_from_json(text: str | dict) -> PotentialSpec:
    doc = json.loads(text) if isinstance(text, str) else text
    kind = doc.get("kind")
    if kind == "polynomial":
        return polynomial([(t["coeff"], tuple(t["powers"])) for t in doc["terms"]])
    if kind == "builtin":
        name = doc.get("name")
        if name == "sin_linear":
            return sin_linear(doc["coeffs"])
        if name == "sin_cos_product":
            return sin_cos_product([(f["fn"], f["mode"], f["coeff"]) for f in doc["factors"]])
        raise ValueError(f"unknown builtin {name!r}")
    raise ValueError(f"unknown potential kind {kind!r}")


def position_consistency_residual(basis: BasisTruncation, mode: int = 1,
                                  quad_order: int | None = None) -> float:
    """Max deviation between ladder-built x and its quadrature construction."""
    spec = coordinate(basis.d, mode)
    x_ladder = position_matrix(basis, mode).entries
    if quad_order is None:
        quad_order = 2 * basis.n_max + 8
    x_quad = quadrature_matrix(basis, spec, quad_order)
    return float(np.abs(x_ladder - x_quad).max())
