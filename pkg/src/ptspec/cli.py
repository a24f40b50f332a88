"""Command-line front end.

    ptspec basis    --d 2 --n-max 4
    ptspec jordan   --m-max 20 --g 0.5
    ptspec parity   --freqs 2/1,1/1
    ptspec delta    --freqs 1/1,1/3 [--sup-norm 1.0]
    ptspec rspt     --freqs 1/1,1/1 --potential x1 --level 2 --order 4 --n-max 12
    ptspec scan     --freqs 1/1,1/1 --potential sin_linear:1,1 --g 0.0:0.45:0.05 --n-max 30
    ptspec branches --freqs 2/1,1/1 --potential sin1_cos2 --g -0.1:0.1:0.02 --n-max 12
    ptspec compare  --freqs 1/1,1/1 --potential sin_linear:1,1 --level 1 --order 2 \
                    --g 0.001:0.01:0.003 --n-max 18

Exit codes: 0 success; 1 scientific failure (an --expect-* assertion was
violated); 2 usage error; 3 numerical failure.  Options may also come from
a JSON file via --config; explicit flags override file values.  Reports are
deterministic: same config, byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, fields
from fractions import Fraction

from . import reports
from .basis import enumerate_basis, parity_of
from .errors import NumericalError, PtspecError, UsageError
from .jordan import jordan_report
from .operators import build_h0
from .potentials import (PotentialSpec, coordinate, polynomial, potential_matrix,
                         sin_cos_product, sin_linear, spec_from_json, spec_to_json)
from .resonance import (FrequencyVector, check_condition_a, eigenvalue_clusters,
                        gap_and_delta, rho)
from .rspt import series
from .spectrum import branch_track, reality_scan, rspt_vs_direct

COMMANDS = ("basis", "jordan", "parity", "delta", "rspt", "scan", "branches", "compare")


class ScientificFailure(PtspecError):
    """An --expect-* assertion was violated (exit code 1)."""


@dataclass
class RunConfig:
    """Resolved configuration of one CLI run; echoed into every report."""

    command: str
    d: int | None = None
    n_max: int | None = None
    freqs: str | None = None
    omega: float = 1.0
    potential: str | None = None
    g: str | None = None
    level: str | None = None
    order: int | None = None
    m_max: int | None = None
    sup_norm: float | None = None
    tol: float = 1e-6
    buffer: int = 4
    rank_tol: float = 1e-10
    verify_cutoff: str = "50"
    max_level: float | None = None
    quad_order: int | None = None
    seed: int = 0
    expect_real: bool = False
    expect_holds: bool = False
    out: str | None = None
    format: str = "json"

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="ptspec", description=__doc__,
                                  formatter_class=argparse.RawDescriptionHelpFormatter)
    top.add_argument("command", choices=COMMANDS)
    top.add_argument("--config", help="JSON file with option defaults")
    top.add_argument("--d", type=int)
    top.add_argument("--n-max", type=int, dest="n_max")
    top.add_argument("--freqs", help="comma list of p/q multipliers, e.g. 2/1,1/3")
    top.add_argument("--omega", type=float)
    top.add_argument("--potential",
                     help="x<k> | sin_linear:c1,c2 | sin1_cos2 | poly:c,p1,p2;... | @file.json | inline JSON")
    top.add_argument("--g", help="value, comma list, or start:stop:step grid")
    top.add_argument("--level", help="cluster level in units of omega, e.g. 2 or 7/2")
    top.add_argument("--order", type=int)
    top.add_argument("--m-max", type=int, dest="m_max")
    top.add_argument("--sup-norm", type=float, dest="sup_norm")
    top.add_argument("--tol", type=float)
    top.add_argument("--buffer", type=int)
    top.add_argument("--rank-tol", type=float, dest="rank_tol")
    top.add_argument("--verify-cutoff", dest="verify_cutoff")
    top.add_argument("--max-level", type=float, dest="max_level")
    top.add_argument("--quad-order", type=int, dest="quad_order")
    top.add_argument("--seed", type=int)
    top.add_argument("--expect-real", action="store_true", default=None, dest="expect_real")
    top.add_argument("--expect-holds", action="store_true", default=None, dest="expect_holds")
    top.add_argument("--out")
    top.add_argument("--format", choices=("csv", "json"))
    return top


def parse_config(argv: list[str]) -> RunConfig:
    """Resolve argv (plus optional --config file) into a validated RunConfig."""
    ns = _build_parser().parse_args(argv)
    file_values = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                file_values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file {ns.config}: {exc}") from exc
        unknown = set(file_values) - {f.name for f in fields(RunConfig)}
        if unknown:
            raise UsageError(f"unknown config keys {sorted(unknown)}")
    cfg = RunConfig(command=ns.command)
    for f in fields(RunConfig):
        if f.name == "command":
            continue
        flag = getattr(ns, f.name, None)
        if flag is not None:
            setattr(cfg, f.name, flag)
        elif f.name in file_values:
            setattr(cfg, f.name, file_values[f.name])
    _validate(cfg)
    return cfg


def _require(cfg: RunConfig, *names: str):
    for name in names:
        if getattr(cfg, name) is None:
            raise UsageError(f"command {cfg.command!r} requires --{name.replace('_', '-')}")


def _validate(cfg: RunConfig):
    needs = {
        "basis": ("d", "n_max"),
        "jordan": ("m_max", "g"),
        "parity": ("freqs",),
        "delta": ("freqs",),
        "rspt": ("freqs", "potential", "level", "order", "n_max"),
        "scan": ("freqs", "potential", "g", "n_max"),
        "branches": ("freqs", "potential", "g", "n_max"),
        "compare": ("freqs", "potential", "level", "order", "g", "n_max"),
    }
    _require(cfg, *needs[cfg.command])
    if cfg.format not in ("csv", "json"):
        raise UsageError(f"unknown format {cfg.format!r}")


# ---------------------------------------------------------------------------
# argument value parsers

def parse_freqs(text: str, omega: float) -> FrequencyVector:
    mults = []
    for part in text.split(","):
        part = part.strip()
        if "/" in part:
            p, q = part.split("/")
            mults.append((int(p), int(q)))
        else:
            mults.append((int(part), 1))
    try:
        return FrequencyVector(omega, mults)
    except ValueError as exc:
        raise UsageError(f"invalid --freqs {text!r}: {exc}") from exc


def parse_g_grid(text: str) -> list[float]:
    text = text.strip()
    if ":" in text:
        try:
            start, stop, step = (float(v) for v in text.split(":"))
        except ValueError as exc:
            raise UsageError(f"invalid --g grid {text!r} (want start:stop:step)") from exc
        if step <= 0:
            raise UsageError("--g grid step must be positive")
        values, k = [], 0
        while True:
            v = start + k * step
            if v > stop + step / 2:
                break
            values.append(round(v, 12))
            k += 1
        return values
    return [float(v) for v in text.split(",")]


_ALIASES = {
    "sin1_cos2": lambda: sin_cos_product([("sin", 1, 1), ("cos", 2, 2)]),
}


def parse_potential(text: str, d: int | None) -> PotentialSpec:
    text = text.strip()
    try:
        if text.startswith("@"):
            with open(text[1:]) as fh:
                return spec_from_json(fh.read())
        if text.startswith("{"):
            return spec_from_json(text)
        if text in _ALIASES:
            return _ALIASES[text]()
        if text.startswith("sin_linear:"):
            return sin_linear([int(c) for c in text.split(":", 1)[1].split(",")])
        if text.startswith("poly:"):
            terms = []
            for chunk in text.split(":", 1)[1].split(";"):
                vals = chunk.split(",")
                terms.append((float(vals[0]), tuple(int(p) for p in vals[1:])))
            return polynomial(terms)
        if text.startswith("x") and text[1:].isdigit():
            mode = int(text[1:])
            return coordinate(d or mode, mode)
        raise ValueError("unrecognized potential syntax")
    except PtspecError:
        raise
    except Exception as exc:
        raise UsageError(f"invalid --potential {text!r}: {exc}") from exc


def parse_level(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"invalid --level {text!r}: {exc}") from exc


def _find_cluster(freqs: FrequencyVector, level: Fraction):
    cutoff = max(level + 1, freqs.ground_level() + 1)
    for c in eigenvalue_clusters(freqs, cutoff):
        if c.level_value == level:
            return c
    raise UsageError(f"no cluster at level {level} (units of omega)")


# ---------------------------------------------------------------------------
# command implementations (each returns (results, csv_header, csv_rows))

def _cmd_basis(cfg: RunConfig):
    basis = enumerate_basis(cfg.d, cfg.n_max)
    results = {"d": basis.d, "n_max": basis.n_max, "size": basis.size,
               "states": [list(s) for s in basis.states]}
    rows = ([i, " ".join(map(str, s)), sum(s), parity_of(s)]
            for i, s in enumerate(basis.states))
    return results, ["index", "state", "grade", "parity"], rows


def _cmd_jordan(cfg: RunConfig):
    g_values = parse_g_grid(cfg.g)
    basis = enumerate_basis(2, cfg.m_max)
    out = [jordan_report(m, g, rank_tol=cfg.rank_tol, basis=basis)
           for g in g_values for m in range(cfg.m_max + 1)]
    rows = ([r.m, r.g, r.eigenvalue_h, r.geometric_multiplicity, r.nilpotency_index,
             repr(r.residual_nilpotent), repr(r.residual_block_leak)] for r in out)
    header = ["m", "g", "eigenvalue_h", "geometric_multiplicity",
              "nilpotency_index", "residual_nilpotent", "residual_block_leak"]
    return out, header, rows


def _cmd_parity(cfg: RunConfig):
    freqs = parse_freqs(cfg.freqs, cfg.omega)
    rep = check_condition_a(freqs)
    if cfg.expect_holds and not rep.holds:
        raise ScientificFailure(f"condition violated, witness {rep.witness}")
    rows = [[cfg.freqs, rep.holds,
             " ".join(map(str, rep.witness)) if rep.witness else "",
             rep.kernel_rank]]
    return rep, ["freqs", "condition_A", "witness", "kernel_rank"], rows


def _cmd_delta(cfg: RunConfig):
    freqs = parse_freqs(cfg.freqs, cfg.omega)
    got = gap_and_delta(freqs, Fraction(cfg.verify_cutoff))
    results = {"freqs": cfg.freqs, "omega": cfg.omega,
               "gap": got["gap"], "delta": got["delta"],
               "paper_bound": got["paper_bound"],
               "gap_energy": float(got["gap"]) * freqs.omega,
               "delta_energy": float(got["delta"]) * freqs.omega}
    if cfg.sup_norm is not None:
        results["rho"] = rho(freqs, cfg.sup_norm, Fraction(cfg.verify_cutoff))
    rows = [[cfg.freqs, str(got["gap"]), str(got["delta"]), str(got["paper_bound"]),
             repr(results.get("rho", ""))]]
    return results, ["freqs", "gap", "delta", "paper_bound", "rho"], rows


def _with_potential(cfg: RunConfig, freqs: FrequencyVector) -> PotentialSpec:
    spec = parse_potential(cfg.potential, freqs.d)
    if spec.d > freqs.d:
        raise UsageError(f"potential uses mode {spec.d} but frequencies have d={freqs.d}")
    return spec


def _cmd_rspt(cfg: RunConfig):
    freqs = parse_freqs(cfg.freqs, cfg.omega)
    spec = _with_potential(cfg, freqs)
    cluster = _find_cluster(freqs, parse_level(cfg.level))
    basis = enumerate_basis(freqs.d, cfg.n_max)
    h0 = build_h0(freqs, basis)
    w = potential_matrix(basis, spec, quad_order=cfg.quad_order, freqs=freqs)
    ser = series(h0, w, cluster, cfg.order, basis)
    results = {
        "potential": json.loads(spec_to_json(spec)),
        "level": cluster.level_value, "multiplicity": cluster.multiplicity,
        "parity_tag": cluster.parity_tag, "order": ser.order,
        "exact_through": ser.exact_through, "n_max": cfg.n_max,
        "g_matrices": [{"re": gm.real, "im": gm.imag} for gm in ser.g_matrices],
        "raw_g_matrices": [{"re": gm.real, "im": gm.imag} for gm in ser.raw_g_matrices],
    }
    rows = ([n, i, j, repr(complex(gm[i, j]).real), repr(complex(gm[i, j]).imag)]
            for n, gm in enumerate(ser.g_matrices)
            for i in range(gm.shape[0]) for j in range(gm.shape[1]))
    return results, ["order", "row", "col", "re", "im"], rows


def _cmd_scan(cfg: RunConfig):
    freqs = parse_freqs(cfg.freqs, cfg.omega)
    spec = _with_potential(cfg, freqs)
    grid = parse_g_grid(cfg.g)
    out = reality_scan(freqs, spec, grid, cfg.n_max, tol=cfg.tol,
                       buffer=cfg.buffer, quad_order=cfg.quad_order)
    if cfg.expect_real:
        bad = [r for r in out if r.verdict != "real"]
        if bad:
            raise ScientificFailure(
                f"complex pair found at g={bad[0].g} "
                f"(max |Im| = {bad[0].max_abs_imag_trusted:.3e})")
    rows = ([repr(r.g), i, repr(ev.real), repr(ev.imag), int(tr)]
            for r in out
            for i, (ev, tr) in enumerate(zip(r.eigenvalues, r.trusted_mask)))
    return out, ["g", "index", "re", "im", "trusted"], rows


def _cmd_branches(cfg: RunConfig):
    freqs = parse_freqs(cfg.freqs, cfg.omega)
    spec = _with_potential(cfg, freqs)
    grid = parse_g_grid(cfg.g)
    res = branch_track(freqs, spec, grid, cfg.n_max, max_level=cfg.max_level,
                       quad_order=cfg.quad_order)
    rows = ([bid, repr(gv), repr(val.real), repr(val.imag)]
            for bid, b in enumerate(res.branches)
            for gv, val in zip(b.g_values, b.values))
    return res, ["branch_id", "g", "re", "im"], rows


def _cmd_compare(cfg: RunConfig):
    freqs = parse_freqs(cfg.freqs, cfg.omega)
    spec = _with_potential(cfg, freqs)
    cluster = _find_cluster(freqs, parse_level(cfg.level))
    rep = rspt_vs_direct(freqs, spec, cluster, cfg.order, parse_g_grid(cfg.g),
                         cfg.n_max, quad_order=cfg.quad_order)
    rows = ([repr(g), repr(d)] for g, d in zip(rep.g_values, rep.discrepancies))
    return rep, ["g", "discrepancy"], rows


_IMPL = {"basis": _cmd_basis, "jordan": _cmd_jordan, "parity": _cmd_parity,
         "delta": _cmd_delta, "rspt": _cmd_rspt, "scan": _cmd_scan,
         "branches": _cmd_branches, "compare": _cmd_compare}


def run(cfg: RunConfig) -> int:
    """Execute a validated config; returns the process exit code."""
    try:
        results, header, rows = _IMPL[cfg.command](cfg)
    except ScientificFailure as exc:
        print(f"ptspec: scientific failure: {exc}", file=sys.stderr)
        return 1
    except UsageError as exc:
        print(f"ptspec: usage error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"ptspec: numerical failure: {exc}", file=sys.stderr)
        return 3
    if cfg.format == "json":
        text = reports.dump_json(reports.envelope(cfg.to_dict(), results))
    else:
        text = reports.dump_csv(header, rows)
    reports.write_output(text, cfg.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"ptspec: usage error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except NumericalError as exc:
        print(f"ptspec: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
