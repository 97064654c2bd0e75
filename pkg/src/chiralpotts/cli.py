"""Command line driver for the verification suites.

    chiralpotts verify --target star-triangle --n 3 --kprime 0.6 --samples 20
    chiralpotts sweep --target ising --axis p --start 1e-5 --stop 1e-3 --steps 5
    chiralpotts report --format json --output report.json

Exit status is 0 when every check passes, 1 when a check fails and 2 for
invalid arguments.  Random rapidities are drawn with a seeded generator from
the chart box ``Re u in [-1.2, 1.2]``, ``Im u in [-0.4, 0.4]``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from chiralpotts import lattice, parafermion, qgroup
from chiralpotts.curve import ModelParams, make_point_from_chart, random_chart_point
from chiralpotts.elliptic import EllipticContext, jacobi_sn_cn_dn, scaled_beta
from chiralpotts.errors import ChiralPottsError
from chiralpotts.weights import Variant, build_weights, check_crossing, check_star_triangle

SCHEMA = 1
TARGETS = ("star-triangle", "crossing", "rmatrix", "sufficiency", "dh", "contour",
           "transfer", "hamiltonian", "kw", "ising", "near-fz", "elliptic")
AXES = ("phi", "kprime", "theta", "p")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "verify"
    target: str = "star-triangle"
    n: int = 3
    kprime: float = 0.6
    phi: float | None = None
    phibar: float | None = None
    u: float = 0.3
    theta: float = math.pi / 2
    rows: int = 3
    cols: int = 3
    length: int = 3
    p: float = 1e-4
    phi_plus: float = 0.05
    phi_minus: float = 0.02
    seed: int = 0
    samples: int = 5
    tol: float | None = None
    axis: str | None = None
    start: float | None = None
    stop: float | None = None
    steps: int = 5
    format: str = "text"
    output: str | None = None
    deterministic: bool = False

    def validate(self) -> None:
        if self.target not in TARGETS:
            raise UsageError("unknown target %r" % self.target)
        if self.n < 2:
            raise UsageError("--n must be at least 2")
        if not self.kprime > 0:
            raise UsageError("--kprime must be positive")
        if self.rows < 2 or self.cols < 2:
            raise UsageError("lattice needs at least 2 rows and 2 columns")
        if self.samples < 1:
            raise UsageError("--samples must be positive")
        if self.length < 2:
            raise UsageError("--length must be at least 2")
        if not 0 < self.theta < math.pi:
            raise UsageError("--theta must lie in (0, pi)")
        if not 0 <= self.p < math.exp(-math.pi):
            raise UsageError("--p must lie in [0, e^-pi)")
        if self.command == "sweep":
            if self.axis not in AXES:
                raise UsageError("--axis must be one of %s" % ", ".join(AXES))
            if self.start is None or self.stop is None or self.steps < 1:
                raise UsageError("sweep needs --start, --stop and --steps >= 1")
            if self.steps > 1 and self.start == self.stop:
                raise UsageError("empty sweep range")


@dataclass
class Check:
    name: str
    value: float
    tol: float
    mode: str = "max"  # "max": value <= tol; "min": value >= tol

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        return self.value <= self.tol if self.mode == "max" else self.value >= self.tol

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tol": self.tol,
                "mode": self.mode, "pass": self.passed}


# ---------------------------------------------------------------------------
# suites

def _tol(cfg: RunConfig, default: float) -> float:
    return default if cfg.tol is None else cfg.tol


def _rapidities(cfg: RunConfig):
    """Pair ``(r, s)`` with real chart values and ``u_s - u_r = theta``."""
    params = ModelParams(cfg.n, cfg.kprime)
    u_s = cfg.u
    if cfg.phi is not None:
        k = params.k
        if abs(k) < 1e-14:
            if abs(cfg.phi) > 1e-14:
                raise UsageError("k' = 1 forces phi = 0")
        else:
            v = -math.sin(cfg.phi) / complex(k)
            if abs(v.imag) > 1e-12 or abs(v.real) > 1:
                raise UsageError("no real rapidity with this phi and kprime")
            u_s = math.asin(v.real)
    s = make_point_from_chart(params, u_s)
    r = make_point_from_chart(params, u_s - cfg.theta)
    return r, s


def suite_star_triangle(cfg):
    rng = np.random.default_rng(cfg.seed)
    params = ModelParams(cfg.n, cfg.kprime)
    worst = 0.0
    for _ in range(cfg.samples):
        r, s, t = (random_chart_point(params, rng) for _ in range(3))
        worst = max(worst, check_star_triangle(r, s, t)[1])
    return [Check("star_triangle_max_rel_dev", worst, _tol(cfg, 1e-9))], {}


def suite_crossing(cfg):
    rng = np.random.default_rng(cfg.seed)
    params = ModelParams(cfg.n, cfg.kprime)
    worst = max(check_crossing(random_chart_point(params, rng), random_chart_point(params, rng))
                for _ in range(cfg.samples))
    return [Check("crossing_residual", worst, _tol(cfg, 1e-10))], {}


def _four_points(cfg, rng):
    params = ModelParams(cfg.n, cfg.kprime)
    return [random_chart_point(params, rng) for _ in range(4)]


def suite_rmatrix(cfg):
    rng = np.random.default_rng(cfg.seed)
    dev, inter = 0.0, 0.0
    for _ in range(cfg.samples):
        R = qgroup.build_R(*_four_points(cfg, rng), tol=math.inf)
        dev = max(dev, R.deviation)
        inter = max(inter, max(qgroup.check_intertwiner(R, g) for g in qgroup.GENERATORS))
    return [Check("factorization_deviation", dev, _tol(cfg, 1e-10)),
            Check("intertwiner_residual", inter, _tol(cfg, 1e-9))], {}


def suite_sufficiency(cfg):
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(cfg.samples):
        pts = _four_points(cfg, rng)
        for g in qgroup.GENERATORS:
            worst = max(worst, max(qgroup.check_sufficiency(*pts, g)))
    return [Check("sufficiency_residual", worst, _tol(cfg, 1e-9))], {}


def suite_dh(cfg):
    r, s = _rapidities(cfg)
    table = build_weights(r, s)
    lat = lattice.DiamondLattice.anchored(cfg.rows, cfg.cols, cfg.theta)
    ev = parafermion.CurrentEvaluator(lat, table)
    checks = []
    for v in Variant:
        worst = 0.0
        for st in parafermion.all_stencils(lat):
            res, scale = parafermion.dh_residual(lat, table, v, st, ev)
            worst = max(worst, abs(res) / scale)
        checks.append(Check("dh_%s" % v.value, worst, _tol(cfg, 1e-9)))
    return checks, {"phi_r": _c(r.phi), "phi_s": _c(s.phi)}


def suite_contour(cfg):
    r, s = _rapidities(cfg)
    table = build_weights(r, s)
    lat = lattice.DiamondLattice.anchored(cfg.rows, cfg.cols, cfg.theta)
    ev = parafermion.CurrentEvaluator(lat, table)
    region = parafermion.all_stencils(lat)
    checks = []
    for v in Variant:
        rep = parafermion.dh_contour(lat, table, v, region, ev)
        checks.append(Check("contour_%s" % v.value, abs(rep["boundary_sum"]) / rep["scale"],
                            _tol(cfg, 1e-9)))
        checks.append(Check("interior_%s" % v.value, rep["interior_leftover"], 1e-12))
    return checks, {}


def suite_transfer(cfg):
    rng = np.random.default_rng(cfg.seed)
    params = ModelParams(cfg.n, cfg.kprime)
    L = cfg.length
    s = random_chart_point(params, rng)
    comm = 0.0
    for _ in range(cfg.samples):
        A = lattice.transfer_matrix(random_chart_point(params, rng), s, L)
        B = lattice.transfer_matrix(random_chart_point(params, rng), s, L)
        comm = max(comm, np.linalg.norm(A @ B - B @ A) / np.linalg.norm(A @ B))
    shift = np.linalg.norm(lattice.transfer_matrix(s, s, L) - lattice.translation(cfg.n, L))
    lim = lattice.check_hamiltonian_limit(params, s.u, L)
    ratio_dev = max(abs(x - 2) for x in lim["ratios"])
    return [Check("commutator", comm, _tol(cfg, 1e-9)),
            Check("translation_at_r_eq_s", shift, 1e-12),
            Check("limit_error", lim["errors"][-1], 1e-2),
            Check("halving_ratio_minus_2", ratio_dev, 0.1)], {"limit_ratios": lim["ratios"]}


def _phases(cfg):
    """Real ``(phi, phibar)`` with ``k' cos(phibar) = cos(phi)``; one may be given."""
    if cfg.phi is None and cfg.phibar is None:
        if cfg.kprime * math.cos(0.3) <= 1:
            return math.acos(cfg.kprime * math.cos(0.3)), 0.3
        return 0.3, math.acos(math.cos(0.3) / cfg.kprime)
    if cfg.phi is None:
        c = cfg.kprime * math.cos(cfg.phibar)
        if abs(c) > 1:
            raise UsageError("no real phi with k' cos(phibar) = cos(phi)")
        return math.acos(c), cfg.phibar
    phi = cfg.phi
    if cfg.phibar is not None:
        return phi, cfg.phibar
    c = math.cos(phi) / cfg.kprime
    if abs(c) > 1:
        raise UsageError("no real phibar with k' cos(phibar) = cos(phi)")
    return phi, math.acos(c)


def suite_hamiltonian(cfg):
    phi, phibar = _phases(cfg)
    H = lattice.hamiltonian(cfg.n, phi, phibar, cfg.kprime, cfg.length)
    R = lattice.rotation_operator(cfg.n, cfg.length)
    return [Check("hermiticity", float(np.abs(H - H.conj().T).max()), _tol(cfg, 1e-12)),
            Check("rotation_commutator", float(np.abs(H @ R - R @ H).max()), 1e-12)], {}


def suite_kw(cfg):
    phi, phibar = _phases(cfg)
    rep = lattice.check_kw_duality(cfg.n, phi, phibar, cfg.kprime, cfg.length)
    return [Check("kw_spectral_deviation", rep["max_deviation"], _tol(cfg, 1e-8))], {}


def suite_ising(cfg):
    ctx = EllipticContext.from_nome(cfg.p)
    br = scaled_beta(0.1, ctx)
    bs = scaled_beta(0.1 + cfg.theta / 2, ctx)
    rep = parafermion.ising_dirac_check(ctx, br, bs, cfg.rows, cfg.cols)
    checks = [
        Check("bare_relations", max(rep["bare_residuals"]), _tol(cfg, 1e-9)),
        Check("dirac_split", rep["split_residual"], 1e-9),
        Check("mass_ratio_minus_1", abs(rep["mass_ratio"] - 1), 1e-3),
        Check("rhs_sum", abs(rep["rhs_coefficient_sum"] - rep["rhs_expected"]), 1e-12),
        Check("conjugate_span", rep["conjugate_singular_value"], 1e-9),
        Check("conjugate_mass_ratio_minus_1", abs(rep["conjugate_mass_ratio"] - 1), 1e-3),
    ]
    return checks, {"mass": _c(rep["mass"]), "mass_over_4p": _c(rep["mass_ratio"])}


def suite_near_fz(cfg):
    rep = parafermion.near_fz_expansion_check(cfg.n, cfg.theta, cfg.phi_plus, cfg.phi_minus,
                                              rows=cfg.rows, cols=cfg.cols)
    checks = [Check("halving_ratio_min", min(rep["ratios"]), 6.0, "min"),
              Check("halving_ratio_max", max(rep["ratios"]), 10.0)]
    checks += [Check("bracket_sum_%d" % i, abs(b - rep["expected_sum"]), 1e-12)
               for i, b in enumerate(rep["bracket_sums"])]
    return checks, {"ratios": rep["ratios"]}


def suite_elliptic(cfg):
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for k in (0.0, 0.1, 0.5, 0.9):
        ctx = EllipticContext.from_modulus(k)
        for _ in range(cfg.samples):
            b = complex(rng.uniform(-2, 2), rng.uniform(-0.5, 0.5))
            sn, cn, dn = jacobi_sn_cn_dn(b, ctx)
            worst = max(worst, abs(sn * sn + cn * cn - 1), abs(dn * dn + k * k * sn * sn - 1))
    return [Check("sn_cn_dn_identities", worst, _tol(cfg, 1e-12))], {}


SUITES: dict[str, Callable] = {
    "star-triangle": suite_star_triangle, "crossing": suite_crossing,
    "rmatrix": suite_rmatrix, "sufficiency": suite_sufficiency, "dh": suite_dh,
    "contour": suite_contour, "transfer": suite_transfer, "hamiltonian": suite_hamiltonian,
    "kw": suite_kw, "ising": suite_ising, "near-fz": suite_near_fz, "elliptic": suite_elliptic,
}


def _c(z):
    z = complex(z)
    return [z.real, z.imag]


# ---------------------------------------------------------------------------
# commands

def run_verify(cfg: RunConfig) -> tuple[int, dict]:
    cfg.validate()
    t0 = time.perf_counter()
    checks, extra = SUITES[cfg.target](cfg)
    report = {
        "schema": SCHEMA,
        "command": "verify",
        "target": cfg.target,
        "config": _config_dict(cfg),
        "checks": [c.as_dict() for c in checks],
        "extra": extra,
        "passed": all(c.passed for c in checks),
    }
    if not cfg.deterministic:
        report["wall_time"] = time.perf_counter() - t0
    return (0 if report["passed"] else 1), report


def run_sweep(cfg: RunConfig) -> tuple[int, dict]:
    cfg.validate()
    if cfg.axis == "p" and cfg.start > 0 and cfg.stop > 0:
        values = np.geomspace(cfg.start, cfg.stop, cfg.steps)
    else:
        values = np.linspace(cfg.start, cfg.stop, cfg.steps)
    rows = []
    ok = True
    for v in values:
        sub = RunConfig(**{**asdict(cfg), "command": "verify", cfg.axis: float(v)})
        status, rep = run_verify(sub)
        ok &= status == 0
        row = {cfg.axis: float(v), "passed": rep["passed"]}
        for c in rep["checks"]:
            row[c["name"]] = c["value"]
        for key, val in rep["extra"].items():
            if isinstance(val, list) and len(val) == 2 and key in ("mass", "mass_over_4p"):
                row[key] = val[0]
        rows.append(row)
    report = {"schema": SCHEMA, "command": "sweep", "target": cfg.target, "axis": cfg.axis,
              "config": _config_dict(cfg), "rows": rows, "passed": ok}
    return (0 if ok else 1), report


REPORT_TARGETS = ("star-triangle", "crossing", "rmatrix", "sufficiency", "dh", "contour",
                  "transfer", "hamiltonian", "kw", "ising", "near-fz", "elliptic")


def run_report(cfg: RunConfig) -> tuple[int, dict]:
    results = []
    for target in REPORT_TARGETS:
        sub = RunConfig(**{**asdict(cfg), "command": "verify", "target": target})
        if target in ("ising",):
            sub.n = 2
        status, rep = run_verify(sub)
        results.append(rep)
    passed = all(r["passed"] for r in results)
    return (0 if passed else 1), {"schema": SCHEMA, "command": "report", "results": results,
                                  "passed": passed}


def _config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    for key in ("output", "format", "command"):
        d.pop(key, None)
    return d


# ---------------------------------------------------------------------------
# output

def _text(report: dict) -> str:
    lines = []
    if report["command"] == "report":
        for rep in report["results"]:
            lines.append(_text(rep))
        lines.append("overall: %s" % ("PASS" if report["passed"] else "FAIL"))
        return "\n".join(lines)
    if report["command"] == "sweep":
        keys = list(report["rows"][0].keys()) if report["rows"] else []
        lines.append("\t".join(keys))
        for row in report["rows"]:
            lines.append("\t".join(_fmt(row[k]) for k in keys))
        return "\n".join(lines)
    lines.append("%s:" % report["target"])
    for c in report["checks"]:
        rel = "<=" if c["mode"] == "max" else ">="
        lines.append("  %-4s %-32s %.3e %s %.1e" % ("PASS" if c["pass"] else "FAIL", c["name"],
                                                   c["value"], rel, c["tol"]))
    return "\n".join(lines)


def _fmt(v) -> str:
    return "%.6e" % v if isinstance(v, float) else str(v)


def _csv(report: dict) -> str:
    buf = io.StringIO()
    if report["command"] == "sweep":
        rows = report["rows"]
    elif report["command"] == "report":
        rows = [{"target": r["target"], **c} for r in report["results"] for c in r["checks"]]
    else:
        rows = [{"target": report["target"], **c} for c in report["checks"]]
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        return _csv(report)
    return _text(report) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chiralpotts", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=3, help="clock size N")
    common.add_argument("--kprime", type=float, default=0.6)
    common.add_argument("--phi", type=float, default=None)
    common.add_argument("--phibar", type=float, default=None)
    common.add_argument("--u", type=float, default=0.3, help="chart rapidity of s")
    common.add_argument("--theta", type=float, default=math.pi / 2, help="embedding angle")
    common.add_argument("--rows", type=int, default=3)
    common.add_argument("--cols", type=int, default=3)
    common.add_argument("--length", type=int, default=3, help="chain length")
    common.add_argument("--p", type=float, default=1e-4, help="elliptic nome (Ising)")
    common.add_argument("--phi-plus", type=float, default=0.05)
    common.add_argument("--phi-minus", type=float, default=0.02)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=5)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--output", default=None)
    common.add_argument("--deterministic", action="store_true",
                        help="omit wall times so repeated runs are byte-identical")
    v = sub.add_parser("verify", parents=[common], help="run one verification suite")
    v.add_argument("--target", choices=TARGETS, required=True)
    s = sub.add_parser("sweep", parents=[common], help="scan one parameter")
    s.add_argument("--target", choices=TARGETS, required=True)
    s.add_argument("--axis", choices=AXES, required=True)
    s.add_argument("--start", type=float, required=True)
    s.add_argument("--stop", type=float, required=True)
    s.add_argument("--steps", type=int, default=5)
    sub.add_parser("report", parents=[common], help="run every suite")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    cfg = RunConfig(**fields)
    runner = {"verify": run_verify, "sweep": run_sweep, "report": run_report}[cfg.command]
    try:
        status, report = runner(cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print("chiralpotts: error: %s" % exc, file=sys.stderr)
        return 2
    except ChiralPottsError as exc:
        print("chiralpotts: error: %s" % exc, file=sys.stderr)
        return 2
    text = render(report, cfg.format)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if status == 1 and cfg.command == "verify":
        worst = min(report["checks"], key=lambda c: c["pass"])
        print("worst offender: %s = %.3e" % (worst["name"], worst["value"]), file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
