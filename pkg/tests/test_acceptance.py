"""Acceptance criteria, one test per criterion.

Each test records a single ``PASS``/``FAIL`` line which is printed at the end
of the pytest run (see ``conftest.py``).  Running this file directly prints
the same lines without pytest.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from chiralpotts import lattice as lt
from chiralpotts import parafermion as pf
from chiralpotts import qgroup
from chiralpotts.curve import ModelParams, make_point_from_chart, random_chart_point
from chiralpotts.elliptic import (
    EllipticContext, jacobi_sn_cn_dn, scaled_beta, theta_expansions, theta_H_H1_Theta_Theta1,
)
from chiralpotts.weights import (
    DisorderFactor, Variant, build_weights, check_crossing, check_star_triangle,
)

RESULTS = {}


def record(number, title, ok, detail):
    line = "criterion %2d %-22s %s  %s" % (number, title, "PASS" if ok else "FAIL", detail)
    RESULTS[number] = line
    return ok


def _samples(N, count, seed, size=3):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        params = ModelParams(N, rng.uniform(0.2, 0.95))
        out.append([random_chart_point(params, rng) for _ in range(size)])
    return out


# -- 1, 2 ------------------------------------------------------------------

def criterion_star_triangle():
    t0 = time.perf_counter()
    worst = max(check_star_triangle(*pts)[1]
                for N in (2, 3, 4, 5) for pts in _samples(N, 20, 100 + N))
    dt = time.perf_counter() - t0
    return record(1, "star-triangle", worst <= 1e-9 and dt < 10,
                  "max rel dev %.2e (tol 1e-9), %.1f s" % (worst, dt))


def criterion_crossing():
    worst = max(max(check_crossing(a, b), check_crossing(b, c))
                for N in (2, 3, 4, 5) for a, b, c in _samples(N, 20, 100 + N))
    return record(2, "crossing", worst <= 1e-10, "max residual %.2e (tol 1e-10)" % worst)


# -- 3 ---------------------------------------------------------------------

def criterion_rmatrix():
    t0 = time.perf_counter()
    dev = inter = suff = 0.0
    for N in (2, 3, 4):
        for pts in _samples(N, 4, 200 + N, size=4):
            R = qgroup.build_R(*pts, tol=math.inf)
            dev = max(dev, R.deviation)
            for g in qgroup.GENERATORS:
                inter = max(inter, qgroup.check_intertwiner(R, g))
                suff = max(suff, max(qgroup.check_sufficiency(*pts, g)))
    dt = time.perf_counter() - t0
    ok = dev <= 1e-10 and inter <= 1e-9 and suff <= 1e-9 and dt < 60
    return record(3, "R-matrix", ok, "factorisation %.2e, intertwiner %.2e, sufficiency %.2e, %.1f s"
                  % (dev, inter, suff, dt))


# -- 4 ---------------------------------------------------------------------

def _dh_worst(lat, table, engine="contract", stencils=None):
    ev = pf.CurrentEvaluator(lat, table, engine=engine)
    worst = 0.0
    kinds = set()
    for stn in stencils or pf.all_stencils(lat):
        for v in Variant:
            res, scale = pf.dh_residual(lat, table, v, stn, ev)
            worst = max(worst, abs(res) / scale)
        kinds.add(stn.kind)
    return worst, kinds, ev


def criterion_twisted_dh():
    t0 = time.perf_counter()
    rng = np.random.default_rng(400)
    worst = cross = 0.0
    neg = math.inf
    kinds = set()
    for N in (2, 3, 4):
        for k in range(10):
            params = ModelParams(N, rng.uniform(0.3, 0.95))
            u_r = rng.uniform(-1.0, 1.0)
            theta = rng.uniform(0.4, 2.2)
            r = make_point_from_chart(params, u_r)
            s = make_point_from_chart(params, u_r + theta)
            table = build_weights(r, s)
            size = (4, 4) if k < 3 else (3, 3)
            lat = lt.DiamondLattice.anchored(*size, theta)
            w, kd, _ = _dh_worst(lat, table)
            worst, kinds = max(worst, w), kinds | kd
            if k < 2:
                # raw enumeration on a lattice of at most 10 sites
                small = lt.DiamondLattice.anchored(2, 5 if N < 4 else 4, theta)
                stencils = [pf.PlaquetteStencil.w(small, 1, 1), pf.PlaquetteStencil.wbar(small, 2, 0)]
                a = pf.CurrentEvaluator(small, table)
                b = pf.CurrentEvaluator(small, table, engine="enumerate")
                for stn in stencils:
                    for v in Variant:
                        ta = pf.dh_terms(a, v, stn, r, s)
                        tb = pf.dh_terms(b, v, stn, r, s)
                        cross = max(cross, float(np.abs(ta - tb).max() / np.abs(tb).max()))
                        worst = max(worst, abs(tb.sum()) / np.abs(tb).max())
            if k == 0:
                bad_r = dataclasses.replace(r, x=r.x * (1 + 1e-2))
                w_bad, _, _ = _dh_worst(lt.DiamondLattice.anchored(3, 3, theta), build_weights(bad_r, s))
                neg = min(neg, w_bad)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and cross <= 1e-10 and neg > 1e-4 and kinds == {"W", "Wbar"} and dt < 300
    return record(4, "twisted DH", ok,
                  "worst residual/scale %.2e, contract vs enumerate %.2e, off-curve %.2e (> 1e-4), %.1f s"
                  % (worst, cross, neg, dt))


# -- 5 ---------------------------------------------------------------------

def criterion_tail_paths():
    params = ModelParams(3, 0.7)
    table = build_weights(make_point_from_chart(params, 0.1), make_point_from_chart(params, 1.2))
    lat = lt.DiamondLattice.anchored(3, 3, 1.1)
    worst = 0.0
    for v in Variant:
        fac = DisorderFactor.for_table(table, v)
        dual = (0, 0)
        canonical = lat.canonical_tail(dual)
        detour = [(-1, q) for q in range(-1, 2)] + [(0, 1), (0, 0)]
        ins = lt.InsertionSet([((2, 0), v.order_power)], [(canonical, fac, fac)])
        worst = max(worst, lt.check_path_independence(lat, table, ins, detour))
    return record(5, "tail path-independence", worst <= 1e-10, "max rel change %.2e (tol 1e-10)" % worst)


# -- 6 ---------------------------------------------------------------------

def criterion_fz():
    params = ModelParams(3, 1.0)
    r, s = make_point_from_chart(params, 0.2), make_point_from_chart(params, 1.3)
    table = build_weights(r, s)
    lat = lt.DiamondLattice.anchored(3, 3, 1.1)
    ev = pf.CurrentEvaluator(lat, table)
    coeff = cr = 0.0
    for stn in pf.all_stencils(lat):
        for v in Variant:
            coeff = max(coeff, float(np.abs(stn.coefficients(v, r, s) - 1).max()))
            terms = []
            for site, dual, dz in stn.edges:
                dz = dz if v.holomorphic else dz.conjugate()
                terms.append(dz * ev.dressed(v, site, dual))
            cr = max(cr, abs(sum(terms)) / max(abs(t) for t in terms))
    ok = coeff <= 1e-15 and cr <= 1e-10
    return record(6, "FZ reduction", ok, "coefficients - 1: %.1e, plain CR %.2e (tol 1e-10)" % (coeff, cr))


# -- 7 ---------------------------------------------------------------------

def criterion_near_fz():
    ratios, sums = [], 0.0
    for N, theta, pp, pm in ((3, math.pi / 2, 0.05, 0.02), (3, 1.0, 0.04, -0.03), (4, 2.0, 0.03, 0.05)):
        rep = pf.near_fz_expansion_check(N, theta, pp, pm)
        ratios += rep["ratios"]
        sums = max(sums, max(abs(b - rep["expected_sum"]) for b in rep["bracket_sums"]))
    ok = all(6 <= x <= 10 for x in ratios) and sums <= 1e-12
    return record(7, "near-FZ", ok, "halving ratios %.2f..%.2f (want [6,10]), bracket sums %.1e"
                  % (min(ratios), max(ratios), sums))


# -- 8 ---------------------------------------------------------------------

def criterion_ising():
    bare = csum = sing = mdev = cdev = 0.0
    for p in np.geomspace(1e-5, 1e-3, 5):
        ctx = EllipticContext.from_nome(p)
        for bp, th in ((0.1, math.pi / 2), (0.3, 1.2)):
            rep = pf.ising_dirac_check(ctx, scaled_beta(bp, ctx), scaled_beta(bp + th / 2, ctx))
            bare = max(bare, max(rep["bare_residuals"]), rep["split_residual"])
            mdev = max(mdev, abs(rep["mass_ratio"] - 1))
            csum = max(csum, abs(rep["rhs_coefficient_sum"] - rep["rhs_expected"]))
            sing = max(sing, rep["conjugate_singular_value"])
            cdev = max(cdev, abs(rep["conjugate_mass_ratio"] - 1))
    ok = bare <= 1e-9 and mdev <= 1e-3 and csum <= 1e-12 and sing <= 1e-9 and cdev <= 1e-3
    return record(8, "Ising Dirac", ok,
                  "bare %.2e, |m/4p - 1| %.2e, coeff sum %.1e, conjugate %.2e / %.2e"
                  % (bare, mdev, csum, sing, cdev))


# -- 9 ---------------------------------------------------------------------

def criterion_transfer():
    rng = np.random.default_rng(900)
    params = ModelParams(3, 0.6)
    s = random_chart_point(params, rng)
    comm = 0.0
    for _ in range(5):
        A = lt.transfer_matrix(random_chart_point(params, rng), s, 3)
        B = lt.transfer_matrix(random_chart_point(params, rng), s, 3)
        comm = max(comm, np.linalg.norm(A @ B - B @ A) / np.linalg.norm(A @ B))
    sr = make_point_from_chart(params, 0.4)
    shift = float(np.abs(lt.transfer_matrix(sr, sr, 3) - lt.translation(3, 3)).max())
    lim = lt.check_hamiltonian_limit(params, 0.4, 3)
    ok = comm <= 1e-9 and shift <= 1e-12 and all(abs(x - 2) < 0.1 for x in lim["ratios"])
    return record(9, "transfer matrix", ok, "commutator %.2e, r=s shift %.1e, halving ratios %s"
                  % (comm, shift, ", ".join("%.3f" % x for x in lim["ratios"])))


# -- 10 --------------------------------------------------------------------

def criterion_hamiltonian():
    herm = kw = 0.0
    rng = np.random.default_rng(1000)
    for N in (2, 3):
        for _ in range(3):
            H = lt.hamiltonian(N, rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.3, 2), 3)
            herm = max(herm, float(np.abs(H - H.conj().T).max()))
        for phibar, kp in ((0.3, 0.8), (0.5, 0.6)):
            phi = math.acos(kp * math.cos(phibar))
            kw = max(kw, lt.check_kw_duality(N, phi, phibar, kp, 3)["max_deviation"])
    ok = herm <= 1e-12 and kw <= 1e-8
    return record(10, "Hamiltonian / KW", ok, "hermiticity %.1e, KW sector exchange %.2e (tol 1e-8)" % (herm, kw))


# -- 11 --------------------------------------------------------------------

def criterion_elliptic():
    ident = 0.0
    for k in (0.0, 0.1, 0.5, 0.9):
        ctx = EllipticContext.from_modulus(k)
        re, im = np.meshgrid(np.linspace(-2, 2, 10), np.linspace(-0.6, 0.6, 10))
        for b in (re + 1j * im).ravel():
            sn, cn, dn = jacobi_sn_cn_dn(b, ctx)
            ident = max(ident, abs(sn * sn + cn * cn - 1), abs(dn * dn + k * k * sn * sn - 1))
    worst = 0.0
    for p in (1e-4, 1e-5, 1e-6):
        ctx = EllipticContext.from_nome(p)
        for bp in (0.1, 0.4, 1.2):
            ex = theta_H_H1_Theta_Theta1(scaled_beta(bp, ctx), ctx)
            ap = theta_expansions(bp, p)
            worst = max(worst, max(abs(e - a) for e, a in zip(ex, ap)) / p**1.5)
    ok = ident <= 1e-12 and worst <= 5
    return record(11, "elliptic", ok, "identities %.1e, expansion error / p^1.5 <= %.2f" % (ident, worst))


CRITERIA = [criterion_star_triangle, criterion_crossing, criterion_rmatrix, criterion_twisted_dh,
            criterion_tail_paths, criterion_fz, criterion_near_fz, criterion_ising,
            criterion_transfer, criterion_hamiltonian, criterion_elliptic]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[c.__name__[10:] for c in CRITERIA])
def test_criterion(criterion):
    assert criterion(), RESULTS.get(CRITERIA.index(criterion) + 1)


if __name__ == "__main__":
    for c in CRITERIA:
        c()
    for k in sorted(RESULTS):
        print(RESULTS[k])
