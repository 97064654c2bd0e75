"""Lattice parafermions built from the quasi-local currents and their
twisted discrete Cauchy-Riemann relations.

A current ``j_v(r)`` lives on the mid-edge between a spin ``sigma`` and a dual
site ``mu``: it is the expectation of a clock insertion ``X^{+-1}`` at
``sigma`` joined to the boundary anchor by a disorder tail ending at ``mu``.
The dressed operator is ``O = exp(-i s alpha) j`` for the holomorphic
variants (``ebar0``, ``ebar1``) and ``exp(+i s alpha) j`` for the others,
with ``s = 1 - 1/N`` and ``alpha = arg(z_sigma - z_mu)``.

Around a rhombus the four dressed currents obey

    sum_k c_k dz_k O(r_k) = 0

(``dz_k`` conjugated for the anti-holomorphic variants), where ``dz_k`` are
the counter-clockwise edge vectors and ``c_k`` are the phases
``(e^{i p phi_r/N}, e^{i p phi_s/N}, e^{-i p phi_r/N}, e^{-i p phi_s/N})``
with a sign ``p`` fixed by the variant and the rhombus type.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from chiralpotts.curve import CurvePoint, ModelParams, make_point_from_chart
from chiralpotts.errors import DomainError
from chiralpotts.lattice import DiamondLattice, EdgeModel, InsertionSet
from chiralpotts.weights import DisorderFactor, Variant, WeightTable, build_weights

# sign p of the coefficient pattern, per (variant, rhombus type)
PATTERN_SIGN = {
    (Variant.EBAR0, "W"): 1, (Variant.EBAR0, "Wbar"): -1,
    (Variant.E0, "W"): -1, (Variant.E0, "Wbar"): 1,
    (Variant.EBAR1, "W"): -1, (Variant.EBAR1, "Wbar"): 1,
    (Variant.E1, "W"): 1, (Variant.E1, "Wbar"): -1,
}


def spin_of(N: int) -> float:
    return 1 - 1 / N


def tail_ordering(lat: DiamondLattice, site, dual) -> str:
    """``"above"`` when the tail leaves ``dual`` at or below ``site`` (``Im z_mu <= Im z_sigma``)."""
    return "above" if lat.z_dual(dual).imag <= lat.z_spin(site).imag else "below"


@dataclass(frozen=True)
class DressedCurrent:
    variant: Variant
    N: int

    @property
    def spin(self) -> float:
        s = spin_of(self.N)
        return s if self.variant.holomorphic else -s

    def phase(self, alpha: float, shift: float = 0.0) -> complex:
        """``exp(-i (spin - shift) alpha)``; ``shift`` lowers the holomorphic spin."""
        return cmath.exp(-1j * (self.spin - shift) * alpha)


@dataclass(frozen=True)
class PlaquetteStencil:
    """One rhombus with its four mid-edges in counter-clockwise order.

    ``W`` rhombi: top dual, left spin, bottom dual, right spin.
    ``Wbar`` rhombi: top spin, left dual, bottom spin, right dual.
    ``edges[k] = (spin, dual, dz)`` with ``dz`` the edge vector from vertex
    ``k`` to vertex ``k+1``.
    """

    kind: str
    index: tuple[int, int]
    edges: tuple

    @classmethod
    def w(cls, lat: DiamondLattice, i: int, j: int) -> "PlaquetteStencil":
        if not (0 <= i < lat.cols - 1 and 0 <= j < lat.rows):
            raise DomainError("no horizontal edge at %s" % ((i, j),))
        verts = [("d", (i, j)), ("s", (i, j)), ("d", (i, j - 1)), ("s", (i + 1, j))]
        return cls("W", (i, j), _edges(lat, verts))

    @classmethod
    def wbar(cls, lat: DiamondLattice, i: int, j: int) -> "PlaquetteStencil":
        if not (0 <= i < lat.cols and 0 <= j < lat.rows - 1):
            raise DomainError("no vertical edge at %s" % ((i, j),))
        verts = [("s", (i, j + 1)), ("d", (i - 1, j)), ("s", (i, j)), ("d", (i, j))]
        return cls("Wbar", (i, j), _edges(lat, verts))

    def coefficients(self, variant: Variant, r: CurvePoint, s: CurvePoint) -> np.ndarray:
        N = r.params.N
        p = PATTERN_SIGN[(Variant(variant), self.kind)]
        return np.exp(1j * p * np.array([r.phi, s.phi, -r.phi, -s.phi]) / N)


def _edges(lat: DiamondLattice, verts) -> tuple:
    def z(v):
        return lat.z_spin(v[1]) if v[0] == "s" else lat.z_dual(v[1])

    out = []
    for k in range(4):
        v0, v1 = verts[k], verts[(k + 1) % 4]
        spin, dual = (v0, v1) if v0[0] == "s" else (v1, v0)
        out.append((spin[1], dual[1], z(v1) - z(v0)))
    return tuple(out)


def all_stencils(lat: DiamondLattice) -> list[PlaquetteStencil]:
    out = [PlaquetteStencil.w(lat, i, j) for j in range(lat.rows) for i in range(lat.cols - 1)]
    out += [PlaquetteStencil.wbar(lat, i, j) for j in range(lat.rows - 1) for i in range(lat.cols)]
    return out


class CurrentEvaluator:
    """Caches the partition function of one lattice and evaluates currents on it."""

    def __init__(self, lat: DiamondLattice, table: WeightTable, vtable: WeightTable | None = None,
                 engine: str = "contract"):
        self.lat = lat
        self.table = table
        self.base = EdgeModel(lat, table, vtable)
        self.engine = engine
        self.Z = self.base.evaluate(engine)
        if self.Z == 0:
            from chiralpotts.errors import DegeneratePartition

            raise DegeneratePartition("partition function vanishes")
        self._cache = {}

    def factor(self, variant: Variant, bare: bool = False) -> DisorderFactor:
        if bare:
            return DisorderFactor(1.0, 1.0, Variant(variant))
        return DisorderFactor.for_table(self.table, Variant(variant))

    def current(self, variant, site, dual, bare: bool = False, path: Sequence | None = None) -> complex:
        variant = Variant(variant)
        key = (variant, tuple(site), tuple(dual), bare, None if path is None else tuple(map(tuple, path)))
        if key not in self._cache:
            fac = self.factor(variant, bare)
            tail = self.lat.canonical_tail(dual) if path is None else list(path)
            ins = InsertionSet([(tuple(site), variant.order_power)], [(tail, fac, fac)])
            self._cache[key] = self.base.apply(ins).evaluate(self.engine) / self.Z
        return self._cache[key]

    def dressed(self, variant, site, dual, shift: float = 0.0) -> complex:
        variant = Variant(variant)
        alpha = self.lat.edge_angle(site, dual)
        return DressedCurrent(variant, self.table.N).phase(alpha, shift) * self.current(variant, site, dual)


def current_expectation(lat: DiamondLattice, table: WeightTable, variant, site, dual,
                        vtable: WeightTable | None = None, engine: str = "contract",
                        bare: bool = False) -> complex:
    """``<j_variant>`` on the mid-edge between ``site`` and ``dual``."""
    return CurrentEvaluator(lat, table, vtable, engine).current(variant, site, dual, bare)


def dh_terms(ev: CurrentEvaluator, variant, stencil: PlaquetteStencil,
             r: CurvePoint, s: CurvePoint) -> np.ndarray:
    variant = Variant(variant)
    c = stencil.coefficients(variant, r, s)
    out = []
    for k, (site, dual, dz) in enumerate(stencil.edges):
        if not variant.holomorphic:
            dz = dz.conjugate()
        out.append(c[k] * dz * ev.dressed(variant, site, dual))
    return np.array(out)


def dh_residual(lat: DiamondLattice, table: WeightTable, variant, stencil: PlaquetteStencil,
                evaluator: CurrentEvaluator | None = None) -> tuple[complex, float]:
    """Four-term sum around ``stencil`` and the largest single term (its scale)."""
    ev = evaluator or CurrentEvaluator(lat, table)
    terms = dh_terms(ev, variant, stencil, table.r, table.s)
    return complex(terms.sum()), float(np.abs(terms).max())


def _is_simply_connected(stencils: Sequence[PlaquetteStencil]) -> bool:
    # faces glued along shared mid-edges; boundary must be a single cycle
    count = {}
    for st in stencils:
        for site, dual, _ in st.edges:
            count[(site, dual)] = count.get((site, dual), 0) + 1
    boundary = [e for e, c in count.items() if c == 1]
    if not boundary:
        return False
    adj = {}
    for site, dual in boundary:
        adj.setdefault(("s", site), []).append(("d", dual))
        adj.setdefault(("d", dual), []).append(("s", site))
    if any(len(v) != 2 for v in adj.values()):
        return False
    start = next(iter(adj))
    seen, stack = {start}, [start]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    if len(seen) != len(adj):
        return False
    faces = {st.kind + str(st.index): st for st in stencils}
    fseen, fstack = set(), [next(iter(faces))]
    owner = {}
    for key, st in faces.items():
        for site, dual, _ in st.edges:
            owner.setdefault((site, dual), []).append(key)
    while fstack:
        key = fstack.pop()
        if key in fseen:
            continue
        fseen.add(key)
        for site, dual, _ in faces[key].edges:
            fstack.extend(o for o in owner[(site, dual)] if o not in fseen)
    return len(fseen) == len(faces)


def dh_contour(lat: DiamondLattice, table: WeightTable, variant,
               region: Iterable[PlaquetteStencil], evaluator: CurrentEvaluator | None = None) -> dict:
    """Sum the plaquette relations over ``region``.

    Returns the assembled boundary sum, the sum of the individual plaquette
    residuals, the largest interior coefficient left after assembly, and a
    scale (largest boundary term).
    """
    variant = Variant(variant)
    region = list(region)
    if not region or not _is_simply_connected(region):
        raise DomainError("region must be a non-empty simply connected set of rhombi")
    ev = evaluator or CurrentEvaluator(lat, table)
    r, s = table.r, table.s
    coeff, count = {}, {}
    plaquette_sum = 0j
    for st in region:
        c = st.coefficients(variant, r, s)
        for k, (site, dual, dz) in enumerate(st.edges):
            if not variant.holomorphic:
                dz = dz.conjugate()
            key = (site, dual)
            w = c[k] * dz
            coeff[key] = coeff.get(key, 0) + w
            count[key] = count.get(key, 0) + 1
            plaquette_sum += w * ev.dressed(variant, site, dual)
    interior = max((abs(coeff[k]) for k in coeff if count[k] == 2), default=0.0)
    terms = [coeff[k] * ev.dressed(variant, *k) for k in coeff if count[k] == 1]
    return {
        "boundary_sum": complex(sum(terms)),
        "plaquette_sum": complex(plaquette_sum),
        "interior_leftover": float(interior),
        "scale": float(max(abs(t) for t in terms)),
        "boundary_edges": sum(1 for k in coeff if count[k] == 1),
    }


# ---------------------------------------------------------------------------
# Near the Fateev-Zamolodchikov point

def point_from_phases(N: int, phi, phibar, branch: int = 1) -> tuple[ModelParams, complex]:
    """Curve parameters and chart ``u`` of the point with given ``(phi, phibar)``.

    ``k' = cos(phi)/cos(phibar)`` and ``u`` solves ``sin u = -sin(phi)/k``,
    ``cos u = i k' sin(phibar)/k``.
    """
    kp = complex(np.cos(phi) / np.cos(phibar))
    params = ModelParams(N, kp.real if abs(kp.imag) < 1e-15 else kp)
    k = params.k
    if abs(k) < 1e-14:
        raise DomainError("phases too close to the FZ point to fix u")
    su = -np.sin(phi) / k
    cu = 1j * params.kprime * np.sin(phibar) / k
    return params, -1j * cmath.log(cu + 1j * su)


def bracket_coefficients(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """``(t, 1/t, t, 1/t)`` and ``(1/t, t, 1/t, t)`` with ``t = -i e^{i theta}``."""
    t = -1j * cmath.exp(1j * theta)
    return np.array([t, 1 / t, t, 1 / t]), np.array([1 / t, t, 1 / t, t])


def near_fz_remainder(N: int, theta: float, phi_plus: float, phi_minus: float,
                      rows: int = 3, cols: int = 3, second_order: float = 0.5) -> dict:
    """Plain CR sum minus its expansion to second order in ``phi^{+-}``.

    ``second_order`` multiplies the ``(alpha^{+-})^2`` brackets; the Taylor
    expansion of the exact relation gives 1/2.
    """
    if phi_plus == 0 and phi_minus == 0:
        return {"D": 0j, "lhs": 0j}
    phi, phibar = phi_plus + phi_minus, phi_plus - phi_minus
    params, u_s = point_from_phases(N, phi, phibar)
    s = make_point_from_chart(params, u_s)
    r = make_point_from_chart(params, u_s - theta)
    table = build_weights(r, s)
    lat = DiamondLattice.anchored(rows, cols, theta)
    ev = CurrentEvaluator(lat, table)
    st = PlaquetteStencil.w(lat, 0, rows // 2)
    tp, tm = bracket_coefficients(theta)
    ap = cmath.exp(0.5j * theta) * phi_plus / N
    am = cmath.exp(-0.5j * theta) * phi_minus / N
    v = Variant.EBAR0
    O = lambda shift: np.array([ev.dressed(v, site, dual, shift) for site, dual, _ in st.edges])
    dz = np.array([e[2] for e in st.edges])
    lhs = complex(np.sum(dz * O(0)))
    rhs = (-ap * np.sum(tp * O(0)) + am * np.sum(tm * O(2))
           + second_order * 1j * (ap**2 * np.sum(tp * O(1)) - am**2 * np.sum(tm * O(1))))
    return {"D": complex(lhs - rhs), "lhs": lhs, "phi_r": r.phi,
            "phi_r_linear": np.cos(theta) * s.phi + 1j * np.sin(theta) * s.phibar}


def near_fz_expansion_check(N: int, theta: float, phi_plus: float, phi_minus: float,
                            halvings: int = 2, rows: int = 3, cols: int = 3,
                            second_order: float = 0.5) -> dict:
    """Halving study of the near-FZ remainder.

    A third-order remainder gives ratios ``|D(phi)| / |D(phi/2)|`` near 8.
    """
    D = [abs(near_fz_remainder(N, theta, phi_plus / 2**h, phi_minus / 2**h, rows, cols,
                               second_order)["D"]) for h in range(halvings + 1)]
    ratios = [D[h] / D[h + 1] for h in range(halvings)]
    tp, tm = bracket_coefficients(theta)
    warn = max(abs(phi_plus), abs(phi_minus)) > 0.1
    return {
        "remainders": D,
        "ratios": ratios,
        "bracket_sums": [complex(tp.sum()), complex(tm.sum())],
        "expected_sum": 4 * math.sin(theta),
        "warning": "phases above 0.1 may be outside the asymptotic regime" if warn else None,
    }


# ---------------------------------------------------------------------------
# Ising (N = 2)

def _wrap(a: float) -> float:
    return (a + math.pi) % (2 * math.pi) - math.pi


def ising_bare_coefficients(ctx, beta_r, beta_s) -> tuple[np.ndarray, np.ndarray]:
    """Theta-function coefficients of the two bare relations on ``J(r_1..r_4)``."""
    from chiralpotts.elliptic import theta_H_H1_Theta_Theta1

    H, H1, T, T1 = theta_H_H1_Theta_Theta1(beta_r, ctx)
    Hs, H1s, Ts, T1s = theta_H_H1_Theta_Theta1(beta_s, ctx)
    c1 = np.array([T1 * Hs, T1s * H, T * H1s, -Ts * H1])
    c2 = np.array([T * H1s, Ts * H1, -T1 * Hs, T1s * H])
    return c1, c2


def _dirac_split(vec: np.ndarray, a: np.ndarray, b: np.ndarray) -> tuple[complex, complex, float]:
    M = np.stack([a, b], axis=1)
    sol, *_ = np.linalg.lstsq(M, vec, rcond=None)
    res = float(np.linalg.norm(M @ sol - vec) / np.linalg.norm(vec))
    return complex(sol[0]), complex(sol[1]), res


def _combination_in_span(rel1, rel2, a, b) -> tuple[complex, float]:
    """Find ``x rel1 + y rel2 = lam a + mu b``; returns ``mu / lam`` and the smallest singular value."""
    M = np.stack([rel1 / np.linalg.norm(rel1), rel2 / np.linalg.norm(rel2),
                  -a / np.linalg.norm(a), -b / np.linalg.norm(b)], axis=1)
    _, sv, vh = np.linalg.svd(M)
    null = vh[-1].conj()
    lam = null[2] / np.linalg.norm(a)
    mu = null[3] / np.linalg.norm(b)
    return complex(mu / lam), float(sv[-1] / sv[0])


def ising_dirac_check(ctx, beta_r, beta_s, rows: int = 3, cols: int = 3) -> dict:
    """Massive Dirac structure of the ``N = 2`` currents.

    (i) the bare relations hold on the lattice values of ``J``;
    (ii) ``(rel1) - i (rel2)`` splits as ``sum dz psi = mu/lam sum tau psibar``
    with ``sum dz psi = -i p_eff sum tau psibar`` and ``p_eff -> p``;
    (iii) the e-current relations produce ``sum dzbar psibar = +i p' sum taubar psi``.
    """
    from chiralpotts.elliptic import ising_point

    theta_k = complex(math.pi * (beta_s - beta_r) / ctx.K)
    if abs(theta_k.imag) > 1e-12:
        raise DomainError("beta_s - beta_r must be real for a planar embedding")
    theta_k = theta_k.real
    r = ising_point(ctx, beta_r)
    s = ising_point(ctx, beta_s)
    table = build_weights(r, s)
    p = ctx.p

    # (i) bare relations on the lattice
    lat = DiamondLattice.anchored(rows, cols, theta_k)
    ev = CurrentEvaluator(lat, table)
    st = PlaquetteStencil.w(lat, 0, rows // 2)
    J = np.array([ev.current(Variant.EBAR0, site, dual, bare=True) for site, dual, _ in st.edges])
    c1, c2 = ising_bare_coefficients(ctx, beta_r, beta_s)
    bare = [float(abs(c @ J) / np.abs(c * J).max()) for c in (c1, c2)]

    # (ii) expansion in the Dirac basis, geometry at theta_k
    dz = np.array([e[2] for e in st.edges])
    alpha = np.array([lat.edge_angle(site, dual) for site, dual, _ in st.edges])
    tp, tm = bracket_coefficients(theta_k)
    lam, mu, split_res = _dirac_split(c1 - 1j * c2, dz * np.exp(-0.5j * alpha), tm * np.exp(0.5j * alpha))
    # lam sum dz psi + mu sum tau psibar = 0, i.e. sum dz psi = -i p_eff sum tau psibar
    p_eff = (mu / lam) / 1j
    rhs_sum = -1j * p * tm.sum()

    # (iii) conjugate relation from the e-currents; their plaquette relation
    # uses the chart angle u_s - u_r
    theta_u = _wrap(float((s.u - r.u).real))
    lat_u = DiamondLattice.anchored(rows, cols, theta_u)
    ev_u = CurrentEvaluator(lat_u, table)
    st_u = PlaquetteStencil.w(lat_u, 0, rows // 2)
    rels = []
    for v in (Variant.E0, Variant.E1):
        c = st_u.coefficients(v, r, s)
        row = []
        for k, (site, dual, dzk) in enumerate(st_u.edges):
            phase = DressedCurrent(v, 2).phase(lat_u.edge_angle(site, dual))
            F = ev_u.current(v, site, dual) / ev_u.current(v, site, dual, bare=True)
            row.append(c[k] * dzk.conjugate() * phase * F)
        rels.append(np.array(row))
    e_on_J = [float(abs(rel @ J) / np.abs(rel * J).max()) for rel in rels]
    ratio_bar, sing = _combination_in_span(rels[0], rels[1], dz.conjugate() * np.exp(0.5j * alpha),
                                           tm.conjugate() * np.exp(-0.5j * alpha))
    # sum dzbar psibar = +i p' sum taubar psi
    p_bar = ratio_bar * 1j
    return {
        "p": p,
        "theta": theta_k,
        "bare_residuals": bare,
        "split_residual": split_res,
        "p_eff": p_eff,
        "mass": 4 * p_eff,
        "mass_ratio": p_eff / p if p else 1.0,
        "rhs_coefficient_sum": rhs_sum,
        "rhs_expected": -4j * p * math.sin(theta_k),
        "e_relations_on_J": e_on_J,
        "conjugate_singular_value": sing,
        "conjugate_p": p_bar,
        "conjugate_mass_ratio": p_bar / p if p else 1.0,
    }
