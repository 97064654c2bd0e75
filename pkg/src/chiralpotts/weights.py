"""Chiral Potts Boltzmann weights and their local identities."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from chiralpotts.curve import CurvePoint, crossing_conjugate
from chiralpotts.errors import DomainError, SingularWeight


@dataclass(frozen=True)
class WeightTable:
    """``W_rs(a)`` and ``Wbar_rs(a)`` for ``a = 0 .. N-1``, normalised to 1 at 0."""

    r: CurvePoint
    s: CurvePoint
    W: np.ndarray
    Wbar: np.ndarray
    closure: tuple[float, float] = (0.0, 0.0)

    @property
    def N(self) -> int:
        return self.r.params.N

    def w(self, n: int) -> complex:
        return self.W[n % self.N]

    def wbar(self, n: int) -> complex:
        return self.Wbar[n % self.N]

    def scaled(self, c: complex) -> "WeightTable":
        return WeightTable(self.r, self.s, c * self.W, c * self.Wbar, self.closure)


def _ratios(r: CurvePoint, s: CurvePoint, count: int):
    N = r.params.N
    om = r.params.omega
    ell = np.arange(1, count + 1)
    omega_l = om ** ell
    den_w = r.y - s.x * omega_l
    den_wb = s.y - r.y * omega_l
    for name, den in (("W", den_w), ("Wbar", den_wb)):
        scale = abs(r.y) + abs(s.x) + abs(s.y)
        bad = np.flatnonzero(np.abs(den) <= 1e-14 * scale)
        if bad.size:
            raise SingularWeight(name, int(ell[bad[0]]))
    rw = (r.mu / s.mu) * (s.y - r.x * omega_l) / den_w
    rwb = (r.mu * s.mu) * (r.x * om - s.x * omega_l) / den_wb
    del N
    return rw, rwb


def _coincident(r: CurvePoint, s: CurvePoint) -> bool:
    d = max(abs(r.x - s.x), abs(r.y - s.y), abs(r.mu - s.mu))
    return d <= 1e-14 * (abs(r.x) + abs(r.y) + abs(r.mu))


def build_weights(r: CurvePoint, s: CurvePoint) -> WeightTable:
    """Weight table from the ratio recursion.

    The recursion is run for a full period as well; its product is reported
    in ``closure`` (it should be 1 for points on the curve).  Coincident
    points give the exact limit ``W = 1``, ``Wbar = delta``.
    """
    if r.params != s.params:
        raise DomainError("points live on different curves")
    N = r.params.N
    if _coincident(r, s):
        W = np.ones(N, complex)
        Wbar = np.zeros(N, complex)
        Wbar[0] = 1.0
        return WeightTable(r, s, W, Wbar, (0.0, 0.0))
    rw, rwb = _ratios(r, s, N)
    W = np.concatenate(([1.0 + 0j], np.cumprod(rw[:-1])))
    Wbar = np.concatenate(([1.0 + 0j], np.cumprod(rwb[:-1])))
    closure = (abs(np.prod(rw) - 1), abs(np.prod(rwb) - 1))
    return WeightTable(r, s, W, Wbar, closure)


def weights_direct(r: CurvePoint, s: CurvePoint, a: int) -> tuple[complex, complex]:
    """Evaluate both product formulas at a single ``a >= 0`` term by term."""
    om = r.params.omega
    w = (r.mu / s.mu) ** a
    wb = (r.mu * s.mu) ** a
    for ell in range(1, a + 1):
        w *= (s.y - r.x * om**ell) / (r.y - s.x * om**ell)
        wb *= (r.x * om - s.x * om**ell) / (s.y - r.y * om**ell)
    return w, wb


def check_crossing(r: CurvePoint, s: CurvePoint) -> float:
    """Largest violation of ``W_rs(a) = Wbar_{s*r}(a)`` and ``Wbar_rs(a) = W_{s*r}(-a)``."""
    t = build_weights(r, s)
    c = build_weights(crossing_conjugate(s), r)
    idx = np.arange(t.N)
    d1 = np.abs(t.W - c.Wbar)
    d2 = np.abs(t.Wbar - c.W[(-idx) % t.N])
    return float(max(d1.max(), d2.max()))


def star_triangle_sides(r, s, t):
    """Both sides of the star-triangle relation as ``(N, N, N)`` arrays over (a, b, c)."""
    N = r.params.N
    rs, rt, st = build_weights(r, s), build_weights(r, t), build_weights(s, t)
    a = np.arange(N)[:, None, None]
    b = np.arange(N)[None, :, None]
    c = np.arange(N)[None, None, :]
    lhs = np.zeros((N, N, N), dtype=complex)
    for d in range(N):
        lhs += rs.Wbar[(a - d) % N] * rt.W[(d - b) % N] * st.Wbar[(d - c) % N]
    rhs = rs.W[(c - b) % N] * rt.Wbar[(a - c) % N] * st.W[(a - b) % N]
    return lhs, rhs


def check_star_triangle(r, s, t) -> tuple[complex, float]:
    """Return ``(rho, max_rel_dev)`` for the star-triangle relation.

    ``rho`` is read off at the first triple (in lexicographic order starting
    from (0,0,0)) whose right-hand side is not negligible.
    """
    lhs, rhs = star_triangle_sides(r, s, t)
    flat_r = rhs.ravel()
    scale = np.abs(flat_r).max()
    anchor = next(i for i in range(flat_r.size) if abs(flat_r[i]) > 1e-8 * scale)
    rho = lhs.ravel()[anchor] / flat_r[anchor]
    dev = np.abs(lhs - rho * rhs) / np.maximum(np.abs(rho * rhs), 1e-300)
    return complex(rho), float(dev.max())


class Variant(str, Enum):
    """Quantum-group generator labelling a current."""

    EBAR0 = "ebar0"
    E0 = "e0"
    EBAR1 = "ebar1"
    E1 = "e1"

    @property
    def holomorphic(self) -> bool:
        return self in (Variant.EBAR0, Variant.EBAR1)

    @property
    def reversed_arrow(self) -> bool:
        return self in (Variant.EBAR1, Variant.E1)

    @property
    def order_power(self) -> int:
        """Power of the clock matrix inserted at the spin site."""
        return 1 if self in (Variant.EBAR0, Variant.E1) else -1


class Orientation(str, Enum):
    W_UP = "W-up"
    W_DOWN = "W-down"
    WBAR_RIGHT = "Wbar-right"
    WBAR_LEFT = "Wbar-left"

    @property
    def horizontal_edge(self) -> bool:
        return self in (Orientation.W_UP, Orientation.W_DOWN)

    def flipped(self) -> "Orientation":
        return {
            Orientation.W_UP: Orientation.W_DOWN,
            Orientation.W_DOWN: Orientation.W_UP,
            Orientation.WBAR_RIGHT: Orientation.WBAR_LEFT,
            Orientation.WBAR_LEFT: Orientation.WBAR_RIGHT,
        }[self]


def disorder_factor(p: CurvePoint, variant: Variant) -> complex:
    """Per-rapidity factor: ``f = y/(-q x mu)`` for the bar variants, ``1/mu`` otherwise."""
    variant = Variant(variant)
    if variant.holomorphic:
        return p.f()
    return 1 / p.mu


@dataclass(frozen=True)
class DisorderFactor:
    fr: complex
    fs: complex
    variant: Variant = Variant.EBAR0

    @classmethod
    def for_table(cls, table: WeightTable, variant) -> "DisorderFactor":
        variant = Variant(variant)
        return cls(disorder_factor(table.r, variant), disorder_factor(table.s, variant), variant)

    def crossing(self, orientation) -> tuple[complex, int, bool]:
        """``(multiplier, shift, on_wbar)`` for a tail crossing an edge.

        ``orientation`` is the geometric direction of travel along the tail
        (from the boundary towards its endpoint).  Variants whose arrow points
        out of the dual site act with the opposite orientation.
        """
        o = Orientation(orientation)
        if self.variant.reversed_arrow:
            o = o.flipped()
        fr, fs = self.fr, self.fs
        return {
            Orientation.W_UP: (fr / fs, 1, False),
            Orientation.W_DOWN: (fs / fr, -1, False),
            Orientation.WBAR_RIGHT: (fr * fs, 1, True),
            Orientation.WBAR_LEFT: (1 / (fr * fs), -1, True),
        }[o]

    def modify(self, table: WeightTable, orientation) -> np.ndarray:
        """The whole modified weight vector, indexed by the spin difference."""
        mult, shift, on_wbar = self.crossing(orientation)
        base = table.Wbar if on_wbar else table.W
        if Orientation(orientation).horizontal_edge == on_wbar:
            raise DomainError("orientation does not match the edge type")
        return mult * np.roll(base, -shift)


def disorder_modified_weight(table: WeightTable, orientation, a: int, b: int,
                             factor: DisorderFactor) -> complex:
    """Weight of a single edge with spins ``(a, b)`` crossed by a tail."""
    try:
        orientation = Orientation(orientation)
    except ValueError:
        raise DomainError("unknown orientation %r" % (orientation,)) from None
    return complex(factor.modify(table, orientation)[(a - b) % table.N])


def ising_couplings(r: CurvePoint, s: CurvePoint, ctx, beta_r, beta_s) -> tuple:
    """Ising couplings ``(K1, K2)`` for an ``N = 2`` rapidity pair on the elliptic chart."""
    from chiralpotts import elliptic

    if r.params.N != 2:
        raise DomainError("Ising couplings need N = 2")
    for p, b in ((r, beta_r), (s, beta_s)):
        ex = elliptic.ising_point_coords(b, ctx)
        if max(abs(ex[0] - p.x), abs(ex[1] - p.y), abs(ex[2] - p.mu)) > 1e-8:
            raise DomainError("point is not on the elliptic chart at the given beta")
    d = beta_s - beta_r
    scd_h = elliptic.scd(ctx.K - d, ctx)
    scd_v = elliptic.scd(d, ctx)
    if abs(scd_v) < 1e-14 or abs(scd_h) < 1e-14:
        raise SingularWeight("Ising coupling", 0)
    K1 = -0.5 * np.log(ctx.kprime * scd_h)
    K2 = -0.5 * np.log(ctx.kprime * scd_v)
    out = (complex(K1), complex(K2))
    if all(abs(c.imag) < 1e-12 for c in out):
        return out[0].real, out[1].real
    return out
