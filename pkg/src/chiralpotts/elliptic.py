"""Jacobi elliptic and theta functions for the N = 2 (Ising) chart.

Theta functions use the classical Jacobi H and Theta normalisation::

    H(u)      = 2 sum_{n>=1} (-1)^(n-1) p^((n-1/2)^2) sin((2n-1) pi u / 2K)
    Theta(u)  = 1 + 2 sum_{n>=1} (-1)^n p^(n^2) cos(n pi u / K)
    H1(u)     = H(u + K),   Theta1(u) = Theta(u + K)

with nome ``p = exp(-pi K'/K)``, so that ``sn = H / (sqrt(k) Theta)``,
``cn = sqrt(k'/k) H1 / Theta`` and ``dn = sqrt(k') Theta1 / Theta``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from chiralpotts.errors import DomainError

SERIES_EPS = 1e-16
MAX_TERMS = 64


def agm(a: float, b: float) -> float:
    for _ in range(64):
        if abs(a - b) <= 4e-16 * abs(a):
            break
        a, b = (a + b) / 2, math.sqrt(a * b)
    return (a + b) / 2


def complete_K(k: float) -> float:
    """Complete elliptic integral of the first kind, ``K(k) = pi / (2 agm(1, k'))``."""
    if not 0 <= k < 1:
        raise DomainError("modulus must satisfy 0 <= k < 1, got %r" % (k,))
    return math.pi / (2 * agm(1.0, math.sqrt(1 - k * k)))


@dataclass(frozen=True)
class EllipticContext:
    k: float
    kprime: float
    K: float
    Kp: float
    p: float

    @classmethod
    def from_modulus(cls, k: float) -> "EllipticContext":
        if not 0 <= k < 1:
            raise DomainError("modulus must satisfy 0 <= k < 1")
        kp = math.sqrt(1 - k * k)
        K = complete_K(k)
        if k == 0:
            return cls(0.0, 1.0, K, math.inf, 0.0)
        Kp = complete_K(kp)
        return cls(k, kp, K, Kp, math.exp(-math.pi * Kp / K))

    @classmethod
    def from_nome(cls, p: float) -> "EllipticContext":
        """Context whose nome is ``p``; ``k = (theta_2 / theta_3)^2``."""
        if not 0 <= p < 1:
            raise DomainError("nome must satisfy 0 <= p < 1")
        if p == 0:
            return cls.from_modulus(0.0)
        th2 = 2 * sum(p ** ((n + 0.5) ** 2) for n in range(MAX_TERMS))
        th3 = 1 + 2 * sum(p ** (n * n) for n in range(1, MAX_TERMS))
        th4 = 1 + 2 * sum((-1) ** n * p ** (n * n) for n in range(1, MAX_TERMS))
        k = (th2 / th3) ** 2
        kp = (th4 / th3) ** 2
        K = math.pi / 2 * th3**2
        return cls(k, kp, K, -K * math.log(p) / math.pi, p)


def _series(term, start: int = 1) -> complex:
    total = 0j
    for n in range(start, start + MAX_TERMS):
        t = term(n)
        total += t
        if abs(t) < SERIES_EPS * max(abs(total), 1.0) and n > start + 1:
            return total
    return total


def _check(ctx: EllipticContext):
    if not 0 <= ctx.p < 1:
        raise DomainError("nome outside [0, 1): series does not converge")


def theta_H(u, ctx: EllipticContext) -> complex:
    _check(ctx)
    v = cmath.pi * u / (2 * ctx.K)
    p = ctx.p
    return 2 * _series(lambda n: (-1) ** (n - 1) * p ** ((n - 0.5) ** 2) * cmath.sin((2 * n - 1) * v))


def theta_Theta(u, ctx: EllipticContext) -> complex:
    _check(ctx)
    v = cmath.pi * u / ctx.K
    p = ctx.p
    return 1 + 2 * _series(lambda n: (-1) ** n * p ** (n * n) * cmath.cos(n * v))


def theta_H_H1_Theta_Theta1(beta, ctx: EllipticContext):
    """``(H, H1, Theta, Theta1)`` at ``beta``."""
    return (
        theta_H(beta, ctx),
        theta_H(beta + ctx.K, ctx),
        theta_Theta(beta, ctx),
        theta_Theta(beta + ctx.K, ctx),
    )


def jacobi_sn_cn_dn(beta, ctx: EllipticContext) -> tuple[complex, complex, complex]:
    _check(ctx)
    if ctx.k == 0:
        return cmath.sin(beta), cmath.cos(beta), 1 + 0j
    H, H1, Th, Th1 = theta_H_H1_Theta_Theta1(beta, ctx)
    sk = math.sqrt(ctx.k)
    return H / (sk * Th), math.sqrt(ctx.kprime) / sk * H1 / Th, math.sqrt(ctx.kprime) * Th1 / Th


def scd(u, ctx: EllipticContext) -> complex:
    """``sn(u/2) / (cn(u/2) dn(u/2))``."""
    sn, cn, dn = jacobi_sn_cn_dn(u / 2, ctx)
    return sn / (cn * dn)


def scaled_beta(beta_prime, ctx: EllipticContext) -> complex:
    """``beta = (K/pi) (i/2 log p + 2 beta')``, the near-critical scaling of the chart."""
    if ctx.p == 0:
        raise DomainError("scaling needs p > 0")
    return ctx.K / math.pi * (0.5j * math.log(ctx.p) + 2 * beta_prime)


def theta_expansions(beta_prime, p: float) -> tuple[complex, complex, complex, complex]:
    """Two-term small-``p`` expansions of ``(H, H1, Theta, Theta1)`` at the scaled argument."""
    e = cmath.exp(1j * beta_prime)
    sp = math.sqrt(p)
    return (
        -1j * e + 1j * sp / e,
        e + sp / e,
        1 - e * e * sp,
        1 + e * e * sp,
    )


def ising_point_coords(beta, ctx: EllipticContext) -> tuple[complex, complex, complex]:
    """``(x, y, mu) = (-sqrt(k) sn, -sqrt(k) cn/dn, sqrt(k')/dn)``."""
    sn, cn, dn = jacobi_sn_cn_dn(beta, ctx)
    sk = math.sqrt(ctx.k)
    return -sk * sn, -sk * cn / dn, math.sqrt(ctx.kprime) / dn


def ising_chart_exponentials(beta, ctx: EllipticContext) -> tuple[complex, complex, complex]:
    """``(e^{iu}, e^{i phi}, e^{i phibar})`` of a point on the elliptic chart."""
    sn, cn, dn = jacobi_sn_cn_dn(beta, ctx)
    return -1j * ctx.k * sn * cn / dn, 1j * sn * dn / cn, 1j * ctx.kprime * sn / (cn * dn)


def ising_point(ctx: EllipticContext, beta):
    """``N = 2`` curve point at ``beta`` with chart values ``(u, phi, phibar)``.

    The logarithms are shifted by ``2 pi`` where needed so that
    ``x = e^{i(u+phi)/2}`` and ``mu = e^{i(phibar-phi)/2}`` hold with the
    same signs as the elliptic coordinates.
    """
    from chiralpotts.curve import CurvePoint, ModelParams, make_point_xyz

    params = ModelParams(2, ctx.kprime)
    x, y, mu = ising_point_coords(beta, ctx)
    make_point_xyz(params, x, y, mu)
    eu, ep, epb = ising_chart_exponentials(beta, ctx)
    u = -1j * cmath.log(eu)
    phi = -1j * cmath.log(ep)
    phibar = -1j * cmath.log(epb)
    if abs(cmath.exp(0.5j * (u + phi)) - x) > 1e-8 * abs(x):
        phi += 2 * math.pi
    if abs(cmath.exp(0.5j * (phibar - phi)) - mu) > 1e-8 * abs(mu):
        phibar += 2 * math.pi
    if abs(cmath.exp(0.5j * (u - phi + math.pi)) - y) > 1e-8 * abs(y):
        raise DomainError("chart branches do not reproduce y")
    return CurvePoint(x, y, mu, params, u, phi, phibar)
