"""Points on the chiral Potts spectral curve.

A rapidity is a triple ``(x, y, mu)`` obeying

    x^N + y^N = k (1 + x^N y^N),      mu^N (1 - k x^N) = k',

with ``k^2 + k'^2 = 1``.  Points can also be built from the angular chart
``(u, phi, phibar)`` where ``x = exp(i(u+phi)/N)``, ``y = exp(i(u-phi+pi)/N)``,
``mu = exp(i(phibar-phi)/N)``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from chiralpotts.errors import CurveViolation, DomainError

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class ModelParams:
    """Global model data: number of clock states and the modulus ``k'``."""

    N: int
    kprime: float
    tol: float = DEFAULT_TOL
    k: complex = field(init=False)
    omega: complex = field(init=False)
    q: complex = field(init=False)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise DomainError("N must be an integer >= 2, got %r" % (self.N,))
        if self.kprime < 0:
            raise DomainError("kprime must be non-negative")
        object.__setattr__(self, "N", int(self.N))
        # purely imaginary k for kprime > 1 (dual regime)
        k = cmath.sqrt(1.0 - self.kprime**2)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "omega", cmath.exp(2j * cmath.pi / self.N))
        object.__setattr__(self, "q", -cmath.exp(1j * cmath.pi / self.N))

    @property
    def k_real(self) -> float:
        if abs(self.k.imag) > 0:
            raise DomainError("k is not real for kprime > 1")
        return self.k.real

    def check(self) -> None:
        assert abs(self.k**2 + self.kprime**2 - 1) <= self.tol
        assert abs(self.omega**self.N - 1) <= self.tol
        assert abs(self.q**2 - self.omega) <= self.tol


@dataclass(frozen=True)
class CurvePoint:
    x: complex
    y: complex
    mu: complex
    params: ModelParams
    u: Optional[complex] = None
    phi: Optional[complex] = None
    phibar: Optional[complex] = None

    @property
    def has_chart(self) -> bool:
        return self.u is not None

    def residuals(self) -> tuple[float, float]:
        return curve_residuals(self.params, self.x, self.y, self.mu)

    def f(self) -> complex:
        """Disorder factor ``y / (-q x mu)`` attached to this rapidity."""
        return self.y / (-self.params.q * self.x * self.mu)


def curve_residuals(params: ModelParams, x, y, mu) -> tuple[float, float]:
    """Scale-normalised residuals of the two curve equations."""
    N, k, kp = params.N, params.k, params.kprime
    xN, yN, muN = x**N, y**N, mu**N
    r1 = abs(xN + yN - k * (1 + xN * yN)) / (1 + abs(xN * yN))
    r2 = abs(muN * (1 - k * xN) - kp) / (1 + abs(muN * k * xN))
    return r1, r2


def make_point_xyz(params: ModelParams, x, y, mu) -> CurvePoint:
    """Validate ``(x, y, mu)`` against both curve equations."""
    vals = [complex(v) for v in (x, y, mu)]
    if not all(cmath.isfinite(v) for v in vals):
        raise DomainError("non-finite coordinates")
    res = curve_residuals(params, *vals)
    if max(res) > params.tol:
        raise CurveViolation(res, params.tol)
    return CurvePoint(vals[0], vals[1], vals[2], params)


def _arcsin_branches(v: complex) -> tuple[complex, complex]:
    a = cmath.asin(v)
    return a, cmath.pi - a


def make_point_from_chart(params: ModelParams, u, branch: int = 1) -> CurvePoint:
    """Build a point from the chart parameter ``u``.

    ``branch=+1`` takes the principal arcsin for ``phi``; ``branch=-1`` takes
    ``pi - arcsin``.  The branch of ``phibar`` is then fixed by requiring
    ``k' cos(phibar) = cos(phi)``.
    """
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    kp = params.kprime
    if kp == 0:
        raise DomainError("kprime = 0 makes the phibar relation singular")
    N, k = params.N, params.k
    u = complex(u)
    p0, p1 = _arcsin_branches(-k * cmath.sin(u))
    phi = p0 if branch == 1 else p1
    candidates = _arcsin_branches(-1j * k / kp * cmath.cos(u))
    mismatch = [abs(kp * cmath.cos(c) - cmath.cos(phi)) for c in candidates]
    best = int(np.argmin(mismatch))
    scale = 1 + abs(cmath.cos(phi))
    if mismatch[best] > params.tol * scale:
        raise DomainError(
            "no phibar branch satisfies k' cos(phibar) = cos(phi) (mismatch %.2e)"
            % mismatch[best]
        )
    phibar = candidates[best]
    x = cmath.exp(1j * (u + phi) / N)
    y = cmath.exp(1j * (u - phi + cmath.pi) / N)
    mu = cmath.exp(1j * (phibar - phi) / N)
    res = curve_residuals(params, x, y, mu)
    if max(res) > params.tol:
        raise CurveViolation(res, params.tol)
    return CurvePoint(x, y, mu, params, u=u, phi=phi, phibar=phibar)


def chart_residuals(p: CurvePoint) -> tuple[float, ...]:
    """Residuals of the chart relations for a point carrying chart data."""
    if not p.has_chart:
        raise DomainError("point has no (u, phi, phibar) chart")
    N, k, kp = p.params.N, p.params.k, p.params.kprime
    u, phi, phibar = p.u, p.phi, p.phibar
    return (
        abs(p.x - cmath.exp(1j * (u + phi) / N)),
        abs(p.y - cmath.exp(1j * (u - phi + cmath.pi) / N)),
        abs(p.mu - cmath.exp(1j * (phibar - phi) / N)),
        abs(cmath.sin(phi) + k * cmath.sin(u)),
        abs(kp * cmath.cos(phibar) - cmath.cos(phi)),
    )


def crossing_conjugate(r: CurvePoint) -> CurvePoint:
    """The crossed rapidity ``(omega^-1 y, x, 1/mu)``."""
    if r.mu == 0:
        raise ZeroDivisionError("mu = 0 has no crossing conjugate")
    params = r.params
    return make_point_xyz(params, r.y / params.omega, r.x, 1 / r.mu)


def random_chart_point(params: ModelParams, rng: np.random.Generator,
                       re_range=(-1.2, 1.2), im_range=(-0.4, 0.4),
                       branch: int = 1) -> CurvePoint:
    """Sample ``u`` uniformly in a box of the complex plane and project."""
    u = complex(rng.uniform(*re_range), rng.uniform(*im_range))
    return make_point_from_chart(params, u, branch)


def fz_point(params: ModelParams, u: float) -> CurvePoint:
    """Critical point ``phi = phibar = 0`` (requires ``k' = 1``)."""
    if abs(params.kprime - 1) > params.tol:
        raise DomainError("FZ points need kprime = 1")
    return make_point_from_chart(params, u)
