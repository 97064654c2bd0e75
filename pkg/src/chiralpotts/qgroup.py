"""Cyclic representations of the extended quantum affine algebra and the
factorised chiral Potts R-matrix.

Generators are named ``e0 e1 f0 f1 t0 t1 z0 z1`` with inverses ``t0i t1i z0i
z1i``; ``eb0 = t0 f0`` and ``eb1 = t1 f1``.  Composite elements are words,
i.e. tuples of letters multiplied left to right.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from chiralpotts.curve import CurvePoint
from chiralpotts.errors import DomainError, FactorizationMismatch, SizeOverflow
from chiralpotts.weights import build_weights

MAX_FACTORS = 4

GENERATORS = ("e0", "e1", "f0", "f1", "t0", "t1", "z0", "z1", "eb0", "eb1")

# named composite elements
WORDS = {
    "eb0": ("t0", "f0"),
    "eb1": ("t1", "f1"),
    "t0z0i": ("t0", "z0i"),
    "t0z0": ("t0", "z0"),
    "t1z1i": ("t1", "z1i"),
    "t1z1": ("t1", "z1"),
}

_INVERSE = {"t0": "t0i", "t1": "t1i", "z0": "z0i", "z1": "z1i",
            "t0i": "t0", "t1i": "t1", "z0i": "z0", "z1i": "z1"}

CENTRAL = {"z0", "z1", "z0i", "z1i"}


def clock_matrices(N: int) -> tuple[np.ndarray, np.ndarray]:
    """``X = diag(omega^a)`` and the cyclic shift ``Z`` with ``Z[a, a+1] = 1``."""
    omega = np.exp(2j * np.pi / N)
    X = np.diag(omega ** np.arange(N))
    Z = np.roll(np.eye(N, dtype=complex), 1, axis=1)
    return X, Z


def as_word(gen) -> tuple[str, ...]:
    if isinstance(gen, tuple):
        return reduce(lambda acc, g: acc + as_word(g), gen, ())
    if gen in WORDS:
        return WORDS[gen]
    if gen in _INVERSE or gen in ("e0", "e1", "f0", "f1"):
        return (gen,)
    raise DomainError("unknown generator %r" % (gen,))


@dataclass(frozen=True)
class CyclicRep:
    """The N-dimensional representation ``V_{r r'}``."""

    r: CurvePoint
    rp: CurvePoint
    c0: complex
    mats: dict = field(repr=False)

    @property
    def N(self) -> int:
        return self.r.params.N

    def matrix(self, gen) -> np.ndarray:
        word = as_word(gen)
        out = np.eye(self.N, dtype=complex)
        for letter in word:
            out = out @ self.mats[letter]
        return out

    def c0_residual(self) -> float:
        q = self.r.params.q
        x, xp, y, yp = self.r.x, self.rp.x, self.r.y, self.rp.y
        return abs(self.c0**2 - q**2 * x * xp / (y * yp))


def build_rep(r: CurvePoint, rp: CurvePoint, root: int = 1) -> CyclicRep:
    """Matrices of all generators on ``V_{r r'}``; ``root`` picks the sign of ``c0``."""
    if root not in (1, -1):
        raise ValueError("root must be +1 or -1")
    if 0 in (r.x, r.y, rp.x, rp.y):
        raise DomainError("c0 is undefined when x or y vanishes")
    N = r.params.N
    q = r.params.q
    X, Z = clock_matrices(N)
    Xi, Zi = X.conj().T, Z.T
    x, y, mu = r.x, r.y, r.mu
    xp, yp, mup = rp.x, rp.y, rp.mu
    c0 = root * cmath.sqrt(q**2 * x * xp / (y * yp))
    mm = mu * mup
    I = np.eye(N, dtype=complex)
    pref = q / (q**2 - 1) ** 2
    mats = {
        "e1": pref * (x * mm * Z - yp * I) @ X,
        "f1": c0 / (x * xp * mm) * Xi @ (y * Zi - xp * mm * I),
        "t1": c0 * mm * Z,
        "t1i": Zi / (c0 * mm),
        "z1": I / c0,
        "z1i": c0 * I,
        "e0": pref * Xi @ (y / mm * Zi - xp * I),
        "f0": (c0 * mm / xp * Z - q**2 / (c0 * y) * I) @ X,
        "t0": Zi / (c0 * mm),
        "t0i": c0 * mm * Z,
        "z0": c0 * I,
        "z0i": I / c0,
    }
    return CyclicRep(r, rp, c0, mats)


def _letter_coproduct(letter: str):
    i = letter[1]
    if letter in ("e0", "e1"):
        return [((letter,), ()), (("z" + i, "t" + i), (letter,))]
    if letter in ("f0", "f1"):
        return [((letter,), ("t" + i + "i",)), (("z" + i + "i",), (letter,))]
    return [((letter,), (letter,))]


def coproduct_terms(word: tuple[str, ...]) -> list[tuple[tuple, tuple]]:
    """``Delta(word)`` as a list of ``(left_word, right_word)`` pairs."""
    terms = [((), ())]
    for letter in word:
        terms = [(a + la, b + lb) for a, b in terms for la, lb in _letter_coproduct(letter)]
    return terms


def coproduct_action(gen, reps: list[CyclicRep]) -> np.ndarray:
    """Dense matrix of ``Delta^(L)(gen)`` on ``reps[0] (x) ... (x) reps[L-1]``.

    Built with ``Delta^(m+1) = (Delta (x) 1 ... 1) Delta^(m)``, i.e.
    ``Delta^(L)(w) = sum over Delta(w) = a (x) b of Delta^(L-1)(a) (x) b``.
    """
    L = len(reps)
    if L == 0 or L > MAX_FACTORS:
        raise SizeOverflow("dense coproduct supports 1..%d tensor factors" % MAX_FACTORS)
    word = as_word(gen)
    if L == 1:
        return reps[0].matrix(word)
    out = 0
    for a, b in coproduct_terms(word):
        out = out + np.kron(coproduct_action(a, reps[:-1]), reps[-1].matrix(b))
    return out


def build_S(r: CurvePoint, s: CurvePoint) -> np.ndarray:
    """``S_rs (v_e1 (x) v_e2) = W_rs(e1 - e2) v_e1 (x) v_e2``.

    Only the representation labels are exchanged; in the fixed clock basis
    the operator is diagonal.  This is the reading under which the
    factorised product reproduces the closed-form R-matrix components.
    """
    t = build_weights(r, s)
    N = t.N
    e1, e2 = np.divmod(np.arange(N * N), N)
    return np.diag(t.W[(e1 - e2) % N])


def build_T(r: CurvePoint, s: CurvePoint) -> np.ndarray:
    """``T_rs v_e = sum_a Wbar_rs(a) v_{e-a}``."""
    t = build_weights(r, s)
    N = t.N
    T = np.zeros((N, N), dtype=complex)
    for e in range(N):
        for a in range(N):
            T[(e - a) % N, e] += t.wbar(a)
    return T


def build_S_T(r: CurvePoint, s: CurvePoint) -> tuple[np.ndarray, np.ndarray]:
    return build_S(r, s), build_T(r, s)


def _rel(lhs: np.ndarray, rhs: np.ndarray) -> float:
    scale = max(np.abs(lhs).max(), np.abs(rhs).max(), 1e-300)
    return float(np.abs(lhs - rhs).max() / scale)


def _pair_reps(a, b, c, d, root_ab=1, target=None):
    """Reps ``V_ab`` and ``V_cd`` with the sign of the second ``c0`` chosen so
    that the central element ``z0`` acts on the pair by ``target``."""
    rep1 = build_rep(a, b, root_ab)
    rep2 = build_rep(c, d, 1)
    if target is not None and abs(rep1.c0 * rep2.c0 - target) > abs(rep1.c0 * rep2.c0 + target):
        rep2 = build_rep(c, d, -1)
    return rep1, rep2


@dataclass(frozen=True)
class RMatrixCP:
    """Intertwiner ``V_{rr'} (x) V_{ss'} -> V_{ss'} (x) V_{rr'}``.

    ``components[a, b, c, d]`` is the coefficient of ``v_d (x) v_c`` in the
    image of ``v_a (x) v_b``.
    """

    r: CurvePoint
    rp: CurvePoint
    s: CurvePoint
    sp: CurvePoint
    matrix: np.ndarray = field(repr=False)
    components: np.ndarray = field(repr=False)
    deviation: float = 0.0
    root: int = 1


def rfact_components(r, rp, s, sp) -> np.ndarray:
    """Closed form ``W_{r's}(d-c) Wbar_{r's'}(a-d) Wbar_{rs}(b-c) W_{rs'}(a-b)``."""
    N = r.params.N
    w_rps, w_rpsp = build_weights(rp, s), build_weights(rp, sp)
    w_rs, w_rsp = build_weights(r, s), build_weights(r, sp)
    a, b, c, d = np.ogrid[0:N, 0:N, 0:N, 0:N]
    return (w_rps.W[(d - c) % N] * w_rpsp.Wbar[(a - d) % N]
            * w_rs.Wbar[(b - c) % N] * w_rsp.W[(a - b) % N])


def components_to_matrix(comp: np.ndarray) -> np.ndarray:
    N = comp.shape[0]
    M = np.zeros((N * N, N * N), dtype=complex)
    for a in range(N):
        for b in range(N):
            M[:, a * N + b] = comp[a, b].T.reshape(-1)  # row index d*N + c
    return M


def build_R(r, rp, s, sp, tol: float = 1e-10, root: int = 1) -> RMatrixCP:
    """Factorised ``S_{r's} (T_{r's'} (x) T_{rs}) S_{rs'}``, checked against the closed form."""
    N = r.params.N
    I = np.eye(N)
    fact = build_S(rp, s) @ np.kron(build_T(rp, sp), build_T(r, s)) @ build_S(r, sp)
    comp = rfact_components(r, rp, s, sp)
    closed = components_to_matrix(comp)
    scale = np.maximum(np.abs(closed), np.abs(closed).max() * 1e-12)
    dev_all = np.abs(fact - closed) / scale
    dev = float(dev_all.max())
    if dev > tol:
        k = np.unravel_index(int(np.argmax(dev_all)), dev_all.shape)
        d, c = divmod(k[0], N)
        a, b = divmod(k[1], N)
        raise FactorizationMismatch(dev, (a, b, c, d))
    del I
    return RMatrixCP(r, rp, s, sp, fact, comp, dev, root)


def check_intertwiner(R: RMatrixCP, gen) -> float:
    """Normalised residual of ``R Delta_{rr',ss'}(x) - Delta_{ss',rr'}(x) R``."""
    src = _pair_reps(R.r, R.rp, R.s, R.sp, R.root)
    dst = _pair_reps(R.s, R.sp, R.r, R.rp, 1, target=src[0].c0 * src[1].c0)
    d_in = coproduct_action(gen, list(src))
    d_out = coproduct_action(gen, list(dst))
    lhs = R.matrix @ d_in
    rhs = d_out @ R.matrix
    norm = np.linalg.norm(R.matrix, 2) * max(np.linalg.norm(d_in, 2), np.linalg.norm(d_out, 2))
    if norm == 0:
        return 0.0
    return float(np.linalg.norm(lhs - rhs, 2) / norm)


def check_sufficiency(r, rp, s, sp, gen, root: int = 1) -> tuple[float, float, float, float]:
    """Residuals of the four separate S/T intertwining conditions."""
    N = r.params.N
    I = np.eye(N)

    def delta(a, b, c, d, target=None):
        reps = _pair_reps(a, b, c, d, root, target)
        return coproduct_action(gen, list(reps)), reps[0].c0 * reps[1].c0

    # every space in the chain carries the same central value
    d1_in, zval = delta(r, rp, s, sp)
    d1_out, _ = delta(sp, rp, s, r, zval)
    d3_in, _ = delta(rp, sp, s, r, zval)
    d3_out, _ = delta(rp, sp, r, s, zval)
    d4_out, _ = delta(s, sp, r, rp, zval)
    S1, S4 = build_S(r, sp), build_S(rp, s)
    T1, T2 = np.kron(build_T(rp, sp), I), np.kron(I, build_T(r, s))
    return (
        _rel(S1 @ d1_in, d1_out @ S1),
        _rel(T1 @ d1_out, d3_in @ T1),
        _rel(T2 @ d3_in, d3_out @ T2),
        _rel(S4 @ d3_out, d4_out @ S4),
    )


def tail_operator(p: CurvePoint, pp: CurvePoint) -> np.ndarray:
    """``pi_{pp'}(t0 z0^-1) = f_p f_p' Z^-1``."""
    _, Z = clock_matrices(p.params.N)
    return p.f() * pp.f() * Z.T


def ebar0_closed_form(p: CurvePoint, pp: CurvePoint) -> np.ndarray:
    """``pi_{pp'}(t0 f0) = X [x_{p'}^-1 - y_p^-1 pi(t0 z0^-1)]``."""
    X, _ = clock_matrices(p.params.N)
    return X @ (np.eye(p.params.N) / pp.x - tail_operator(p, pp) / p.y)


def e0_closed_form(p: CurvePoint, pp: CurvePoint) -> np.ndarray:
    """``pi_{pp'}(e0) = beta X^-1 [x_{p'} - y_p pi(t0 z0)]`` with ``beta = -q/(q^2-1)^2``."""
    N = p.params.N
    q = p.params.q
    X, Z = clock_matrices(N)
    beta = -q / (q**2 - 1) ** 2
    return beta * X.conj().T @ (pp.x * np.eye(N) - p.y * Z.T / (p.mu * pp.mu))


def four_term_residual(r: CurvePoint, s: CurvePoint) -> tuple[np.ndarray, float]:
    """Matrix form of the four-term relation left after cancelling common terms.

    ``S_rs [-y_r^-1 X Th_rr (x) 1 + x_s^-1 Th_rr (x) X]
       = [-q^2 y_s^-1 Th_sr X (x) 1 + x_r^-1 Th_sr (x) X] S_rs``
    with ``Th_ab = pi_ab(t0 z0^-1)``.  Returns the difference and its relative size.
    """
    N = r.params.N
    q = r.params.q
    X, _ = clock_matrices(N)
    I = np.eye(N)
    S = build_S(r, s)
    th_rr = tail_operator(r, r)
    th_sr = tail_operator(s, r)
    lhs = S @ (-np.kron(X @ th_rr, I) / r.y + np.kron(th_rr, X) / s.x)
    rhs = (-q**2 * np.kron(th_sr @ X, I) / s.y + np.kron(th_sr, X) / r.x) @ S
    return lhs - rhs, _rel(lhs, rhs)
