"""Finite embedded chiral Potts lattices and exact summation.

Spins sit on an ``rows x cols`` grid; spin ``(i, j)`` is column ``i`` and row
``j`` (rows counted upwards).  Horizontal edges carry ``W(a_left - a_right)``,
vertical edges carry ``Wbar(a_top - a_bottom)``.  Dual sites are the faces,
including the exterior ring: dual ``(p, q)`` sits between spin columns ``p``
and ``p+1`` and spin rows ``q`` and ``q+1``, with ``-1 <= p <= cols-1`` and
``-1 <= q <= rows-1``.

Every edge is the diagonal of a unit rhombus whose other diagonal joins the two
adjacent dual sites.  With embedding angle ``theta`` the horizontal spin
spacing is ``2 cos(theta/2)`` and the vertical one ``2 sin(theta/2)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from chiralpotts.errors import DegeneratePartition, DomainError, SizeOverflow
from chiralpotts.weights import DisorderFactor, Orientation, WeightTable

ENUMERATION_CAP = 10

Spin = tuple[int, int]
Dual = tuple[int, int]


@dataclass(frozen=True)
class DiamondLattice:
    rows: int
    cols: int
    theta: float = np.pi / 2
    fixed: tuple = ()

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise DomainError("lattice needs at least one spin")
        object.__setattr__(self, "fixed", tuple((tuple(s), int(v)) for s, v in self.fixed))
        for s, _ in self.fixed:
            if not self.has_spin(s):
                raise DomainError("fixed spin %s is outside the lattice" % (s,))
        if not 0 < self.theta < np.pi:
            raise DomainError("embedding angle must lie in (0, pi)")

    @classmethod
    def anchored(cls, rows: int, cols: int, theta: float = np.pi / 2, value: int = 0):
        """Lattice with the top-right spin fixed, breaking the global Z_N symmetry.

        Tails enter from the left, so the fixed spin is never enclosed between
        two tails that end on the same plaquette.
        """
        return cls(rows, cols, theta, fixed=(((cols - 1, rows - 1), value),))

    @property
    def boundary(self) -> str:
        return "fixed-spin" if self.fixed else "free-sum"

    @property
    def n_sites(self) -> int:
        return self.rows * self.cols

    @property
    def h(self) -> float:
        return 2 * np.cos(self.theta / 2)

    @property
    def v(self) -> float:
        return 2 * np.sin(self.theta / 2)

    def spin_sites(self) -> list[Spin]:
        return [(i, j) for j in range(self.rows) for i in range(self.cols)]

    def dual_sites(self) -> list[Dual]:
        return [(p, q) for q in range(-1, self.rows) for p in range(-1, self.cols)]

    def z_spin(self, site: Spin) -> complex:
        i, j = site
        return i * self.h + 1j * j * self.v

    def z_dual(self, dual: Dual) -> complex:
        p, q = dual
        return (p + 0.5) * self.h + 1j * (q + 0.5) * self.v

    def has_spin(self, site: Spin) -> bool:
        return 0 <= site[0] < self.cols and 0 <= site[1] < self.rows

    def has_dual(self, dual: Dual) -> bool:
        return -1 <= dual[0] < self.cols and -1 <= dual[1] < self.rows

    def horizontal_edges(self):
        """``(i, j)`` labels the W edge from spin ``(i, j)`` to ``(i+1, j)``."""
        return [(i, j) for j in range(self.rows) for i in range(self.cols - 1)]

    def vertical_edges(self):
        """``(i, j)`` labels the Wbar edge from spin ``(i, j+1)`` down to ``(i, j)``."""
        return [(i, j) for j in range(self.rows - 1) for i in range(self.cols)]

    def adjacent_duals(self, site: Spin) -> list[Dual]:
        i, j = site
        return [(i - 1, j), (i, j), (i, j - 1), (i - 1, j - 1)]

    def mid_edge(self, site: Spin, dual: Dual) -> complex:
        if dual not in self.adjacent_duals(site):
            raise DomainError("%s and %s do not share a rhombus edge" % (site, dual))
        return (self.z_spin(site) + self.z_dual(dual)) / 2

    def edge_angle(self, site: Spin, dual: Dual) -> float:
        """Principal argument in (-pi, pi] of ``z_spin - z_dual``."""
        d = self.z_spin(site) - self.z_dual(dual)
        a = float(np.angle(d))
        return np.pi if a <= -np.pi else a

    def crossed_edge(self, d0: Dual, d1: Dual):
        """Edge crossed by the dual step ``d0 -> d1`` plus the travel orientation.

        Returns ``(kind, (i, j), orientation, inside)``; ``inside`` is False
        when the step crosses a virtual edge beyond the free boundary, which
        contributes only the constant disorder multiplier.
        """
        (p0, q0), (p1, q1) = d0, d1
        if abs(p0 - p1) + abs(q0 - q1) != 1:
            raise DomainError("dual steps must join neighbouring dual sites")
        if q0 == q1:
            i, j = max(p0, p1), q0
            o = Orientation.WBAR_RIGHT if p1 > p0 else Orientation.WBAR_LEFT
            return "v", (i, j), o, (0 <= i < self.cols and 0 <= j < self.rows - 1)
        i, j = p0, max(q0, q1)
        o = Orientation.W_UP if q1 > q0 else Orientation.W_DOWN
        return "h", (i, j), o, (0 <= i < self.cols - 1 and 0 <= j < self.rows)

    @property
    def anchor(self) -> Dual:
        """Common boundary end of all tails: the bottom-left exterior face."""
        return (-1, -1)

    def canonical_tail(self, dual: Dual) -> list[Dual]:
        """Anchor, up the left exterior column to the row of ``dual``, then right."""
        p, q = dual
        if not self.has_dual(dual):
            raise DomainError("unknown dual site %s" % (dual,))
        up = [(-1, qq) for qq in range(-1, q + 1)]
        return up + [(pp, q) for pp in range(0, p + 1)]


@dataclass
class InsertionSet:
    """Diagonal clock insertions plus disorder tails."""

    order: list[tuple[Spin, int]] = field(default_factory=list)
    tails: list[tuple[list[Dual], DisorderFactor, DisorderFactor]] = field(default_factory=list)

    def total_charge(self, N: int) -> int:
        return sum(p for _, p in self.order) % N


class EdgeModel:
    """Explicit per-edge weight vectors and per-site factors of a lattice."""

    def __init__(self, lat: DiamondLattice, htable: WeightTable, vtable: WeightTable | None = None):
        self.lat = lat
        vtable = htable if vtable is None else vtable
        self.htable, self.vtable = htable, vtable
        N = htable.N
        self.N = N
        self.hw = np.tile(htable.W, (lat.rows, max(lat.cols - 1, 0), 1)).astype(complex)
        self.vw = np.tile(vtable.Wbar, (max(lat.rows - 1, 0), lat.cols, 1)).astype(complex)
        self.site = np.ones((lat.rows, lat.cols, N), dtype=complex)
        self.scale = 1.0 + 0j
        for (i, j), value in lat.fixed:
            self.site[j, i] = 0
            self.site[j, i, value % N] = 1

    def copy(self) -> "EdgeModel":
        m = object.__new__(EdgeModel)
        m.__dict__.update(self.__dict__)
        m.hw, m.vw, m.site = self.hw.copy(), self.vw.copy(), self.site.copy()
        return m

    def insert_order(self, site: Spin, power: int) -> None:
        i, j = site
        if not self.lat.has_spin(site):
            raise DomainError("no spin at %s" % (site,))
        omega = np.exp(2j * np.pi / self.N)
        self.site[j, i] *= omega ** (power * np.arange(self.N))

    def insert_tail(self, path: Sequence[Dual], hfactor: DisorderFactor,
                    vfactor: DisorderFactor | None = None) -> None:
        vfactor = hfactor if vfactor is None else vfactor
        for d0, d1 in zip(path[:-1], path[1:]):
            kind, (i, j), o, inside = self.lat.crossed_edge(d0, d1)
            fac = hfactor if kind == "h" else vfactor
            mult, shift, _ = fac.crossing(o)
            if not inside:
                self.scale *= mult
                continue
            arr = self.hw if kind == "h" else self.vw
            arr[j, i] = mult * np.roll(arr[j, i], -shift)

    def apply(self, ins: InsertionSet) -> "EdgeModel":
        m = self.copy()
        for site, power in ins.order:
            m.insert_order(site, power)
        for path, hf, vf in ins.tails:
            m.insert_tail(path, hf, vf)
        return m

    # -- summation engines -------------------------------------------------

    def _column_tensor(self, i: int) -> np.ndarray:
        """Site factors and vertical weights of column ``i`` as an ``(N,)*rows`` tensor."""
        R, N = self.lat.rows, self.N
        t = self.site[0, i].copy()
        for j in range(1, R):
            # new axis is row j; vertical edge (i, j-1) has weight of a_j - a_{j-1}
            diff = (np.arange(N)[None, :] - np.arange(N)[:, None]) % N
            edge = self.vw[j - 1, i][diff]  # [a_{j-1}, a_j]
            t = t[..., None] * edge.reshape((1,) * (j - 1) + (N, N)) * self.site[j, i]
        return t

    def contract(self) -> complex:
        """Column-by-column transfer over states of one spin column."""
        R, C, N = self.lat.rows, self.lat.cols, self.N
        diff = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N  # a - b
        psi = self._column_tensor(0)
        for i in range(1, C):
            for j in range(R):
                mat = self.hw[j, i - 1][diff]  # [a, b]
                psi = np.moveaxis(np.tensordot(psi, mat, axes=([j], [0])), -1, j)
            psi = psi * self._column_tensor(i)
        return complex(psi.sum()) * self.scale

    def enumerate(self, cap: int = ENUMERATION_CAP) -> complex:
        """Brute-force sum over all ``N**sites`` configurations."""
        R, C, N = self.lat.rows, self.lat.cols, self.N
        if R * C > cap:
            raise SizeOverflow("%d sites exceeds the enumeration cap %d" % (R * C, cap))
        conf = np.array(list(itertools.product(range(N), repeat=R * C))).reshape(-1, R, C)
        w = np.ones(conf.shape[0], dtype=complex)
        for j in range(R):
            for i in range(C):
                w *= self.site[j, i][conf[:, j, i]]
        for j in range(R):
            for i in range(C - 1):
                w *= self.hw[j, i][(conf[:, j, i] - conf[:, j, i + 1]) % N]
        for j in range(R - 1):
            for i in range(C):
                w *= self.vw[j, i][(conf[:, j + 1, i] - conf[:, j, i]) % N]
        return complex(w.sum()) * self.scale

    def evaluate(self, engine: str = "contract") -> complex:
        if engine == "contract":
            return self.contract()
        if engine == "enumerate":
            return self.enumerate()
        raise ValueError("unknown engine %r" % engine)


def partition_function(lat: DiamondLattice, htable: WeightTable,
                       vtable: WeightTable | None = None, engine: str = "contract") -> complex:
    return EdgeModel(lat, htable, vtable).evaluate(engine)


def expectation(lat: DiamondLattice, htable: WeightTable, ins: InsertionSet,
                vtable: WeightTable | None = None, engine: str = "contract") -> complex:
    base = EdgeModel(lat, htable, vtable)
    Z = base.evaluate(engine)
    if Z == 0:
        raise DegeneratePartition("partition function vanishes")
    return base.apply(ins).evaluate(engine) / Z


# ---------------------------------------------------------------------------
# Periodic chains: transfer matrix, Hamiltonian and Kramers-Wannier duality.

DENSE_CAP = 81


def _configs(N: int, L: int) -> np.ndarray:
    return np.array(list(itertools.product(range(N), repeat=L)), dtype=int).reshape(-1, L)


def _check_dense(N: int, L: int, cap: int) -> None:
    if L < 1:
        raise DomainError("chain length must be positive")
    if N**L > cap:
        raise SizeOverflow("dimension %d^%d exceeds dense cap %d" % (N, L, cap))


def transfer_matrix(r, s, L: int, cap: int = DENSE_CAP) -> np.ndarray:
    """Row-to-row transfer matrix of a periodic chain of ``L`` spins.

    ``T = T1 @ T2`` with
    ``T1[a, b] = prod_j W(a_j - b_j) Wbar(b_j - a_{j+1})`` and
    ``T2[a, b] = prod_j Wbar(b_j - a_j) W(a_j - b_{j+1})``,
    all weights being those of the pair ``(r, s)``.  At ``r = s`` this is the
    cyclic translation.
    """
    from chiralpotts.weights import build_weights

    table = build_weights(r, s)
    N = table.N
    _check_dense(N, L, cap)
    cfg = _configs(N, L)
    a = cfg[:, None, :]
    b = cfg[None, :, :]
    a1 = np.roll(cfg, -1, axis=1)[:, None, :]
    b1 = np.roll(cfg, -1, axis=1)[None, :, :]
    W, Wb = table.W, table.Wbar
    T1 = np.prod(W[(a - b) % N] * Wb[(b - a1) % N], axis=2)
    T2 = np.prod(Wb[(b - a) % N] * W[(a - b1) % N], axis=2)
    return T1 @ T2


def translation(N: int, L: int) -> np.ndarray:
    """Permutation matrix ``T[a, b] = [b_j = a_{j+1}]``, the ``r = s`` transfer matrix."""
    cfg = _configs(N, L)
    index = {tuple(c): k for k, c in enumerate(cfg)}
    P = np.zeros((len(cfg), len(cfg)))
    for k, c in enumerate(cfg):
        P[k, index[tuple(np.roll(c, -1))]] = 1.0
    return P


def _site_op(M: np.ndarray, j: int, L: int) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    I = np.eye(M.shape[0])
    for k in range(L):
        out = np.kron(out, M if k == j else I)
    return out


def hamiltonian(N: int, phi, phibar, kprime, L: int, twist: int = 0,
                normalization: str = "phi", cap: int = 4096) -> np.ndarray:
    """Dense clock-chain Hamiltonian.

    ``H = c sum_j sum_n [abar_n Z_j^n + alpha_n (X_j X_{j+1}^dag)^n]`` with
    ``alpha_n = e^{i(2n-N)phi/N} / sin(pi n/N)``,
    ``abar_n = k' e^{i(2n-N)phibar/N} / sin(pi n/N)`` and the twisted closure
    ``X_{L+1} = omega^twist X_1``.  The prefactor is ``c = 1/(N cos phi)`` for
    ``normalization="phi"`` (the value produced by the anisotropic limit of the
    transfer matrix) or ``1/(N cos phibar)`` for ``normalization="phibar"``.
    On the curve the two differ by the factor ``k'``.
    """
    from chiralpotts.qgroup import clock_matrices

    if L < 2:
        raise DomainError("chain needs L >= 2")
    _check_dense(N, L, cap)
    X, Z = clock_matrices(N)
    omega = np.exp(2j * np.pi / N)
    n = np.arange(1, N)
    sin = np.sin(np.pi * n / N)
    alpha = np.exp(1j * (2 * n - N) * phi / N) / sin
    abar = kprime * np.exp(1j * (2 * n - N) * phibar / N) / sin
    Xs = [_site_op(X, j, L) for j in range(L)]
    Zs = [_site_op(Z, j, L) for j in range(L)]
    dim = N**L
    H = np.zeros((dim, dim), dtype=complex)
    for j in range(L):
        bond = Xs[j] @ Xs[(j + 1) % L].conj().T
        if j == L - 1:
            bond = bond * omega ** (-twist)
        Zp, Bp = np.eye(dim), np.eye(dim)
        for k in range(N - 1):
            Zp = Zp @ Zs[j]
            Bp = Bp @ bond
            H += abar[k] * Zp + alpha[k] * Bp
    if normalization == "phi":
        c = 1 / (N * np.cos(phi))
    elif normalization == "phibar":
        c = 1 / (N * np.cos(phibar))
    else:
        raise ValueError("unknown normalization %r" % normalization)
    return c * H


def rotation_operator(N: int, L: int) -> np.ndarray:
    """Global spin rotation ``R = prod_j Z_j``."""
    from chiralpotts.qgroup import clock_matrices

    Z = clock_matrices(N)[1]
    out = np.eye(1, dtype=complex)
    for _ in range(L):
        out = np.kron(out, Z)
    return out


def charge_projector(N: int, L: int, m: int) -> np.ndarray:
    """Orthonormal basis (columns) of the ``R = omega^{-m}`` eigenspace."""
    R = rotation_operator(N, L).real
    omega = np.exp(2j * np.pi / N)
    P = sum(omega ** (m * k) * np.linalg.matrix_power(R, k) for k in range(N)) / N
    vals, vecs = np.linalg.eigh((P + P.conj().T) / 2)
    return vecs[:, vals > 0.5]


def sector_spectrum(H: np.ndarray, N: int, L: int, m: int) -> np.ndarray:
    """Eigenvalues of ``H`` restricted to charge ``m``, sorted by (real, imag)."""
    B = charge_projector(N, L, m)
    ev = np.linalg.eigvals(B.conj().T @ H @ B)
    return ev[np.lexsort((np.round(ev.imag, 10), np.round(ev.real, 10)))]


def finite_difference_hamiltonian(params, u_s, eps: float, L: int, branch: int = 1) -> np.ndarray:
    """``(e^{iP} T_rs - 1) / (u_r - u_s)`` at ``u_r = u_s + eps`` along one chart branch."""
    from chiralpotts.curve import make_point_from_chart

    s = make_point_from_chart(params, u_s, branch)
    r = make_point_from_chart(params, u_s + eps, branch)
    T = transfer_matrix(r, s, L)
    shift = translation(params.N, L)
    return (shift.T @ T - np.eye(len(T))) / eps


def check_hamiltonian_limit(params, u_s, L: int, eps: float = 1e-3, halvings: int = 3,
                            branch: int = 1) -> dict:
    """Compare the finite-difference generator with ``-H_s``.

    The identity component of the finite difference depends on the weight
    normalisation and is projected out.  Returns the traceless residuals for
    ``eps, eps/2, ...`` and their successive ratios (2 for an ``O(eps)`` error).
    """
    from chiralpotts.curve import make_point_from_chart

    s = make_point_from_chart(params, u_s, branch)
    H = hamiltonian(params.N, s.phi, s.phibar, params.kprime, L)
    dim = len(H)
    Ht = H - np.trace(H) / dim * np.eye(dim)
    errs = []
    for k in range(halvings + 1):
        D = finite_difference_hamiltonian(params, u_s, eps / 2**k, L, branch)
        Dt = D - np.trace(D) / dim * np.eye(dim)
        errs.append(float(np.linalg.norm(Dt + Ht) / np.linalg.norm(Ht)))
    ratios = [errs[k] / errs[k + 1] for k in range(halvings)]
    return {"errors": errs, "ratios": ratios}


def check_kw_duality(N: int, phi, phibar, kprime, L: int) -> dict:
    """Spectra of ``H(phi, phibar, k')`` in sector ``(m, mbar)`` against
    ``H(phibar, phi, 1/k')`` in sector ``(mbar, m)``, for all charge pairs.

    Parameters must satisfy ``k' cos(phibar) = cos(phi)``; with the ``1/(N cos phi)``
    normalisation the two Hamiltonians are then unitarily equivalent sector by sector.
    """
    if abs(kprime * np.cos(phibar) - np.cos(phi)) > 1e-10 * max(1.0, abs(kprime)):
        raise DomainError("duality check needs k' cos(phibar) = cos(phi)")
    worst = 0.0
    pairs = {}
    for mbar in range(N):
        H = hamiltonian(N, phi, phibar, kprime, L, twist=mbar)
        for m in range(N):
            Hd = hamiltonian(N, phibar, phi, 1 / kprime, L, twist=m)
            a = sector_spectrum(H, N, L, m)
            b = sector_spectrum(Hd, N, L, mbar)
            dev = _spectral_distance(a, b)
            pairs[(m, mbar)] = dev
            worst = max(worst, dev)
    return {"max_deviation": worst, "sectors": pairs}


def _spectral_distance(a: np.ndarray, b: np.ndarray) -> float:
    if len(a) != len(b):
        return float("inf")
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(a[:, None] - b[None, :])
    i, j = linear_sum_assignment(cost)
    scale = max(1.0, float(np.max(np.abs(a))))
    return float(cost[i, j].max() / scale)


def check_path_independence(lat: DiamondLattice, htable: WeightTable, ins: InsertionSet,
                            alt_path: Sequence[Dual], tail: int = 0,
                            vtable: WeightTable | None = None, engine: str = "contract") -> float:
    """Relative change of ``<O>`` when tail ``tail`` is rerouted along ``alt_path``.

    The two paths must share their endpoints.  Zero is expected whenever the
    region between them contains no diagonal insertion.
    """
    path, hf, vf = ins.tails[tail]
    if tuple(path[0]) != tuple(alt_path[0]) or tuple(path[-1]) != tuple(alt_path[-1]):
        raise DomainError("paths must share both endpoints")
    tails = list(ins.tails)
    tails[tail] = (list(alt_path), hf, vf)
    a = expectation(lat, htable, ins, vtable, engine)
    b = expectation(lat, htable, InsertionSet(list(ins.order), tails), vtable, engine)
    return float(abs(a - b) / max(abs(a), 1e-300))


# ---------------------------------------------------------------------------
# Plain-text (JSON-compatible) descriptions used by the command line.

def _c(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def lattice_to_dict(lat: DiamondLattice) -> dict:
    return {
        "rows": lat.rows,
        "cols": lat.cols,
        "theta": float(lat.theta),
        "fixed": [[list(site), int(v)] for site, v in lat.fixed],
    }


def lattice_from_dict(d: dict) -> DiamondLattice:
    fixed = tuple((tuple(site), int(v)) for site, v in d.get("fixed", []))
    return DiamondLattice(int(d["rows"]), int(d["cols"]), float(d.get("theta", np.pi / 2)), fixed)


def insertions_to_dict(ins: InsertionSet) -> dict:
    def fac(f: DisorderFactor) -> dict:
        return {"fr": _c(f.fr), "fs": _c(f.fs), "variant": str(getattr(f.variant, "value", f.variant))}

    return {
        "order": [[list(site), int(p)] for site, p in ins.order],
        "tails": [{"path": [list(d) for d in path], "h": fac(hf), "v": fac(vf)}
                  for path, hf, vf in ins.tails],
    }


def insertions_from_dict(d: dict) -> InsertionSet:
    from chiralpotts.weights import Variant

    def fac(x: dict) -> DisorderFactor:
        return DisorderFactor(complex(*x["fr"]), complex(*x["fs"]), Variant(x["variant"]))

    order = [(tuple(site), int(p)) for site, p in d.get("order", [])]
    tails = [([tuple(p) for p in t["path"]], fac(t["h"]), fac(t["v"])) for t in d.get("tails", [])]
    return InsertionSet(order, tails)
