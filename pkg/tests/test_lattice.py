import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiralpotts import lattice as lt
from chiralpotts.curve import ModelParams, make_point_from_chart, random_chart_point
from chiralpotts.errors import DomainError, SizeOverflow
from chiralpotts.weights import DisorderFactor, Variant, WeightTable, build_weights


def _table(N=3, kp=0.6, ur=0.3, us=1.2):
    params = ModelParams(N, kp)
    return build_weights(make_point_from_chart(params, ur), make_point_from_chart(params, us))


def test_geometry():
    lat = lt.DiamondLattice(2, 3, theta=np.pi / 3)
    assert lat.n_sites == 6
    assert abs(lat.h - 2 * math.cos(np.pi / 6)) < 1e-15
    assert abs(lat.v - 2 * math.sin(np.pi / 6)) < 1e-15
    # every rhombus edge has unit length
    for s in lat.spin_sites():
        for d in lat.adjacent_duals(s):
            assert abs(abs(lat.z_spin(s) - lat.z_dual(d)) - 1) < 1e-14


def test_lattice_validation():
    with pytest.raises(DomainError):
        lt.DiamondLattice(0, 2)
    with pytest.raises(DomainError):
        lt.DiamondLattice(2, 2, theta=np.pi)
    with pytest.raises(DomainError):
        lt.DiamondLattice(2, 2, fixed=(((5, 5), 0),))
    lat = lt.DiamondLattice(2, 2)
    with pytest.raises(DomainError):
        lat.crossed_edge((0, 0), (1, 1))
    with pytest.raises(DomainError):
        lat.mid_edge((0, 0), (1, 1))


def test_canonical_tail_starts_at_anchor():
    lat = lt.DiamondLattice.anchored(3, 3)
    path = lat.canonical_tail((1, 0))
    assert path[0] == lat.anchor and path[-1] == (1, 0)
    for a, b in zip(path, path[1:]):
        assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1


def test_partition_function_2x2_by_hand():
    t = _table()
    N = t.N
    lat = lt.DiamondLattice(2, 2)
    total = 0
    # spins a[j][i]; horizontal W(left - right), vertical Wbar(top - bottom)
    for a00, a10, a01, a11 in itertools.product(range(N), repeat=4):
        total += (t.w(a00 - a10) * t.w(a01 - a11)
                  * t.wbar(a01 - a00) * t.wbar(a11 - a10))
    assert abs(lt.partition_function(lat, t) - total) < 1e-12 * abs(total)


@pytest.mark.parametrize("rows,cols", [(1, 4), (2, 3), (3, 3), (2, 5)])
def test_contract_matches_enumeration(rows, cols):
    t = _table(N=3)
    lat = lt.DiamondLattice.anchored(rows, cols, 1.1)
    fac = DisorderFactor.for_table(t, Variant.EBAR0)
    dual = (cols // 2, rows // 2 - 1)
    site = (cols // 2, rows // 2)
    ins = lt.InsertionSet(order=[(site, 1)], tails=[(lat.canonical_tail(dual), fac, fac)])
    m = lt.EdgeModel(lat, t).apply(ins)
    c, e = m.contract(), m.enumerate()
    assert abs(c - e) < 1e-11 * max(abs(e), 1e-300)


@settings(max_examples=25, deadline=None)
@given(N=st.integers(2, 3), rows=st.integers(1, 3), cols=st.integers(1, 3),
       seed=st.integers(0, 2**31))
def test_contract_matches_enumeration_property(N, rows, cols, seed):
    rng = np.random.default_rng(seed)
    params = ModelParams(N, 0.7)
    t = build_weights(random_chart_point(params, rng), random_chart_point(params, rng))
    m = lt.EdgeModel(lt.DiamondLattice(rows, cols), t)
    m.insert_order((cols - 1, 0), int(rng.integers(1, N)))
    c, e = m.contract(), m.enumerate()
    scale = max(abs(e), abs(lt.partition_function(lt.DiamondLattice(rows, cols), t)))
    assert abs(c - e) <= 1e-11 * scale


def test_enumeration_cap():
    m = lt.EdgeModel(lt.DiamondLattice(3, 4), _table())
    with pytest.raises(SizeOverflow):
        m.enumerate()
    with pytest.raises(ValueError):
        m.evaluate("magic")


def test_free_sum_charge_neutrality():
    t = _table(N=3)
    lat = lt.DiamondLattice(2, 2)
    val = lt.expectation(lat, t, lt.InsertionSet(order=[((0, 0), 1)]))
    assert abs(val) < 1e-13
    assert lt.InsertionSet(order=[((0, 0), 1), ((1, 1), 2)]).total_charge(3) == 0


def _detour(lat, dual):
    """Same endpoints as the canonical tail, but one exterior row higher, then down."""
    p, q = dual
    up = [(-1, qq) for qq in range(-1, q + 2)]
    return up + [(pp, q + 1) for pp in range(0, p + 1)] + [(p, q)]


def test_tail_path_independence():
    t = _table(N=3, kp=0.7)
    lat = lt.DiamondLattice.anchored(3, 3, 1.0)
    fac = DisorderFactor.for_table(t, Variant.EBAR0)
    dual = (0, 0)
    # the order insertion sits outside the strip swept between the two paths
    ins = lt.InsertionSet(order=[((2, 0), 1)], tails=[(lat.canonical_tail(dual), fac, fac)])
    dev = lt.check_path_independence(lat, t, ins, _detour(lat, dual))
    assert dev < 1e-10


def test_tail_rerouting_around_insertion_picks_up_phase():
    t = _table(N=3, kp=0.7)
    lat = lt.DiamondLattice.anchored(3, 3, 1.0)
    fac = DisorderFactor.for_table(t, Variant.EBAR0)
    dual = (0, 0)
    # spin (0, 1) lies between the two paths
    ins = lt.InsertionSet(order=[((0, 1), 1)], tails=[(lat.canonical_tail(dual), fac, fac)])
    a = lt.expectation(lat, t, ins)
    b = lt.expectation(lat, t, lt.InsertionSet(ins.order, [(_detour(lat, dual), fac, fac)]))
    ratio = b / a
    assert min(abs(ratio - np.exp(2j * np.pi * k / 3)) for k in (1, 2)) < 1e-10


def test_path_endpoints_checked():
    t = _table()
    lat = lt.DiamondLattice.anchored(2, 2)
    fac = DisorderFactor.for_table(t, Variant.E0)
    ins = lt.InsertionSet(tails=[(lat.canonical_tail((0, 0)), fac, fac)])
    with pytest.raises(DomainError):
        lt.check_path_independence(lat, t, ins, lat.canonical_tail((1, 0)))


def test_serialization_round_trip():
    t = _table()
    lat = lt.DiamondLattice.anchored(3, 2, 0.9)
    fac = DisorderFactor.for_table(t, Variant.E1)
    ins = lt.InsertionSet(order=[((1, 1), -1)], tails=[(lat.canonical_tail((0, 1)), fac, fac)])
    lat2 = lt.lattice_from_dict(json.loads(json.dumps(lt.lattice_to_dict(lat))))
    ins2 = lt.insertions_from_dict(json.loads(json.dumps(lt.insertions_to_dict(ins))))
    assert lat2 == lat
    assert abs(lt.expectation(lat, t, ins) - lt.expectation(lat2, t, ins2)) < 1e-15


# -- periodic chain ---------------------------------------------------------

def test_transfer_matrices_commute():
    rng = np.random.default_rng(7)
    params = ModelParams(3, 0.6)
    s = random_chart_point(params, rng)
    A = lt.transfer_matrix(random_chart_point(params, rng), s, 3)
    B = lt.transfer_matrix(random_chart_point(params, rng), s, 3)
    assert np.linalg.norm(A @ B - B @ A) / np.linalg.norm(A @ B) < 1e-9


def test_transfer_fails_to_commute_off_curve():
    rng = np.random.default_rng(7)
    params = ModelParams(3, 0.6)
    s = random_chart_point(params, rng)
    r1, r2 = random_chart_point(params, rng), random_chart_point(params, rng)
    bad = type(r1)(r1.x, r1.y, r1.mu * 1.05, params)
    A, B = lt.transfer_matrix(bad, s, 3), lt.transfer_matrix(r2, s, 3)
    assert np.linalg.norm(A @ B - B @ A) / np.linalg.norm(A @ B) > 1e-4


def test_transfer_at_coincident_rapidities_is_translation():
    params = ModelParams(3, 0.6)
    s = make_point_from_chart(params, 0.4)
    assert np.abs(lt.transfer_matrix(s, s, 3) - lt.translation(3, 3)).max() < 1e-14


def test_dense_cap():
    params = ModelParams(3, 0.6)
    s = make_point_from_chart(params, 0.4)
    with pytest.raises(SizeOverflow):
        lt.transfer_matrix(s, s, 5)
    with pytest.raises(DomainError):
        lt.hamiltonian(3, 0.1, 0.1, 1.0, 1)


@pytest.mark.parametrize("N,kp,u", [(2, 0.7, 0.5), (3, 0.6, 0.4), (3, 1.0, 0.8)])
def test_anisotropic_limit_is_first_order(N, kp, u):
    rep = lt.check_hamiltonian_limit(ModelParams(N, kp), u, 3)
    assert rep["errors"][-1] < 1e-2
    assert all(abs(r - 2) < 0.1 for r in rep["ratios"])


def test_ising_fz_hamiltonian_by_hand():
    X = np.diag([1.0, -1.0])
    Z = np.array([[0.0, 1.0], [1.0, 0.0]])
    I = np.eye(2)
    L = 3

    def op(M, j):
        out = np.eye(1)
        for k in range(L):
            out = np.kron(out, M if k == j else I)
        return out

    H = sum(op(Z, j) + op(X, j) @ op(X, (j + 1) % L) for j in range(L)) / 2
    assert np.abs(lt.hamiltonian(2, 0.0, 0.0, 1.0, L) - H).max() < 1e-14


@settings(max_examples=20, deadline=None)
@given(N=st.integers(2, 3), phi=st.floats(-1.2, 1.2), phibar=st.floats(-1.2, 1.2),
       kp=st.floats(0.2, 2.0))
def test_hamiltonian_hermitian_and_symmetric(N, phi, phibar, kp):
    H = lt.hamiltonian(N, phi, phibar, kp, 3)
    R = lt.rotation_operator(N, 3)
    assert np.abs(H - H.conj().T).max() < 1e-12
    assert np.abs(H @ R - R @ H).max() < 1e-12


def test_prefactor_conventions_differ_by_kprime():
    phibar, kp = 0.3, 0.8
    phi = math.acos(kp * math.cos(phibar))
    Hphi = lt.hamiltonian(3, phi, phibar, kp, 3)
    Hbar = lt.hamiltonian(3, phi, phibar, kp, 3, normalization="phibar")
    assert np.abs(kp * Hphi - Hbar).max() < 1e-13
    with pytest.raises(ValueError):
        lt.hamiltonian(3, phi, phibar, kp, 3, normalization="other")


def test_charge_projectors_partition_space():
    N, L = 3, 3
    dims = [lt.charge_projector(N, L, m).shape[1] for m in range(N)]
    assert sum(dims) == N**L


@pytest.mark.parametrize("N", [2, 3])
def test_kramers_wannier_sector_exchange(N):
    phibar, kp = 0.3, 0.8
    phi = math.acos(kp * math.cos(phibar))
    rep = lt.check_kw_duality(N, phi, phibar, kp, 3)
    assert rep["max_deviation"] < 1e-8
    assert len(rep["sectors"]) == N * N


def test_kramers_wannier_fails_with_phibar_prefactor():
    N, phibar, kp = 3, 0.3, 0.8
    phi = math.acos(kp * math.cos(phibar))
    H = lt.hamiltonian(N, phi, phibar, kp, 3, normalization="phibar")
    Hd = lt.hamiltonian(N, phibar, phi, 1 / kp, 3, normalization="phibar")
    dev = lt._spectral_distance(lt.sector_spectrum(H, N, 3, 0), lt.sector_spectrum(Hd, N, 3, 0))
    assert dev > 1e-2


def test_kramers_wannier_requires_integrable_point():
    with pytest.raises(DomainError):
        lt.check_kw_duality(3, 0.2, 0.3, 0.8, 3)


def test_single_edge_hand_sum():
    t = _table(N=2, kp=0.7)
    w1 = t.W[1]
    assert abs(lt.partition_function(lt.DiamondLattice(1, 2), t) - 2 * (1 + w1)) < 1e-14


def test_unit_weights_count_configurations():
    t = _table(N=3)
    ones = WeightTable(t.r, t.s, np.ones(3, complex), np.ones(3, complex))
    for engine in ("contract", "enumerate"):
        assert abs(lt.partition_function(lt.DiamondLattice(2, 3), ones, engine=engine) - 3**6) < 1e-9


def test_empty_insertion_is_one():
    t = _table()
    assert abs(lt.expectation(lt.DiamondLattice.anchored(2, 3), t, lt.InsertionSet()) - 1) < 1e-14


@pytest.mark.parametrize("variant", list(Variant))
def test_tail_out_and_back_is_trivial(variant):
    t = _table(N=3, kp=0.7)
    lat = lt.DiamondLattice.anchored(3, 3, 1.0)
    fac = DisorderFactor.for_table(t, variant)
    path = lat.canonical_tail((1, 1))
    loop = path + path[-2::-1]
    ins = lt.InsertionSet(order=[((1, 1), variant.order_power)])
    with_loop = lt.InsertionSet(ins.order, [(loop, fac, fac)])
    a, b = lt.expectation(lat, t, ins), lt.expectation(lat, t, with_loop)
    assert abs(a - b) <= 1e-12 * max(abs(a), 1e-12)


def test_identical_paths_agree_exactly():
    t = _table()
    lat = lt.DiamondLattice.anchored(2, 3)
    fac = DisorderFactor.for_table(t, Variant.EBAR0)
    path = lat.canonical_tail((1, 0))
    ins = lt.InsertionSet([((1, 0), 1)], [(path, fac, fac)])
    assert lt.check_path_independence(lat, t, ins, list(path)) == 0.0


def test_elementary_plaquette_move_ising():
    t = _table(N=2, kp=0.8, ur=0.2, us=1.5)
    lat = lt.DiamondLattice.anchored(3, 3, 1.3)
    fac = DisorderFactor.for_table(t, Variant.EBAR0)
    path = lat.canonical_tail((1, 0))
    assert path == [(-1, -1), (-1, 0), (0, 0), (1, 0)]
    # pass below spin (0, 0) instead of to its left
    moved = [(-1, -1), (0, -1), (0, 0), (1, 0)]
    ins = lt.InsertionSet([((2, 2), 1)], [(path, fac, fac)])
    assert lt.check_path_independence(lat, t, ins, moved) < 1e-11


def test_winding_around_spin_at_fz():
    params = ModelParams(3, 1.0)
    t = build_weights(make_point_from_chart(params, 0.1), make_point_from_chart(params, 1.0))
    lat = lt.DiamondLattice.anchored(3, 3, 0.9)
    fac = DisorderFactor.for_table(t, Variant.EBAR0)
    dual = (1, 1)
    path = lat.canonical_tail(dual)
    # the detour winds around spin (1, 1), which carries no insertion
    alt = path[:-1] + [(0, 0), (1, 0), (1, 1)]
    ins = lt.InsertionSet([((2, 0), 1)], [(path, fac, fac)])
    assert lt.check_path_independence(lat, t, ins, alt) < 1e-11


def test_transfer_commutation_many_pairs():
    for N in (2, 3):
        rng = np.random.default_rng(40 + N)
        params = ModelParams(N, 0.75)
        s = random_chart_point(params, rng)
        for _ in range(10):
            A = lt.transfer_matrix(random_chart_point(params, rng), s, 3)
            B = lt.transfer_matrix(random_chart_point(params, rng), s, 3)
            assert np.linalg.norm(A @ B - B @ A) / np.linalg.norm(A @ B) < 1e-9


def test_self_dual_point_exchanges_sectors_trivially():
    rep = lt.check_kw_duality(2, 0.0, 0.0, 1.0, 4)
    assert rep["max_deviation"] < 1e-10
    H = lt.hamiltonian(2, 0.0, 0.0, 1.0, 4)
    a = lt.sector_spectrum(H, 2, 4, 0)
    assert lt._spectral_distance(a, lt.sector_spectrum(H, 2, 4, 0)) == 0.0


def test_ising_duality_kprime_07():
    phibar, kp = 0.0, 0.7
    phi = math.acos(kp)
    assert lt.check_kw_duality(2, phi, phibar, kp, 3)["max_deviation"] < 1e-8
