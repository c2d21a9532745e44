import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from dhl.core_maps import TWO_PI, CylinderPoint, circular_distance, map_phys
from dhl.errors import DomainError, LevelTooLarge, TooManyVertices, ZeroPartition
from dhl.partition import (
    ScaledWeights,
    SpinGraph,
    brute_force_partition,
    conditional_polys,
    diamond_partition_bruteforce,
    free_energy_per_bond,
    init_weights,
    iterate_weights,
    magnetization,
    mk_step,
    partition_poly,
    partition_value,
    polynomial_roots,
    ring_cdf,
    ring_density,
    ring_roots_bruteforce,
    transfer_matrix_trace,
    zeros_1d,
)
from dhl.verify import random_connected_graph
from dhl.zeros import find_zeros

from oracles import exact_laurent

angles = st.floats(0.0, TWO_PI, exclude_max=True)


def value(ws):
    return np.array(ws.values(), dtype=complex)


# --- scaled weights ---------------------------------------------------------


@pytest.mark.parametrize("z, t, expect", [
    (1.0, 1.0, (1, 1, 1)),
    (1.0, 0.25, (2, 0.5, 2)),
    (1j, 0.25, (-2j, 0.5, 2j)),
])
def test_init_weights_examples(z, t, expect):
    np.testing.assert_allclose(value(init_weights(z, t)), expect, rtol=1e-15, atol=1e-15)


def test_init_weights_domain():
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            init_weights(1.0, bad)
    with pytest.raises(DomainError):
        init_weights(0.0, 0.5)


def test_mk_step_symmetric_point():
    ws = mk_step(ScaledWeights(1 + 0j, 1 + 0j, 1 + 0j, 0.0))
    assert (ws.u, ws.v, ws.w) == (1, 1, 1)
    assert ws.log_scale == pytest.approx(math.log(4), rel=1e-15)


@given(angles, st.floats(0.01, 1.0), st.integers(0, 12))
def test_mantissas_stay_normalized(phi, t, n):
    ws = iterate_weights(init_weights(cmath.exp(1j * phi), t), n)
    m = max(abs(ws.u), abs(ws.v), abs(ws.w))
    assert 0.5 <= m <= 2.0


@given(st.floats(0.01, 0.99))
def test_one_step_ratio_recovery_on_invariant_line(t):
    _, t1 = mk_step(init_weights(1.0, t)).recover_point()
    assert float(t1) == pytest.approx((2 * t / (1 + t * t)) ** 2, rel=1e-12)


def test_ratio_recovery_matches_orbit():
    rng = np.random.default_rng(2)
    errs = []
    for phi, t in zip(rng.uniform(0, TWO_PI, 1000), rng.uniform(0.01, 0.99, 1000)):
        ws = init_weights(cmath.exp(1j * phi), t)
        p = CylinderPoint(float(phi), float(t))
        worst = 0.0
        for _ in range(10):
            ws, p = mk_step(ws), map_phys(p)
            a, b = ws.recover_point()
            worst = max(worst, circular_distance(float(a), p.phi), abs(float(b) - p.t))
        errs.append(worst)
    errs = np.array(errs)
    # chaotic orbits amplify rounding by up to 4 per step
    assert np.quantile(errs, 0.99) < 1e-8
    assert errs.max() < 1e-6


@given(angles, st.floats(0.05, 0.95), st.floats(1e-3, 1e3))
def test_scaling_invariance(phi, t, c):
    ws = init_weights(cmath.exp(1j * phi), t)
    scaled = ScaledWeights(ws.u * c, ws.v * c, ws.w * c, ws.log_scale).renormalized()
    a = iterate_weights(ws, 5).recover_point()
    b = iterate_weights(scaled, 5).recover_point()
    assert abs(float(a[0]) - float(b[0])) < 1e-9
    assert abs(float(a[1]) - float(b[1])) < 1e-9


# --- partition values -------------------------------------------------------


@given(angles, st.floats(0.05, 1.0))
def test_diamond_matches_enumeration(phi, t):
    m, ls = partition_value(phi, t, 1)
    z_mk = m * math.exp(ls)
    z_bf = diamond_partition_bruteforce(phi, t)
    assert abs(z_mk - z_bf) <= 1e-12 * max(1.0, abs(z_bf))


@given(angles, st.floats(0.05, 0.95), st.integers(0, 3))
def test_value_matches_exact_laurent(phi, t, n):
    Z = exact_laurent(t, n, dps=40)
    z = cmath.exp(1j * phi)
    ref = sum(complex(c) * z**k for k, c in Z.items()) * t ** (-(4**n) / 2)
    m, ls = partition_value(phi, t, n)
    assert abs(m * math.exp(ls) - ref) <= 1e-9 * sum(abs(complex(c)) for c in Z.values()) * t ** (-(4**n) / 2)


@given(st.floats(0.05, 0.95))
def test_level_zero_zero(t):
    m, _ = partition_value(math.acos(-t), t, 0)
    assert abs(m) < 1e-14
    assert abs(partition_value(math.pi, 1.0, 0)[0]) == 0.0


def test_positive_at_zero_field():
    m, _ = partition_value(0.0, 0.5, 1)
    assert m.real > 0 and m.imag == 0.0


@given(angles, st.floats(0.05, 0.95), st.integers(1, 8))
def test_value_real_on_circle(phi, t, n):
    m, _ = partition_value(phi, t, n)
    if abs(m) > 1e-6:
        assert abs(m.imag) < 1e-8 * abs(m)


# --- coefficient forms ------------------------------------------------------


@pytest.mark.parametrize("n, degree", [(0, 1), (1, 4), (2, 16), (3, 64), (4, 256)])
def test_poly_degree(n, degree):
    assert partition_poly(0.4, n).degree == degree


def test_poly_level_zero():
    t = 0.36
    P = partition_poly(t, 0)
    scale = math.exp(P.log_scale)
    # constant Laurent coefficient 2t t^-1/2 is split evenly over z^0 + z^-0
    assert 2 * P.a[0] * scale == pytest.approx(2 * t / math.sqrt(t), rel=1e-14)
    assert P.a[1] * scale == pytest.approx(1 / math.sqrt(t), rel=1e-14)
    r = P.roots()
    assert np.allclose(np.cos(np.angle(r)), -t, atol=1e-12)


def test_poly_level_too_large():
    with pytest.raises(LevelTooLarge):
        partition_poly(0.5, 5)
    with pytest.raises(LevelTooLarge):
        conditional_polys(0.5, 4)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("t", [0.2, 0.5, 0.9])
def test_poly_matches_recursion(t, n):
    rng = np.random.default_rng(n)
    P = partition_poly(t, n)
    phi = rng.uniform(0, TWO_PI, 32)
    m, ls = partition_value(phi, t, n)
    # per-point scales differ by many orders; compare actual values
    top = max(P.log_scale, float(np.max(ls)))
    val = P.evaluate_phi(phi) * np.exp(P.log_scale - top)
    ref = m.real * np.exp(ls - top)
    assert np.max(np.abs(val - ref)) <= 1e-8 * np.max(np.abs(ref))


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_poly_palindromic(n):
    L = partition_poly(0.3, n).laurent()
    np.testing.assert_allclose(L.coeffs, L.coeffs[::-1], rtol=1e-14)


def test_poly_csv_header():
    text = partition_poly(0.5, 1).to_csv()
    assert text.startswith("# log_scale=")
    assert text.splitlines()[1] == "k,a_k"
    assert len(text.splitlines()) == 2 + 5


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("t", [0.2, 0.5, 0.8])
def test_conditional_root_location(t, n):
    cp = conditional_polys(t, n)
    # U_n and W_n are squares; companion roots of double roots are ill-posed
    w_roots = cp.sqrt_w.roots()
    u_roots = cp.sqrt_u.roots()
    assert np.all(np.abs(w_roots) < 1.0)
    assert np.all(np.abs(u_roots) > 1.0)


def test_conditional_w_is_square():
    cp = conditional_polys(0.5, 2)
    for r, full in ((cp.sqrt_w, cp.W), (cp.sqrt_u, cp.U)):
        sq = (r * r).trimmed()
        assert sq.lo == full.lo
        np.testing.assert_allclose(sq.coeffs * math.exp(sq.log_scale - full.log_scale), full.coeffs,
                                   rtol=1e-12, atol=1e-14)


def test_conditional_u_is_reflected_w():
    cp = conditional_polys(0.5, 1)
    w_roots = np.sort_complex(cp.sqrt_w.roots())
    u_roots = np.sort_complex(1.0 / np.conj(cp.sqrt_u.roots()))
    np.testing.assert_allclose(np.sort(np.abs(u_roots)), np.sort(np.abs(w_roots)), rtol=1e-6)
    np.testing.assert_allclose(np.sort(np.angle(u_roots)), np.sort(np.angle(w_roots)), atol=1e-6)


# --- observables ------------------------------------------------------------


@pytest.mark.parametrize("t", [0.2, 0.5])
def test_free_energy_converges(t):
    f = np.array([free_energy_per_bond(0.0, t, n) for n in range(3, 13)])
    d = np.abs(np.diff(f))
    # boundary terms are O(1) per level, so differences shrink by 4 per level
    np.testing.assert_allclose(d[3:] / d[2:-1], 0.25, atol=1e-3)
    assert d[-1] < 1e-6


@given(angles, st.floats(0.05, 0.95), st.integers(0, 6))
def test_free_energy_symmetric(phi, t, n):
    try:
        a = free_energy_per_bond(phi, t, n)
    except ZeroPartition:
        return
    assert a == pytest.approx(free_energy_per_bond(TWO_PI - phi, t, n), abs=1e-12)


def test_free_energy_ground_state():
    # t -> 0 at phi = 0: Z is dominated by the all-plus state, U + W ~ 2 t^(-|E|/2)
    for n in (1, 3, 5):
        f = free_energy_per_bond(0.0, 1e-6, n)
        assert f == pytest.approx(0.5 * math.log(1e-6) - math.log(2) / 4**n, rel=1e-6)


def test_free_energy_zero_partition():
    with pytest.raises(ZeroPartition):
        free_energy_per_bond(math.pi, 1.0, 0)


@given(st.floats(0.01, 2.0), st.floats(0.05, 0.95))
def test_magnetization_odd(h, t):
    assert magnetization(-h, t, 4) == pytest.approx(-magnetization(h, t, 4), abs=1e-9)
    assert magnetization(0.0, t, 4) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("t", [0.1, 0.2, 0.5, 0.8])
def test_magnetization_cauchy_representation(t):
    # M_n(h) = 1 - (2/N) sum z/(z - zeta_j) over the zeros, z = exp(-h)
    zs = find_zeros(t, 5)
    for h in (0.02, 0.3):
        z = math.exp(-h)
        cauchy = 1 - 2 * np.mean(z / (z - np.exp(1j * zs.angles))).real
        assert magnetization(h, t, 5) == pytest.approx(cauchy, abs=1e-8)


def test_magnetization_plateau_below_critical():
    m = [magnetization(1e-3, 0.2, n) for n in (6, 8, 10)]
    assert min(m) > 0.9
    assert abs(m[-1] - m[-2]) < 1e-3
    hot = [magnetization(1e-3, 0.5, n) for n in (6, 8)]
    assert max(hot) < 0.05


# --- brute force ------------------------------------------------------------


@given(st.floats(0.0, 1.0))
def test_two_vertex_chain(t):
    c = brute_force_partition(SpinGraph(2, [(0, 1, t)], "valence"))
    np.testing.assert_allclose(c, [1, 2 * t, 1], rtol=1e-15)
    if t < 1:
        r = polynomial_roots(c)
        assert np.allclose(np.cos(np.angle(r)), -t)


def test_free_sites_factorize():
    g = SpinGraph(3, [(0, 1, 1.0), (1, 2, 1.0)], "uniform")
    c = brute_force_partition(g)
    np.testing.assert_allclose(c, np.polynomial.polynomial.polypow([1, 0, 1], 3))


def test_diamond_brute_force_degree():
    c = brute_force_partition(SpinGraph.diamond(0.5))
    assert len(c) == 9  # z^0 .. z^8
    np.testing.assert_allclose(c, c[::-1])


def test_lee_yang_random_graphs():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(200):
        g = random_connected_graph(rng, 10, str(rng.choice(["valence", "uniform"])))
        assert g.is_connected()
        r = polynomial_roots(brute_force_partition(g))
        worst = max(worst, float(np.abs(np.abs(r) - 1).max()))
    assert worst < 1e-6


def test_lee_yang_boundary_conditions():
    rng = np.random.default_rng(77)
    closest = np.inf
    for _ in range(100):
        g = random_connected_graph(rng, 10)
        while g.n < 3:
            g = random_connected_graph(rng, 10)
        k = int(rng.integers(1, g.n))
        plus = sorted(int(v) for v in rng.choice(g.n, k, replace=False))
        r = polynomial_roots(brute_force_partition(g, plus))
        closest = min(closest, float(np.abs(r).min()))
    assert closest > 1.0


def test_graph_json():
    g = SpinGraph.from_json(json.dumps({"n": 3, "edges": [[0, 1, 0.5], [1, 2, 0.2]]}))
    assert g.n == 3 and g.field_mode == "valence"
    for bad in ("{", '{"edges": []}', '{"n": 2, "edges": [[0, 5, 0.1]]}',
                '{"n": 2, "edges": [[0, 1, 1.5]]}', '{"n": 2, "field_mode": "x"}'):
        with pytest.raises(DomainError):
            SpinGraph.from_json(bad)


def test_too_many_vertices():
    with pytest.raises(TooManyVertices):
        brute_force_partition(SpinGraph.ring(17, 0.5))


# --- one-dimensional ring ---------------------------------------------------


def test_ring_small_explicit():
    t = 0.5
    a = math.sqrt(1 - t**4)
    base = [math.acos(a * math.cos(math.pi / 4)), math.acos(a * math.cos(3 * math.pi / 4))]
    expect = np.sort(np.mod(base + [-x for x in base], TWO_PI))
    np.testing.assert_allclose(zeros_1d(t, 2), expect, atol=1e-15)
    ang, _ = ring_roots_bruteforce(t, 2)
    np.testing.assert_allclose(ang, expect, atol=1e-12)


@pytest.mark.parametrize("t", [0.2, 0.5, 0.8])
def test_ring_formula_vs_enumeration(t):
    for n in range(2, 13):
        ang, roots = ring_roots_bruteforce(t, n)
        assert np.max(np.abs(ang - zeros_1d(t, n))) < 1e-9
        assert np.allclose(np.abs(roots), 1.0, atol=1e-9)


@given(st.floats(0.1, 0.9), st.integers(2, 12))
def test_ring_transfer_matrix_vanishes(t, n):
    z = np.exp(1j * zeros_1d(t, n))
    assert np.max(np.abs(transfer_matrix_trace(z, t, n))) < 1e-9


@pytest.mark.parametrize("t", [0.2, 0.5, 0.8])
def test_ring_density_histogram(t):
    N = 5000  # ring length; 10^4 zeros
    z = zeros_1d(t, N)
    edges = np.linspace(0, TWO_PI, 41)
    counts, _ = np.histogram(z, edges)
    expect = np.diff(ring_cdf(edges, t)) * z.size
    keep = expect > 5
    chi2 = float(np.sum((counts[keep] - expect[keep]) ** 2 / expect[keep]))
    p = stats.chi2.sf(chi2, int(keep.sum()) - 1)
    assert p > 0.01


def test_ring_density_normalized():
    from scipy import integrate

    for t in (0.2, 0.5, 0.8):
        gap = math.acos(math.sqrt(1 - t**4))
        val = sum(integrate.quad(ring_density, a, b, args=(t,), limit=200)[0]
                  for a, b in [(gap, math.pi - gap), (math.pi + gap, TWO_PI - gap)])
        assert val == pytest.approx(1.0, abs=1e-6)


def test_ring_gap_closes():
    gaps = [zeros_1d(t, 50)[0] for t in (0.5, 0.2, 0.05)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_ring_domain():
    with pytest.raises(DomainError):
        zeros_1d(1.0, 4)
    with pytest.raises(DomainError):
        zeros_1d(0.5, 1)


@settings(max_examples=20)
@given(st.floats(0.05, 0.95), st.integers(0, 3))
def test_poly_roots_on_circle_small_t(t, n):
    # well conditioned range for companion roots
    if t > 0.5 and n == 3:
        return
    r = partition_poly(t, n).roots()
    assert np.max(np.abs(np.abs(r) - 1)) < 1e-6
