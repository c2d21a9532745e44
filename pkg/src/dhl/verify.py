"""Sampled property checks, grouped into named suites.

Every suite takes a numpy Generator and a size multiplier and returns a
dict with at least ``passed`` (bool) and the measured quantity.  The CLI
``verify`` subcommand runs them; the test-suite calls them at full size.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .core_maps import TWO_PI, alpha_distance, f_step, rg_step
from .dynamics import (
    ConeSpec,
    bottcher_coordinate,
    central_leaf,
    cone_invariance_array,
    dominated_splitting_ratio,
    expansion_factor_array,
    holonomy,
    horizontal_growth,
    tongue_masses,
    transfer_defect,
)
from .partition import SpinGraph, brute_force_partition, polynomial_roots
from .zeros import find_zeros


def random_connected_graph(rng: np.random.Generator, max_vertices: int = 10,
                           field_mode: str = "valence") -> SpinGraph:
    """Random spanning tree plus extra edges, weights uniform in (0.05, 0.95)."""
    n = int(rng.integers(2, max_vertices + 1))
    edges = {}
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges[(u, v)] = float(rng.uniform(0.05, 0.95))
    for _ in range(int(rng.integers(0, n + 1))):
        u, v = sorted(int(x) for x in rng.choice(n, 2, replace=False))
        edges.setdefault((u, v), float(rng.uniform(0.05, 0.95)))
    return SpinGraph(n, [(u, v, w) for (u, v), w in edges.items()], field_mode)


def suite_semiconjugacy(rng, scale=1.0):
    """R = f o Q on random interior points (circular distance in phi)."""
    m = int(2000 * scale)
    phi, t = rng.uniform(0, TWO_PI, m), rng.uniform(0.01, 0.99, m)
    dphi, t1, _ = rg_step(phi, t)
    r_phi = np.mod(4 * phi + dphi, TWO_PI)
    fd, ft, _ = f_step(np.mod(2 * phi, TWO_PI), t * t)
    f_phi = np.mod(2 * np.mod(2 * phi, TWO_PI) + fd, TWO_PI)
    dp = np.abs(np.remainder(r_phi - f_phi + math.pi, TWO_PI) - math.pi)
    err = float(max(dp.max(), np.abs(t1 - ft).max()))
    return {"passed": err < 1e-9, "max_error": err, "samples": m}


def suite_cones(rng, scale=1.0):
    m = int(100_000 * scale)
    phi, t = rng.uniform(0, TWO_PI, m), rng.uniform(0, 1, m)
    out = {}
    for cone in (ConeSpec("algebraic"), ConeSpec("modified", eps_bar=0.05)):
        ok = cone_invariance_array(phi, t, cone)[0]
        out[cone.kind] = int(np.count_nonzero(~ok))
    return {"passed": all(v == 0 for v in out.values()), "failures": out, "samples": m}


def suite_expansion(rng, scale=1.0, r_excl=1e-3):
    nphi, nt = int(2048 * math.sqrt(scale)), int(1024 * math.sqrt(scale))
    P, T = np.meshgrid((np.arange(nphi) + 0.5) * TWO_PI / nphi, (np.arange(nt) + 0.5) / nt)
    keep = alpha_distance(P, 1 - T) >= r_excl
    emin = float(expansion_factor_array(P[keep], T[keep]).min())
    m = int(1000 * scale)
    logG, valid = horizontal_growth(rng.uniform(0, TWO_PI, m), rng.uniform(0, 1, m), 30, r_excl=r_excl)
    rate = fitted_growth_rate(logG[:, valid])
    return {"passed": emin > 1.0 and rate >= 1.95, "min_one_step": emin,
            "fitted_rate": rate, "orbits": int(valid.sum()), "grid": [nphi, nt]}


def fitted_growth_rate(logG: np.ndarray) -> float:
    """Worst per-orbit exp(slope) of a least-squares line through log G_k vs k."""
    k = np.arange(1, logG.shape[0] + 1)
    slopes = np.polyfit(k, logG, 1)[0]
    return float(np.exp(np.min(slopes)))


def suite_splitting(rng, scale=1.0, n=20):
    m = int(10_000 * scale)
    r = dominated_splitting_ratio(rng.uniform(0, TWO_PI, m), rng.uniform(0, 1, m), n)
    r = r[np.isfinite(r)]
    lam = float(np.exp(r.min() / n))
    return {"passed": lam > 1.0, "lambda_min": lam, "defined": int(r.size)}


def suite_holonomy(rng, scale=1.0):
    worst_drop, worst_total = 0.0, 0.0
    grid = np.linspace(0.0, TWO_PI, int(4096 * scale) + 1)
    for t in (0.1, 0.3, 0.6, 0.9):
        F = bottcher_coordinate(grid, t) / TWO_PI
        worst_drop = max(worst_drop, float(-np.diff(F).min()))
        worst_total = max(worst_total, abs(F[-1] - F[0] - 1.0))
    return {"passed": worst_drop <= 1e-12 and worst_total <= 1e-12,
            "max_decrease": worst_drop, "total_error": worst_total}


def suite_leaves(rng, scale=1.0):
    bases = rng.uniform(0, TWO_PI, max(2, int(4 * scale)))
    worst = 0.0
    for b in bases:
        leaf = central_leaf(float(b), t_max=0.29)
        for t in (0.1, 0.2, 0.28):
            worst = max(worst, abs(leaf.at(t) - holonomy(float(b), t)))
    return {"passed": worst < 1e-5, "max_deviation": worst}


def suite_staircase(rng, scale=1.0):
    worst = 0.0
    for t in (0.0, 0.1, 0.2):
        for m in range(4):
            tm = tongue_masses(m, t)
            worst = max(worst, max(abs(x - 1 / 4 ** (m + 1)) for x in tm.masses))
    return {"passed": worst < 1e-6, "max_error": worst}


def suite_transfer(rng, scale=1.0):
    worst = 0.0
    for t in (0.05, 0.15, 0.25):
        _, cor = transfer_defect(rng.uniform(0, TWO_PI, int(300 * scale)), t)
        worst = max(worst, float(np.abs(cor).max()))
    return {"passed": worst < 1e-8, "max_corrected_residual": worst}


def suite_zeros(rng, scale=1.0):
    bad = []
    for t in (0.0, 0.3, 0.6, 0.9):
        for n in range(5):
            zs = find_zeros(t, n)
            a = zs.angles
            sym = np.sort(np.mod(-a, TWO_PI))
            d = np.abs(np.remainder(sym - a + math.pi, TWO_PI) - math.pi).max()
            if zs.count != 2 * 4**n or d > 1e-9:
                bad.append([t, n])
    return {"passed": not bad, "failures": bad}


def suite_lee_yang(rng, scale=1.0):
    m = int(200 * scale)
    worst = 0.0
    for _ in range(m):
        g = random_connected_graph(rng)
        r = polynomial_roots(brute_force_partition(g))
        worst = max(worst, float(np.abs(np.abs(r) - 1).max()))
    return {"passed": worst < 1e-6, "max_radius_error": worst, "graphs": m}


SUITES: dict[str, Callable] = {
    "semiconjugacy": suite_semiconjugacy,
    "cones": suite_cones,
    "expansion": suite_expansion,
    "splitting": suite_splitting,
    "holonomy": suite_holonomy,
    "leaves": suite_leaves,
    "staircase": suite_staircase,
    "transfer": suite_transfer,
    "zeros": suite_zeros,
    "lee_yang": suite_lee_yang,
}


def run_suites(names=None, seed: int = 0, scale: float = 1.0) -> dict:
    names = list(SUITES) if not names else list(names)
    out = {}
    for name in names:
        rng = np.random.default_rng([seed, sorted(SUITES).index(name)])
        out[name] = SUITES[name](rng, scale)
    return out
