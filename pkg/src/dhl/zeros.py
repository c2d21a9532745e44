"""Lee-Yang zeros of Z_n on a temperature circle.

On the circle the weights satisfy W_n = conj(U_n) and V_n > 0, so with
A = W_n + V_n we have Z_n = 2 Re A, and Z_n vanishes exactly when
arg A is an odd multiple of pi/2.  Up to a positive factor A is
W + V evaluated at the renormalized point (phi_n, t_n) = R^n(phi, t), and

    Theta_n(phi) = 2 * arg(z_n + t_n),   lifted continuously in phi,

is strictly increasing with total increment 2 * 4^n * 2pi over the circle.
The zeros are therefore the solutions of Theta_n(phi) = (2k + 1) pi,
k = 0 .. 2*4^n - 1.  We evaluate Theta_n through the cancellation-free
orbit kernels of ``core_maps`` and bisect on it directly.  The sign of
Re Z_n changes at each solution, but near the top circle neighbouring
zeros can be closer than the resolution of double precision, where the
sign of Z_n itself is no longer computable; the lifted phase remains
monotone there, so every zero is still counted and bracketed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core_maps import TWO_PI, rg_step
from .errors import CountMismatch, DensityNotPositive, DomainError

N_MAX = 8


def lifted_phase(phi, t: float, n: int) -> np.ndarray:
    """Continuous lift of 2 arg(z_n + t_n) along the circle of temperature t.

    Theta_n(0) = 0 and Theta_n(phi + 2pi) = Theta_n(phi) + 4^(n+1) pi.
    """
    phi = np.asarray(phi, dtype=float)
    ph = phi.copy()
    lift = phi.copy()
    tt = np.full(phi.shape, float(t))
    tau = np.full(phi.shape, 1.0 - float(t))
    for _ in range(n):
        dphi, tt, tau = rg_step(ph, tt, tau)
        lift = 4.0 * lift + dphi
        ph = np.mod(4.0 * ph + dphi, TWO_PI)
    h2 = np.cos(0.5 * ph) ** 2
    # 1 + t cos(phi) = tau + 2 t cos^2(phi/2), exact near (pi, 1)
    corr = -2.0 * np.arctan2(tt * np.sin(ph), tau + 2.0 * tt * h2)
    return 2.0 * lift + corr


@dataclass
class ZeroSet:
    """Level-n zeros on the circle of temperature t.

    ``angles`` are sorted in [0, 2pi).  Zeros closer than one unit in the
    last place are stored as repeated values so that the count is exact.
    """

    n: int
    t: float
    angles: np.ndarray
    tolerance: float
    meta: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return int(self.angles.size)

    @property
    def expected(self) -> int:
        return 2 * 4**self.n

    def to_csv(self) -> str:
        rows = ["n,t,phi"] + [f"{self.n},{float(self.t)!r},{a!r}" for a in self.angles.tolist()]
        return "\n".join(rows) + "\n"


@dataclass
class EmpiricalDistribution:
    edges: np.ndarray
    mass: np.ndarray


def _bisect_targets(lo, hi, targets, t, n, tol, max_iter=80):
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        active = (hi - lo > tol) & (mid > lo) & (mid < hi)
        if not active.any():
            break
        idx = np.flatnonzero(active)
        below = lifted_phase(mid[idx], t, n) < targets[idx]
        lo[idx] = np.where(below, mid[idx], lo[idx])
        hi[idx] = np.where(below, hi[idx], mid[idx])
    return lo, hi


def find_zeros(t: float, n: int, n_max: int = N_MAX, grid_factor: int = 16,
               tol: float = 1e-12, max_doublings: int = 3) -> ZeroSet:
    """All 2*4^n zeros of Z_n on the circle of temperature t in [0, 1)."""
    t = float(t)
    if not (0.0 <= t < 1.0) or not math.isfinite(t):
        raise DomainError(f"t must lie in [0, 1), got {t}")
    if not (0 <= n <= n_max):
        raise DomainError(f"level n = {n} outside [0, {n_max}]")

    # Z_n(-z) = Z_n(z) for n >= 1 lets us work on a quarter circle;
    # at level 0 only the reflection phi -> 2pi - phi is available.
    if n >= 1:
        span, k_count = 0.5 * math.pi, 4**n // 2
    else:
        span, k_count = math.pi, 1
    end_value = 2.0 * 4**n * span
    targets = (2.0 * np.arange(k_count) + 1.0) * math.pi

    grid_pts = grid_factor * 4**n
    for attempt in range(max_doublings + 1):
        grid = np.linspace(0.0, span, grid_pts + 1)
        theta = lifted_phase(grid, t, n)
        drops = np.diff(theta)
        end_err = abs(theta[-1] - end_value)
        if drops.min() >= -1e-9 * max(1.0, end_value) and end_err <= 1e-6 * end_value:
            break
        grid_pts *= 2
    else:
        found = int(np.count_nonzero(np.diff(np.floor((theta - math.pi) / TWO_PI)) > 0))
        raise CountMismatch(2 * found * (2 if n >= 1 else 1), 2 * 4**n,
                            f"phase end error {end_err:.3g}, min increment {drops.min():.3g}")

    mono = np.maximum.accumulate(theta)
    idx = np.searchsorted(mono, targets, side="left")
    idx = np.clip(idx, 1, grid.size - 1)
    lo, hi = _bisect_targets(grid[idx - 1], grid[idx], targets, t, n, tol)
    part = 0.5 * (lo + hi)
    width = float(np.max(hi - lo)) if hi.size else 0.0

    if n >= 1:
        half = np.concatenate([part, math.pi - part[::-1]])
        full = np.concatenate([half, half + math.pi])
    else:
        full = np.concatenate([part, TWO_PI - part[::-1]])
    angles = np.sort(np.mod(full, TWO_PI))
    if angles.size != 2 * 4**n:
        raise CountMismatch(angles.size, 2 * 4**n)
    return ZeroSet(n, t, angles, width, {"grid_points": grid_pts, "attempts": attempt + 1})


def empirical_distribution(zs: ZeroSet, bins: int) -> EmpiricalDistribution:
    edges = np.linspace(0.0, TWO_PI, bins + 1)
    counts, _ = np.histogram(zs.angles, bins=edges)
    return EmpiricalDistribution(edges, counts / counts.sum())


def rescaled_zeros(zs: ZeroSet, phi_star: float, rho_star: float, k_max: int = 5) -> dict:
    """Local spacings s_k = (2 4^n / 2pi) rho* (phi_{l+k} - phi_l) around phi*."""
    if not (rho_star > 0.0):
        raise DensityNotPositive(f"density {rho_star} at phi* = {phi_star} is not positive")
    a = zs.angles
    N = a.size
    d = np.abs(np.remainder(a - phi_star + math.pi, TWO_PI) - math.pi)
    l = int(np.argmin(d))
    scale = 2.0 * 4**zs.n / TWO_PI * rho_star
    out = {}
    for k in range(-k_max, k_max + 1):
        j = l + k
        wraps, jj = divmod(j, N)
        out[k] = scale * (a[jj] + wraps * TWO_PI - a[l])
    return out


def cdf_distance(zs: ZeroSet, density_cdf: Callable) -> float:
    """Kolmogorov-Smirnov distance between the zero CDF and a model CDF on [0, 2pi)."""
    x = np.sort(zs.angles)
    N = x.size
    F = np.asarray(density_cdf(x), dtype=float)
    i = np.arange(1, N + 1)
    return float(max(np.max(i / N - F), np.max(F - (i - 1) / N)))


def sign_change_certified(zs: ZeroSet, floor: float = 1e-12, min_gap: float | None = None):
    """Check that Re Z_n alternates in sign between consecutive zeros.

    Z_n is probed at the midpoints between neighbouring zeros.  Returns
    (resolvable, alternates): zero i is resolvable when |Z_n| at both
    adjacent midpoints exceeds ``floor`` (mantissa scale, max weight = 1)
    and both neighbouring gaps exceed ``min_gap`` (default: ten times the
    refinement tolerance); it alternates when the two probes have opposite
    signs.
    """
    from .partition import partition_value

    if min_gap is None:
        min_gap = 10.0 * max(zs.tolerance, 1e-13)
    a = zs.angles
    ext = np.concatenate([a[-1:] - TWO_PI, a, a[:1] + TWO_PI])
    mids = 0.5 * (ext[:-1] + ext[1:])
    if zs.t > 0.0:
        m, _ = partition_value(mids, zs.t, zs.n)
    else:
        m = 2.0 * np.cos(4.0**zs.n * mids) + 0j
    f = m.real
    gaps = np.diff(ext)
    resolvable = ((np.abs(f[:-1]) > floor) & (np.abs(f[1:]) > floor)
                  & (gaps[:-1] > min_gap) & (gaps[1:] > min_gap))
    return resolvable, np.sign(f[:-1]) != np.sign(f[1:])
