"""Dynamics of the renormalization map on the cylinder.

Fixed points and critical exponents, basin classification, cone fields and
horizontal expansion, the central line field and its leaves, and the
Boettcher coordinate with the limiting density of zeros.

The Boettcher coordinate is computed from the lifted angle:
Phi_n(x) = phi~_n(x) / 4^n where phi~_n is the lift of the n-th image angle.
Each lift increment is bounded by pi, so Phi_n converges uniformly at rate
4^-n on the whole cylinder.  Phi_t = Phi(., t) is the inverse of the
holonomy g_t from the bottom circle, and the transverse measure of an arc
[a, b] of the circle at temperature t is (Phi_t(b) - Phi_t(a)) / 2pi.
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .core_maps import (
    HALF_PI,
    R_IND,
    TWO_PI,
    CylinderPoint,
    alpha_distance,
    alpha_offset,
    jacobian_phys,
    map_phys,
    rg_jacobian,
    rg_step,
    wrap_angle,
)
from .errors import DomainError, IndeterminatePoint, OrbitHitsIndeterminacy

ETA = 1.0 / 18.0
LN2 = math.log(2.0)
LN4 = math.log(4.0)


# ---------------------------------------------------------------------------
# fixed points and exponents


@dataclass(frozen=True)
class FixedPointReport:
    location: CylinderPoint
    period: int
    lambda_u: float
    lambda_c: float
    chi_u: float
    chi_c: float
    residual: float


def _line_map(t: float) -> float:
    return (2.0 * t / (1.0 + t * t)) ** 2


def critical_temperature() -> float:
    """The repelling fixed point t_c of t -> (2t/(1+t^2))^2 on the line phi = 0."""
    return optimize.brentq(lambda t: _line_map(t) - t, 0.1, 0.5, xtol=1e-16, rtol=1e-15)


def critical_point_report() -> FixedPointReport:
    tc = critical_temperature()
    p = CylinderPoint(0.0, tc)
    img = map_phys(p)
    J = jacobian_phys(p)
    lu, lc = J.a, J.d
    return FixedPointReport(p, 1, lu, lc, math.log(lu), math.log(lc),
                            math.hypot(img.phi, img.t - tc))


def critical_exponents(report: FixedPointReport | None = None):
    """(sigma_h, sigma_v) = (log4/chi_u - 1, (log4 - chi_u)/chi_c)."""
    r = report or critical_point_report()
    return LN4 / r.chi_u - 1.0, (LN4 - r.chi_u) / r.chi_c


# ---------------------------------------------------------------------------
# basins


class BasinLabel(enum.IntEnum):
    """Basin labels; the values double as PGM grey levels."""

    TOP = 0
    UNDECIDED = 128
    BOTTOM = 255


@dataclass(frozen=True)
class ClassifyConfig:
    max_iter: int = 500
    tau_threshold: float = 1e-6
    t_threshold: float = 1e-6
    r_esc: float = 1e-8
    eta: float = ETA
    persist: int = 3


def classify_array(phi, t, cfg: ClassifyConfig = ClassifyConfig()) -> np.ndarray:
    """Vectorised basin classification; returns uint8 BasinLabel values.

    Top requires 1 - t < tau_threshold on ``persist`` consecutive orbit
    points that also lie above the parabolas tau = eta*eps^2 around alpha.
    """
    phi = np.asarray(phi, dtype=float).ravel()
    t = np.asarray(t, dtype=float).ravel()
    labels = np.full(phi.size, BasinLabel.UNDECIDED, dtype=np.uint8)
    ph, tt, tau = phi.copy(), t.copy(), 1.0 - t
    streak = np.zeros(phi.size, dtype=np.int32)
    active = np.arange(phi.size)
    for it in range(cfg.max_iter + 1):
        p, a, b = ph[active], tt[active], tau[active]
        eps = alpha_offset(p)
        bottom = a < cfg.t_threshold
        near_alpha = np.hypot(eps, b) < cfg.r_esc
        top_now = (b < cfg.tau_threshold) & (b < cfg.eta * eps * eps)
        s = np.where(top_now, streak[active] + 1, 0)
        streak[active] = s
        top = (s >= cfg.persist) & ~bottom
        labels[active[bottom]] = BasinLabel.BOTTOM
        labels[active[top]] = BasinLabel.TOP
        done = bottom | top | near_alpha
        active = active[~done]
        if active.size == 0 or it == cfg.max_iter:
            break
        p, a, b = ph[active], tt[active], tau[active]
        dphi, a1, b1 = rg_step(p, a, b)
        ph[active] = np.mod(4.0 * p + dphi, TWO_PI)
        tt[active] = a1
        tau[active] = b1
    return labels


def classify(p: CylinderPoint, max_iter: int = 500, tau_threshold: float = 1e-6,
             t_threshold: float = 1e-6, r_esc: float = 1e-8) -> BasinLabel:
    cfg = ClassifyConfig(max_iter, tau_threshold, t_threshold, r_esc)
    return BasinLabel(int(classify_array([p.phi], [p.t], cfg)[0]))


@dataclass
class BasinGrid:
    labels: np.ndarray  # shape (res_t, res_phi); row 0 is the highest t
    phi: np.ndarray
    t: np.ndarray

    @property
    def undecided_fraction(self) -> float:
        return float(np.mean(self.labels == BasinLabel.UNDECIDED))

    def top_fraction_row(self, t_value: float) -> float:
        """Share of Top among decided labels in the row nearest t_value."""
        i = int(np.argmin(np.abs(self.t - t_value)))
        row = self.labels[i]
        decided = row != BasinLabel.UNDECIDED
        return float(np.mean(row[decided] == BasinLabel.TOP)) if decided.any() else float("nan")

    def to_pgm(self) -> bytes:
        h, w = self.labels.shape
        return f"P5\n{w} {h}\n255\n".encode("ascii") + self.labels.astype(np.uint8).tobytes()

    def stats(self) -> dict:
        return {
            "res_phi": int(self.labels.shape[1]),
            "res_t": int(self.labels.shape[0]),
            "undecided_fraction": self.undecided_fraction,
            "top_fraction": float(np.mean(self.labels == BasinLabel.TOP)),
            "bottom_fraction": float(np.mean(self.labels == BasinLabel.BOTTOM)),
        }


def basin_grid(res_phi: int, res_t: int, region=(0.0, TWO_PI, 0.0, 1.0),
               cfg: ClassifyConfig = ClassifyConfig(), workers: int = 1) -> BasinGrid:
    """Classify pixel centres of a uniform grid; rows run from high t to low t."""
    phi0, phi1, t0, t1 = region
    phi = phi0 + (np.arange(res_phi) + 0.5) * (phi1 - phi0) / res_phi
    t = t1 - (np.arange(res_t) + 0.5) * (t1 - t0) / res_t
    P, T = np.meshgrid(phi, t)
    flat_p, flat_t = P.ravel(), T.ravel()
    # fixed partition into row blocks keeps the output independent of workers
    blocks = np.array_split(np.arange(flat_p.size), max(1, 4 * res_t // 64))
    out = np.empty(flat_p.size, dtype=np.uint8)

    def work(idx):
        return idx, classify_array(flat_p[idx], flat_t[idx], cfg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(work, blocks))
    else:
        results = [work(b) for b in blocks]
    for idx, lab in results:
        out[idx] = lab
    return BasinGrid(out.reshape(res_t, res_phi), phi, t)


# ---------------------------------------------------------------------------
# cone fields and expansion


@dataclass(frozen=True)
class ConeSpec:
    """Horizontal cone field {|dt| <= s(x) |dphi|}.

    ``algebraic``: s = sqrt(tau (2 - tau)).  ``modified``: the same formula
    evaluated at tau* = max(tau, min(tau_bar, eta eps^2)) with
    tau_bar = eta eps_bar^2, which equals the algebraic slope below the top
    neighbourhood and inside the parabolic regions, ~|eps|/3 near alpha and
    the constant sqrt(tau_bar (2 - tau_bar)) elsewhere near the top.
    """

    kind: str = "algebraic"
    eps_bar: float = 0.05
    eta: float = ETA

    def __post_init__(self):
        if self.kind not in ("algebraic", "modified"):
            raise DomainError(f"unknown cone kind {self.kind!r}")

    @property
    def tau_bar(self) -> float:
        return self.eta * self.eps_bar**2

    def slope(self, phi, t, tau=None):
        tau = 1.0 - np.asarray(t, dtype=float) if tau is None else np.asarray(tau, dtype=float)
        if self.kind == "modified":
            eps = alpha_offset(phi)
            tau = np.maximum(tau, np.minimum(self.tau_bar, self.eta * eps * eps))
        return np.sqrt(tau * (2.0 - tau))


ALGEBRAIC = ConeSpec("algebraic")


def expansion_factor_array(phi, t, cone: ConeSpec = ALGEBRAIC, tau=None):
    """min over v = (1, +-s) of the phi-component of DR v."""
    a, b, _, _ = rg_jacobian(phi, t, tau)
    s = cone.slope(phi, t, tau)
    return a - np.abs(b) * s


def expansion_factor_min(p: CylinderPoint, cone: ConeSpec = ALGEBRAIC, r_ind: float = R_IND) -> float:
    if float(alpha_distance(p.phi, 1.0 - p.t)) < r_ind:
        raise IndeterminatePoint(f"({p.phi}, {p.t}) within {r_ind} of alpha")
    return float(expansion_factor_array(p.phi, p.t, cone))


@dataclass(frozen=True)
class ConeCheck:
    ok: bool
    slope_in: float
    slope_out: float
    slope_allowed: float
    note: str = ""


def cone_invariance_array(phi, t, cone: ConeSpec = ALGEBRAIC, tau=None):
    """Image slopes of the boundary vectors against the cone at R(x).

    Returns (ok, slope_in, slope_out, slope_allowed) arrays.  ok is the strict
    inequality slope_out < slope_allowed, except that a degenerate image cone
    (allowed = 0 on the top circle) accepts an exactly horizontal image.
    """
    phi = np.asarray(phi, dtype=float)
    t = np.asarray(t, dtype=float)
    tau = 1.0 - t if tau is None else np.asarray(tau, dtype=float)
    a, b, c, d = rg_jacobian(phi, t, tau)
    s = cone.slope(phi, t, tau)
    dphi, t1, tau1 = rg_step(phi, t, tau)
    phi1 = np.mod(4.0 * phi + dphi, TWO_PI)
    allowed = cone.slope(phi1, t1, tau1)
    out = np.zeros_like(s)
    for sg in (1.0, -1.0):
        x = a + sg * b * s
        y = c + sg * d * s
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.maximum(out, np.abs(y) / np.abs(x))
    ok = (out < allowed) | ((allowed == 0.0) & (out == 0.0))
    return ok, s, out, allowed


def cone_invariance_check(p: CylinderPoint, cone: ConeSpec = ALGEBRAIC,
                          r_ind: float = R_IND) -> ConeCheck:
    if float(alpha_distance(p.phi, 1.0 - p.t)) < r_ind:
        return ConeCheck(False, float("nan"), float("nan"), float("nan"), "point within exclusion radius")
    ok, s, out, allowed = cone_invariance_array(p.phi, p.t, cone)
    return ConeCheck(bool(ok), float(s), float(out), float(allowed))


def horizontal_growth(phi, t, n: int, cone: ConeSpec = ALGEBRAIC, r_excl: float = 0.0):
    """Log growth of the phi-component of DR^k v along orbits, k = 1..n.

    v runs over both boundary vectors (1, +-s(x)) of the cone and the smaller
    growth is kept.  Orbits entering the r_excl-ball of alpha are flagged.
    Returns (logG of shape (n, N), valid mask of shape (N,)).
    """
    phi = np.asarray(phi, dtype=float).ravel().copy()
    t = np.asarray(t, dtype=float).ravel().copy()
    tau = 1.0 - t
    s = cone.slope(phi, t, tau)
    logs = []
    valid = np.ones(phi.size, dtype=bool)
    for sg in (1.0, -1.0):
        ph, tt, ta = phi.copy(), t.copy(), tau.copy()
        v0, v1 = np.ones_like(ph), sg * s
        acc = np.zeros_like(ph)
        rows = []
        for _ in range(n):
            valid &= alpha_distance(ph, ta) >= r_excl
            a, b, c, d = rg_jacobian(ph, tt, ta)
            w0, w1 = a * v0 + b * v1, c * v0 + d * v1
            with np.errstate(divide="ignore", invalid="ignore"):
                acc = acc + np.log(np.abs(w0))
                v0, v1 = np.sign(w0), w1 / np.abs(w0)
            rows.append(acc.copy())
            dphi, tt, ta = rg_step(ph, tt, ta)
            ph = np.mod(4.0 * ph + dphi, TWO_PI)
        logs.append(np.array(rows))
    return np.minimum(logs[0], logs[1]), valid


def lyapunov_u_array(phi, t, n: int = 200, r_ind: float = R_IND):
    """(1/n) sum log |phi-growth| of the horizontal vector along each orbit."""
    ph = np.asarray(phi, dtype=float).ravel().copy()
    tt = np.asarray(t, dtype=float).ravel().copy()
    ta = 1.0 - tt
    v0, v1 = np.ones_like(ph), np.zeros_like(ph)
    acc = np.zeros_like(ph)
    hit = np.zeros(ph.size, dtype=bool)
    for _ in range(n):
        hit |= alpha_distance(ph, ta) < r_ind
        a, b, c, d = rg_jacobian(ph, tt, ta)
        w0, w1 = a * v0 + b * v1, c * v0 + d * v1
        with np.errstate(divide="ignore", invalid="ignore"):
            acc += np.log(np.abs(w0))
            v0, v1 = np.sign(w0), w1 / np.abs(w0)
        dphi, tt, ta = rg_step(ph, tt, ta)
        ph = np.mod(4.0 * ph + dphi, TWO_PI)
    chi = acc / n
    return np.where(hit, np.nan, chi)


def lyapunov_u(p: CylinderPoint, n: int = 200, r_ind: float = R_IND) -> float:
    chi = float(lyapunov_u_array([p.phi], [p.t], n, r_ind)[0])
    if math.isnan(chi):
        raise IndeterminatePoint(f"orbit of ({p.phi}, {p.t}) enters the exclusion radius")
    return chi


# ---------------------------------------------------------------------------
# central direction and leaves


def _orbit(phi: float, t: float, n: int, r_ind: float):
    pts = []
    tau = 1.0 - t
    for k in range(n):
        if float(alpha_distance(phi, tau)) < r_ind:
            raise OrbitHitsIndeterminacy(k)
        pts.append((phi, t, tau))
        dphi, t1, tau1 = rg_step(phi, t, tau)
        phi, t, tau = math.fmod(4.0 * phi + float(dphi), TWO_PI), float(t1), float(tau1)
    return pts


def central_direction(p: CylinderPoint, n: int = 12, r_ind: float = R_IND):
    """Unit tangent (dphi, dt), dt >= 0, of the central line field at p.

    The vertical direction at R^n(p) is pulled back through DR^-1 along the
    orbit.  Where DR is singular (bottom, top, collapsing intervals) the
    pull-back restarts from the vertical, which is the kernel there.
    """
    pts = _orbit(p.phi, p.t, n, r_ind)
    v0, v1 = 0.0, 1.0
    for ph, tt, ta in reversed(pts):
        a, b, c, d = (float(x) for x in rg_jacobian(ph, tt, ta))
        det = a * d - b * c
        if det == 0.0 or not math.isfinite(det):
            v0, v1 = 0.0, 1.0
            continue
        w0, w1 = (d * v0 - b * v1) / det, (-c * v0 + a * v1) / det
        nrm = math.hypot(w0, w1)
        if nrm == 0.0 or not math.isfinite(nrm):
            v0, v1 = 0.0, 1.0
            continue
        v0, v1 = w0 / nrm, w1 / nrm
    if v1 < 0.0:
        v0, v1 = -v0, -v1
    return v0, v1


def central_direction_array(phi, t, n: int = 12):
    """Vectorised central direction; returns (dphi, dt) arrays."""
    ph = np.asarray(phi, dtype=float).ravel().copy()
    tt = np.asarray(t, dtype=float).ravel().copy()
    ta = 1.0 - tt
    orbit = []
    for _ in range(n):
        orbit.append((ph.copy(), tt.copy(), ta.copy()))
        dphi, tt, ta = rg_step(ph, tt, ta)
        ph = np.mod(4.0 * ph + dphi, TWO_PI)
    v0, v1 = np.zeros_like(ph), np.ones_like(ph)
    for p_, t_, ta_ in reversed(orbit):
        a, b, c, d = rg_jacobian(p_, t_, ta_)
        det = a * d - b * c
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            w0, w1 = (d * v0 - b * v1) / det, (-c * v0 + a * v1) / det
            nrm = np.hypot(w0, w1)
            ok = (det != 0.0) & np.isfinite(nrm) & (nrm > 0.0)
            v0 = np.where(ok, w0 / nrm, 0.0)
            v1 = np.where(ok, w1 / nrm, 1.0)
    flip = v1 < 0.0
    return np.where(flip, -v0, v0), np.where(flip, -v1, v1)


@dataclass
class VerticalLeaf:
    t: np.ndarray
    phi: np.ndarray

    @property
    def base(self) -> float:
        return float(self.phi[0])

    def at(self, t_value: float) -> float:
        return float(np.interp(t_value, self.t, self.phi))

    def to_csv(self) -> str:
        return "t,phi\n" + "".join(f"{a!r},{b!r}\n" for a, b in zip(self.t.tolist(), self.phi.tolist()))


def central_leaf(phi0: float, t_max: float = 1.0 - 1e-3, n_adapt: int = 16,
                 dt_max: float = 1e-3, max_turn_deg: float = 1.0,
                 dt_min: float = 1e-7) -> VerticalLeaf:
    """Integrate the central line field upward from (phi0, 0) with RK4.

    The step starts at dt_max and is halved while the direction field turns
    by more than max_turn_deg across the step.
    """
    if not (0.0 <= phi0 < TWO_PI):
        raise DomainError(f"phi0 = {phi0} outside [0, 2pi)")
    if not (0.0 < t_max < 1.0):
        raise DomainError(f"t_max = {t_max} must lie in (0, 1)")

    def slope(ph, tt):
        d0, d1 = central_direction(CylinderPoint(ph, tt), n_adapt)
        return d0 / d1 if d1 > 1e-300 else 0.0

    def angle(ph, tt):
        d0, d1 = central_direction(CylinderPoint(ph, tt), n_adapt)
        return math.atan2(d1, d0)

    ts, phis = [0.0], [phi0]
    ph, tt = phi0, 0.0
    turn = math.radians(max_turn_deg)
    while tt < t_max:
        h = min(dt_max, t_max - tt)
        while True:
            k1 = slope(ph, tt)
            k2 = slope(ph + 0.5 * h * k1, tt + 0.5 * h)
            k3 = slope(ph + 0.5 * h * k2, tt + 0.5 * h)
            k4 = slope(ph + h * k3, tt + h)
            nxt = ph + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
            dturn = abs(math.atan(k4) - math.atan(k1))
            if dturn <= turn or h <= dt_min:
                break
            h *= 0.5
        ph, tt = nxt, tt + h
        ts.append(tt)
        phis.append(ph)
    return VerticalLeaf(np.array(ts), np.array(phis))


# ---------------------------------------------------------------------------
# Boettcher coordinate, density and measure


def bottcher_coordinate(phi, t, n: int = 32) -> np.ndarray:
    """Phi_n(phi, t) = lifted R^n angle / 4^n (lifted in phi; Phi(0, t) = 0)."""
    phi = np.asarray(phi, dtype=float)
    ph = phi.copy()
    tt = np.broadcast_to(np.asarray(t, dtype=float), phi.shape).copy()
    ta = 1.0 - tt
    acc = phi.copy()
    scale = 1.0
    for _ in range(n):
        dphi, tt, ta = rg_step(ph, tt, ta)
        scale *= 0.25
        acc = acc + scale * dphi
        ph = np.mod(4.0 * ph + dphi, TWO_PI)
    return acc


def density_cdf(t: float, n: int = 32):
    """Cumulative distribution phi -> mu_t([0, phi]) on [0, 2pi)."""
    def cdf(phi):
        return bottcher_coordinate(np.mod(phi, TWO_PI), t, n) / TWO_PI
    return cdf


def holonomy(phi0: float, t: float, n: int = 32) -> float:
    """g_t(phi0): the angle at temperature t on the leaf based at phi0."""
    if t == 0.0:
        return phi0

    def f(x):
        return float(bottcher_coordinate(np.array([x]), t, n)[0]) - phi0

    lo, hi = phi0 - 1.1, phi0 + 1.1  # |Phi - phi| <= pi/3
    return optimize.brentq(f, lo, hi, xtol=1e-15, rtol=1e-15)


class OutsideBasin:
    """Sentinel returned where the orbit is not certified to reach the bottom."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "OUTSIDE_BASIN"

    def __bool__(self):
        return False


OUTSIDE_BASIN = OutsideBasin()


@dataclass(frozen=True)
class DensityConfig:
    n_max: int = 80
    tol: float = 1e-10
    t_threshold: float = 1e-6
    above_tc_steps: int = 5


def _density_scalar(phi: float, t: float, cfg: DensityConfig, t_c: float):
    """(1,1) entry of DR^n / 4^n with adaptive n; None when outside the basin."""
    if t == 0.0:
        return 1.0
    tau = 1.0 - t
    v0, v1 = 1.0, 0.0
    prev = None
    above = 0
    for _ in range(cfg.n_max):
        if t < cfg.t_threshold and prev is not None and abs(v0 - prev) <= cfg.tol * max(1.0, abs(v0)):
            return v0
        c = math.cos(phi)
        c2 = c * c
        s2p = math.sin(2.0 * phi)
        s = tau * (2.0 - tau)
        t2 = t * t
        zeta = s * s + 4.0 * t2 * c2
        if zeta == 0.0:
            return None
        a = (s + 2.0 * t2 * c2) / zeta
        b = -t * s2p / zeta
        zz = zeta * zeta
        cc = -t2 * s * s * s2p / zz
        dd = 2.0 * t * s * (1.0 + t2) * c2 / zz
        prev = v0
        v0, v1 = a * v0 + b * v1, cc * v0 + dd * v1
        dphi = -2.0 * math.atan2(t2 * s2p, s + 2.0 * t2 * c2)
        phi = math.fmod(4.0 * phi + dphi, TWO_PI)
        t, tau = 4.0 * t2 * c2 / zeta, s * s / zeta
        above = above + 1 if t > t_c else 0
        if above >= cfg.above_tc_steps:
            return None
    return None


_TC = None


def _tc() -> float:
    global _TC
    if _TC is None:
        _TC = critical_temperature()
    return _TC


def bottcher_density(phi: float, t: float, cfg: DensityConfig = DensityConfig()):
    """Density rho_t(phi) of the limiting zero distribution, or OUTSIDE_BASIN."""
    if not (0.0 <= t < 1.0):
        raise DomainError(f"t must lie in [0, 1), got {t}")
    r = _density_scalar(float(phi), float(t), cfg, _tc())
    return OUTSIDE_BASIN if r is None else r


def density_array(phi, t: float, cfg: DensityConfig = DensityConfig()) -> np.ndarray:
    """rho_t on an array of angles; NaN marks points outside the basin."""
    tc = _tc()
    phi = np.asarray(phi, dtype=float)
    out = np.array([_density_scalar(float(p), float(t), cfg, tc) for p in phi.ravel()], dtype=object)
    return np.array([np.nan if v is None else v for v in out], dtype=float).reshape(phi.shape)


def measure_of_interval(a: float, b: float, t: float, cfg: DensityConfig = DensityConfig(),
                        epsabs: float = 1e-12, epsrel: float = 1e-11) -> float:
    """mu_t([a, b]) by adaptive quadrature of the density (0 outside the basin)."""
    if not a < b:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    if t == 0.0:
        return (b - a) / TWO_PI
    tc = _tc()

    def f(x):
        r = _density_scalar(x, t, cfg, tc)
        return 0.0 if r is None else r

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=500)
    return val / TWO_PI


def transfer_defect(phi, t, cfg: DensityConfig = DensityConfig(), n_phi: int = 40):
    """Residuals of the pointwise transfer rule at the points (phi, t).

    Returns (literal, corrected): literal = 4 rho(x) - lambda_h(x) rho(Rx);
    corrected subtracts the leaf-tilt term Phi_t(Rx) * dt'/dphi(x), with
    Phi_t the t-derivative of the Boettcher coordinate.
    """
    phi = np.asarray(phi, dtype=float)
    a, _, c, _ = rg_jacobian(phi, t)
    dphi, t1, _ = rg_step(phi, t)
    phi1 = np.mod(4.0 * phi + dphi, TWO_PI)
    rho = density_array(phi, t, cfg)
    rho1 = np.array([_density_scalar(float(p), float(q), cfg, _tc()) for p, q in zip(phi1, t1)], dtype=float)
    dphi_dt = _bottcher_dt(phi1, t1, n_phi)
    literal = 4.0 * rho - a * rho1
    return literal, literal - c * dphi_dt


def _bottcher_dt(phi, t, n: int):
    """d Phi / dt by forward propagation of the t-tangent vector."""
    ph = np.asarray(phi, dtype=float).copy()
    tt = np.asarray(t, dtype=float).copy()
    ta = 1.0 - tt
    v0, v1 = np.zeros_like(ph), np.ones_like(ph)
    for _ in range(n):
        a, b, c, d = rg_jacobian(ph, tt, ta)
        v0, v1 = 0.25 * (a * v0 + b * v1), 0.25 * (c * v0 + d * v1)
        dphi, tt, ta = rg_step(ph, tt, ta)
        ph = np.mod(4.0 * ph + dphi, TWO_PI)
    return v0


# ---------------------------------------------------------------------------
# tongues


def preindeterminacy_points(m: int) -> np.ndarray:
    """The 2^(m+1) angles (+-pi/2 + 2 pi k) / 2^m on the top circle, sorted."""
    if m < 0:
        raise DomainError("level must be nonnegative")
    k = np.arange(2**m)
    pts = np.concatenate([(HALF_PI + TWO_PI * k) / 2**m, (-HALF_PI + TWO_PI * k) / 2**m])
    return np.sort(np.mod(pts, TWO_PI))


def tongue_bottoms(m: int):
    """Bottom intervals of the level-m central tongues on the bottom circle.

    Level 0: (pi/4, 3pi/4) and (5pi/4, 7pi/4).  Level m: the components of the
    z^(4^m)-preimage of the level-0 bottoms that lie outside all lower-level
    bottoms; there are 2^(m+1) of them, each of length pi / 2^(2m+1).
    """
    if m < 0:
        raise DomainError("level must be nonnegative")
    base = [(0.25 * math.pi, 0.75 * math.pi), (1.25 * math.pi, 1.75 * math.pi)]
    lower = []
    out = []
    for level in range(m + 1):
        q = 4**level
        cand = [((a + TWO_PI * k) / q, (b + TWO_PI * k) / q) for k in range(q) for a, b in base]
        cur = [iv for iv in cand
               if not any(lo <= iv[0] and iv[1] <= hi for lo, hi in lower)]
        if level == m:
            out = sorted(cur)
        lower.extend(cur)
    return out


@dataclass
class TongueMass:
    level: int
    t: float
    intervals: list = field(default_factory=list)
    masses: list = field(default_factory=list)


def tongue_masses(m: int, t: float, cfg: DensityConfig = DensityConfig()) -> TongueMass:
    """mu_t mass of each level-m tongue cross-section at temperature t."""
    res = TongueMass(m, t)
    for a, b in tongue_bottoms(m):
        ga, gb = holonomy(a, t), holonomy(b, t)
        res.intervals.append((ga, gb))
        res.masses.append(measure_of_interval(ga, gb, t, cfg))
    return res


def orbit_points(p: CylinderPoint, n: int):
    """First n+1 points of the orbit, with phi wrapped."""
    pts = [p.normalized()]
    ph, tt, ta = p.phi, p.t, 1.0 - p.t
    for _ in range(n):
        dphi, tt, ta = rg_step(ph, tt, ta)
        ph = wrap_angle(4.0 * ph + float(dphi))
        tt, ta = float(tt), float(ta)
        pts.append(CylinderPoint(ph, tt))
    return pts


def dominated_splitting_ratio(phi, t, n: int = 20, n_central: int = 12):
    """Log of |DR^n e_h| / |DR^n e_c| per point, e_h horizontal, e_c central.

    Entries are NaN where either growth is zero or undefined (orbits that
    land on the top or bottom circle collapse the central direction).
    """
    ph = np.asarray(phi, dtype=float).ravel().copy()
    tt = np.asarray(t, dtype=float).ravel().copy()
    c0, c1 = central_direction_array(ph, tt, n + n_central)
    h0, h1 = np.ones_like(ph), np.zeros_like(ph)
    ta = 1.0 - tt
    lh = np.zeros_like(ph)
    lc = np.zeros_like(ph)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(n):
            a, b, c, d = rg_jacobian(ph, tt, ta)
            h0, h1 = a * h0 + b * h1, c * h0 + d * h1
            c0, c1 = a * c0 + b * c1, c * c0 + d * c1
            nh, nc = np.hypot(h0, h1), np.hypot(c0, c1)
            lh += np.log(nh)
            lc += np.log(nc)
            h0, h1, c0, c1 = h0 / nh, h1 / nh, c0 / nc, c1 / nc
            dphi, tt, ta = rg_step(ph, tt, ta)
            ph = np.mod(4.0 * ph + dphi, TWO_PI)
        out = lh - lc
    return np.where(np.isfinite(out), out, np.nan)
