"""The renormalization map on the physical cylinder and its companions.

Points of the cylinder are pairs ``(phi, t)`` where ``z = exp(i phi)`` is the
field-like variable and ``t = exp(-2J/T)`` the temperature-like one.  The map is

    z' = (z^2 + t^2) / (z^-2 + t^2),
    t' = (z^2 + z^-2 + 2) / (z^2 + z^-2 + t^2 + t^-2).

On the real cylinder we never evaluate these expressions verbatim.  Writing
``tau = 1 - t`` and ``s = 1 - t^2 = tau (2 - tau)`` they become

    t'   = 4 t^2 cos^2(phi) / (s^2 + 4 t^2 cos^2(phi)),
    tau' = s^2 / (s^2 + 4 t^2 cos^2(phi)),
    phi' = 4 phi - 2 atan2(t^2 sin 2phi, s + 2 t^2 cos^2(phi)),

which are free of cancellation near the top circle and at the bottom.  The
angle update is the continuous lift of ``phi'``: summing the correction terms
along an orbit gives the lifted angle used for zeros and the Boettcher
coordinate.  All array kernels carry ``tau`` alongside ``t`` so that orbits
that approach the top keep full relative precision in ``1 - t``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import BottomAtInfinity, CollapsingLine, DomainError, IndeterminatePoint

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi
R_IND = 1e-12


def wrap_angle(phi):
    """Reduce an angle (scalar or array) to [0, 2pi)."""
    if np.ndim(phi) == 0:
        r = math.fmod(float(phi), TWO_PI)
        if r < 0.0:
            r += TWO_PI
        return 0.0 if r >= TWO_PI else r
    r = np.mod(phi, TWO_PI)
    return np.where(r >= TWO_PI, 0.0, r)


def circular_distance(a, b):
    """Distance between angles measured along the circle."""
    d = np.abs(np.remainder(np.asarray(a) - np.asarray(b) + math.pi, TWO_PI) - math.pi)
    return float(d) if np.ndim(d) == 0 else d


def alpha_offset(phi):
    """Signed offset eps = (+-pi/2) - phi to the nearest of +-pi/2 (mod 2pi)."""
    return HALF_PI - np.remainder(np.asarray(phi, dtype=float), math.pi)


def alpha_distance(phi, tau):
    """Euclidean distance sigma = sqrt(eps^2 + tau^2) to the nearest alpha point."""
    return np.hypot(alpha_offset(phi), tau)


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class CylinderPoint:
    phi: float
    t: float

    @property
    def tau(self) -> float:
        return 1.0 - self.t

    @property
    def z(self) -> complex:
        return cmath.exp(1j * self.phi)

    def normalized(self) -> "CylinderPoint":
        return CylinderPoint(wrap_angle(self.phi), self.t)

    def as_tuple(self):
        return (self.phi, self.t)


@dataclass(frozen=True)
class AffinePoint:
    """Point (u, w) of the Moebius-band chart; on the band w = conj(u)."""

    u: complex
    w: complex

    @property
    def zeta(self) -> complex:
        return self.w / self.u

    @property
    def xi(self) -> complex:
        return 1.0 / self.u


@dataclass(frozen=True)
class Jacobian2:
    """2x2 real matrix d(phi', t')/d(phi, t) stored row-major."""

    a: float
    b: float
    c: float
    d: float

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def lambda_h(self) -> float:
        """Horizontal expansion factor (upper-left entry)."""
        return self.a

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def apply(self, v):
        return (self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1])

    def __matmul__(self, other: "Jacobian2") -> "Jacobian2":
        return Jacobian2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def scaled(self, k: float) -> "Jacobian2":
        return Jacobian2(k * self.a, k * self.b, k * self.c, k * self.d)


@dataclass(frozen=True)
class BlowupPoint:
    """Local coordinates near alpha_sign = (sign*pi/2, 1).

    ``eps = sign*pi/2 - phi`` and ``tau = 1 - t``.
    """

    eps: float
    tau: float
    sign: int = 1

    @property
    def kappa(self) -> float:
        if self.eps == 0.0:
            raise ZeroDivisionError("kappa undefined on the collapsing line eps = 0")
        return self.tau / self.eps

    @property
    def sigma(self) -> float:
        return math.hypot(self.eps, self.tau)

    @classmethod
    def from_cylinder(cls, p: CylinderPoint, sign: int | None = None) -> "BlowupPoint":
        phi = wrap_angle(p.phi)
        if sign is None:
            sign = 1 if phi < math.pi else -1
        centre = HALF_PI if sign > 0 else 3.0 * HALF_PI
        return cls(centre - phi, 1.0 - p.t, sign)

    @classmethod
    def from_direction(cls, omega: float, radius: float, sign: int = 1) -> "BlowupPoint":
        """Approach point at distance ``radius`` along angle ``omega`` from the vertical.

        omega = 0 runs straight down the collapsing interval, omega = +-pi/2
        runs along the top circle.
        """
        return cls(-radius * math.sin(omega), radius * math.cos(omega), sign)

    def to_cylinder(self) -> CylinderPoint:
        centre = HALF_PI if self.sign > 0 else -HALF_PI
        return CylinderPoint(wrap_angle(centre - self.eps), 1.0 - self.tau)


# ---------------------------------------------------------------------------
# array kernels


def rg_step(phi, t, tau=None):
    """One step of the map on arrays.

    Returns ``(dphi, t', tau')`` where ``dphi`` is the lift increment: the
    lifted image angle is ``4*phi + dphi``.  ``tau`` defaults to ``1 - t``.
    """
    phi = np.asarray(phi, dtype=float)
    t = np.asarray(t, dtype=float)
    tau = 1.0 - t if tau is None else np.asarray(tau, dtype=float)
    c2 = np.cos(phi) ** 2
    s = tau * (2.0 - tau)
    t2 = t * t
    k = 4.0 * t2 * c2
    den = s * s + k
    with np.errstate(invalid="ignore", divide="ignore"):
        t_new = k / den
        tau_new = s * s / den
    dphi = -2.0 * np.arctan2(t2 * np.sin(2.0 * phi), s + 2.0 * t2 * c2)
    return dphi, t_new, tau_new


def rg_jacobian(phi, t, tau=None):
    """Entries (a, b, c, d) of DR in (phi, t) coordinates on arrays."""
    phi = np.asarray(phi, dtype=float)
    t = np.asarray(t, dtype=float)
    tau = 1.0 - t if tau is None else np.asarray(tau, dtype=float)
    c2 = np.cos(phi) ** 2
    s2phi = np.sin(2.0 * phi)
    s = tau * (2.0 - tau)
    t2 = t * t
    zeta = s * s + 4.0 * t2 * c2
    with np.errstate(invalid="ignore", divide="ignore"):
        a = 4.0 * (s + 2.0 * t2 * c2) / zeta
        b = -4.0 * t * s2phi / zeta
        zz = zeta * zeta
        c = -4.0 * t2 * s * s * s2phi / zz
        d = 8.0 * t * s * (1.0 + t2) * c2 / zz
    return a, b, c, d


def f_step(phi, t, tau=None):
    """Array form of the map f; returns (phi' lifted increment form, t', tau').

    The lifted image angle is ``2*phi + dphi``.
    """
    phi = np.asarray(phi, dtype=float)
    t = np.asarray(t, dtype=float)
    tau = 1.0 - t if tau is None else np.asarray(tau, dtype=float)
    h2 = np.cos(0.5 * phi) ** 2
    k = 4.0 * t * h2
    den = tau * tau + k
    with np.errstate(invalid="ignore", divide="ignore"):
        t_new = k / den
        tau_new = tau * tau / den
    dphi = -2.0 * np.arctan2(t * np.sin(phi), tau + 2.0 * t * h2)
    return dphi, t_new, tau_new


# ---------------------------------------------------------------------------
# scalar operations


def _check_t(t: float, diagnostic: bool) -> None:
    if not diagnostic and not (0.0 <= t <= 1.0):
        raise DomainError(f"t = {t} outside [0, 1]; use diagnostic=True to leave the cylinder")
    if not math.isfinite(t):
        raise DomainError(f"t = {t} is not finite")


def _check_alpha(phi: float, tau: float, r_ind: float) -> None:
    if float(alpha_distance(phi, tau)) < r_ind:
        raise IndeterminatePoint(f"({phi}, {1 - tau}) within {r_ind} of an indeterminacy point")


def map_phys(p: CylinderPoint, r_ind: float = R_IND, diagnostic: bool = False) -> CylinderPoint:
    """The renormalization map R on the cylinder."""
    _check_t(p.t, diagnostic)
    _check_alpha(p.phi, 1.0 - p.t, r_ind)
    dphi, t1, _ = rg_step(p.phi, p.t)
    return CylinderPoint(wrap_angle(4.0 * p.phi + float(dphi)), float(t1))


def map_phys_tau(phi: float, t: float, tau: float, r_ind: float = R_IND):
    """Scalar step carrying tau; returns (phi', t', tau') with phi' in [0, 2pi)."""
    _check_alpha(phi, tau, r_ind)
    dphi, t1, tau1 = rg_step(phi, t, tau)
    return wrap_angle(4.0 * phi + float(dphi)), float(t1), float(tau1)


def map_phys_complex(z, t):
    """Verbatim rational formula on complex z (and t); no pole handling."""
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=complex)
    z2 = z * z
    iz2 = 1.0 / z2
    t2 = t * t
    z_new = (z2 + t2) / (iz2 + t2)
    t_new = (z2 + iz2 + 2.0) / (z2 + iz2 + t2 + 1.0 / t2)
    return z_new, t_new


def map_Q(p: CylinderPoint) -> CylinderPoint:
    return CylinderPoint(wrap_angle(2.0 * p.phi), p.t * p.t)


def map_f(p: CylinderPoint, r_ind: float = R_IND, diagnostic: bool = False) -> CylinderPoint:
    """The map f with R = f o Q; indeterminate at (pi, 1)."""
    _check_t(p.t, diagnostic)
    tau = 1.0 - p.t
    if math.hypot(float(circular_distance(p.phi, math.pi)), tau) < r_ind:
        raise IndeterminatePoint(f"({p.phi}, {p.t}) within {r_ind} of (pi, 1)")
    dphi, t1, _ = f_step(p.phi, p.t, tau)
    return CylinderPoint(wrap_angle(2.0 * p.phi + float(dphi)), float(t1))


def map_mig(a: AffinePoint, r_ind: float = R_IND) -> AffinePoint:
    """The migdal map ((u^2+1)/(u+w))^2, ((w^2+1)/(u+w))^2 on the affine chart."""
    u, w = complex(a.u), complex(a.w)
    for sgn in (1.0, -1.0):
        if abs(u - sgn * 1j) < r_ind and abs(w + sgn * 1j) < r_ind:
            raise IndeterminatePoint(f"({u}, {w}) within {r_ind} of an indeterminacy point")
    den = u + w
    if abs(den) < r_ind:
        raise CollapsingLine(f"|u + w| = {abs(den)} < {r_ind}")
    return AffinePoint(((u * u + 1.0) / den) ** 2, ((w * w + 1.0) / den) ** 2)


def psi(p: CylinderPoint) -> AffinePoint:
    """Semiconjugacy (z, t) -> (1/(z t), z/t)."""
    if p.t == 0.0:
        raise BottomAtInfinity("t = 0 is sent to infinity; use the (xi, zeta) chart")
    z = p.z
    return AffinePoint(1.0 / (z * p.t), z / p.t)


def psi_inverse(a: AffinePoint) -> CylinderPoint:
    """Recover (phi, t) as the polar coordinates of 1/u."""
    r = 1.0 / complex(a.u)
    return CylinderPoint(wrap_angle(cmath.phase(r)), abs(r))


def jacobian_phys(p: CylinderPoint) -> Jacobian2:
    a, b, c, d = rg_jacobian(p.phi, p.t)
    return Jacobian2(float(a), float(b), float(c), float(d))


def dr_near_alpha(bp: BlowupPoint) -> Jacobian2:
    """Leading-order Jacobian near alpha in (phi, t) coordinates."""
    e, tau = bp.eps, bp.tau
    s2 = e * e + tau * tau
    k = 2.0 / (s2 * s2)
    return Jacobian2(k * (e * e + tau) * s2, -k * e * s2, -k * e * tau * tau, k * tau * e * e)


def blowup_image(omega: float) -> CylinderPoint:
    """Limit of R along the approach direction omega; a point of t = sin^2(phi/2)."""
    if abs(omega) > HALF_PI + 1e-15:
        raise DomainError(f"|omega| = {abs(omega)} exceeds pi/2")
    return CylinderPoint(wrap_angle(2.0 * omega), math.sin(omega) ** 2)


def blowup_locus_residual(p: CylinderPoint) -> float:
    return abs(p.t - math.sin(0.5 * p.phi) ** 2)


def principal_locus_t(phi: float):
    """Temperature of the level-0 zero locus t = -cos(phi) over phi, if any."""
    phi = wrap_angle(phi)
    if HALF_PI <= phi <= 3.0 * HALF_PI:
        return max(0.0, -math.cos(phi))
    return None
