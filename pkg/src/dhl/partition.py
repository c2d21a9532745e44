"""Partition functions of the diamond hierarchical lattice and small-graph oracles.

The conditional partition functions of the level-n diamond graph obey the
Migdal-Kadanoff recursion

    U' = (U^2 + V^2)^2,   V' = V^2 (U + W)^2,   W' = (V^2 + W^2)^2,

started from U = 1/(z sqrt t), V = sqrt t, W = z / sqrt t, and Z_n = U + 2V + W.
Degrees quadruple at every level, so every representation here keeps a
mantissa together with a shared natural-log scale.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, LevelTooLarge, TooManyVertices, ZeroPartition

MAX_POLY_LEVEL = 4
MAX_COND_LEVEL = 3
MAX_GRAPH_VERTICES = 16


@dataclass(frozen=True)
class ScaledWeights:
    """Conditional partition triple as mantissas times exp(log_scale).

    The fields may be scalars or numpy arrays of a common shape.
    """

    u: complex
    v: complex
    w: complex
    log_scale: float = 0.0

    def values(self):
        k = np.exp(self.log_scale)
        return self.u * k, self.v * k, self.w * k

    def partition(self):
        """Z = U + 2V + W as (mantissa, log_scale)."""
        return self.u + 2.0 * self.v + self.w, self.log_scale

    def renormalized(self) -> "ScaledWeights":
        m = np.maximum(np.maximum(np.abs(self.u), np.abs(self.v)), np.abs(self.w))
        return ScaledWeights(self.u / m, self.v / m, self.w / m, self.log_scale + np.log(m))

    def recover_point(self):
        """Renormalized (phi_n, t_n) read off the ratios of the weights.

        On the unit circle with real t the triple is proportional to
        (z^-1 t^-1/2, t^1/2, z t^-1/2) with a positive factor, so
        phi = -arg U and t = |V| / sqrt(|U| |W|).
        """
        phi = np.mod(-np.angle(self.u), 2.0 * np.pi)
        t = np.abs(self.v) / np.sqrt(np.abs(self.u) * np.abs(self.w))
        return phi, t


def init_weights(z, t) -> ScaledWeights:
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0.0) or np.any(t_arr > 1.0):
        raise DomainError(f"t must lie in (0, 1], got {t}")
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("z must be nonzero")
    # mantissas (1/z, t, z) carry a common factor t^-1/2
    ws = ScaledWeights(1.0 / z, t_arr + 0j, z, -0.5 * np.log(t_arr))
    return ws.renormalized()


def init_weights_bottom(z) -> ScaledWeights:
    """t -> 0 limit of the scaled triple: (1/z, 0, z) with an infinite scale dropped."""
    z = np.asarray(z, dtype=complex)
    return ScaledWeights(1.0 / z, np.zeros_like(z), z, np.zeros(z.shape))


def mk_step(ws: ScaledWeights) -> ScaledWeights:
    u2, v2, w2 = ws.u * ws.u, ws.v * ws.v, ws.w * ws.w
    s1 = u2 + v2
    s3 = v2 + w2
    p = ws.u + ws.w
    nxt = ScaledWeights(s1 * s1, v2 * p * p, s3 * s3, 4.0 * ws.log_scale)
    return nxt.renormalized()


def iterate_weights(ws: ScaledWeights, n: int) -> ScaledWeights:
    for _ in range(n):
        ws = mk_step(ws)
    return ws


def partition_value(phi, t, n: int):
    """Scaled Z_n(e^{i phi}, t); returns (mantissa, log_scale)."""
    if n < 0:
        raise DomainError("level must be nonnegative")
    ws = iterate_weights(init_weights(np.exp(1j * np.asarray(phi, dtype=float)), t), n)
    return ws.partition()


def free_energy_per_bond(phi, t, n: int) -> float:
    """-(1/4^n) log|Z_n| in units of T."""
    m, ls = partition_value(phi, t, n)
    am = np.abs(m)
    if np.any(am == 0.0):
        raise ZeroPartition(f"Z_{n} vanishes at phi={phi}, t={t}")
    out = -(np.log(am) + ls) / 4.0**n
    return float(out) if np.ndim(out) == 0 else out


def log_partition_real_field(h, t, n: int):
    """log Z_n at real fugacity z = exp(-h) (h in units of T)."""
    z = np.exp(-np.asarray(h, dtype=float)) + 0j
    ws = iterate_weights(init_weights(z, t), n)
    m, ls = ws.partition()
    return np.log(np.abs(m)) + ls


def magnetization(h, t, n: int, step: float = 1e-5):
    """Magnetization per bond at real field h, z = exp(-h).

    Symmetric difference of log Z_n / 4^n in log z with the given step.
    Odd in h; at fixed small h > 0 it approaches the spontaneous
    magnetization below the critical temperature.
    """
    h = np.asarray(h, dtype=float)
    up = log_partition_real_field(h + step, t, n)
    dn = log_partition_real_field(h - step, t, n)
    out = (up - dn) / (2.0 * step) / 4.0**n
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# coefficient forms


@dataclass(frozen=True)
class LaurentArray:
    """Laurent polynomial sum_k c[k - lo] z^k with a log scale."""

    coeffs: np.ndarray
    lo: int
    log_scale: float = 0.0

    @property
    def hi(self) -> int:
        return self.lo + len(self.coeffs) - 1

    def trimmed(self) -> "LaurentArray":
        nz = np.flatnonzero(self.coeffs)
        if nz.size == 0:
            return LaurentArray(np.zeros(1), 0, self.log_scale)
        return LaurentArray(self.coeffs[nz[0]: nz[-1] + 1].copy(), self.lo + int(nz[0]), self.log_scale)

    def __add__(self, other: "LaurentArray") -> "LaurentArray":
        ls = max(self.log_scale, other.log_scale)
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        out = np.zeros(hi - lo + 1)
        out[self.lo - lo: self.hi - lo + 1] += self.coeffs * math.exp(self.log_scale - ls)
        out[other.lo - lo: other.hi - lo + 1] += other.coeffs * math.exp(other.log_scale - ls)
        return LaurentArray(out, lo, ls)

    def __mul__(self, other: "LaurentArray") -> "LaurentArray":
        return LaurentArray(np.convolve(self.coeffs, other.coeffs), self.lo + other.lo,
                            self.log_scale + other.log_scale)

    def normalized(self) -> "LaurentArray":
        m = float(np.max(np.abs(self.coeffs)))
        if m == 0.0:
            return self
        return LaurentArray(self.coeffs / m, self.lo, self.log_scale + math.log(m))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        # Horner in z, then shift by z^lo
        acc = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc * z**self.lo

    def cleared(self) -> np.ndarray:
        """Ordinary polynomial coefficients (highest degree first) of z^-lo * P."""
        return self.trimmed().coeffs[::-1].copy()

    def roots(self) -> np.ndarray:
        tr = self.trimmed()
        return np.roots(tr.coeffs[::-1])


@dataclass(frozen=True)
class SymmetricLaurentPoly:
    """Z = sum_{k=0}^d a_k (z^k + z^-k) times exp(log_scale)."""

    a: np.ndarray
    log_scale: float = 0.0

    @property
    def degree(self) -> int:
        return len(self.a) - 1

    def laurent(self) -> LaurentArray:
        d = self.degree
        c = np.concatenate([self.a[:0:-1], [2.0 * self.a[0]], self.a[1:]])
        return LaurentArray(c, -d, self.log_scale)

    def evaluate(self, z):
        """Mantissa of Z(z); the value is mantissa * exp(log_scale)."""
        return self.laurent()(z)

    def evaluate_phi(self, phi):
        phi = np.asarray(phi, dtype=float)
        k = np.arange(self.degree + 1)
        out = 2.0 * np.cos(np.multiply.outer(phi, k)) @ self.a
        return out

    def roots(self) -> np.ndarray:
        return self.laurent().roots()

    def to_csv(self) -> str:
        lines = [f"# log_scale={float(self.log_scale)!r}", "k,a_k"]
        lines += [f"{k},{c!r}" for k, c in enumerate(np.asarray(self.a, dtype=float).tolist())]
        return "\n".join(lines) + "\n"


def _initial_laurent(t: float):
    if not (0.0 < t <= 1.0):
        raise DomainError(f"t must lie in (0, 1], got {t}")
    ls = -0.5 * math.log(t)
    U = LaurentArray(np.array([1.0]), -1, ls)
    V = LaurentArray(np.array([t]), 0, ls)
    W = LaurentArray(np.array([1.0]), 1, ls)
    return U, V, W


def _laurent_step(U, V, W):
    s1 = U * U + V * V
    s3 = V * V + W * W
    p = U + W
    return (s1 * s1).normalized(), (V * V * p * p).normalized(), (s3 * s3).normalized(), s1, s3


@dataclass
class ConditionalPolys:
    """Laurent forms of (U_n, V_n, W_n) with the square roots of U_n and W_n.

    For n >= 1, U_n = (U_{n-1}^2 + V_{n-1}^2)^2 and W_n = (V_{n-1}^2 + W_{n-1}^2)^2,
    so their roots are double; root questions go through the square roots.
    """

    U: LaurentArray
    V: LaurentArray
    W: LaurentArray
    sqrt_u: LaurentArray | None
    sqrt_w: LaurentArray | None


def conditional_polys(t: float, n: int) -> ConditionalPolys:
    if n > MAX_COND_LEVEL:
        raise LevelTooLarge(f"n = {n} exceeds {MAX_COND_LEVEL}")
    if n < 0:
        raise DomainError("level must be nonnegative")
    U, V, W = _initial_laurent(t)
    ru = rw = None
    for _ in range(n):
        U, V, W, ru, rw = _laurent_step(U, V, W)
    if ru is not None:
        ru, rw = ru.trimmed().normalized(), rw.trimmed().normalized()
    return ConditionalPolys(U.trimmed(), V.trimmed(), W.trimmed(), ru, rw)


def partition_poly(t: float, n: int) -> SymmetricLaurentPoly:
    if n > MAX_POLY_LEVEL:
        raise LevelTooLarge(f"n = {n} exceeds {MAX_POLY_LEVEL}")
    if n < 0:
        raise DomainError("level must be nonnegative")
    U, V, W = _initial_laurent(t)
    for _ in range(n):
        U, V, W, _, _ = _laurent_step(U, V, W)
    Z = (U + V + V + W).normalized()
    d = 4**n
    full = np.zeros(2 * d + 1)
    full[Z.lo + d: Z.hi + d + 1] = Z.coeffs
    a = full[d:].copy()
    a[0] *= 0.5
    # palindromic by construction; average to remove rounding asymmetry
    a[1:] = 0.5 * (full[d + 1:] + full[d - 1::-1])
    return SymmetricLaurentPoly(a, Z.log_scale)


# ---------------------------------------------------------------------------
# small graphs


@dataclass
class SpinGraph:
    """Ferromagnetic Ising graph with couplings given as t_vw = exp(-2 J_vw / T)."""

    n: int
    edges: list = field(default_factory=list)
    field_mode: str = "valence"

    def __post_init__(self):
        if self.field_mode not in ("uniform", "valence"):
            raise DomainError(f"unknown field_mode {self.field_mode!r}")
        clean = []
        for e in self.edges:
            i, j, tv = int(e[0]), int(e[1]), float(e[2])
            if not (0 <= i < self.n and 0 <= j < self.n) or i == j:
                raise DomainError(f"bad edge {e!r}")
            if not (0.0 <= tv <= 1.0):
                raise DomainError(f"edge weight t = {tv} outside [0, 1]")
            clean.append((i, j, tv))
        self.edges = clean

    @property
    def valence(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j, _ in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def field_exponents(self) -> np.ndarray:
        """Power of z carried by a minus spin at each vertex."""
        if self.field_mode == "uniform":
            return np.full(self.n, 2, dtype=int)
        return self.valence

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        adj = {v: set() for v in range(self.n)}
        for i, j, _ in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        seen, stack = {0}, [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n

    @classmethod
    def from_json(cls, text: str) -> "SpinGraph":
        try:
            data = json.loads(text)
            return cls(int(data["n"]), list(data.get("edges", [])), data.get("field_mode", "valence"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"malformed graph JSON: {exc}") from exc

    @classmethod
    def diamond(cls, t: float) -> "SpinGraph":
        """Level-1 diamond: poles 0, 1 and middle vertices 2, 3."""
        return cls(4, [(0, 2, t), (2, 1, t), (0, 3, t), (3, 1, t)], "valence")

    @classmethod
    def ring(cls, n: int, t_edge: float) -> "SpinGraph":
        return cls(n, [(k, (k + 1) % n, t_edge) for k in range(n)], "valence")


def _configurations(n: int) -> np.ndarray:
    """All 2^n spin configurations as a boolean array; True marks a minus spin."""
    idx = np.arange(2**n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(bool)


def brute_force_partition(g: SpinGraph, plus: Sequence[int] = ()) -> np.ndarray:
    """Exhaustive modified partition function as polynomial coefficients in z.

    Sums prod_{opposite edges} t_vw * prod_{minus spins} z^{e_v} over all
    configurations, with e_v = 2 (uniform) or the valence of v.  Vertices in
    ``plus`` are pinned to +1 (a conditional partition function).  Returns
    coefficients c[k] of z^k, lowest degree first; accumulation per degree is
    exact-rounded with math.fsum.
    """
    if g.n > MAX_GRAPH_VERTICES:
        raise TooManyVertices(f"{g.n} vertices exceeds {MAX_GRAPH_VERTICES}")
    conf = _configurations(g.n)
    if len(plus):
        keep = ~np.any(conf[:, list(plus)], axis=1)
        conf = conf[keep]
    weight = np.ones(len(conf))
    for i, j, tv in g.edges:
        weight *= np.where(conf[:, i] != conf[:, j], tv, 1.0)
    expo = g.field_exponents()
    degree = conf.astype(np.int64) @ expo
    top = int(expo.sum())
    order = np.argsort(degree, kind="stable")
    deg_sorted, w_sorted = degree[order], weight[order]
    bounds = np.searchsorted(deg_sorted, np.arange(top + 2))
    return np.array([math.fsum(w_sorted[bounds[k]: bounds[k + 1]]) for k in range(top + 1)])


def polynomial_roots(coeffs_low_first: np.ndarray) -> np.ndarray:
    """Roots of sum c[k] z^k by companion-matrix eigenvalues (LAPACK balancing)."""
    c = np.trim_zeros(np.asarray(coeffs_low_first, dtype=float), "b")
    lead = np.flatnonzero(c)
    if lead.size == 0:
        return np.array([], dtype=complex)
    c = c[lead[0]:]
    return np.roots(c[::-1])


def diamond_partition_bruteforce(phi: float, t: float) -> complex:
    """Z_1 from exhaustive enumeration of the diamond (edge-sum magnetic moment)."""
    g = SpinGraph.diamond(t)
    c = brute_force_partition(g)
    z = np.exp(1j * phi)
    # Zcheck = z^{|E|} t^{|E|/2} Z for the valence convention
    val = np.polyval(c[::-1], z)
    return complex(val / (z**4 * t**2))


# ---------------------------------------------------------------------------
# one-dimensional ring


def zeros_1d(t: float, n: int) -> np.ndarray:
    """Lee-Yang zeros of the ring of n sites: +-arccos(sqrt(1-t^4) cos(pi(k+1/2)/n)).

    Here t = exp(-J/T) for the chain, so the graph edge weight is t^2.
    Returned sorted in [0, 2pi).
    """
    if not (0.0 < t < 1.0):
        raise DomainError(f"t must lie in (0, 1), got {t}")
    if n < 2:
        raise DomainError(f"ring length must be >= 2, got {n}")
    k = np.arange(n)
    base = np.arccos(math.sqrt(1.0 - t**4) * np.cos(np.pi * (k + 0.5) / n))
    return np.sort(np.mod(np.concatenate([base, -base]), 2.0 * np.pi))


def ring_density(phi, t: float):
    """Limiting density |sin phi| / (2 pi sqrt(1 - t^4 - cos^2 phi)) on its support."""
    phi = np.asarray(phi, dtype=float)
    rad = 1.0 - t**4 - np.cos(phi) ** 2
    out = np.zeros_like(phi)
    ok = rad > 0
    out[ok] = np.abs(np.sin(phi[ok])) / (2.0 * np.pi * np.sqrt(rad[ok]))
    return out


def ring_cdf(phi, t: float):
    """Cumulative mass of the ring density from 0 to phi in [0, 2pi]."""
    a = math.sqrt(1.0 - t**4)
    phi = np.asarray(phi, dtype=float)
    c = np.clip(np.cos(phi) / a, -1.0, 1.0)
    # on [0, pi]: mass = (arccos(cos(phi)/a)) / (2 pi); mirrored on [pi, 2pi]
    first = np.arccos(c) / (2.0 * np.pi)
    return np.where(phi <= np.pi, first, 1.0 - first)


def transfer_matrix_trace(z, t: float, n: int):
    """tr W^n for the ring with W = [[z^-1, t^2], [t^2, z]] (symmetric field split).

    Equals z^-n times the exhaustive ring polynomial of ``ring_roots_bruteforce``.
    """
    z = np.asarray(z, dtype=complex)
    tr = z + 1.0 / z
    disc = np.sqrt((z - 1.0 / z) ** 2 + 4.0 * t**4)
    l1 = 0.5 * (tr + disc)
    l2 = 0.5 * (tr - disc)
    return l1**n + l2**n


def ring_roots_bruteforce(t: float, n: int) -> np.ndarray:
    """Angles of the roots of the exhaustive ring partition function."""
    g = SpinGraph.ring(n, t * t)
    roots = polynomial_roots(brute_force_partition(g))
    return np.sort(np.mod(np.angle(roots), 2.0 * np.pi)), roots

