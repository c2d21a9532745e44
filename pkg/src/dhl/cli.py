"""Command line front end.

Data (CSV or PGM) goes to ``--out``; a JSON summary goes to stdout, or to
stderr when the data itself is written to stdout (``--out -``).  Options can
also be set through environment variables ``DHL_<COMMAND>_<OPTION>``;
explicit flags take precedence.  Contract violations exit with status 2.
"""

from __future__ import annotations

import functools
import json
import sys

import click
import numpy as np

from . import __version__
from .core_maps import TWO_PI
from .errors import DHLError

EXIT_BAD_INPUT = 2


def _emit(out: str, payload, summary: dict) -> None:
    data = payload if isinstance(payload, bytes) else payload.encode("utf-8")
    if out == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        click.echo(json.dumps(summary, sort_keys=True), err=True)
    else:
        with open(out, "wb") as fh:
            fh.write(data)
        click.echo(json.dumps(summary, sort_keys=True))


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (DHLError, ValueError, ArithmeticError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_BAD_INPUT)
    return wrapper


def _positive(ctx, param, value):
    if value is not None and not value > 0:
        raise click.BadParameter("must be > 0")
    return value


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="dhl")
def cli():
    """Lee-Yang zeros and renormalization dynamics of the diamond hierarchical lattice."""


@cli.command()
@click.option("--t", "t", type=float, required=True, help="Temperature-like parameter in [0, 1).")
@click.option("--n", "n", type=int, required=True, help="Lattice level.")
@click.option("--tol", type=float, default=1e-12, show_default=True, callback=_positive)
@click.option("--out", default="-", show_default=True, help="CSV path or - for stdout.")
@_guard
def zeros(t, n, tol, out):
    """All 2*4^n zeros of Z_n on the circle of temperature t (CSV n,t,phi)."""
    from .zeros import find_zeros

    zs = find_zeros(t, n, tol=tol)
    _emit(out, zs.to_csv(), {"command": "zeros", "t": t, "n": n, "count": zs.count,
                             "bracket_width": zs.tolerance})


@cli.command()
@click.option("--t", "t", type=float, required=True)
@click.option("--samples", type=int, default=1024, show_default=True)
@click.option("--out", default="-", show_default=True)
@_guard
def density(t, samples, out):
    """Density of the limiting zero distribution on a uniform grid (CSV phi,rho).

    Points outside the low-temperature basin have density 0.
    """
    from .dynamics import density_array, measure_of_interval

    if samples < 2:
        raise DHLError("samples must be >= 2")
    if not (0.0 <= t < 1.0):
        raise DHLError(f"t must lie in [0, 1), got {t}")
    phi = (np.arange(samples) + 0.5) * TWO_PI / samples
    rho = density_array(phi, t)
    outside = np.isnan(rho)
    rho = np.where(outside, 0.0, rho)
    csv = "phi,rho\n" + "".join(f"{a!r},{b!r}\n" for a, b in zip(phi.tolist(), rho.tolist()))
    _emit(out, csv, {"command": "density", "t": t, "samples": samples,
                     "min": float(rho.min()), "max": float(rho.max()),
                     "riemann_mass": float(rho.mean()),
                     "quadrature_mass": measure_of_interval(0.0, TWO_PI, t),
                     "zero_fraction": float(np.mean(rho == 0.0))})


@cli.command()
@click.option("--res", type=(int, int), default=(1024, 512), show_default=True,
              help="Grid resolution in phi and t.")
@click.option("--max-iter", type=int, default=500, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", required=True, help="PGM (P5) output path or -.")
@_guard
def basins(res, max_iter, threads, out):
    """Basin image: 0 = top, 255 = bottom, 128 = undecided; row 0 is t near 1."""
    from .dynamics import ClassifyConfig, basin_grid

    if min(res) < 1 or max_iter < 1 or threads < 1:
        raise DHLError("resolution, max-iter and threads must be positive")
    g = basin_grid(res[0], res[1], cfg=ClassifyConfig(max_iter=max_iter), workers=threads)
    summary = {"command": "basins", "max_iter": max_iter, **g.stats()}
    _emit(out, g.to_pgm(), summary)


@cli.command()
@_guard
def exponents():
    """Critical temperature, multipliers and critical exponents (JSON)."""
    from .dynamics import critical_exponents, critical_point_report

    r = critical_point_report()
    sh, sv = critical_exponents(r)
    click.echo(json.dumps({"t_c": r.location.t, "lambda_u": r.lambda_u, "lambda_c": r.lambda_c,
                           "sigma_h": sh, "sigma_v": sv, "residual": r.residual}, sort_keys=True))


@cli.command()
@click.option("--phi0", type=float, required=True, help="Base angle on the bottom circle.")
@click.option("--t-max", type=float, default=1 - 1e-3, show_default=True)
@click.option("--n-adapt", type=int, default=16, show_default=True)
@click.option("--out", default="-", show_default=True)
@_guard
def leaf(phi0, t_max, n_adapt, out):
    """Central leaf through (phi0, 0) (CSV t,phi)."""
    from .dynamics import central_leaf

    lf = central_leaf(phi0, t_max=t_max, n_adapt=n_adapt)
    _emit(out, lf.to_csv(), {"command": "leaf", "phi0": phi0, "t_max": t_max,
                             "samples": int(lf.t.size), "phi_top": float(lf.phi[-1])})


@cli.command()
@click.option("--a", "a", type=float, required=True)
@click.option("--b", "b", type=float, required=True)
@click.option("--t", "t", type=float, required=True)
@_guard
def measure(a, b, t):
    """Transverse measure of the arc [a, b] at temperature t (JSON)."""
    from .dynamics import bottcher_coordinate, measure_of_interval

    if not (0.0 <= a < b <= TWO_PI):
        raise DHLError("need 0 <= a < b <= 2pi")
    if not (0.0 <= t < 1.0):
        raise DHLError(f"t must lie in [0, 1), got {t}")
    q = measure_of_interval(a, b, t)
    F = bottcher_coordinate(np.array([a, b]), t)
    click.echo(json.dumps({"a": a, "b": b, "t": t, "mass": q,
                           "mass_bottcher": float((F[1] - F[0]) / TWO_PI)}, sort_keys=True))


@cli.command()
@click.option("--suite", "suites", multiple=True, help="Suite name; repeat to select several (default all).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--scale", type=float, default=1.0, show_default=True, callback=_positive,
              help="Sample-size multiplier.")
@click.option("--list", "list_only", is_flag=True, help="List suite names and exit.")
@_guard
def verify(suites, seed, scale, list_only):
    """Run sampled property suites; exit 1 if any fails."""
    from .verify import SUITES, run_suites

    if list_only:
        click.echo(json.dumps(sorted(SUITES)))
        return
    unknown = [s for s in suites if s not in SUITES]
    if unknown:
        raise DHLError(f"unknown suite(s): {', '.join(unknown)}")
    res = run_suites(suites, seed=seed, scale=scale)
    click.echo(json.dumps(res, sort_keys=True, default=float))
    if not all(r["passed"] for r in res.values()):
        sys.exit(1)


@cli.command()
@click.option("--t", "t", type=float, required=True)
@click.option("--n", "n", type=int, required=True, help="Number of ring sites.")
@click.option("--check", is_flag=True, help="Compare against exhaustive enumeration (n <= 16).")
@click.option("--out", default="-", show_default=True)
@_guard
def ising1d(t, n, check, out):
    """Zeros of the periodic Ising chain of n sites (CSV k,phi)."""
    from .partition import ring_roots_bruteforce, zeros_1d

    z = zeros_1d(t, n)
    summary = {"command": "ising1d", "t": t, "n": n, "count": int(z.size)}
    if check:
        ang, _ = ring_roots_bruteforce(t, n)
        summary["max_deviation"] = float(np.max(np.abs(ang - z)))
    csv = "k,phi\n" + "".join(f"{k},{a!r}\n" for k, a in enumerate(z.tolist()))
    _emit(out, csv, summary)


@cli.command()
@click.argument("json_in", type=click.File("r"))
@click.option("--out", default="-", show_default=True)
@_guard
def graph(json_in, out):
    """Lee-Yang roots of a small graph given as {"n":..,"edges":[[i,j,t],..]} (CSV re,im,abs)."""
    from .partition import SpinGraph, brute_force_partition, polynomial_roots

    g = SpinGraph.from_json(json_in.read())
    r = polynomial_roots(brute_force_partition(g))
    r = r[np.lexsort((r.imag, np.angle(r)))]
    csv = "re,im,abs\n" + "".join(f"{x.real!r},{x.imag!r},{abs(x)!r}\n" for x in r.tolist())
    _emit(out, csv, {"command": "graph", "vertices": g.n, "edges": len(g.edges),
                     "roots": int(r.size), "connected": g.is_connected(),
                     "max_radius_error": float(np.max(np.abs(np.abs(r) - 1))) if r.size else 0.0})


@cli.command()
@click.option("--res", type=(int, int), default=(2048, 1024), show_default=True)
@click.option("--r-excl", type=float, default=1e-3, show_default=True, callback=_positive)
@click.option("--cone", type=click.Choice(["algebraic", "modified"]), default="algebraic", show_default=True)
@click.option("--out", default=None, help="Optional CSV of per-row minima (t,min_factor).")
@_guard
def expansion(res, r_excl, cone, out):
    """Minimum one-step horizontal expansion over a grid outside the alpha balls."""
    from .core_maps import alpha_distance
    from .dynamics import ConeSpec, expansion_factor_array

    nphi, nt = res
    if nphi < 1 or nt < 1:
        raise DHLError("resolution must be positive")
    phi = (np.arange(nphi) + 0.5) * TWO_PI / nphi
    t = (np.arange(nt) + 0.5) / nt
    P, T = np.meshgrid(phi, t)
    e = expansion_factor_array(P, T, ConeSpec(cone))
    e = np.where(alpha_distance(P, 1 - T) >= r_excl, e, np.inf)
    rows = e.min(axis=1)
    summary = {"command": "expansion", "cone": cone, "res": [nphi, nt], "r_excl": r_excl,
               "min_factor": float(rows.min()), "argmin_t": float(t[int(np.argmin(rows))])}
    if out is None:
        click.echo(json.dumps(summary, sort_keys=True))
    else:
        csv = "t,min_factor\n" + "".join(f"{a!r},{b!r}\n" for a, b in zip(t.tolist(), rows.tolist()))
        _emit(out, csv, summary)


def main(argv=None):
    try:
        cli.main(args=argv, prog_name="dhl", auto_envvar_prefix="DHL", standalone_mode=True)
    except SystemExit as exc:
        code = exc.code
        if isinstance(code, int) and code not in (0, 1):
            raise SystemExit(EXIT_BAD_INPUT)
        raise


if __name__ == "__main__":
    main()
