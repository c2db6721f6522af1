"""Closed-form occupation-time laws on (0, 1) and a quadrature moment oracle.

The Lamperti family (parameters nu in (-1,0), beta in (0,1)) is the
occupation-time law of the skew two-sided Bessel process; nu = -1/2 gives
the skew-Brownian law with explicit pdf and cdf, and beta = 1/2 on top of
that gives the arcsine law.  The moment oracle integrates x^n against these
densities after the substitution x = sin^2(theta), which removes the
endpoint singularities well enough for adaptive quadrature at 1e-10.

The Lamperti cdf has no closed form; it is provided by cumulative
quadrature on a log-spaced grid (dense near both endpoints, where the cdf
climbs like a fractional power), with a monotone cubic interpolant cached
per parameter pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

__all__ = [
    "OccupationDensity",
    "lamperti_pdf",
    "lamperti_cdf",
    "skew_bm_pdf",
    "skew_bm_cdf",
    "arcsine_pdf",
    "arcsine_cdf",
    "lamperti_density",
    "skew_bm_density",
    "arcsine_density",
    "density_moment_oracle",
    "DensityQuadratureError",
]

ArrayLike = Union[float, np.ndarray]


class DensityQuadratureError(RuntimeError):
    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


def _check_params(nu: float, beta: float) -> tuple[float, float]:
    if not -1.0 < nu < 0.0:
        raise ValueError(f"nu must lie in (-1, 0), got {nu}")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    return float(nu), float(beta)


def lamperti_pdf(nu: float, beta: float, x: ArrayLike) -> ArrayLike:
    """Density of the Lamperti occupation-time law on (0, 1)."""
    nu, beta = _check_params(nu, beta)
    xs = np.asarray(x, dtype=float)
    if np.any((xs <= 0.0) | (xs >= 1.0)):
        raise ValueError("lamperti_pdf is defined on the open interval (0, 1)")
    s = math.sin(-nu * math.pi)
    c = math.cos(-nu * math.pi)
    num = s / math.pi * beta * (1.0 - beta) * (xs * (1.0 - xs)) ** (-nu - 1.0)
    den = (
        beta**2 * (1.0 - xs) ** (-2.0 * nu)
        + (1.0 - beta) ** 2 * xs ** (-2.0 * nu)
        + 2.0 * beta * (1.0 - beta) * (xs * (1.0 - xs)) ** (-nu) * c
    )
    out = num / den
    return float(out) if np.isscalar(x) else out


def skew_bm_pdf(beta: float, x: ArrayLike) -> ArrayLike:
    """Skew-Brownian occupation density: the nu = -1/2 Lamperti law."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    xs = np.asarray(x, dtype=float)
    if np.any((xs <= 0.0) | (xs >= 1.0)):
        raise ValueError("skew_bm_pdf is defined on the open interval (0, 1)")
    out = beta * (1.0 - beta) / (
        math.pi * np.sqrt(xs * (1.0 - xs)) * (beta**2 + xs * (1.0 - 2.0 * beta))
    )
    return float(out) if np.isscalar(x) else out


def skew_bm_cdf(beta: float, x: ArrayLike) -> ArrayLike:
    """P_0(A_1 <= x) for skew Brownian motion (closed form)."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    xs = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    ratio = (beta / (1.0 - beta)) ** 2
    out = 2.0 / math.pi * np.arcsin(np.sqrt(xs / (xs + ratio * (1.0 - xs))))
    return float(out) if np.isscalar(x) else out


def arcsine_pdf(x: ArrayLike) -> ArrayLike:
    xs = np.asarray(x, dtype=float)
    if np.any((xs <= 0.0) | (xs >= 1.0)):
        raise ValueError("arcsine_pdf is defined on the open interval (0, 1)")
    out = 1.0 / (math.pi * np.sqrt(xs * (1.0 - xs)))
    return float(out) if np.isscalar(x) else out


def arcsine_cdf(x: ArrayLike) -> ArrayLike:
    xs = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    out = 2.0 / math.pi * np.arcsin(np.sqrt(xs))
    return float(out) if np.isscalar(x) else out


# ---------------------------------------------------------------------------
# Lamperti cdf by cumulative quadrature
# ---------------------------------------------------------------------------

_THETA_MIN = 1e-8
_N_CELLS = 1500  # log-spaced cells on the lower half


@lru_cache(maxsize=64)
def _lamperti_half_table(nu: float, beta: float):
    """Unnormalized cumulative mass of the Lamperti density on (0, 1/2] as a
    monotone interpolant of theta = arcsin(sqrt(x)) on a log grid, plus the
    power-law head below the grid.  The upper half of the law is recovered
    from the mirror identity f_{nu,beta}(1-x) = f_{nu,1-beta}(x), so the
    density is only ever evaluated at small arguments."""
    knots = np.exp(np.linspace(math.log(_THETA_MIN), math.log(math.pi / 4.0), _N_CELLS + 1))

    # 10-point Gauss-Legendre on each cell, vectorized
    gl_x, gl_w = np.polynomial.legendre.leggauss(10)
    a = knots[:-1]
    b = knots[1:]
    mid = 0.5 * (a + b)[:, None]
    halfwidth = 0.5 * (b - a)[:, None]
    theta = mid + halfwidth * gl_x[None, :]
    x = np.sin(theta) ** 2
    integrand = lamperti_pdf(nu, beta, x) * 2.0 * np.sin(theta) * np.cos(theta)
    cell = (integrand * gl_w[None, :]).sum(axis=1) * halfwidth[:, 0]

    # mass below the first knot from the leading power f(x) ~ A x^(-nu-1)
    head_amp = math.sin(-nu * math.pi) / math.pi * (1.0 - beta) / beta
    x0 = math.sin(knots[0]) ** 2
    head = head_amp * x0 ** (-nu) / (-nu)

    cum = np.concatenate([[head], head + np.cumsum(cell)])
    interp = PchipInterpolator(np.log(knots), cum, extrapolate=False)
    return interp, float(knots[0]), float(head), float(cum[-1])


def _lamperti_half_cum(nu: float, beta: float, xs: np.ndarray) -> np.ndarray:
    """Unnormalized mass of (0, x] for x <= 1/2 (clipped above)."""
    interp, th_lo, head, _ = _lamperti_half_table(nu, beta)
    theta = np.arcsin(np.sqrt(np.clip(xs, 0.0, 0.5)))
    theta = np.minimum(theta, math.pi / 4.0)  # guard one-ulp overshoot of arcsin
    out = np.empty_like(theta)
    lo = theta < th_lo
    out[lo] = head * (np.sin(theta[lo]) ** 2 / math.sin(th_lo) ** 2) ** (-nu)
    if (~lo).any():
        out[~lo] = interp(np.log(theta[~lo]))
    return out


def lamperti_cdf(nu: float, beta: float, x: ArrayLike) -> ArrayLike:
    """P(A_1 <= x) for the Lamperti law, by cached cumulative quadrature."""
    nu, beta = _check_params(nu, beta)
    xs = np.atleast_1d(np.clip(np.asarray(x, dtype=float), 0.0, 1.0))
    total = _lamperti_half_table(nu, beta)[3] + _lamperti_half_table(nu, 1.0 - beta)[3]
    out = np.empty_like(xs)
    lower = xs <= 0.5
    if lower.any():
        out[lower] = _lamperti_half_cum(nu, beta, xs[lower]) / total
    if (~lower).any():
        out[~lower] = 1.0 - _lamperti_half_cum(nu, 1.0 - beta, 1.0 - xs[~lower]) / total
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if np.isscalar(x) or np.asarray(x).ndim == 0 else out


# ---------------------------------------------------------------------------
# density objects and the moment oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OccupationDensity:
    """A law on (0, 1) given by its pdf and cdf."""

    family: str
    params: dict
    pdf: Callable[[ArrayLike], ArrayLike]
    cdf: Callable[[ArrayLike], ArrayLike]


def lamperti_density(nu: float, beta: float) -> OccupationDensity:
    nu, beta = _check_params(nu, beta)
    return OccupationDensity(
        family="lamperti",
        params={"nu": nu, "beta": beta},
        pdf=lambda x: lamperti_pdf(nu, beta, x),
        cdf=lambda x: lamperti_cdf(nu, beta, x),
    )


def skew_bm_density(beta: float) -> OccupationDensity:
    return OccupationDensity(
        family="skew_bm",
        params={"beta": float(beta)},
        pdf=lambda x: skew_bm_pdf(beta, x),
        cdf=lambda x: skew_bm_cdf(beta, x),
    )


def arcsine_density() -> OccupationDensity:
    return OccupationDensity(
        family="arcsine", params={}, pdf=arcsine_pdf, cdf=arcsine_cdf
    )


def density_from_name(family: str, **params) -> OccupationDensity:
    if family == "lamperti":
        return lamperti_density(params["nu"], params["beta"])
    if family in ("skew_bm", "skew-bm"):
        return skew_bm_density(params["beta"])
    if family == "arcsine":
        return arcsine_density()
    raise ValueError(f"unknown density family {family!r}")


def _quad_power_endpoint(g, upper: float, endpoint_exp: float, epsabs: float, epsrel: float):
    """Integral of g over (0, upper) where g ~ c t^endpoint_exp at t -> 0.
    A power substitution t = upper * u^p flattens a singular endpoint."""
    if endpoint_exp >= 0.0:
        return quad(g, 0.0, upper, epsabs=epsabs, epsrel=epsrel, limit=400)
    p = 3.0 / (1.0 + endpoint_exp)  # maps the endpoint behavior to ~u^2
    return quad(
        lambda u: g(upper * u**p) * upper * p * u ** (p - 1.0),
        0.0, 1.0, epsabs=epsabs, epsrel=epsrel, limit=400,
    )


def _mirror_density(density: OccupationDensity) -> OccupationDensity:
    """Law of 1 - A for the built-in families (swaps beta and 1 - beta)."""
    if density.family == "lamperti":
        return lamperti_density(density.params["nu"], 1.0 - density.params["beta"])
    if density.family == "skew_bm":
        return skew_bm_density(1.0 - density.params["beta"])
    if density.family == "arcsine":
        return density
    # generic fallback: evaluate near 1 directly (limited by cancellation)
    return OccupationDensity(
        family=density.family + "-mirrored",
        params=dict(density.params),
        pdf=lambda x: density.pdf(1.0 - np.asarray(x)),
        cdf=lambda x: 1.0 - density.cdf(1.0 - np.asarray(x)),
    )


def density_moment_oracle(
    density: Union[OccupationDensity, str],
    n: int,
    abs_tol: float = 1e-10,
    **params,
) -> float:
    """n-th moment of an occupation law by adaptive quadrature.

    Integrates x^n f(x) over (0, 1) after x = sin^2 theta, which turns the
    (x(1-x))^(-nu-1) endpoint behavior into theta-powers.  The upper half is
    folded onto the lower half through the mirror law of 1 - A (so the
    integrand is only ever evaluated at small arguments, avoiding
    cancellation near 1), and residually singular endpoints (exponent in
    (-1, 0)) get a further power substitution.  Raises
    :class:`DensityQuadratureError` if the achieved error estimate exceeds
    ``abs_tol``.
    """
    if isinstance(density, str):
        density = density_from_name(density, **params)
    n = int(n)
    if n < 0 or n > 20:
        raise ValueError("moment order must lie in 0..20")
    nu = float(density.params.get("nu", -0.5))
    mirrored = _mirror_density(density)

    def g_left(theta: float) -> float:
        x = math.sin(theta) ** 2
        if x <= 0.0 or x >= 1.0:
            return 0.0
        return x**n * float(density.pdf(x)) * 2.0 * math.sin(theta) * math.cos(theta)

    def g_right(phi: float) -> float:
        # x = cos^2(phi); weight (1-s)^n with s = sin^2(phi) stays stable
        s = math.sin(phi) ** 2
        if s <= 0.0 or s >= 1.0:
            return 0.0
        return (
            math.cos(phi) ** (2 * n)
            * float(mirrored.pdf(s))
            * 2.0 * math.sin(phi) * math.cos(phi)
        )

    # integrand ~ theta^(2n - 2nu - 1) at 0 and ~ phi^(-2nu - 1) at the top
    exp_left = 2.0 * n - 2.0 * nu - 1.0
    exp_right = -2.0 * nu - 1.0
    epsabs = abs_tol / 4.0
    v1, e1 = _quad_power_endpoint(g_left, math.pi / 4.0, exp_left, epsabs, 1e-11)
    v2, e2 = _quad_power_endpoint(g_right, math.pi / 4.0, exp_right, epsabs, 1e-11)
    if e1 + e2 > abs_tol:
        raise DensityQuadratureError(
            f"moment quadrature for {density.family} n={n} did not reach {abs_tol:g}",
            achieved=e1 + e2,
        )
    return v1 + v2
