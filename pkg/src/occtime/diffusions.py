"""One-dimensional diffusion descriptors behind a uniform interface.

A :class:`DiffusionSpec` packages the classical data of a regular
one-dimensional diffusion -- speed measure, scale function, the increasing
and decreasing fundamental solutions psi/phi, their Wronskian, and the
Laplace transform of the hitting time of zero together with its
lambda-derivatives.  Built-in factories cover:

* skew two-sided Bessel processes (``make_skew_bessel``),
* skew Brownian motion (``make_skew_bm``),
* oscillating Brownian motion (``make_oscillating_bm``),
* sticky Brownian motion (``make_sticky_bm``),

and ``make_custom`` admits user-supplied diffusions (the generalized ODE is
not solved numerically; users must provide psi, phi and the Wronskian, and
certify that the process is conservative).

Green kernel convention: G_lam(x, y) = psi_lam(x ^ y) phi_lam(x v y) / w_lam,
the Laplace transform in t of the transition density taken with respect to
the speed measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from .special import bessel_i, bessel_k

__all__ = [
    "DiffusionSpec",
    "HittingTransform",
    "QuadratureError",
    "make_skew_bessel",
    "make_skew_bm",
    "make_oscillating_bm",
    "make_sticky_bm",
    "make_custom",
    "spec_from_params",
    "green_kernel",
    "hitting_transform_deriv",
    "integrate_green_m",
    "resolvent_mass",
    "scale_derivative_fd",
]

#: Highest lambda-derivative order the analytic hitting transforms support.
K_MAX = 32


class QuadratureError(RuntimeError):
    """Raised when an adaptive quadrature cannot reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


# ---------------------------------------------------------------------------
# hitting-time transforms f(x; lam) = E_x exp(-lam H_0) and their derivatives
# ---------------------------------------------------------------------------

class HittingTransform:
    """Interface: eval(x, lam, k) = d^k/dlam^k E_x(e^{-lam H_0}), x >= 0."""

    k_max: int = K_MAX

    def eval(self, x: float, lam: float, k: int = 0) -> float:
        raise NotImplementedError


class ExponentialHitting(HittingTransform):
    """Hitting transform of the form exp(-c x sqrt(2 lam)).

    Covers Brownian-type diffusions (skew, oscillating with c = 1/sigma_plus,
    sticky).  Derivatives in lambda are computed from an exact polynomial
    recursion: writing f = exp(-a sqrt(lam)) with a = c x sqrt(2),

        f^(k) = q_k(a, lam) f,   q_0 = 1,
        q_{k+1} = dq_k/dlam - a/(2 sqrt(lam)) q_k,

    where q_k is a polynomial in a and lam^{-1/2} with rational coefficients.
    """

    def __init__(self, c: float = 1.0):
        self.c = float(c)

    @staticmethod
    @lru_cache(maxsize=None)
    def _poly(k: int) -> tuple[tuple[int, int, Fraction], ...]:
        # terms (m, p, coef): coef * a^m * lam^(-p/2)
        terms: dict[tuple[int, int], Fraction] = {(0, 0): Fraction(1)}
        for _ in range(k):
            nxt: dict[tuple[int, int], Fraction] = {}
            for (m, p), coef in terms.items():
                if p != 0:
                    # d/dlam lam^(-p/2) = -(p/2) lam^(-(p+2)/2)
                    key = (m, p + 2)
                    nxt[key] = nxt.get(key, Fraction(0)) - coef * Fraction(p, 2)
                key = (m + 1, p + 1)
                nxt[key] = nxt.get(key, Fraction(0)) - coef / 2
            terms = {key: c for key, c in nxt.items() if c != 0}
        return tuple((m, p, c) for (m, p), c in sorted(terms.items()))

    def eval(self, x: float, lam: float, k: int = 0) -> float:
        if x < 0:
            raise ValueError("hitting transform is defined for x >= 0")
        if lam <= 0:
            raise ValueError("lam must be positive")
        if k < 0 or k > self.k_max:
            raise ValueError(f"derivative order {k} outside 0..{self.k_max}")
        a = self.c * x * math.sqrt(2.0)
        f = math.exp(-a * math.sqrt(lam))
        if k == 0:
            return f
        if x == 0.0:
            return 0.0
        sql = math.sqrt(lam)
        q = 0.0
        for m, p, coef in self._poly(k):
            q += float(coef) * a**m * sql ** (-p)
        return q * f


class BesselHitting(HittingTransform):
    """Hitting transform of the two-sided Bessel family.

    f(x; lam) = (2^(nu+1)/Gamma(-nu)) z^(-nu) K_nu(z), z = x sqrt(2 lam),
    and the k-th lambda-derivative is a finite combination

        f^(k) = (2^(nu+1) / (lam^k Gamma(-nu)))
                * sum_j c_{k,j} z^(j-nu) K_{nu+j}(z)

    with exact rational coefficients c_{k,j} (computed once per order).
    """

    def __init__(self, nu: float):
        self.nu = float(nu)

    @staticmethod
    @lru_cache(maxsize=None)
    def _coeffs(k: int) -> tuple[tuple[int, float], ...]:
        coeffs = []
        for j in range(1, k + 1):
            c = Fraction(0)
            for i in range(j, min(k, 2 * j) + 1):
                c += (
                    Fraction((-1) ** (k + i - j))
                    * math.factorial(2 * k - 1 - i)
                    * i
                    / (
                        math.factorial(k - i)
                        * math.factorial(i - j)
                        * math.factorial(2 * j - i)
                        * 2 ** (2 * k - j)
                    )
                )
            coeffs.append((j, float(c)))
        return tuple(coeffs)

    def eval(self, x: float, lam: float, k: int = 0) -> float:
        if x < 0:
            raise ValueError("hitting transform is defined for x >= 0")
        if lam <= 0:
            raise ValueError("lam must be positive")
        if k < 0 or k > self.k_max:
            raise ValueError(f"derivative order {k} outside 0..{self.k_max}")
        nu = self.nu
        if x == 0.0:
            return 1.0 if k == 0 else 0.0
        z = x * math.sqrt(2.0 * lam)
        pref = 2.0 ** (nu + 1) / gamma_fn(-nu)
        if k == 0:
            return pref * z ** (-nu) * bessel_k(nu, z)
        total = 0.0
        for j, c in self._coeffs(k):
            total += c * z ** (j - nu) * bessel_k(nu + j, z)
        return pref / lam**k * total


class NumericalHitting(HittingTransform):
    """Fallback for user-supplied diffusions: f = phi(x)/phi(0), derivatives
    by Richardson-extrapolated central differences in lambda (k <= 6)."""

    k_max = 6

    def __init__(self, phi: Callable[[float, float], float]):
        self._phi = phi

    def eval(self, x: float, lam: float, k: int = 0) -> float:
        if k < 0 or k > self.k_max:
            raise ValueError(f"derivative order {k} outside 0..{self.k_max}")
        f = lambda la: self._phi(la, x) / self._phi(la, 0.0)
        if k == 0:
            return f(lam)
        h = lam * 10.0 ** (-10.0 / (k + 2))
        return _central_derivative(f, lam, k, h)


def _central_derivative(f: Callable[[float], float], x0: float, k: int, h: float) -> float:
    # central finite difference of order O(h^2) for the k-th derivative
    coeffs = {
        1: ([-1, 1], [-0.5, 0.5]),
        2: ([-1, 0, 1], [1.0, -2.0, 1.0]),
        3: ([-2, -1, 1, 2], [-0.5, 1.0, -1.0, 0.5]),
        4: ([-2, -1, 0, 1, 2], [1.0, -4.0, 6.0, -4.0, 1.0]),
        5: ([-3, -2, -1, 1, 2, 3], [-0.5, 2.0, -2.5, 2.5, -2.0, 0.5]),
        6: ([-3, -2, -1, 0, 1, 2, 3], [1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0]),
    }[k]
    offs, ws = coeffs
    return sum(w * f(x0 + o * h) for o, w in zip(offs, ws)) / h**k


# ---------------------------------------------------------------------------
# the diffusion descriptor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiffusionSpec:
    """Immutable descriptor of a regular one-dimensional diffusion on R.

    ``speed_density`` is the Lebesgue density of the speed measure away from
    atoms; ``speed_atoms`` lists (location, mass) pairs (sticky points).
    ``scale`` is normalized to scale(0) = 0.  ``psi``/``phi`` are the
    increasing/decreasing positive solutions, ``wronskian`` their constant.
    ``psi_dS0``/``phi_dS0`` give one-sided scale derivatives at 0
    (side in {'-', '+'}); they differ only at a sticky point.
    ``speed_power_at_0``: exponent p with speed density ~ |y|^p near 0,
    used to regularize quadrature when p < 0.
    """

    name: str
    params: dict
    speed_density: Callable[[float], float]
    speed_atoms: tuple
    scale: Callable[[float], float]
    psi: Callable[[float, float], float]
    phi: Callable[[float, float], float]
    wronskian: Callable[[float], float]
    hitting: HittingTransform
    self_similar: bool
    psi_dS0: Callable[[float, str], float]
    phi_dS0: Callable[[float, str], float]
    speed_power_at_0: float = 0.0
    tail_decay_rate: Optional[Callable[[float], float]] = None

    @property
    def speed_atom_at_0(self) -> float:
        for loc, mass in self.speed_atoms:
            if loc == 0.0:
                return mass
        return 0.0

    def __repr__(self) -> str:  # params in stable order for reports
        ps = ", ".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"DiffusionSpec({self.name}: {ps})"


def _check_range(value: float, lo: float, hi: float, name: str) -> float:
    value = float(value)
    if not (lo < value < hi):
        raise ValueError(f"{name} must lie in ({lo:g}, {hi:g}), got {value:g}")
    return value


def _check_positive(value: float, name: str) -> float:
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value:g}")
    return value


# -- skew two-sided Bessel ---------------------------------------------------

def _bessel_psi_hat(nu: float, lam: float, x: float) -> float:
    # increasing solution of the reflected one-sided process, x >= 0
    if x == 0.0:
        return (math.sqrt(2.0 * lam) / 2.0) ** nu / gamma_fn(1.0 + nu)
    z = x * math.sqrt(2.0 * lam)
    return x ** (-nu) * bessel_i(nu, z)


def _bessel_phi_hat(nu: float, lam: float, x: float) -> float:
    if x == 0.0:
        return (math.sqrt(2.0 * lam) / 2.0) ** nu * gamma_fn(-nu) / 2.0
    z = x * math.sqrt(2.0 * lam)
    return x ** (-nu) * bessel_k(nu, z)


def make_skew_bessel(nu: float, beta: float) -> DiffusionSpec:
    """Skew two-sided Bessel process, nu in (-1, 0), skewness beta in (0, 1)."""
    nu = _check_range(nu, -1.0, 0.0, "nu")
    beta = _check_range(beta, 0.0, 1.0, "beta")
    sin_term = math.sin(-math.pi * nu)

    def speed_density(y: float) -> float:
        if y > 0:
            return 4.0 * beta * y ** (2 * nu + 1)
        if y < 0:
            return 4.0 * (1.0 - beta) * abs(y) ** (2 * nu + 1)
        return 0.0

    def scale(x: float) -> float:
        if x >= 0:
            return -(x ** (-2 * nu)) / (4.0 * beta * nu)
        return abs(x) ** (-2 * nu) / (4.0 * (1.0 - beta) * nu)

    def psi(lam: float, x: float) -> float:
        if x >= 0:
            return (math.pi / (2.0 * beta * sin_term)) * _bessel_psi_hat(nu, lam, x) - (
                (1.0 - beta) / beta
            ) * _bessel_phi_hat(nu, lam, x)
        return _bessel_phi_hat(nu, lam, -x)

    def phi(lam: float, x: float) -> float:
        if x >= 0:
            return _bessel_phi_hat(nu, lam, x)
        return (math.pi / (2.0 * (1.0 - beta) * sin_term)) * _bessel_psi_hat(nu, lam, -x) - (
            beta / (1.0 - beta)
        ) * _bessel_phi_hat(nu, lam, -x)

    def wronskian(lam: float) -> float:
        return math.pi / sin_term

    def psi_dS0(lam: float, side: str = "-") -> float:
        # continuous across 0 (no sticky point)
        return 2.0 * (1.0 - beta) * gamma_fn(1.0 + nu) * (2.0 / math.sqrt(2.0 * lam)) ** nu

    def phi_dS0(lam: float, side: str = "-") -> float:
        return -2.0 * beta * gamma_fn(1.0 + nu) * (2.0 / math.sqrt(2.0 * lam)) ** nu

    return DiffusionSpec(
        name="skew-bessel",
        params={"nu": nu, "beta": beta},
        speed_density=speed_density,
        speed_atoms=(),
        scale=scale,
        psi=psi,
        phi=phi,
        wronskian=wronskian,
        hitting=BesselHitting(nu),
        self_similar=True,
        psi_dS0=psi_dS0,
        phi_dS0=phi_dS0,
        speed_power_at_0=2 * nu + 1,
        tail_decay_rate=lambda lam: math.sqrt(2.0 * lam),
    )


# -- skew Brownian motion ----------------------------------------------------

def make_skew_bm(beta: float) -> DiffusionSpec:
    """Skew Brownian motion: unit volatility, excursion signs Bernoulli(beta)."""
    beta = _check_range(beta, 0.0, 1.0, "beta")

    def speed_density(y: float) -> float:
        return 4.0 * beta if y > 0 else 4.0 * (1.0 - beta)

    def scale(x: float) -> float:
        return x / (2.0 * beta) if x >= 0 else x / (2.0 * (1.0 - beta))

    def psi(lam: float, x: float) -> float:
        s = math.sqrt(2.0 * lam)
        if x >= 0:
            return math.exp(x * s) + (1.0 - 2.0 * beta) / beta * math.sinh(x * s)
        return math.exp(x * s)

    def phi(lam: float, x: float) -> float:
        s = math.sqrt(2.0 * lam)
        if x >= 0:
            return math.exp(-x * s)
        return math.exp(-x * s) + (1.0 - 2.0 * beta) / (1.0 - beta) * math.sinh(x * s)

    return DiffusionSpec(
        name="skew-bm",
        params={"beta": beta},
        speed_density=speed_density,
        speed_atoms=(),
        scale=scale,
        psi=psi,
        phi=phi,
        wronskian=lambda lam: 2.0 * math.sqrt(2.0 * lam),
        hitting=ExponentialHitting(1.0),
        self_similar=True,
        psi_dS0=lambda lam, side="-": 2.0 * (1.0 - beta) * math.sqrt(2.0 * lam),
        phi_dS0=lambda lam, side="-": -2.0 * beta * math.sqrt(2.0 * lam),
        speed_power_at_0=0.0,
        tail_decay_rate=lambda lam: math.sqrt(2.0 * lam),
    )


# -- oscillating Brownian motion ----------------------------------------------

def make_oscillating_bm(sigma_plus: float, sigma_minus: float) -> DiffusionSpec:
    """Brownian motion with volatility sigma_plus above 0 and sigma_minus below."""
    sp = _check_positive(sigma_plus, "sigma_plus")
    sm = _check_positive(sigma_minus, "sigma_minus")

    def speed_density(y: float) -> float:
        return 2.0 / sp**2 if y > 0 else 2.0 / sm**2

    def psi(lam: float, x: float) -> float:
        s = math.sqrt(2.0 * lam)
        if x >= 0:
            return math.cosh(x * s / sp) + (sp / sm) * math.sinh(x * s / sp)
        return math.exp(x * s / sm)

    def phi(lam: float, x: float) -> float:
        s = math.sqrt(2.0 * lam)
        if x >= 0:
            return math.exp(-x * s / sp)
        return math.cosh(x * s / sm) - (sm / sp) * math.sinh(x * s / sm)

    return DiffusionSpec(
        name="oscillating-bm",
        params={"sigma_plus": sp, "sigma_minus": sm},
        speed_density=speed_density,
        speed_atoms=(),
        scale=lambda x: x,
        psi=psi,
        phi=phi,
        wronskian=lambda lam: math.sqrt(2.0 * lam) * (1.0 / sp + 1.0 / sm),
        hitting=ExponentialHitting(1.0 / sp),
        self_similar=True,
        psi_dS0=lambda lam, side="-": math.sqrt(2.0 * lam) / sm,
        phi_dS0=lambda lam, side="-": -math.sqrt(2.0 * lam) / sp,
        speed_power_at_0=0.0,
        tail_decay_rate=lambda lam: math.sqrt(2.0 * lam) / sp,
    )


# -- sticky Brownian motion ----------------------------------------------------

def make_sticky_bm(gamma: float) -> DiffusionSpec:
    """Brownian motion sticky at 0; the speed measure carries an atom 2*gamma."""
    gamma = _check_positive(gamma, "gamma")

    def psi(lam: float, x: float) -> float:
        s = math.sqrt(2.0 * lam)
        if x >= 0:
            return math.exp(x * s) + gamma * s * math.sinh(x * s)
        return math.exp(x * s)

    def phi(lam: float, x: float) -> float:
        s = math.sqrt(2.0 * lam)
        if x >= 0:
            return math.exp(-x * s)
        return math.exp(-x * s) - gamma * s * math.sinh(x * s)

    def psi_dS0(lam: float, side: str = "-") -> float:
        s = math.sqrt(2.0 * lam)
        # right scale derivative picks up the atom: psi^+ - psi^- = 2 lam gamma
        return s if side == "-" else s + 2.0 * lam * gamma

    def phi_dS0(lam: float, side: str = "-") -> float:
        s = math.sqrt(2.0 * lam)
        return -s - 2.0 * lam * gamma if side == "-" else -s

    return DiffusionSpec(
        name="sticky-bm",
        params={"gamma": gamma},
        speed_density=lambda y: 2.0,
        speed_atoms=((0.0, 2.0 * gamma),),
        scale=lambda x: x,
        psi=psi,
        phi=phi,
        wronskian=lambda lam: 2.0 * math.sqrt(2.0 * lam) + 2.0 * lam * gamma,
        hitting=ExponentialHitting(1.0),
        self_similar=False,
        psi_dS0=psi_dS0,
        phi_dS0=phi_dS0,
        speed_power_at_0=0.0,
        tail_decay_rate=lambda lam: math.sqrt(2.0 * lam),
    )


# -- user-supplied -------------------------------------------------------------

def make_custom(
    name: str,
    speed_density: Callable[[float], float],
    scale: Callable[[float], float],
    psi: Callable[[float, float], float],
    phi: Callable[[float, float], float],
    wronskian: Callable[[float], float],
    speed_atoms: tuple = (),
    hitting: Optional[HittingTransform] = None,
    self_similar: bool = False,
    params: Optional[dict] = None,
    speed_power_at_0: float = 0.0,
    certified_conservative: bool = False,
) -> DiffusionSpec:
    """Wrap a user-supplied diffusion.

    The generalized ODE is not solved here: psi, phi and the Wronskian must
    be supplied.  Scale derivatives at 0 fall back to Richardson-extrapolated
    one-sided finite differences; the hitting transform defaults to
    phi(x)/phi(0) with numerical lambda-derivatives.  The caller certifies
    boundary classification (conservative process) via
    ``certified_conservative=True``.
    """
    if not certified_conservative:
        raise ValueError(
            "user-supplied diffusions must be certified conservative "
            "(pass certified_conservative=True)"
        )
    if scale(0.0) != 0.0:
        raise ValueError("scale function must satisfy scale(0) = 0")

    def _one_sided_dS(f: Callable[[float], float], side: str) -> float:
        sgn = 1.0 if side == "+" else -1.0
        vals = []
        for h in (1e-4, 5e-5, 2.5e-5):
            x1, x2 = sgn * h, sgn * 2 * h
            d1 = (f(x1) - f(0.0)) / (scale(x1) - 0.0)
            d2 = (f(x2) - f(0.0)) / (scale(x2) - 0.0)
            vals.append(2 * d1 - d2)  # first-order Richardson
        return vals[-1]

    def psi_dS0(lam: float, side: str = "-") -> float:
        return _one_sided_dS(lambda x: psi(lam, x), side)

    def phi_dS0(lam: float, side: str = "-") -> float:
        return _one_sided_dS(lambda x: phi(lam, x), side)

    return DiffusionSpec(
        name=name,
        params=dict(params or {}),
        speed_density=speed_density,
        speed_atoms=tuple(speed_atoms),
        scale=scale,
        psi=psi,
        phi=phi,
        wronskian=wronskian,
        hitting=hitting if hitting is not None else NumericalHitting(phi),
        self_similar=self_similar,
        psi_dS0=psi_dS0,
        phi_dS0=phi_dS0,
        speed_power_at_0=speed_power_at_0,
    )


_FACTORIES = {
    "bessel": lambda p: make_skew_bessel(p["nu"], p["beta"]),
    "skew-bessel": lambda p: make_skew_bessel(p["nu"], p["beta"]),
    "skew-bm": lambda p: make_skew_bm(p["beta"]),
    "bm": lambda p: make_skew_bm(0.5),
    "oscillating": lambda p: make_oscillating_bm(p["sigma_plus"], p["sigma_minus"]),
    "sticky": lambda p: make_sticky_bm(p["gamma"]),
}


def spec_from_params(name: str, params: dict) -> DiffusionSpec:
    """Build a built-in spec from a flat parameter mapping (config documents)."""
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ValueError(
            f"unknown diffusion {name!r}; expected one of {sorted(_FACTORIES)}"
        ) from None
    try:
        return factory(params)
    except KeyError as exc:
        raise ValueError(f"diffusion {name!r} missing parameter {exc.args[0]!r}") from None


# ---------------------------------------------------------------------------
# kernel evaluation and speed-measure quadrature
# ---------------------------------------------------------------------------

def green_kernel(spec: DiffusionSpec, lam: float, x: float, y: float) -> float:
    """Green (resolvent) kernel G_lam(x, y) = psi(x^y) phi(xvy) / w_lam."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    lo, hi = (x, y) if x <= y else (y, x)
    return spec.psi(lam, lo) * spec.phi(lam, hi) / spec.wronskian(lam)


def hitting_transform_deriv(spec: DiffusionSpec, x: float, lam: float, k: int = 0) -> float:
    """k-th lambda-derivative of E_x(e^{-lam H_0}) for x >= 0."""
    return spec.hitting.eval(x, lam, k)


def scale_derivative_fd(
    spec: DiffusionSpec, f: Callable[[float], float], x: float, h: float = 1e-6
) -> float:
    """Central finite-difference derivative of f with respect to the scale."""
    return (f(x + h) - f(x - h)) / (spec.scale(x + h) - spec.scale(x - h))


def _green0_integral_half(
    spec: DiffusionSpec,
    lam: float,
    g: Callable[[float], float],
    positive_side: bool,
    epsabs: float,
    epsrel: float,
) -> tuple[float, float]:
    """Integral of G_lam(0, y) g(y) over one open half-line against the
    continuous part of the speed measure.  Returns (value, error estimate)."""
    w = spec.wronskian(lam)
    psi0 = spec.psi(lam, 0.0)
    phi0 = spec.phi(lam, 0.0)

    if positive_side:
        def fy(y: float) -> float:
            return psi0 * spec.phi(lam, y) / w * g(y) * spec.speed_density(y)
    else:
        def fy(y: float) -> float:
            return spec.psi(lam, -y) * phi0 / w * g(-y) * spec.speed_density(-y)

    p = spec.speed_power_at_0
    total = 0.0
    err = 0.0
    if p < 0.0:
        # regularize the |y|^p endpoint with y = u^(1/(1+p)) on (0, 1)
        a = 1.0 / (1.0 + p)
        v1, e1 = quad(
            lambda u: fy(u**a) * a * u ** (a - 1.0),
            0.0, 1.0, epsabs=epsabs, epsrel=epsrel, limit=200,
        )
    else:
        v1, e1 = quad(fy, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel, limit=200)
    total += v1
    err += e1
    v2, e2 = quad(fy, 1.0, np.inf, epsabs=epsabs, epsrel=epsrel, limit=200)
    total += v2
    err += e2
    return total, err


def integrate_green_m(
    spec: DiffusionSpec,
    lam: float,
    g: Optional[Callable[[float], float]] = None,
    side: str = "plus",
    include_atom_at_zero: bool = True,
    epsabs: float = 1e-13,
    epsrel: float = 1e-12,
    max_error: float = 1e-8,
) -> float:
    """Quadrature of  integral G_lam(0, y) g(y) m(dy)  over a half-line.

    ``side``: 'plus' integrates over [0, inf) (atoms at 0 included unless
    ``include_atom_at_zero`` is False, which gives the open half-line used by
    the strictly-positive occupation functional), 'minus' over (-inf, 0),
    'whole' over R.  Atom contributions are added pointwise.  Raises
    :class:`QuadratureError` if the error estimate exceeds ``max_error``
    relative to the result.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if side not in ("plus", "minus", "whole"):
        raise ValueError("side must be 'plus', 'minus' or 'whole'")
    if g is None:
        g = lambda y: 1.0

    total = 0.0
    err = 0.0
    if side in ("plus", "whole"):
        v, e = _green0_integral_half(spec, lam, g, True, epsabs, epsrel)
        total += v
        err += e
    if side in ("minus", "whole"):
        v, e = _green0_integral_half(spec, lam, g, False, epsabs, epsrel)
        total += v
        err += e

    for loc, mass in spec.speed_atoms:
        in_side = (
            side == "whole"
            or (side == "plus" and (loc > 0 or (loc == 0 and include_atom_at_zero)))
            or (side == "minus" and loc < 0)
        )
        if in_side:
            total += mass * green_kernel(spec, lam, 0.0, loc) * g(loc)

    if err > max_error * max(1.0, abs(total)):
        raise QuadratureError(
            f"speed-measure quadrature did not converge for {spec.name} at lam={lam:g}",
            achieved=err,
        )
    return total


def resolvent_mass(spec: DiffusionSpec, lam: float, side: str = "plus", **kw) -> float:
    """lam * integral of G_lam(0, y) m(dy); equals 1 over the whole space for
    a conservative diffusion, and P_0(X_T in side) at an exponential time."""
    return lam * integrate_green_m(spec, lam, side=side, **kw)
