"""Occupation-time moments: exact closed forms, recursions, and the generic
Laplace-domain recursion for arbitrary diffusion descriptors.

Conventions.  A_1 is the time in [0, infinity) up to time 1.  For
self-similar diffusions the tables hold E_0(A_1^n) directly; otherwise they
hold the normalized Laplace-domain functionals

    U_n(lam) = lam^(n+1) Ahat_0(lam; n) / n!,

where Ahat_0(lam; n) is the Laplace transform in t of E_0(A_t^n).  For
self-similar processes the two notions coincide for every lam.

Exact arithmetic: passing parameters as ``Fraction`` (or "p/q" strings)
yields exact rational tables; float parameters give float tables.  The
moments are polynomials in the parameters, so exactness is attainable.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .diffusions import DiffusionSpec, integrate_green_m
from .special import MAX_EXACT_ORDER, binomial_exact, gen_binomial, stirling1_unsigned, stirling2

Number = Union[int, float, Fraction]

__all__ = [
    "MomentTable",
    "DkCoefficients",
    "bm_moments",
    "skew_bm_moments",
    "bessel_moments_recursive",
    "bessel_moments_closed",
    "oscillating_moments",
    "spider_moments",
    "sticky_h",
    "sticky_tn",
    "sticky_bhat",
    "sticky_dk",
    "dk_quadrature",
    "generic_laplace_moments",
    "analytic_moments_for",
    "kac_raw_moment_mc_check",
    "hausdorff_completely_monotone",
    "as_number",
    "format_value",
]


def as_number(x) -> Number:
    """Accept ints, floats, Fractions and 'p/q' strings."""
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (int, float, Fraction)):
        return x
    raise TypeError(f"cannot interpret {x!r} as a number")


def _is_exact(*xs) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in xs)


def format_value(v: Number) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return str(v)
    return f"{v:.17g}"


def _check_order(N: int) -> int:
    N = int(N)
    if N < 1:
        raise ValueError("moment order must be at least 1")
    if N > MAX_EXACT_ORDER:
        raise ValueError(f"order cap exceeded: N={N} > {MAX_EXACT_ORDER}")
    return N


@dataclass
class MomentTable:
    """Sequence of occupation-time moments with provenance.

    ``values[n-1]`` is E_0(A_1^n) when ``domain == 'time'`` and U_n(lam)
    when ``domain == 'laplace'`` (non-self-similar diffusions; ``lam`` is
    then required).  ``method`` is one of recursion / closed_form /
    quadrature / monte_carlo / laplace_inversion.
    """

    diffusion: str
    params: dict
    max_order: int
    values: list
    method: str
    lam: Optional[float] = None
    domain: str = "time"
    exact: bool = False
    degenerate: bool = False
    standard_errors: Optional[list] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in (
            "recursion", "closed_form", "quadrature", "monte_carlo", "laplace_inversion",
        ):
            raise ValueError(f"unknown method {self.method!r}")
        if len(self.values) != self.max_order:
            raise ValueError("values length must equal max_order")

    def value(self, n: int) -> Number:
        if not 1 <= n <= self.max_order:
            raise IndexError(f"moment order {n} outside 1..{self.max_order}")
        return self.values[n - 1]

    def floats(self) -> list:
        return [float(v) for v in self.values]

    def rows(self) -> list[dict]:
        out = []
        for n, v in enumerate(self.values, start=1):
            row = {"n": n, "value": format_value(v), "method": self.method}
            if self.standard_errors is not None:
                row["standard_error"] = format_value(self.standard_errors[n - 1])
            for k, pv in sorted(self.params.items()):
                row[k] = format_value(pv) if isinstance(pv, (Fraction, float, int)) else str(pv)
            out.append(row)
        return out

    def to_json(self) -> dict:
        doc = {
            "diffusion": self.diffusion,
            "params": {k: format_value(v) if isinstance(v, (Fraction, int, float)) else v
                       for k, v in self.params.items()},
            "max_order": self.max_order,
            "method": self.method,
            "domain": self.domain,
            "exact": self.exact,
            "degenerate": self.degenerate,
            "values": [format_value(v) for v in self.values],
        }
        if self.lam is not None:
            doc["lambda"] = self.lam
        if self.standard_errors is not None:
            doc["standard_errors"] = [format_value(v) for v in self.standard_errors]
        return doc

    def to_csv(self, fp) -> None:
        rows = self.rows()
        writer = csv.DictWriter(fp, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()

    def to_json_string(self) -> str:
        return json.dumps(self.to_json(), indent=2)


@dataclass
class DkCoefficients:
    """Recursion coefficients D_k, k = 1..len(values); for self-similar
    diffusions they do not depend on lambda."""

    values: list
    lambda_independent: bool
    lam: Optional[float] = None


# ---------------------------------------------------------------------------
# closed forms and recursions
# ---------------------------------------------------------------------------

def _skew_moment_poly(b: Number, n: int) -> Number:
    # sum_{k=0}^{n-1} C(n-1+k, k) b^(n-k) / 2^(n+k-1); exact for Fraction b
    if isinstance(b, (int, Fraction)):
        total = Fraction(0)
        bq = Fraction(b)
        for k in range(n):
            total += Fraction(binomial_exact(n - 1 + k, k), 2 ** (n + k - 1)) * bq ** (n - k)
        return total
    total = 0.0
    for k in range(n):
        total += binomial_exact(n - 1 + k, k) * b ** (n - k) / 2.0 ** (n + k - 1)
    return total


def bm_moments(N: int) -> MomentTable:
    """Arcsine moments of standard Brownian motion: E_0(A_1^n) = C(2n, n)/4^n."""
    N = _check_order(N)
    values = [Fraction(binomial_exact(2 * n, n), 4**n) for n in range(1, N + 1)]
    return MomentTable("bm", {}, N, values, "closed_form", exact=True)


def skew_bm_moments(beta, N: int) -> MomentTable:
    """Skew Brownian motion moments, polynomial in the skewness beta."""
    N = _check_order(N)
    beta = as_number(beta)
    if not 0 <= beta <= 1:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    if beta == 0 or beta == 1:
        const = Fraction(int(beta))
        return MomentTable(
            "skew-bm", {"beta": beta}, N, [const] * N, "closed_form",
            exact=True, degenerate=True,
        )
    values = [_skew_moment_poly(beta, n) for n in range(1, N + 1)]
    return MomentTable(
        "skew-bm", {"beta": beta}, N, values, "closed_form", exact=_is_exact(beta)
    )


def bessel_moments_recursive(nu, beta, N: int) -> MomentTable:
    """Skew two-sided Bessel moments by the one-step recursion

    E_0(A_1^n) = beta C(nu+n-1, n-1) - beta sum_{k=1}^{n-1} C(nu+k-1, k) E_0(A_1^{n-k}).
    """
    N = _check_order(N)
    nu = as_number(nu)
    beta = as_number(beta)
    if not -1 < nu < 0:
        raise ValueError(f"nu must lie in (-1, 0), got {nu}")
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    exact = _is_exact(nu, beta)
    if not exact:
        nu, beta = float(nu), float(beta)
    values: list = []
    for n in range(1, N + 1):
        total = beta * gen_binomial(nu + n - 1, n - 1)
        for k in range(1, n):
            total -= beta * gen_binomial(nu + k - 1, k) * values[n - k - 1]
        values.append(total)
    return MomentTable(
        "skew-bessel", {"nu": nu, "beta": beta}, N, values, "recursion", exact=exact
    )


def bessel_moments_closed(nu, beta, N: int) -> MomentTable:
    """Skew two-sided Bessel moments in explicit polynomial form:

    E_0(A_1^n) = sum_{k=0}^{n-1} sum_{j=0}^{k} ((-1)^j j!/(n-1)!)
                 s1(n, k+1) S2(k+1, j+1) nu^k beta^(j+1),

    with exact Stirling factors.  Independent of the recursion above; the
    two must agree, which the test suite enforces.
    """
    N = _check_order(N)
    nu = as_number(nu)
    beta = as_number(beta)
    if not -1 < nu < 0:
        raise ValueError(f"nu must lie in (-1, 0), got {nu}")
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    exact = _is_exact(nu, beta)
    if not exact:
        nu, beta = float(nu), float(beta)
    values: list = []
    for n in range(1, N + 1):
        fact = math.factorial(n - 1)
        total = Fraction(0) if exact else 0.0
        for k in range(n):
            s1 = stirling1_unsigned(n, k + 1)
            if s1 == 0:
                continue
            nuk = nu**k
            for j in range(k + 1):
                s2 = stirling2(k + 1, j + 1)
                if s2 == 0:
                    continue
                coef = (-1) ** j * math.factorial(j) * s1 * s2
                if exact:
                    total += Fraction(coef, fact) * nuk * beta ** (j + 1)
                else:
                    total += coef / fact * nuk * beta ** (j + 1)
        values.append(total)
    return MomentTable(
        "skew-bessel", {"nu": nu, "beta": beta}, N, values, "closed_form", exact=exact
    )


def oscillating_moments(sigma_plus, sigma_minus, N: int) -> MomentTable:
    """Oscillating Brownian motion: skew-BM moments at beta = s-/(s+ + s-)."""
    sigma_plus = as_number(sigma_plus)
    sigma_minus = as_number(sigma_minus)
    if sigma_plus <= 0 or sigma_minus <= 0:
        raise ValueError("volatilities must be positive")
    beta = (
        Fraction(sigma_minus) / (Fraction(sigma_plus) + Fraction(sigma_minus))
        if _is_exact(sigma_plus, sigma_minus)
        else float(sigma_minus) / (float(sigma_plus) + float(sigma_minus))
    )
    table = skew_bm_moments(beta, N)
    return MomentTable(
        "oscillating-bm",
        {"sigma_plus": sigma_plus, "sigma_minus": sigma_minus, "beta_effective": beta},
        table.max_order, table.values, "closed_form", exact=table.exact,
    )


def spider_moments(p: Sequence, rays: Sequence[int], N: int) -> MomentTable:
    """Occupation of a ray subset of a Brownian spider.

    ``p`` are ray-choice probabilities (1-indexed by ``rays``); the occupation
    time of the queried rays has skew-BM law with beta = sum of their
    probabilities.  rays = all gives the degenerate constant-1 table.
    """
    probs = [as_number(x) for x in p]
    if any(q < 0 for q in probs):
        raise ValueError("ray probabilities must be nonnegative")
    total = sum(Fraction(q) if _is_exact(q) else float(q) for q in probs)
    if abs(float(total) - 1.0) > 1e-12:
        raise ValueError(f"ray probabilities must sum to 1, got {float(total):g}")
    rays = sorted(set(int(r) for r in rays))
    if not rays:
        raise ValueError("rays must be a nonempty index set")
    if rays[0] < 1 or rays[-1] > len(probs):
        raise ValueError(f"ray indices must lie in 1..{len(probs)}")
    beta = sum(probs[r - 1] for r in rays)
    table = skew_bm_moments(beta, N)
    return MomentTable(
        "spider",
        {"p": [format_value(q) for q in probs], "rays": rays, "beta_effective": beta},
        table.max_order, table.values, "closed_form",
        exact=table.exact, degenerate=table.degenerate,
    )


# ---------------------------------------------------------------------------
# sticky Brownian motion (no scaling property; Laplace-domain quantities)
# ---------------------------------------------------------------------------

def sticky_h(gamma: float, lam: float) -> float:
    """H(lam) = 1 / (2 + gamma sqrt(2 lam)); the sticky analogue of beta."""
    if gamma < 0 or lam <= 0:
        raise ValueError("require gamma >= 0 and lam > 0")
    return 1.0 / (2.0 + gamma * math.sqrt(2.0 * lam))


def sticky_tn(n: int) -> Fraction:
    """T_n = C(2n, n) / (2^(2n) (2n - 1))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Fraction(binomial_exact(2 * n, n), 4**n * (2 * n - 1))


def sticky_bhat(gamma: float, lam: float, n: int) -> float:
    """Laplace transform of E_0(B_t^n) for sticky Brownian motion, where B_t
    is the time spent strictly above 0:

    Bhat_n(lam) = (n!/lam^(n+1)) sum_k C(n-1+k, k) H(lam)^(n-k) / 2^(n+k-1).
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if lam <= 0:
        raise ValueError("lam must be positive")
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    H = sticky_h(gamma, lam)
    return math.factorial(n) / lam ** (n + 1) * float(_skew_moment_poly(H, n))


def sticky_dk(gamma: float, lam: float, k: int, include_atom: bool = True) -> float:
    """Closed-form recursion coefficients for sticky Brownian motion.

    ``include_atom=True`` gives the coefficients of the occupation functional
    on [0, inf) (atom at the sticky point included), False those of the
    strictly-positive functional.  They differ only at k = 1, by
    -H(lam) gamma sqrt(2 lam).
    """
    if gamma <= 0 or lam <= 0:
        raise ValueError("require gamma > 0 and lam > 0")
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    H = sticky_h(gamma, lam)
    if k == 1:
        if include_atom:
            return -H / 2.0 * (1.0 + 2.0 * gamma * math.sqrt(2.0 * lam))
        return -H / 2.0
    return -H * float(sticky_tn(k))


# ---------------------------------------------------------------------------
# generic Laplace-domain recursion
# ---------------------------------------------------------------------------

def dk_quadrature(
    spec: DiffusionSpec,
    lam: float,
    k: int,
    include_atom_at_zero: bool = True,
    **quad_kw,
) -> float:
    """D_k(lam) = ((-lam)^k / (k-1)!) integral G_lam(0,y) f^(k-1)(y;lam) m(dy)
    over [0, inf), by adaptive quadrature against the speed measure."""
    if k < 1:
        raise ValueError("k must be >= 1")
    integral = integrate_green_m(
        spec,
        lam,
        g=lambda y: spec.hitting.eval(y, lam, k - 1),
        side="plus",
        include_atom_at_zero=include_atom_at_zero,
        **quad_kw,
    )
    return (-lam) ** k / math.factorial(k - 1) * integral


def generic_laplace_moments(
    spec: DiffusionSpec,
    lam: float,
    N: int,
    include_boundary_atom: bool = True,
    **quad_kw,
) -> MomentTable:
    """Normalized Laplace-domain moments U_n(lam) of the occupation time for
    any diffusion descriptor, by the first-moment quadrature plus recursion

        U_n = U_1 + sum_{k=1}^{n-1} (1 - U_{n-k}) D_k(lam).

    For self-similar diffusions U_n(lam) = E_0(A_1^n) for every lam and the
    table is labeled time-domain; otherwise it is labeled Laplace-domain at
    the stated lam.  ``include_boundary_atom=False`` computes the functional
    that excludes a speed-measure atom at 0 (time strictly above 0).
    The raw transforms Ahat_0(lam; n) = n! U_n / lam^(n+1) and the D_k values
    are attached in ``extra``.
    """
    N = _check_order(N)
    if lam <= 0:
        raise ValueError("lam must be positive")
    u1 = lam * integrate_green_m(
        spec, lam, side="plus", include_atom_at_zero=include_boundary_atom, **quad_kw
    )
    dks = [
        dk_quadrature(spec, lam, k, include_atom_at_zero=include_boundary_atom, **quad_kw)
        for k in range(1, N)
    ]
    u = [u1]
    for n in range(2, N + 1):
        u.append(u1 + sum((1.0 - u[n - k - 1]) * dks[k - 1] for k in range(1, n)))
    ahat = [math.factorial(n) / lam ** (n + 1) * u[n - 1] for n in range(1, N + 1)]
    return MomentTable(
        spec.name,
        dict(spec.params),
        N,
        u,
        "quadrature",
        lam=lam,
        domain="time" if spec.self_similar else "laplace",
        exact=False,
        extra={
            "ahat": ahat,
            "dk": DkCoefficients(dks, lambda_independent=spec.self_similar, lam=lam),
            "include_boundary_atom": include_boundary_atom,
        },
    )


def analytic_moments_for(spec: DiffusionSpec, N: int) -> MomentTable:
    """Exact/closed-form time-domain moment table for a self-similar built-in."""
    name = spec.name
    if name == "bm":
        return bm_moments(N)
    if name == "skew-bm":
        return skew_bm_moments(spec.params["beta"], N)
    if name == "skew-bessel":
        return bessel_moments_closed(spec.params["nu"], spec.params["beta"], N)
    if name == "oscillating-bm":
        return oscillating_moments(spec.params["sigma_plus"], spec.params["sigma_minus"], N)
    raise ValueError(f"no closed-form time-domain moments for {name!r}")


@dataclass
class KacMcComparison:
    """Monte Carlo check of a raw moment E_0(A_t^n) against t^n E_0(A_1^n)."""

    diffusion: str
    t: float
    n: int
    paths: int
    mc_estimate: float
    mc_standard_error: float
    analytic: float
    z_score: float

    @property
    def within(self) -> float:
        return abs(self.z_score)


def kac_raw_moment_mc_check(
    spec: DiffusionSpec,
    t: float,
    n: int,
    paths: int,
    seed: int = 0,
    step: Optional[float] = None,
    workers: int = 1,
) -> KacMcComparison:
    """Estimate E_0(A_t^n) by path simulation and compare with the scaling
    prediction t^n E_0(A_1^n) (self-similar diffusions only)."""
    from . import montecarlo  # deferred: montecarlo pulls in numba

    if not spec.self_similar:
        raise ValueError("raw-moment scaling check requires a self-similar diffusion")
    cfg = montecarlo.SimConfig(
        diffusion=spec.name,
        params=dict(spec.params),
        horizon=float(t),
        step=step if step is not None else float(t) / 20000.0,
        paths=int(paths),
        seed=int(seed),
    )
    samples = montecarlo.simulate(cfg, workers=workers)
    a_pow = samples.a_t**n
    est = float(a_pow.mean())
    se = float(a_pow.std(ddof=1) / math.sqrt(len(a_pow)))
    analytic = float(t) ** n * float(analytic_moments_for(spec, n).value(n))
    z = (est - analytic) / se if se > 0 else math.inf
    return KacMcComparison(
        diffusion=spec.name, t=float(t), n=int(n), paths=int(paths),
        mc_estimate=est, mc_standard_error=se, analytic=analytic, z_score=z,
    )


def hausdorff_completely_monotone(values: Sequence, tol: float = 1e-12) -> bool:
    """Hausdorff moment condition for the augmented sequence 1, v_1, ..., v_N:
    all alternating forward differences (-1)^k Delta^k v_j are nonnegative."""
    exact = all(isinstance(v, (int, Fraction)) for v in values)
    seq = [Fraction(1) if exact else 1.0] + list(values)
    N = len(seq)
    for k in range(N):
        for j in range(N - k):
            diff = sum(
                (-1) ** i * binomial_exact(k, i) * seq[j + i] for i in range(k + 1)
            )
            signed = (-1) ** k * diff
            if exact:
                if signed < 0:
                    return False
            elif float(signed) < -tol:
                return False
    return True
