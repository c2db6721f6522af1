"""Path-level simulators producing occupation-time samples.

Schemes (all lattice/chain approximations with documented O(sqrt(h)) bias):

* ``skew_walk`` -- Harrison--Shepp-type random walk with steps +-sqrt(h);
  from 0 the excursion side is chosen with probability beta.  Internally
  every walk of this family (standard/skew/oscillating BM, Brownian spider)
  runs through one kernel parameterized by ray probabilities: from 0 a ray
  is drawn from p, away from 0 the magnitude performs a fair walk.
* ``chain_approx`` -- birth-death chain in natural scale/speed form for the
  skew two-sided Bessel family, on a grid geometrically refined near 0.
* ``sticky_walk`` -- lattice walk with spatial step delta and time step
  delta^2; at 0 the walk holds a geometric number of slots with mean
  1 + gamma/delta, matching the speed-measure atom 2*gamma.

Occupation accrual uses the excursion-sign (segment) convention: the time
slot between consecutive lattice states belongs to the side the excursion
is on, so a slot touching 0 at one end is billed to the adjoining
excursion.  For the occupation of [0, infinity) this removes the leading
local-time bias of naive state counting (states *at* 0 carry no Lebesgue
time in the continuum unless the point is sticky, in which case holding
time at 0 is tracked separately as ``zero_time``).

Reproducibility: every path derives its own counter-based generator from
(seed, absolute path index) via SplitMix64-seeded xorshift64*, so results
are bit-identical for a given config regardless of thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
from numba import njit, prange

from .diffusions import DiffusionSpec

__all__ = [
    "SimConfig",
    "OccupationSample",
    "SampleSet",
    "simulate",
    "simulate_skew_bm",
    "simulate_bessel",
    "simulate_oscillating",
    "simulate_sticky",
    "simulate_spider",
    "estimate_moments",
    "set_simulation_threads",
]

_SCHEMES = ("auto", "skew_walk", "chain_approx", "sticky_walk")


def set_simulation_threads(workers: int) -> None:
    """Limit the number of threads the simulation kernels may use."""
    import numba

    workers = max(1, int(workers))
    numba.set_num_threads(min(workers, numba.config.NUMBA_NUM_THREADS))


@dataclass(frozen=True)
class SimConfig:
    """Simulation request: diffusion name + params, horizon, resolution, seed.

    ``step`` is the time step h of the walk schemes (spatial step sqrt(h));
    for the Bessel chain it is the coarse grid spacing away from 0.
    """

    diffusion: str
    params: dict
    horizon: float
    step: float
    paths: int
    seed: int
    scheme: str = "auto"

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if not 0 < self.step <= self.horizon:
            raise ValueError("step must satisfy 0 < step <= horizon")
        if self.paths < 1:
            raise ValueError("paths must be >= 1")
        if self.scheme not in _SCHEMES:
            raise ValueError(f"scheme must be one of {_SCHEMES}")


@dataclass(frozen=True)
class OccupationSample:
    """Occupation statistics of a single simulated path up to the horizon."""

    a_t: float
    b_t: float
    zero_time: float
    terminal: float


@dataclass
class SampleSet:
    """Column-wise sample arrays with the generating config attached."""

    config: SimConfig
    a_t: np.ndarray
    b_t: np.ndarray
    zero_time: np.ndarray
    terminal: np.ndarray
    scheme_note: str = ""

    def __len__(self) -> int:
        return len(self.a_t)

    def samples(self) -> Iterator[OccupationSample]:
        for a, b, z, x in zip(self.a_t, self.b_t, self.zero_time, self.terminal):
            yield OccupationSample(float(a), float(b), float(z), float(x))

    def a_fraction(self) -> np.ndarray:
        return self.a_t / self.config.horizon


# ---------------------------------------------------------------------------
# per-path counter-based RNG (SplitMix64 seeding, xorshift64* stream)
# ---------------------------------------------------------------------------

_U64 = np.uint64
_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(inline="always", cache=True)
def _splitmix64(z):
    z = (z + _U64(0x9E3779B97F4A7C15)) & _MASK
    z = ((z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)) & _MASK
    z = ((z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)) & _MASK
    return z ^ (z >> _U64(31))


@njit(inline="always", cache=True)
def _path_state(seed, idx):
    s = _splitmix64(_U64(seed) ^ _splitmix64(_U64(idx) + _U64(0x1234567)))
    if s == _U64(0):
        s = _U64(0x106689D45497FDB5)
    return s


@njit(inline="always", cache=True)
def _next_u64(state):
    state ^= state >> _U64(12)
    state ^= (state << _U64(25)) & _MASK
    state ^= state >> _U64(27)
    return state, (state * _U64(0x2545F4914F6CDD1D)) & _MASK


_TO_UNIT = 1.0 / 18446744073709551616.0  # 2^-64


@njit(inline="always", cache=True)
def _popcount64(x):
    x = x - ((x >> _U64(1)) & _U64(0x5555555555555555))
    x = (x & _U64(0x3333333333333333)) + ((x >> _U64(2)) & _U64(0x3333333333333333))
    x = (x + (x >> _U64(4))) & _U64(0x0F0F0F0F0F0F0F0F)
    return ((x * _U64(0x0101010101010101)) & _MASK) >> _U64(56)


# ---------------------------------------------------------------------------
# ray walk: skew/oscillating BM and the Brownian spider in one kernel
# ---------------------------------------------------------------------------

@njit(parallel=True, cache=True)
def _ray_walk_kernel(n_paths, n_steps, cum_p, in_set, seed):
    """Reflected fair walk of the magnitude; from 0 a ray is drawn from the
    cumulative distribution cum_p.  Counts time slots whose excursion lies in
    the queried ray set (segment rule: a slot touching 0 belongs to the
    adjoining excursion).  More than 64 units away from 0 the next 64 fair
    steps cannot reach it, so they are consumed from one uint64 draw at once.
    Returns (slots in set, terminal magnitude, terminal ray index)."""
    count = np.zeros(n_paths, dtype=np.int64)
    term_mag = np.zeros(n_paths, dtype=np.int64)
    term_ray = np.zeros(n_paths, dtype=np.int32)
    n_rays = cum_p.shape[0]
    for p in prange(n_paths):
        state = _path_state(seed, p)
        mag = 0
        ray = 0
        cur_in = False
        pos = 0
        exc_start = 0
        pool = _U64(0)
        nbits = 0
        k = 0
        while k < n_steps:
            if mag == 0:
                state, u64 = _next_u64(state)
                u = u64 * _TO_UNIT
                ray = n_rays - 1
                for j in range(n_rays - 1):
                    if u < cum_p[j]:
                        ray = j
                        break
                cur_in = in_set[ray]
                mag = 1
                exc_start = k
                k += 1
            elif mag > 64 and k + 64 <= n_steps:
                state, u64 = _next_u64(state)
                mag += 2 * int(_popcount64(u64)) - 64
                k += 64
            else:
                if nbits == 0:
                    state, pool = _next_u64(state)
                    nbits = 64
                mag += 2 * int(pool & _U64(1)) - 1
                pool >>= _U64(1)
                nbits -= 1
                k += 1
                if mag == 0 and cur_in:
                    pos += k - exc_start
        if mag > 0 and cur_in:
            pos += n_steps - exc_start
        count[p] = pos
        term_mag[p] = mag
        term_ray[p] = int(ray)
    return count, term_mag, term_ray


def _run_ray_walk(cfg: SimConfig, probs, in_set) -> tuple:
    n_steps = max(1, int(round(cfg.horizon / cfg.step)))
    h = cfg.horizon / n_steps
    cum = np.cumsum(np.asarray(probs, dtype=np.float64))
    cum[-1] = 1.0
    flags = np.asarray(in_set, dtype=np.bool_)
    count, term_mag, term_ray = _ray_walk_kernel(
        cfg.paths, n_steps, cum, flags, np.uint64(cfg.seed & (2**64 - 1))
    )
    return count.astype(np.float64) * h, term_mag, term_ray, h


def simulate_skew_bm(cfg: SimConfig) -> SampleSet:
    """Skew (or standard) Brownian motion by the skew random walk."""
    beta = float(cfg.params.get("beta", 0.5))
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    if cfg.scheme not in ("auto", "skew_walk"):
        raise ValueError(f"scheme {cfg.scheme!r} not available for skew-bm")
    a, term_mag, term_ray, h = _run_ray_walk(cfg, [beta, 1.0 - beta], [True, False])
    sign = np.where(term_ray == 0, 1.0, -1.0)
    terminal = sign * term_mag.astype(np.float64) * math.sqrt(h)
    return SampleSet(
        config=cfg, a_t=a, b_t=a.copy(), zero_time=np.zeros_like(a),
        terminal=terminal,
        scheme_note=f"skew_walk h={h:g} (O(sqrt(h)) occupation bias)",
    )


def simulate_oscillating(cfg: SimConfig) -> SampleSet:
    """Oscillating Brownian motion.

    The lattice walk in natural scale is the skew walk at
    beta = sigma_minus/(sigma_plus + sigma_minus); mapping each side by its
    volatility turns it into the oscillating-BM lattice walk (the occupation
    times are invariant under the increasing map, the terminal point is
    mapped).
    """
    sp = float(cfg.params["sigma_plus"])
    sm = float(cfg.params["sigma_minus"])
    if sp <= 0 or sm <= 0:
        raise ValueError("volatilities must be positive")
    if cfg.scheme not in ("auto", "skew_walk"):
        raise ValueError(f"scheme {cfg.scheme!r} not available for oscillating-bm")
    beta = sm / (sp + sm)
    a, term_mag, term_ray, h = _run_ray_walk(cfg, [beta, 1.0 - beta], [True, False])
    sign = np.where(term_ray == 0, 1.0, -1.0)
    vol = np.where(term_ray == 0, sp, sm)
    terminal = sign * vol * term_mag.astype(np.float64) * math.sqrt(h)
    return SampleSet(
        config=cfg, a_t=a, b_t=a.copy(), zero_time=np.zeros_like(a),
        terminal=terminal,
        scheme_note=f"skew_walk beta={beta:g} h={h:g}, terminal scaled per side",
    )


def simulate_spider(cfg: SimConfig) -> SampleSet:
    """Brownian spider: reflected walk magnitude with ray labels drawn at 0.

    ``params['p']`` are ray probabilities, ``params['rays']`` the 1-indexed
    set whose occupation is accumulated.  ``terminal`` is the signed pair
    (ray, magnitude) encoded as magnitude for in-set rays and -magnitude
    otherwise is *not* meaningful on a general graph, so the magnitude is
    returned; the terminal ray index is in ``extra``-style note.
    """
    probs = [float(q) for q in cfg.params["p"]]
    if any(q < 0 for q in probs) or abs(sum(probs) - 1.0) > 1e-12:
        raise ValueError("ray probabilities must be nonnegative and sum to 1")
    rays = sorted(set(int(r) for r in cfg.params["rays"]))
    if not rays or rays[0] < 1 or rays[-1] > len(probs):
        raise ValueError(f"ray indices must lie in 1..{len(probs)}")
    if cfg.scheme not in ("auto", "skew_walk"):
        raise ValueError(f"scheme {cfg.scheme!r} not available for spider")
    in_set = [(i + 1) in rays for i in range(len(probs))]
    a, term_mag, term_ray, h = _run_ray_walk(cfg, probs, in_set)
    return SampleSet(
        config=cfg, a_t=a, b_t=a.copy(), zero_time=np.zeros_like(a),
        terminal=term_mag.astype(np.float64) * math.sqrt(h),
        scheme_note=f"spider magnitude walk h={h:g}; terminal = |X|",
    )


# ---------------------------------------------------------------------------
# sticky walk
# ---------------------------------------------------------------------------

@njit(parallel=True, cache=True)
def _sticky_walk_kernel(n_paths, total_slots, p_geo, seed):
    """Lattice walk with geometric holding at 0 (mean 1/p_geo slots); the
    excursions away from 0 are fair magnitude walks with a Bernoulli(1/2)
    side, batch-consumed 64 steps at a time when far from 0.
    Returns (slots above 0, slots at 0, terminal lattice position)."""
    b_slots = np.zeros(n_paths, dtype=np.int64)
    z_slots = np.zeros(n_paths, dtype=np.int64)
    term = np.zeros(n_paths, dtype=np.int64)
    for p in prange(n_paths):
        state = _path_state(seed, p)
        mag = 0
        positive = False
        used = 0
        bpos = 0
        zero = 0
        exc_start = 0
        pool = _U64(0)
        nbits = 0
        while used < total_slots:
            if mag == 0:
                # geometric holding (support >= 1): ceil(log(u)/log(1-p))
                state, u64 = _next_u64(state)
                u = (u64 + _U64(1)) * _TO_UNIT
                if p_geo >= 1.0:
                    g = 1
                else:
                    g = int(math.ceil(math.log(u) / math.log(1.0 - p_geo)))
                    if g < 1:
                        g = 1
                if used + g > total_slots:
                    g = total_slots - used
                zero += g
                used += g
                if used >= total_slots:
                    break
                if nbits == 0:
                    state, pool = _next_u64(state)
                    nbits = 64
                positive = (pool & _U64(1)) == _U64(1)
                pool >>= _U64(1)
                nbits -= 1
                mag = 1
                exc_start = used
            elif mag > 64 and used + 64 <= total_slots:
                state, u64 = _next_u64(state)
                mag += 2 * int(_popcount64(u64)) - 64
                used += 64
            else:
                if nbits == 0:
                    state, pool = _next_u64(state)
                    nbits = 64
                mag += 2 * int(pool & _U64(1)) - 1
                pool >>= _U64(1)
                nbits -= 1
                used += 1
                if mag == 0 and positive:
                    bpos += used - exc_start
        if mag > 0 and positive:
            bpos += total_slots - exc_start
        b_slots[p] = bpos
        z_slots[p] = zero
        term[p] = mag if positive else -mag
    return b_slots, z_slots, term


def simulate_sticky(cfg: SimConfig) -> SampleSet:
    """Sticky Brownian motion on a lattice with step delta = sqrt(step).

    Holding at 0 is geometric with mean 1 + gamma/delta slots, matching the
    speed-measure atom; B excludes, A includes that time.
    """
    gamma = float(cfg.params["gamma"])
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if cfg.scheme not in ("auto", "sticky_walk"):
        raise ValueError(f"scheme {cfg.scheme!r} not available for sticky-bm")
    n_slots = max(1, int(round(cfg.horizon / cfg.step)))
    slot = cfg.horizon / n_slots
    delta = math.sqrt(slot)
    if gamma > 0 and delta > gamma:
        # mean sticky holding below one slot: the atom is unresolved
        raise ValueError(
            f"step too coarse for gamma={gamma:g}: need sqrt(step) <= gamma, "
            f"got sqrt(step)={delta:g}"
        )
    p_geo = delta / (delta + gamma) if gamma > 0 else 1.0
    b_slots, z_slots, term = _sticky_walk_kernel(
        cfg.paths, n_slots, p_geo, np.uint64(cfg.seed & (2**64 - 1))
    )
    b = b_slots.astype(np.float64) * slot
    z = z_slots.astype(np.float64) * slot
    return SampleSet(
        config=cfg, a_t=b + z, b_t=b, zero_time=z,
        terminal=term.astype(np.float64) * delta,
        scheme_note=f"sticky_walk delta={delta:g}, geometric holding mean {1.0/p_geo:g} slots",
    )


# ---------------------------------------------------------------------------
# birth-death chain for the skew two-sided Bessel family
# ---------------------------------------------------------------------------

@njit(parallel=True, cache=True)
def _chain_kernel(n_paths, horizon, x, up_thr, mean_hold, use_mean, start_idx, seed):
    """Continuous-time birth-death chain: exponential holding with the given
    means, then a +-1 site move (up iff a uint64 draw is below up_thr[s]).
    Sites flagged in ``use_mean`` have holding times far below the horizon
    resolution; their sojourns are accrued deterministically at the mean,
    which spares one draw and a log per jump at no statistical cost.
    Accrues time on sites >= 0 (A) and > 0 (B)."""
    a_out = np.zeros(n_paths, dtype=np.float64)
    b_out = np.zeros(n_paths, dtype=np.float64)
    term = np.zeros(n_paths, dtype=np.float64)
    n_sites = x.shape[0]
    for p in prange(n_paths):
        state = _path_state(seed, p)
        s = start_idx
        t = 0.0
        a = 0.0
        b = 0.0
        moving = True
        while moving:
            if use_mean[s]:
                dt = mean_hold[s]
            else:
                state, u64 = _next_u64(state)
                u = (np.float64(u64 >> _U64(11)) + 0.5) * 1.1102230246251565e-16  # (0,1)
                dt = -math.log(u) * mean_hold[s]
            if t + dt >= horizon:
                dt = horizon - t
                moving = False
            t += dt
            if x[s] >= 0.0:
                a += dt
            if x[s] > 0.0:
                b += dt
            if moving:
                state, u64 = _next_u64(state)
                if u64 < up_thr[s]:
                    if s < n_sites - 1:
                        s += 1
                else:
                    if s > 0:
                        s -= 1
        a_out[p] = a
        b_out[p] = b
        term[p] = x[s]
    return a_out, b_out, term


def _bessel_grid(nu: float, beta: float, coarse: float, xmax: float, x1: float, rho: float):
    """Geometric grid near 0 growing to uniform spacing ``coarse``; mirrored.
    Returns site positions, up-probabilities and mean holding times."""
    pts = [x1]
    while pts[-1] < xmax:
        nxt = pts[-1] * rho
        if nxt - pts[-1] >= coarse:
            nxt = pts[-1] + coarse
        pts.append(nxt)
    pos = np.array(pts)
    x = np.concatenate([-pos[::-1], [0.0], pos])
    n = len(x)

    def scale(y: float) -> float:
        if y >= 0:
            return -(y ** (-2 * nu)) / (4.0 * beta * nu)
        return abs(y) ** (-2 * nu) / (4.0 * (1.0 - beta) * nu)

    def speed_primitive(y: float) -> float:
        # integral of the speed density from 0 to y (signed argument)
        if y >= 0:
            return 4.0 * beta * y ** (2 * nu + 2) / (2 * nu + 2)
        return -4.0 * (1.0 - beta) * abs(y) ** (2 * nu + 2) / (2 * nu + 2)

    S = np.array([scale(v) for v in x])
    # cell boundaries at arithmetic midpoints; outer cells get half-width
    bounds = np.empty(n + 1)
    bounds[1:-1] = 0.5 * (x[:-1] + x[1:])
    bounds[0] = x[0] - 0.5 * (x[1] - x[0])
    bounds[-1] = x[-1] + 0.5 * (x[-1] - x[-2])
    M = np.array([speed_primitive(bounds[i + 1]) - speed_primitive(bounds[i]) for i in range(n)])

    p_up = np.empty(n)
    mean_hold = np.empty(n)
    for i in range(n):
        inv_up = 1.0 / (S[i + 1] - S[i]) if i + 1 < n else 0.0
        inv_dn = 1.0 / (S[i] - S[i - 1]) if i > 0 else 0.0
        total = inv_up + inv_dn
        p_up[i] = inv_up / total
        mean_hold[i] = M[i] / total
    return x, p_up, mean_hold


def simulate_bessel(cfg: SimConfig) -> SampleSet:
    """Skew two-sided Bessel process by a birth-death chain in speed/scale
    form.  ``step`` is the coarse grid spacing; the grid refines
    geometrically near 0 where the scale function has a power-law slope."""
    nu = float(cfg.params["nu"])
    beta = float(cfg.params["beta"])
    if not -1 < nu < 0 or not 0 < beta < 1:
        raise ValueError("require nu in (-1,0) and beta in (0,1)")
    if cfg.scheme not in ("auto", "chain_approx"):
        raise ValueError(f"scheme {cfg.scheme!r} not available for skew-bessel")
    coarse = cfg.step
    # the innermost site controls the endpoint atoms of the occupation law:
    # paths miss the origin with probability ~ the first scale gap, so pick
    # x1 from a target gap kappa (S(x1) - S(0) = kappa on the positive side)
    kappa = float(cfg.params.get("grid_kappa", 1e-3))
    x1_default = (kappa * 4.0 * beta * (-nu)) ** (-1.0 / (2.0 * nu))
    x1 = float(cfg.params.get("grid_x1", min(max(x1_default, 1e-8), coarse / 4.0)))
    rho = float(cfg.params.get("grid_rho", 1.12))
    xmax = float(cfg.params.get("grid_xmax", 8.0 * math.sqrt(cfg.horizon)))
    x, p_up, mean_hold = _bessel_grid(nu, beta, coarse, xmax, x1, rho)
    start = int(np.argmin(np.abs(x)))
    up_thr = np.minimum(p_up * 2.0**64, 2.0**64 - 1).astype(np.uint64)
    use_mean = mean_hold < 1e-6 * cfg.horizon
    a, b, term = _chain_kernel(
        cfg.paths, cfg.horizon, x, up_thr, mean_hold, use_mean, start,
        np.uint64(cfg.seed & (2**64 - 1)),
    )
    return SampleSet(
        config=cfg, a_t=a, b_t=b, zero_time=a - b, terminal=term,
        scheme_note=(
            f"chain_approx sites={len(x)} x1={x1:g} rho={rho:g} coarse={coarse:g}"
        ),
    )


# ---------------------------------------------------------------------------
# dispatch and aggregation
# ---------------------------------------------------------------------------

_SIMULATORS = {
    "bm": simulate_skew_bm,
    "skew-bm": simulate_skew_bm,
    "oscillating": simulate_oscillating,
    "oscillating-bm": simulate_oscillating,
    "spider": simulate_spider,
    "bessel": simulate_bessel,
    "skew-bessel": simulate_bessel,
    "sticky": simulate_sticky,
    "sticky-bm": simulate_sticky,
}


def simulate(cfg: SimConfig, workers: Optional[int] = None) -> SampleSet:
    """Run the simulator matching ``cfg.diffusion``.

    ``workers`` bounds the kernel thread count (default: all available);
    results are independent of it.
    """
    if workers is not None:
        set_simulation_threads(workers)
    try:
        sim = _SIMULATORS[cfg.diffusion]
    except KeyError:
        raise ValueError(
            f"unknown diffusion {cfg.diffusion!r}; expected one of {sorted(set(_SIMULATORS))}"
        ) from None
    if cfg.diffusion == "bm" and "beta" not in cfg.params:
        cfg = SimConfig(
            diffusion="bm", params={**cfg.params, "beta": 0.5}, horizon=cfg.horizon,
            step=cfg.step, paths=cfg.paths, seed=cfg.seed, scheme=cfg.scheme,
        )
    return sim(cfg)


def simulate_spec(spec: DiffusionSpec, horizon: float, step: float, paths: int,
                  seed: int, workers: Optional[int] = None) -> SampleSet:
    """Convenience: simulate from a DiffusionSpec descriptor."""
    cfg = SimConfig(
        diffusion=spec.name, params=dict(spec.params), horizon=horizon,
        step=step, paths=paths, seed=seed,
    )
    return simulate(cfg, workers=workers)


def estimate_moments(samples: SampleSet, N: int, normalize: bool = True):
    """Sample moments of A_1 (A_t / t under the scaling convention) with
    jackknife standard errors.  Returns a MomentTable tagged monte_carlo."""
    from .moments import MomentTable

    N = int(N)
    frac = samples.a_fraction() if normalize else samples.a_t
    n = len(frac)
    values, ses = [], []
    for k in range(1, N + 1):
        xk = frac**k
        mean = float(xk.mean())
        if n > 1:
            # delete-1 jackknife of the mean (closed form)
            loo = (n * mean - xk) / (n - 1)
            se = math.sqrt((n - 1) / n * float(((loo - loo.mean()) ** 2).sum()))
        else:
            se = float("nan")
        values.append(mean)
        ses.append(se)
    return MomentTable(
        samples.config.diffusion,
        dict(samples.config.params),
        N,
        values,
        "monte_carlo",
        domain="time",
        exact=False,
        standard_errors=ses,
        extra={
            "paths": samples.config.paths,
            "seed": samples.config.seed,
            "step": samples.config.step,
            "horizon": samples.config.horizon,
            "scheme_note": samples.scheme_note,
            "normalized": normalize,
        },
    )
